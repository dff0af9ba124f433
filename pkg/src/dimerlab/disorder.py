"""Seed-reproducible sampling of dimerized Bernoulli potentials.

The potential lives on the box Gamma_L = {-L, ..., L-1} and satisfies the
dimer constraint V(2x) = V(2x+1): sites are tied together in pairs that
start at even absolute coordinates. Each dimer carries an independent
Bernoulli(p_plus) value in {0, 1}.

Sampling is counter-based: the value of the dimer covering sites
(2k, 2k+1) is a pure function of (master_seed, sample_index, k). This
makes configurations bit-reproducible, makes distinct sample indices
independent streams, and lets a larger box extend a smaller one without
shifting any dimer value (needed for finite-vs-padded comparisons).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DisorderParams",
    "PotentialConfig",
    "sample_config",
    "dimer_phase_convention",
    "dimer_values",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer; bijective on 64-bit integers."""
    with np.errstate(over="ignore"):
        z = (x + _GOLDEN).astype(np.uint64) if isinstance(x, np.ndarray) else np.uint64(x + _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


@dataclass(frozen=True)
class DisorderParams:
    """Model parameters: disorder strength v, Bernoulli weight p_plus, seed."""

    v: float
    p_plus: float
    master_seed: int

    def __post_init__(self):
        if not 0.0 <= self.v < 2.0:
            raise ValueError(f"disorder strength v must lie in [0, 2), got {self.v}")
        if not 0.0 <= self.p_plus <= 1.0:
            raise ValueError(f"p_plus must lie in [0, 1], got {self.p_plus}")
        # the generic model has 0 < v < 2 and 0 < p_plus < 1; the endpoints
        # (free chain, deterministic potential) stay available as reference
        # cases but are flagged as degenerate
        object.__setattr__(self, "_degenerate",
                           not (0.0 < self.p_plus < 1.0) or self.v == 0.0)

    @property
    def critical_energies(self) -> tuple[float, float]:
        return (0.0, self.v)


@dataclass(frozen=True)
class PotentialConfig:
    """A sampled potential on Gamma_L: 2L values in {0, 1} obeying the dimer tie."""

    L: int
    values: np.ndarray = field(repr=False)
    sample_seed: int
    sample_index: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int8)
        if vals.shape != (2 * self.L,):
            raise ValueError(f"expected {2 * self.L} potential values, got shape {vals.shape}")
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("potential values must be 0 or 1")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    def value_at(self, x: int) -> int:
        """Potential at absolute site x in Gamma_L."""
        if not -self.L <= x <= self.L - 1:
            raise IndexError(f"site {x} outside Gamma_{self.L}")
        return int(self.values[x + self.L])

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.L, self.L)

    def to_csv_row(self) -> str:
        """Compact audit row: sample_index, seed, run-length-encoded values."""
        runs = []
        vals = self.values
        start = 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or vals[i] != vals[start]:
                runs.append(f"{i - start}x{vals[start]}")
                start = i
        return f"{self.sample_index},{self.sample_seed},{self.L},{';'.join(runs)}"

    @classmethod
    def from_csv_row(cls, row: str) -> "PotentialConfig":
        sample_index, seed, L, rle = row.strip().split(",")
        vals = []
        for run in rle.split(";"):
            count, value = run.split("x")
            vals.extend([int(value)] * int(count))
        return cls(L=int(L), values=np.array(vals, dtype=np.int8),
                   sample_seed=int(seed), sample_index=int(sample_index))


def dimer_phase_convention(L: int) -> list[int]:
    """Start sites 2k of the dimers lying wholly inside Gamma_L.

    A dimer occupies (2k, 2k+1); it is inside the box iff -L <= 2k and
    2k+1 <= L-1. For odd L the edge sites -L and L-1 are pair fragments
    whose partner lies outside the box; they still inherit the partner
    dimer's Bernoulli draw.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    k_lo = -(L // 2)  # ceil(-L / 2)
    k_hi = (L - 2) // 2  # floor((L - 2) / 2), from 2k + 1 <= L - 1
    return [2 * k for k in range(k_lo, k_hi + 1)]


def dimer_values(params: DisorderParams, sample_index: int, k: np.ndarray) -> np.ndarray:
    """Bernoulli(p_plus) value of the dimer covering sites (2k, 2k+1).

    Pure function of (master_seed, sample_index, k); vectorized over k.
    """
    k = np.asarray(k, dtype=np.int64).astype(np.uint64)
    s0 = _mix64(np.uint64(np.int64(params.master_seed).astype(np.uint64)))
    s1 = _mix64(s0 ^ np.uint64(sample_index))
    h = _mix64(k ^ s1)
    # top 53 bits as a uniform in [0, 1)
    u = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return (u < params.p_plus).astype(np.int8)


def sample_seed_for(params: DisorderParams, sample_index: int) -> int:
    """Per-sample 64-bit seed recorded in audit output."""
    s0 = _mix64(np.uint64(np.int64(params.master_seed).astype(np.uint64)))
    return int(_mix64(s0 ^ np.uint64(sample_index)))


def sample_config(params: DisorderParams, L: int, sample_index: int) -> PotentialConfig:
    """Draw the dimerized Bernoulli potential on Gamma_L.

    Deterministic in (params.master_seed, sample_index); boxes of
    different L drawn from the same pair agree on their overlap.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if sample_index < 0:
        raise ValueError("sample_index must be non-negative")
    sites = np.arange(-L, L)
    k = np.floor_divide(sites, 2)  # dimer index containing each site
    k_unique = np.arange(k[0], k[-1] + 1)
    dimers = dimer_values(params, sample_index, k_unique)
    values = dimers[k - k_unique[0]]
    return PotentialConfig(L=L, values=values,
                           sample_seed=sample_seed_for(params, sample_index),
                           sample_index=sample_index)
