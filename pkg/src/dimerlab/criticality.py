"""Delocalisation diagnostics near the critical energies.

Inside the shrinking window [E_c - L^(-1/2-alpha), E_c + L^(-1/2-alpha)]
around a critical energy E_c in {0, v}, eigenvalues of the dimer chain
behave like a rigid clock (near-equal spacings of order 1/L) and
eigenfunctions spread almost evenly over the box. This module measures
both effects, estimates the density of states with Dirichlet/Neumann
bracketing, and implements the beat analysis of paired boundary Prufer
angles (z+ / z- sequences, antinodes, hull-good and good indices) that
drives the entropy lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dimerlab.disorder import DisorderParams, PotentialConfig, sample_config
from dimerlab.entropy import Region
from dimerlab.operator import (SpectralData, TridiagonalOperator,
                               build_hamiltonian, eigenvalue_count_below)
from dimerlab.transfer import PruferTrajectory, solve_shooting

__all__ = [
    "CriticalWindow",
    "WindowStats",
    "BeatAnalysis",
    "window_spacings",
    "flatness_profile",
    "dos_estimate",
    "box_position",
    "window_trajectories",
    "beat_analysis",
    "good_index_density",
]

_INV_SQRT2 = 2.0 ** -0.5


@dataclass(frozen=True)
class CriticalWindow:
    """Energy window [E_c - w, E_c + w] with w = L^(-1/2 - alpha)."""

    E_c: float
    alpha: float
    L: int

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.L < 1:
            raise ValueError("L must be >= 1")

    @property
    def half_width(self) -> float:
        return float(self.L) ** (-0.5 - self.alpha)

    @property
    def bounds(self) -> tuple[float, float]:
        w = self.half_width
        return (self.E_c - w, self.E_c + w)

    def contains(self, E) -> np.ndarray | bool:
        lo, hi = self.bounds
        return (lo <= E) & (E <= hi)

    def check_inside_band(self, v: float) -> bool:
        """Whether the window stays inside the shifted band [E_c-v, E_c+v];
        guaranteed for L large enough once v > 0."""
        return self.half_width <= v


@dataclass(frozen=True)
class WindowStats:
    """Clock-spacing and eigenfunction-flatness measurements in a window."""

    window: CriticalWindow
    eigenvalue_indices: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    spacings: np.ndarray = field(repr=False)
    flatness_min: np.ndarray = field(repr=False)
    flatness_max: np.ndarray = field(repr=False)
    C_estimates: np.ndarray = field(repr=False)
    spacing_ratio_cap: float = 3.0
    flatness_cap: float = 2.0

    def __post_init__(self):
        if self.spacings.size and self.spacings.min() <= 0.0:
            raise ValueError("window spacings must be positive")
        ratios = self.flatness_ratios
        if ratios.size and ratios.min() < 1.0 - 1e-12:
            raise ValueError("flatness ratios must be >= 1")

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def flatness_ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.flatness_min > 0.0,
                            self.flatness_max / self.flatness_min, np.inf)

    @property
    def spacing_ratio(self) -> float:
        """max(spacing/median, median/spacing) over the window; 1.0 when
        fewer than two spacings exist."""
        if self.spacings.size < 1:
            return 1.0
        med = float(np.median(self.spacings))
        return float(max(self.spacings.max() / med, med / self.spacings.min()))

    @property
    def C_emp(self) -> float:
        """Empirical flatness constant: worst C estimate over the window."""
        return float(self.C_estimates.max()) if self.C_estimates.size else 1.0

    @property
    def spacing_flag(self) -> bool:
        return self.spacings.size > 0 and self.spacing_ratio > self.spacing_ratio_cap

    @property
    def flatness_flag(self) -> bool:
        return self.C_estimates.size > 0 and self.C_emp > self.flatness_cap

    @property
    def bad(self) -> bool:
        """Exceptional-realization proxy: either diagnostic exceeds its cap."""
        return self.spacing_flag or self.flatness_flag

    def csv_row(self, L: int, sample_index: int) -> str:
        return (f"{L},{sample_index},{self.window.E_c:.17g},{self.count},"
                f"{self.spacing_ratio:.17g},{self.C_emp:.17g},"
                f"{int(self.spacing_flag)},{int(self.flatness_flag)}")


def flatness_profile(psi: np.ndarray, L: int) -> tuple[float, float, float]:
    """(min, max, ratio) of L * (psi(x-1)^2 + psi(x)^2) over x = -L+1..L-1.

    For a perfectly delocalised state the profile is flat at 1; the
    empirical flatness constant is C = max(max, 1/min).
    """
    psi = np.asarray(psi, dtype=np.float64)
    if psi.shape != (2 * L,):
        raise ValueError(f"eigenvector must have length {2 * L}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"eigenvector must be normalized, got ||psi|| = {nrm}")
    prof = L * (psi[:-1] ** 2 + psi[1:] ** 2)
    mn, mx = float(prof.min()), float(prof.max())
    ratio = mx / mn if mn > 0.0 else np.inf
    return mn, mx, ratio


def window_spacings(spec: SpectralData, win: CriticalWindow,
                    spacing_ratio_cap: float = 3.0,
                    flatness_cap: float = 2.0) -> WindowStats:
    """Clock statistics of the eigenvalues/eigenvectors inside the window.

    An empty window returns an empty-stats result rather than raising.
    """
    idx = np.flatnonzero(win.contains(spec.eigenvalues))
    evals = spec.eigenvalues[idx]
    spacings = np.diff(evals)
    L = spec.operator.L
    mins = np.empty(idx.size)
    maxs = np.empty(idx.size)
    Cs = np.empty(idx.size)
    for pos, j in enumerate(idx):
        mn, mx, _ = flatness_profile(spec.eigenvectors[:, j], L)
        mins[pos], maxs[pos] = mn, mx
        Cs[pos] = max(mx, 1.0 / mn) if mn > 0.0 else np.inf
    return WindowStats(window=win, eigenvalue_indices=idx, eigenvalues=evals,
                       spacings=spacings, flatness_min=mins, flatness_max=maxs,
                       C_estimates=Cs, spacing_ratio_cap=spacing_ratio_cap,
                       flatness_cap=flatness_cap)


def dos_estimate(params: DisorderParams, E: float, L: int, samples: int,
                 alpha: float = 1.0 / 12.0) -> dict:
    """Density of states at E from eigenvalue counts over [E - eps, E + eps],
    eps = L^(-1/2-alpha), averaged over disorder samples.

    Computed for the plain box and its Dirichlet/Neumann rank-2 variants;
    the bracket widens the variant spread by the 4-count rank correction.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    eps = float(L) ** (-0.5 - alpha)
    size = 2 * L
    sums = {"plain": 0.0, "dirichlet": 0.0, "neumann": 0.0}
    max_dn_gap = 0
    for s in range(samples):
        cfg = sample_config(params, L, s)
        counts = {}
        for boundary in ("plain", "dirichlet", "neumann"):
            H = build_hamiltonian(cfg, params, boundary=boundary)
            hi = eigenvalue_count_below(H, E + eps)
            lo = eigenvalue_count_below(H, E - eps)
            counts[boundary] = (lo, hi)
            sums[boundary] += hi - lo
        for a, b in zip(counts["dirichlet"], counts["neumann"]):
            max_dn_gap = max(max_dn_gap, abs(a - b))
        if counts["dirichlet"][1] > counts["plain"][1] + 2 or \
           counts["neumann"][1] < counts["plain"][1] - 2:
            raise AssertionError("rank-2 boundary shift moved a count by > 2")
    dens = {k: sums[k] / (samples * 2.0 * eps * size) for k in sums}
    correction = 4.0 / (2.0 * eps * size)
    return {
        "density": dens["plain"],
        "density_dirichlet": dens["dirichlet"],
        "density_neumann": dens["neumann"],
        "bracket": (min(dens.values()) - correction, max(dens.values()) + correction),
        "epsilon": eps,
        "max_dirichlet_neumann_count_gap": max_dn_gap,
        "samples": samples,
    }


def box_position(L: int, gamma: float, delta: float) -> Region:
    """Interior region [L1, L2 - 1] with L1 = -L + floor(gamma*L) and
    L2 = -L + floor((gamma+delta)*L); gamma = 0 gives the boundary region."""
    if gamma < 0.0 or delta <= 0.0 or gamma + delta >= 2.0:
        raise ValueError("need 0 <= gamma, 0 < delta, gamma + delta < 2")
    L1 = -L + math.floor(gamma * L)
    L2 = -L + math.floor((gamma + delta) * L)
    if L2 <= L1:
        raise ValueError(
            f"degenerate region: floor(gamma*L) = floor((gamma+delta)*L) = {L1 + L}")
    return Region(L1, L2 - 1)


@dataclass(frozen=True)
class BeatAnalysis:
    """Paired-boundary-angle beat data for a fixed reference index k.

    Relative indexing is Fermi-centred: E_{-1} < E_F <= E_0. The sequences
    z+- are half-sum/half-difference of the lifted angle increments at the
    two region edges. Antinodes are the maximal runs of j in J_>= on which
    sin z- keeps its sign; hull-good indices satisfy |sin z-| >= 2^(-1/2)
    and good ones additionally |cos z+| >= 2^(-1/2).
    """

    k: int
    j_less: np.ndarray = field(repr=False)    # all of J_<
    j_geq: np.ndarray = field(repr=False)     # all of J_>=, ascending
    z_plus: np.ndarray = field(repr=False)    # aligned with j_geq
    z_minus: np.ndarray = field(repr=False)
    antinode_bounds: tuple[tuple[int, int], ...] = ()  # slices into j_geq
    edge_sites: tuple[int, int] = (0, 0)      # (L1, L2)
    insufficient_data: bool = False

    @property
    def hull_good(self) -> np.ndarray:
        return np.abs(np.sin(self.z_minus)) >= _INV_SQRT2

    @property
    def good(self) -> np.ndarray:
        return self.hull_good & (np.abs(np.cos(self.z_plus)) >= _INV_SQRT2)

    @property
    def antinodes(self) -> list[np.ndarray]:
        """Index arrays (into j_geq) of the antinode runs, in order."""
        return [np.arange(a, b) for a, b in self.antinode_bounds]

    def check_partition(self) -> bool:
        """Antinodes are contiguous, disjoint, and cover J_>=."""
        covered = np.concatenate([np.arange(a, b) for a, b in self.antinode_bounds]) \
            if self.antinode_bounds else np.empty(0, dtype=int)
        return np.array_equal(covered, np.arange(self.j_geq.size))


def _relative_split(evals: np.ndarray, E_F: float) -> int:
    """Number of eigenvalues strictly below E_F (the index of E_0)."""
    return int(np.sum(evals < E_F))


def window_trajectories(config: PotentialConfig, params: DisorderParams,
                        spec: SpectralData, win: CriticalWindow,
                        margin: int = 1) -> dict[int, PruferTrajectory]:
    """Prufer trajectories at every in-window eigenvalue (plus ``margin``
    neighbours on each side), keyed by Fermi-relative index."""
    evals = spec.eigenvalues
    n0 = _relative_split(evals, win.E_c)
    idx = np.flatnonzero(win.contains(evals))
    if idx.size == 0:
        return {}
    lo = max(0, idx[0] - margin)
    hi = min(evals.size - 1, idx[-1] + margin)
    return {j - n0: solve_shooting(config, params, evals[j])
            for j in range(lo, hi + 1)}


def beat_analysis(spec: SpectralData, trajectories: dict[int, PruferTrajectory],
                  win: CriticalWindow, A: Region, k: int) -> BeatAnalysis:
    """Beat sequences z+-_{j,k} over j in J_>= for a fixed k in J_<.

    The reference energy is E_F = win.E_c (sharp Fermi convention).
    J_< holds j < 0 with E_{j-1}, E_j both in the window; J_>= holds
    j >= 0 with E_j, E_{j+1} both in the window.
    """
    evals = spec.eigenvalues
    n0 = _relative_split(evals, win.E_c)
    in_win = win.contains(evals)

    def rel_in_win(j: int) -> bool:
        a = j + n0
        return 0 <= a < evals.size and bool(in_win[a])

    j_less = np.array([j for j in range(-n0, 0)
                       if rel_in_win(j) and rel_in_win(j - 1)], dtype=int)
    j_geq = np.array([j for j in range(0, evals.size - n0)
                      if rel_in_win(j) and rel_in_win(j + 1)], dtype=int)
    if k not in j_less:
        raise ValueError(f"reference index k={k} is not in J_< = {j_less.tolist()}")

    L1, L2 = A.x1, A.x2 + 1
    if j_geq.size < 2:
        return BeatAnalysis(k=k, j_less=j_less, j_geq=j_geq,
                            z_plus=np.empty(0), z_minus=np.empty(0),
                            antinode_bounds=(), edge_sites=(L1, L2),
                            insufficient_data=True)

    missing = [j for j in np.concatenate(([k], j_geq)) if j not in trajectories]
    if missing:
        raise KeyError(f"trajectories missing for relative indices {missing}")

    t_k = trajectories[k]
    dk1, dk2 = t_k.theta_at(L1), t_k.theta_at(L2)
    z_plus = np.empty(j_geq.size)
    z_minus = np.empty(j_geq.size)
    for pos, j in enumerate(j_geq):
        t_j = trajectories[j]
        d2 = t_j.theta_at(L2) - dk2
        d1 = t_j.theta_at(L1) - dk1
        z_plus[pos] = 0.5 * (d2 + d1)
        z_minus[pos] = 0.5 * (d2 - d1)

    s = np.sign(np.sin(z_minus))
    for i in range(1, s.size):
        if s[i] == 0.0:
            s[i] = s[i - 1]
    if s[0] == 0.0 and s.size > 1:
        s[0] = s[1]
    starts = [0] + [i for i in range(1, s.size) if s[i] != s[i - 1]]
    bounds = tuple((a, b) for a, b in zip(starts, starts[1:] + [s.size]))

    return BeatAnalysis(k=k, j_less=j_less, j_geq=j_geq, z_plus=z_plus,
                        z_minus=z_minus, antinode_bounds=bounds,
                        edge_sites=(L1, L2))


def good_index_density(beat: BeatAnalysis, C_emp: float, gamma: float,
                       delta: float) -> dict:
    """Per-antinode good-index counts against the combinatorial lower bound.

    Interior regions (gamma > 0): the bound 1/(2^5 C^18 delta) applies in
    the small-parameter regime C <= 2, gamma <= 2^-8, delta/gamma <= 2^-17,
    C^12 - 1 < delta/gamma. Boundary regions (gamma = 0): the bound is
    floor(pi / (2 b)) with b = delta * pi * C^6 / 2, valid for delta < 2 C^-6.
    Outside the regime the counts are still reported but flagged
    ``hypotheses_met = False`` (no pass/fail claim).
    """
    if beat.insufficient_data:
        return {"hypotheses_met": False, "reason": "insufficient window data",
                "antinode_good_counts": [], "bound": None}
    good = beat.good
    counts = [int(np.sum(good[a:b])) for a, b in beat.antinode_bounds]
    total_good = int(np.sum(good))
    if sum(counts) != total_good:
        raise AssertionError("antinode good counts do not sum to |good|")

    if gamma == 0.0:
        b = delta * np.pi * C_emp ** 6 / 2.0
        met = delta < 2.0 * C_emp ** -6
        bound = math.floor(np.pi / (2.0 * b)) if b > 0.0 else None
        reason = "" if met else f"delta = {delta} >= 2 C^-6 = {2.0 * C_emp**-6:.3g}"
    else:
        conds = {
            "C_emp <= 2": C_emp <= 2.0,
            "gamma <= 2^-8": gamma <= 2.0 ** -8,
            "delta/gamma <= 2^-17": delta / gamma <= 2.0 ** -17,
            "C^12 - 1 < delta/gamma": C_emp ** 12 - 1.0 < delta / gamma,
        }
        met = all(conds.values())
        bound = 1.0 / (2.0 ** 5 * C_emp ** 18 * delta)
        reason = "" if met else "; ".join(f"{k} fails" for k, ok in conds.items()
                                          if not ok)
    # interior antinodes only: the first and last runs may be truncated
    # by the window edge
    interior = counts[1:-1] if len(counts) > 2 else []
    return {
        "hypotheses_met": bool(met),
        "reason": reason,
        "bound": bound,
        "antinode_good_counts": counts,
        "interior_counts": interior,
        "interior_meet_bound": (None if not met or bound is None else
                                bool(all(c >= bound for c in interior))),
        "total_good": total_good,
        "total_hull_good": int(np.sum(beat.hull_good)),
    }
