"""Finite-volume dimer Hamiltonians and their eigensystems.

H_L acts on l^2(Gamma_L), Gamma_L = {-L, ..., L-1}: diagonal v*V(x),
constant off-diagonal -1. The plain restriction is the operator studied
throughout; the dirichlet/neumann variants add +1/-1 to the two extreme
diagonal entries and are rank-2 perturbations used for density-of-states
bracketing.

Eigenvalues and eigenvectors come from the LAPACK tridiagonal drivers
(bisection/Sturm sequences plus inverse iteration, or MRRR), which match
the structure-exploiting solver this module promises; the Sturm-sequence
eigenvalue counter below is an independent implementation used to
cross-check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from dimerlab.disorder import DisorderParams, PotentialConfig

__all__ = [
    "TridiagonalOperator",
    "SpectralData",
    "build_hamiltonian",
    "eigensystem",
    "eigenvalue_count_below",
    "region_occupations",
    "fermi_projection_block",
]

BOUNDARY_TYPES = ("plain", "dirichlet", "neumann")


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal Hamiltonian on Gamma_L (off-diagonals all -1)."""

    L: int
    diagonal: np.ndarray = field(repr=False)
    boundary: str = "plain"

    def __post_init__(self):
        diag = np.ascontiguousarray(self.diagonal, dtype=np.float64)
        if diag.shape != (2 * self.L,):
            raise ValueError(f"diagonal must have length {2 * self.L}, got {diag.shape}")
        if self.boundary not in BOUNDARY_TYPES:
            raise ValueError(f"boundary must be one of {BOUNDARY_TYPES}")
        diag.setflags(write=False)
        object.__setattr__(self, "diagonal", diag)

    @property
    def size(self) -> int:
        return 2 * self.L

    @property
    def offdiagonal(self) -> np.ndarray:
        return np.full(self.size - 1, -1.0)

    def norm_bound(self) -> float:
        """Upper bound on the operator norm (Gershgorin)."""
        return float(np.abs(self.diagonal).max() + 2.0)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-vector product H psi (psi indexed over Gamma_L)."""
        out = self.diagonal * psi
        out[:-1] -= psi[1:]
        out[1:] -= psi[:-1]
        return out

    def dense(self) -> np.ndarray:
        H = np.diag(self.diagonal)
        idx = np.arange(self.size - 1)
        H[idx, idx + 1] = -1.0
        H[idx + 1, idx] = -1.0
        return H


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of a TridiagonalOperator under the sign convention that the
    first (leftmost) significant eigenvector component is positive."""

    operator: TridiagonalOperator
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)  # columns, orthonormal

    def __post_init__(self):
        evals = np.ascontiguousarray(self.eigenvalues, dtype=np.float64)
        evecs = np.ascontiguousarray(self.eigenvectors, dtype=np.float64)
        if evecs.shape != (self.operator.size, evals.size):
            raise ValueError("eigenvector block does not match eigenvalue count")
        evals.setflags(write=False)
        evecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "eigenvectors", evecs)

    def __len__(self) -> int:
        return self.eigenvalues.size

    def residuals(self) -> np.ndarray:
        """Per-pair ||H psi - E psi||_2."""
        H = self.operator
        R = np.empty(len(self))
        for j in range(len(self)):
            psi = self.eigenvectors[:, j]
            R[j] = np.linalg.norm(H.apply(psi) - self.eigenvalues[j] * psi)
        return R

    def min_gap(self) -> float:
        if len(self) < 2:
            return np.inf
        return float(np.diff(self.eigenvalues).min())

    def dump_qa_csv(self, path) -> None:
        """(eigenvalue, residual) rows for solver QA."""
        res = self.residuals()
        with open(path, "w") as fh:
            fh.write("eigenvalue,residual\n")
            for E, r in zip(self.eigenvalues, res):
                fh.write(f"{E:.17g},{r:.17g}\n")


def build_hamiltonian(config: PotentialConfig, params: DisorderParams,
                      boundary: str = "plain") -> TridiagonalOperator:
    """Assemble H_L: diagonal v*V(x), off-diagonals -1, optional rank-2
    Dirichlet (+1) or Neumann (-1) shifts at the two extreme sites."""
    diag = params.v * config.values.astype(np.float64)
    if boundary == "dirichlet":
        diag = diag.copy()
        diag[0] += 1.0
        diag[-1] += 1.0
    elif boundary == "neumann":
        diag = diag.copy()
        diag[0] -= 1.0
        diag[-1] -= 1.0
    elif boundary != "plain":
        raise ValueError(f"unknown boundary type {boundary!r}")
    return TridiagonalOperator(L=config.L, diagonal=diag, boundary=boundary)


def _fix_signs(evecs: np.ndarray) -> np.ndarray:
    """Flip columns so the first significant component from the left is > 0."""
    n, m = evecs.shape
    absv = np.abs(evecs)
    thresh = 1e-14 * absv.max(axis=0)
    for j in range(m):
        idx = np.argmax(absv[:, j] > thresh[j])
        if evecs[idx, j] < 0:
            evecs[:, j] = -evecs[:, j]
    return evecs


def eigensystem(op: TridiagonalOperator,
                window: tuple[float, float] | None = None) -> SpectralData:
    """All eigenpairs, or only those with eigenvalue inside ``window``.

    Windowed queries use bisection + inverse iteration; full queries the
    MRRR driver. Eigenvectors are orthonormal to LAPACK accuracy and
    sign-fixed so that the leftmost significant component is positive.
    """
    d = op.diagonal
    e = np.full(op.size - 1, -1.0)
    if window is None:
        evals, evecs = eigh_tridiagonal(d, e, lapack_driver="auto")
    else:
        lo, hi = window
        if not lo < hi:
            raise ValueError("window must be an increasing interval")
        evals, evecs = eigh_tridiagonal(d, e, select="v", select_range=(lo, hi),
                                        lapack_driver="stebz")
    evecs = _fix_signs(np.ascontiguousarray(evecs))
    return SpectralData(operator=op, eigenvalues=evals, eigenvectors=evecs)


def eigenvalues_only(op: TridiagonalOperator) -> np.ndarray:
    return eigvalsh_tridiagonal(op.diagonal, np.full(op.size - 1, -1.0))


def eigenvalue_count_below(op: TridiagonalOperator, E: float) -> int:
    """Number of eigenvalues strictly below E, by Sturm sign counting.

    Independent of the LAPACK route; exact in exact arithmetic. Uses the
    scaled recurrence q_i = d_i - E - 1/q_{i-1} whose negative terms
    count the sign changes of the leading-minor sequence.
    """
    d = op.diagonal
    count = 0
    q = d[0] - E
    if q < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, d.size):
        if q == 0.0:
            q = tiny
        q = d[i] - E - 1.0 / q
        if q < 0.0:
            count += 1
    return count


def region_occupations(op: TridiagonalOperator, region_indices: np.ndarray,
                       E_F: float) -> tuple[np.ndarray, int]:
    """Nontrivial eigenvalues of 1_A 1_{<E_F}(H) 1_A, cheaply.

    Uses the full MRRR eigendecomposition once, then diagonalizes the
    Gram matrix on the smaller side of the region block B = 1_A Psi_<:
    B B^T and B^T B share their nonzero spectrum, and occupations pinned
    at exactly 0 or 1 contribute nothing to any entropy functional. When
    the above-Fermi side is smallest, the complement block is used and
    the spectrum reflected as 1 - lambda. Returns (occupations, n_below);
    the occupations array has length min(|A|, n_below, n_above).
    """
    d = op.diagonal
    e = np.full(op.size - 1, -1.0)
    evals, vecs = eigh_tridiagonal(d, e, lapack_driver="auto")
    n_below = int(np.searchsorted(evals, E_F, side="left"))
    region_indices = np.asarray(region_indices)
    n_above = op.size - n_below
    nA = region_indices.size
    if n_below == 0 or n_above == 0:
        return np.empty(0), n_below
    if min(nA, n_below) <= min(nA, n_above):
        B = np.ascontiguousarray(vecs[region_indices, :n_below])
        reflect = False
    else:
        B = np.ascontiguousarray(vecs[region_indices, n_below:])
        reflect = True
    del vecs
    G = B.T @ B if B.shape[1] < B.shape[0] else B @ B.T
    del B
    lam = np.clip(np.linalg.eigvalsh(G), 0.0, 1.0)
    if reflect:
        lam = 1.0 - lam[::-1]
    return lam, n_below


def fermi_projection_block(op: TridiagonalOperator, region_indices: np.ndarray,
                           E_F: float, chunk: int = 1024) -> tuple[np.ndarray, int]:
    """Region block of the Fermi projection, 1_A 1_{<E_F}(H) 1_A.

    Computes eigenvectors in index chunks so the full (size x size)
    eigenvector matrix is never materialized; intended for large boxes.
    Returns (block, n_below) where n_below = #eigenvalues < E_F.
    """
    d = op.diagonal
    e = np.full(op.size - 1, -1.0)
    evals = eigvalsh_tridiagonal(d, e)
    n_below = int(np.searchsorted(evals, E_F, side="left"))
    region_indices = np.asarray(region_indices)
    block = np.zeros((region_indices.size, region_indices.size))
    for lo in range(0, n_below, chunk):
        hi = min(lo + chunk, n_below) - 1
        _, vecs = eigh_tridiagonal(d, e, select="i", select_range=(lo, hi),
                                   lapack_driver="stebz")
        rows = np.ascontiguousarray(vecs[region_indices, :])
        block += rows @ rows.T
    return block, n_below
