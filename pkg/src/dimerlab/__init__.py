"""Numerical laboratory for the one-dimensional random dimer model.

The package builds finite-volume dimer Hamiltonians on the symmetric box
Gamma_L = {-L, ..., L-1}, diagonalizes them, and provides the machinery
(transfer matrices, Prufer variables, correlation-matrix entropies,
disorder-averaged sweeps) needed to probe the logarithmically enhanced
area law at the critical Fermi energies E_F in {0, v} and the ordinary
area law elsewhere.
"""

from dimerlab.disorder import DisorderParams, PotentialConfig, sample_config, dimer_phase_convention
from dimerlab.operator import (
    TridiagonalOperator,
    SpectralData,
    build_hamiltonian,
    eigensystem,
    eigenvalue_count_below,
)
from dimerlab.entropy import (
    EntropyResult,
    Region,
    binary_entropy,
    quadratic_entropy_fn,
    correlation_matrix,
    entanglement_entropy,
    quadratic_entropy_commutator,
)

__version__ = "0.1.0"

__all__ = [
    "DisorderParams",
    "PotentialConfig",
    "sample_config",
    "dimer_phase_convention",
    "TridiagonalOperator",
    "SpectralData",
    "build_hamiltonian",
    "eigensystem",
    "eigenvalue_count_below",
    "EntropyResult",
    "Region",
    "binary_entropy",
    "quadratic_entropy_fn",
    "correlation_matrix",
    "entanglement_entropy",
    "quadratic_entropy_commutator",
    "__version__",
]
