"""Transfer matrices and Prufer variables for the dimer chain.

Single-step matrices W_V(E) = [[vV - E, -1], [1, 0]] propagate the pair
(phi(x), phi(x-1)) of a shooting solution. Squaring over a dimer and
conjugating with the basis change M_v yields the single-dimer matrix
T_V(E) = [[conj(a), b], [conj(b), a]], whose entries control the growth
of solutions near the critical energies.

Prufer variables (r_x, theta_x) are the polar coordinates of the pair.
The angle is lifted continuously along the recursion: each one-step
increment lies strictly inside (-pi/2, 3*pi/2) (the update matrix has
determinant one and maps cos(theta) to the new sine, which pins the
branch), so the lift is unique and varies continuously with the energy.
That continuity is what makes angle differences across eigenvalues
well defined real numbers rather than mod-2*pi residues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dimerlab.disorder import DisorderParams, PotentialConfig

__all__ = [
    "single_step",
    "multi_step",
    "basis_change",
    "DimerTransfer",
    "dimer_similarity",
    "rho_theta",
    "PruferTrajectory",
    "solve_shooting",
    "refine_eigenvalue",
    "prufer_angle_derivative",
    "cv_constant",
    "energy_perturbation_bound",
]

# rescaling thresholds for the shooting recursion
_HUGE = 1e150
_TINY = 1e-150


def single_step(V: int, E: float, v: float) -> np.ndarray:
    """One-site transfer matrix [[vV - E, -1], [1, 0]] (determinant 1)."""
    return np.array([[v * V - E, -1.0], [1.0, 0.0]])


def multi_step(config: PotentialConfig, E: float, x: int, y: int,
               v: float) -> np.ndarray:
    """Ordered product W_{V(y-1)} ... W_{V(x)}; the identity when x == y.

    Propagates (phi(x), phi(x-1)) to (phi(y), phi(y-1)) for -L <= x <= y <= L.
    """
    L = config.L
    if not (-L <= x <= y <= L):
        raise IndexError(f"need -L <= x <= y <= L, got x={x}, y={y}, L={L}")
    W = np.eye(2)
    for site in range(x, y):
        W = single_step(config.value_at(site), E, v) @ W
    return W


def basis_change(v: float) -> np.ndarray:
    """The complex change of basis M_v that diagonalises both zero-energy
    dimer matrices, normalised so that |det M_v| = 1."""
    if not 0.0 < v < 2.0:
        raise ValueError(f"v must lie in (0, 2), got {v}")
    s = np.sqrt(4.0 - v * v)
    m = s ** -0.5
    return m * np.array([[0.5 * (v - 1j * s), 0.5 * (v + 1j * s)],
                         [1.0, 1.0]], dtype=complex)


@dataclass(frozen=True)
class DimerTransfer:
    """Entries (a, b) of T_V(E) = M_v^{-1} W_V(E)^2 M_v = [[conj(a), b], [conj(b), a]]."""

    a: complex
    b: complex

    def matrix(self) -> np.ndarray:
        return np.array([[np.conj(self.a), self.b],
                         [np.conj(self.b), self.a]])

    def unimodularity_defect(self) -> float:
        return abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0)


class StructureError(RuntimeError):
    """The computed dimer matrix violated the [[conj a, b], [conj b, a]] pattern."""


def dimer_similarity(V: int, E: float, v: float,
                     structure_tol: float = 1e-12) -> DimerTransfer:
    """Single-dimer transfer matrix in the M_v basis."""
    M = basis_change(v)
    W = single_step(V, E, v)
    T = np.linalg.solve(M, (W @ W) @ M)
    a = T[1, 1]
    b = T[0, 1]
    defect = max(abs(T[0, 0] - np.conj(a)), abs(T[1, 0] - np.conj(b)))
    if defect > structure_tol * max(1.0, abs(a), abs(b)):
        raise StructureError(
            f"dimer matrix deviates from its structural form by {defect:.3e}")
    return DimerTransfer(a=a, b=b)


def rho_theta(V: int, E: float, v: float, theta: float) -> tuple[float, float]:
    """Action of T_V(E) on the unit vector e_theta = (e^{-i theta}, e^{i theta})/sqrt(2):
    returns (rho, Theta) with T_V(E) e_theta = rho * e_Theta, Theta in [0, 2*pi)."""
    T = dimer_similarity(V, E, v)
    w1 = np.conj(T.a) * np.exp(-1j * theta) + T.b * np.exp(1j * theta)
    rho = abs(w1)
    Theta = float(np.mod(-np.angle(w1), 2.0 * np.pi))
    return float(rho), Theta


@dataclass(frozen=True)
class PruferTrajectory:
    """Shooting solution of the difference equation in polar form.

    phi is the normalized solution on Gamma_L with phi(-L-1) = 0 and
    phi(-L) > 0; r and theta cover x in {-L, ..., L} with
    (phi(x), phi(x-1)) = r_x (cos theta_x, sin theta_x) and theta lifted
    continuously in x starting from theta_{-L} = 0.
    """

    energy: float
    L: int
    phi: np.ndarray = field(repr=False)  # phi(-L) .. phi(L), length 2L+1
    log_scale: np.ndarray = field(repr=False)  # pre-normalization exponents
    r: np.ndarray = field(repr=False)  # r_{-L} .. r_L, length 2L+1
    theta: np.ndarray = field(repr=False)  # lifted angles, same indexing

    def phi_at(self, x: int) -> float:
        """Normalized phi(x) for x in {-L-1, ..., L}."""
        if x == -self.L - 1:
            return 0.0
        return float(self.phi[x + self.L])

    def r_at(self, x: int) -> float:
        """r_x for x in {-L, ..., L}."""
        return float(self.r[x + self.L])

    def theta_at(self, x: int) -> float:
        """Lifted theta_x for x in {-L, ..., L}."""
        return float(self.theta[x + self.L])

    def boundary_defect(self) -> float:
        """|phi(L)| of the normalized solution; 0 iff energy is an eigenvalue."""
        return abs(float(self.phi[-1]))

    def dump_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,phi,r,theta\n")
            for i, x in enumerate(range(-self.L, self.L + 1)):
                fh.write(f"{x},{self.phi[i]:.17g},{self.r[i]:.17g},{self.theta[i]:.17g}\n")


def _lift_increment(theta: float, a: float) -> float:
    """Lifted angle increment of one transfer step applied to e_theta.

    The raw new direction is (a*cos t - sin t, cos t); its lift relative
    to theta is pinned to the open window (-pi/2, 3*pi/2), which the
    increment can never leave because the new sine carries the sign of
    the old cosine.
    """
    c, s = np.cos(theta), np.sin(theta)
    raw = np.arctan2(c, a * c - s)
    delta = (raw - theta) % (2.0 * np.pi)  # in [0, 2*pi)
    if delta >= 1.5 * np.pi:
        delta -= 2.0 * np.pi
    return float(delta)


def solve_shooting(config: PotentialConfig, params: DisorderParams,
                   E: float) -> PruferTrajectory:
    """Shooting solution phi_E with phi(-L-1) = 0, phi(-L) > 0, normalized
    over Gamma_L, together with its lifted Prufer variables.

    The recursion rescales the pair whenever its magnitude leaves
    [1e-150, 1e150], tracking the log-scale separately, so localized
    solutions at large L neither overflow nor underflow.
    """
    L = config.L
    v = params.v
    diag = v * config.values.astype(np.float64)

    n = 2 * L + 1
    phi_scaled = np.empty(n)  # phi(-L) .. phi(L), each times exp(-log_scale)
    log_scale = np.empty(n)
    theta = np.empty(n)
    r_scaled = np.empty(n)

    prev = 0.0  # phi(x-1), current scale
    cur = 1.0  # phi(x)
    scale = 0.0
    phi_scaled[0] = cur
    log_scale[0] = scale
    theta[0] = 0.0  # atan2(0, 1), in (-pi/2, pi/2]
    r_scaled[0] = 1.0

    for i, x in enumerate(range(-L, L)):
        a = diag[i] - E
        nxt = a * cur - prev
        prev, cur = cur, nxt
        mag = max(abs(prev), abs(cur))
        if mag > _HUGE or (mag < _TINY and mag > 0.0):
            prev /= mag
            cur /= mag
            scale += np.log(mag)
        phi_scaled[i + 1] = cur
        log_scale[i + 1] = scale
        r_scaled[i + 1] = np.hypot(cur, prev)
        theta[i + 1] = theta[i] + _lift_increment(theta[i], a)

    # normalize over Gamma_L: sum phi(x)^2 = 1 for x in {-L, .., L-1}
    gamma_scaled = phi_scaled[:-1]
    gamma_logs = log_scale[:-1]
    log_max = gamma_logs.max()
    weights = np.exp(2.0 * (gamma_logs - log_max))
    norm_sq_scaled = np.sum(gamma_scaled ** 2 * weights)  # * exp(2 log_max)
    log_norm = log_max + 0.5 * np.log(norm_sq_scaled)

    phi = phi_scaled * np.exp(log_scale - log_norm)
    # r_x pairs (phi(x), phi(x-1)) share the scale of step x
    r = r_scaled * np.exp(log_scale - log_norm)

    return PruferTrajectory(energy=E, L=L, phi=phi, log_scale=log_scale - log_norm,
                            r=r, theta=theta)


def prufer_angle_derivative(traj: PruferTrajectory, site: int) -> float:
    """d theta_site / dE = r_site^{-2} * sum_{x < site} phi(x)^2.

    Invariant under rescaling of phi; evaluated with the normalized
    solution. Returns 0 at the left boundary (empty sum).
    """
    L = traj.L
    if site < -L or site > L:
        raise IndexError(f"site {site} outside {{-L, ..., L}}")
    if site == -L:
        return 0.0
    r2 = traj.r_at(site) ** 2
    if r2 == 0.0:
        raise ZeroDivisionError("vanishing Prufer radius: degenerate configuration")
    partial = np.sum(traj.phi[: site + L] ** 2)
    return float(partial / r2)


def refine_eigenvalue(config: PotentialConfig, params: DisorderParams,
                      E: float, tol: float = 1e-9, max_iter: int = 12):
    """Polish an approximate eigenvalue by Newton iteration on the right
    boundary angle.

    An eigenvalue is characterized by theta_L in pi/2 + pi*Z. Dense-solver
    eigenvalues are accurate to machine precision in E, but for strongly
    localized states the boundary angle magnifies that error far beyond
    the angle tolerance; one or two Newton steps using the exact angle
    derivative restore it. Returns (refined E, its trajectory).
    """
    L = config.L
    traj = solve_shooting(config, params, E)
    for _ in range(max_iter):
        th = traj.theta_at(L)
        target = np.pi / 2 + np.pi * round((th - np.pi / 2) / np.pi)
        err = th - target
        if abs(err) < tol:
            break
        E = E - err / prufer_angle_derivative(traj, L)
        traj = solve_shooting(config, params, E)
    return E, traj


def cv_constant(v: float, grid_points: int = 10_000) -> float:
    """4 ln||M_v|| + 4 max_{E in [-v, v], V} ln||W_V(E)|| (spectral norms).

    The energy maximum is taken over a dense grid; ||W_V(E)|| is smooth
    and even in (vV - E), and the maximum sits at an endpoint of the
    |vV - E| range, so the grid is a safety net more than a necessity.
    """
    if not 0.0 < v < 2.0:
        raise ValueError(f"v must lie in (0, 2), got {v}")
    M = basis_change(v)
    norm_M = np.linalg.norm(M, 2)
    Es = np.linspace(-v, v, grid_points)
    # ||W_V(E)|| depends only on t = |vV - E|: largest singular value of
    # [[t, -1], [1, 0]] is the golden-ratio-like root sqrt((t^2+2+sqrt(t^4+4t^2))/2)
    best = 0.0
    for V in (0, 1):
        t = np.abs(v * V - Es)
        sv_max = np.sqrt((t * t + 2.0 + np.sqrt(t ** 4 + 4.0 * t * t)) / 2.0)
        best = max(best, float(sv_max.max()))
    return float(4.0 * np.log(norm_M) + 4.0 * np.log(best))


def flatness_scale(v: float) -> float:
    """C = exp(6 c_v): the eigenfunction-flatness constant implied by c_v."""
    return float(np.exp(6.0 * cv_constant(v)))


def energy_perturbation_bound(config: PotentialConfig, params: DisorderParams,
                              E: float, eps: float) -> tuple[float, float]:
    """(G_E, half_width): G_E = max_{x<y} ||W(E; y, x)|| over the box, and
    the guaranteed bound G_E^2 (exp(4 L |eps| G_E) - 1) on the change of
    |W(E; x, -L) w|^2 under an energy shift E -> E + eps."""
    L = config.L
    v = params.v
    # all partial products W(E; y, -L); W(E; y, x) = P_y P_x^{-1}
    prods = [np.eye(2)]
    for site in range(-L, L):
        prods.append(single_step(config.value_at(site), E, v) @ prods[-1])
    P = np.array(prods)
    G = 0.0
    for ix in range(len(P) - 1):
        inv = np.array([[P[ix][1, 1], -P[ix][0, 1]],
                        [-P[ix][1, 0], P[ix][0, 0]]])  # det = 1
        for iy in range(ix + 1, len(P)):
            G = max(G, np.linalg.norm(P[iy] @ inv, 2))
    half_width = G * G * np.expm1(4.0 * L * abs(eps) * G)
    return float(G), float(half_width)
