"""Brute-force Fock-space route to the conditional homodyne statistics.

Nothing here uses the closed forms of :mod:`bellcv.analytic`; the two are
compared in the test suite.

Conventions
-----------
* Two-mode density matrices are stored as 4-index arrays ``rho[n1, n2, m1, m2]``
  for ``|n1, n2><m1, m2|``.
* Beam splitter: an input photon is mapped as ``a_in^dag -> sin(theta) a_h^dag
  + cos(theta) a_d^dag`` (``h`` = homodyne port, ``d`` = click-detector port),
  i.e. ``|1, 0> -> sin|1, 0> + cos|0, 1>`` under
  ``exp[(theta - pi/2)(a_h^dag a_d - a_h a_d^dag)]``. The detector-side phase is
  unobservable with phase-insensitive click detectors.
* Displacement ``D(a) = exp(a a^dag - a* a)``; quadrature
  ``x_phi = (a e^{-i phi} + a^dag e^{i phi}) / 2`` with vacuum variance 1/4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import (
    DegenerateConditioning,
    DimensionOverflow,
    GridTooCoarse,
    TruncationTooCoarse,
)

DIM_CAP = 40
DEFAULT_TAIL = 1e-12


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class TruncatedTwoModeState:
    """Two-mode density matrix on ``{|n1, n2> : n1, n2 < dim}``."""

    dim: int
    matrix: np.ndarray
    trunc_error: float = 0.0

    def __post_init__(self):
        d = self.dim
        if self.matrix.shape != (d, d, d, d):
            raise ValueError(f"matrix shape {self.matrix.shape} != {(d, d, d, d)}")

    @classmethod
    def from_pure(cls, psi: np.ndarray, trunc_error: float = 0.0) -> "TruncatedTwoModeState":
        psi = np.asarray(psi, dtype=complex)
        mat = np.einsum("ab,cd->abcd", psi, psi.conj())
        return cls(psi.shape[0], mat, trunc_error)

    def as_matrix(self) -> np.ndarray:
        d = self.dim
        return self.matrix.reshape(d * d, d * d)

    def trace(self) -> float:
        return float(np.trace(self.as_matrix()).real)

    def normalized(self) -> "TruncatedTwoModeState":
        return TruncatedTwoModeState(self.dim, self.matrix / self.trace(), self.trunc_error)

    def hermiticity_defect(self) -> float:
        m = self.as_matrix()
        return float(np.abs(m - m.conj().T).max())

    def eigenvalues(self) -> np.ndarray:
        m = self.as_matrix()
        return np.linalg.eigvalsh(0.5 * (m + m.conj().T))

    def reduced(self, mode: int) -> np.ndarray:
        """Single-mode reduced density matrix of mode 1 or 2."""
        if mode == 1:
            return np.einsum("abcb->ac", self.matrix)
        if mode == 2:
            return np.einsum("abad->bd", self.matrix)
        raise ValueError("mode must be 1 or 2")

    def mean_photons(self, mode: int) -> float:
        rho = self.reduced(mode)
        return float(np.real(np.arange(self.dim) @ np.diag(rho)) / self.trace())


def schmidt_lambda(r: float) -> float:
    return math.tanh(r)


def default_dim(r: float, tail: float = DEFAULT_TAIL, cap: int = DIM_CAP) -> int:
    """Smallest cutoff with discarded squeezed-state weight tanh(r)^(2 dim) below ``tail``."""
    lam = math.tanh(r)
    if lam == 0.0:
        return 2
    dim = max(2, math.ceil(math.log(tail) / (2.0 * math.log(lam))))
    if dim > cap:
        raise DimensionOverflow(
            f"r = {r} needs Fock cutoff {dim} for tail {tail:g}, above the cap of {cap}"
        )
    return dim


def two_mode_squeezed(r: float, dim: int) -> tuple[np.ndarray, float]:
    """Schmidt amplitudes sqrt(1 - l^2) l^n on ``|n, n>`` (l = tanh r), as a ``dim x dim``
    array, together with the discarded weight l^(2 dim)."""
    if r <= 0:
        raise ValueError(f"r = {r} must be positive")
    if dim < 2:
        raise ValueError("dim must be at least 2")
    lam = math.tanh(r)
    tail = lam ** (2 * dim)
    if tail > 1e-10:
        raise TruncationTooCoarse(f"discarded weight {tail:.3g} > 1e-10 at r = {r}, dim = {dim}")
    n = np.arange(dim)
    psi = np.zeros((dim, dim), dtype=complex)
    psi[n, n] = math.sqrt(1.0 - lam * lam) * lam**n
    return psi, tail


def squeezed_state(r: float, dim: Optional[int] = None) -> TruncatedTwoModeState:
    dim = default_dim(r) if dim is None else dim
    psi, tail = two_mode_squeezed(r, dim)
    return TruncatedTwoModeState.from_pure(psi, tail)


def thermal_product(nbar1: float, nbar2: float, dim: int) -> TruncatedTwoModeState:
    """Uncorrelated thermal states, truncated and renormalized."""

    def pops(nbar):
        q = nbar / (1.0 + nbar)
        p = (1.0 - q) * q ** np.arange(dim)
        return p / p.sum()

    mat = np.zeros((dim,) * 4, dtype=complex)
    p1, p2 = pops(nbar1), pops(nbar2)
    i = np.arange(dim)
    mat[i[:, None], i[None, :], i[:, None], i[None, :]] = np.outer(p1, p2)
    return TruncatedTwoModeState(dim, mat)


# --------------------------------------------------------------------------
# local maps that lower photon number by k: rho -> sum_k w_k K_k rho K_k^dag,
# with K_k |n> = amp[n, k] |n - k>


def _shift_map(matrix: np.ndarray, mode: int, amp: np.ndarray, weights: np.ndarray) -> np.ndarray:
    d = matrix.shape[0]
    out = np.zeros_like(matrix)
    for k in range(d):
        if weights[k] == 0.0:
            continue
        a = amp[k:, k]
        if not np.any(a):
            continue
        if mode == 1:
            sub = matrix[k:, :, k:, :]
            term = a[:, None, None, None] * a.conj()[None, None, :, None] * sub
            out[: d - k, :, : d - k, :] += weights[k] * term
        else:
            sub = matrix[:, k:, :, k:]
            term = a[None, :, None, None] * a.conj()[None, None, None, :] * sub
            out[:, : d - k, :, : d - k] += weights[k] * term
    return out


def arm_amplitudes(theta: float, dim: int) -> np.ndarray:
    """``amp[n, k]``: amplitude for ``|n>_in |0>_vac -> |n-k>_h |k>_d``.

    Equal to ``sqrt(C(n, k)) sin^(n-k) cos^k``.
    """
    s, c = math.sin(theta), math.cos(theta)
    n = np.arange(dim)[:, None]
    k = np.arange(dim)[None, :]
    valid = k <= n
    nk = np.where(valid, n - k, 0)
    log_binom = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(nk + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.exp(log_binom) * np.power(s, nk) * np.power(c, k)
    return np.where(valid, mag, 0.0)


@dataclass(frozen=True)
class BeamSplitState:
    """Input state after mixing each arm with vacuum on a beam splitter.

    The four-mode state is kept factored as (input state, per-arm amplitude
    table) instead of a dense four-mode tensor.
    """

    source: TruncatedTwoModeState
    theta: float
    amp: np.ndarray

    def homodyne_state(self) -> TruncatedTwoModeState:
        """Reduced state of the homodyne ports with the detector ports traced out."""
        ones = np.ones(self.source.dim)
        m = _shift_map(self.source.matrix, 1, self.amp, ones)
        m = _shift_map(m, 2, self.amp, ones)
        return TruncatedTwoModeState(self.source.dim, m, self.source.trunc_error)

    def detector_populations(self) -> np.ndarray:
        """Joint photon-number distribution ``P[k, l]`` of the two detector ports."""
        d = self.source.dim
        out = np.zeros((d, d))
        for k in range(d):
            for l in range(d):
                w1 = np.zeros(d)
                w2 = np.zeros(d)
                w1[k] = 1.0
                w2[l] = 1.0
                m = _shift_map(self.source.matrix, 1, self.amp, w1)
                m = _shift_map(m, 2, self.amp, w2)
                out[k, l] = np.trace(m.reshape(d * d, d * d)).real
        return out


def beamsplit_with_vacuum(
    state: TruncatedTwoModeState, theta: float, dim_cap: int = DIM_CAP
) -> BeamSplitState:
    if state.dim > dim_cap:
        raise DimensionOverflow(f"dim {state.dim} exceeds cap {dim_cap}")
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError(f"theta = {theta} outside (0, pi/2]")
    return BeamSplitState(state, theta, arm_amplitudes(theta, state.dim))


def click_probabilities(eta: float, dim: int) -> np.ndarray:
    """Probability that a detector with efficiency ``eta`` fires on ``k`` photons."""
    return 1.0 - (1.0 - eta) ** np.arange(dim)


def condition_on_clicks(split: BeamSplitState, eta: float) -> tuple[TruncatedTwoModeState, float]:
    """Project both detector ports onto "fired"; return (normalized rho_c, p34)."""
    d = split.source.dim
    f = click_probabilities(eta, d)
    m = _shift_map(split.source.matrix, 1, split.amp, f)
    m = _shift_map(m, 2, split.amp, f)
    p34 = float(np.trace(m.reshape(d * d, d * d)).real)
    if p34 < 1e-14:
        raise DegenerateConditioning(f"joint click probability {p34:.3g} < 1e-14")
    return TruncatedTwoModeState(d, m / p34, split.source.trunc_error), p34


def conditioned_state(r: float, reflectance: float, eta: float, dim: Optional[int] = None):
    """Squeezed source -> beam splitters -> click conditioning. Returns (rho_c, p34)."""
    theta = math.asin(math.sqrt(reflectance))
    return condition_on_clicks(beamsplit_with_vacuum(squeezed_state(r, dim), theta), eta)


def apply_vacuum_superoperator(
    rho12: TruncatedTwoModeState, theta: float, eta: float, tol: float = 1e-14
) -> TruncatedTwoModeState:
    """(I - S_1)(I - S_2) rho with S = sum_k (-eta cos^2 theta)^k / k! a^k . a^dag^k."""
    d = rho12.dim
    g = eta * math.cos(theta) ** 2
    k = np.arange(d)
    weights = np.array([(-g) ** int(j) / math.factorial(int(j)) for j in k])
    # a^k |n> = sqrt(n!/(n-k)!) |n-k>
    n = np.arange(d)[:, None]
    kk = k[None, :]
    valid = kk <= n
    amp = np.where(valid, np.exp(0.5 * (gammaln(n + 1) - gammaln(np.where(valid, n - kk, 0) + 1))), 0.0)
    # drop series terms whose operator norm is already negligible
    norms = np.abs(weights) * amp.max(axis=0) ** 2
    weights = np.where(norms >= tol, weights, 0.0)

    m = rho12.matrix
    m = m - _shift_map(m, 1, amp, weights)
    m = m - _shift_map(m, 2, amp, weights)
    return TruncatedTwoModeState(d, m, rho12.trunc_error)


def nonlinearity_witness(
    rho_a: TruncatedTwoModeState,
    rho_b: TruncatedTwoModeState,
    weight: float,
    theta: float,
    eta: float,
) -> float:
    """Trace distance between M(w a + (1-w) b) and w M(a) + (1-w) M(b),
    M being the normalized click-conditioning map."""

    def cond(st):
        return condition_on_clicks(beamsplit_with_vacuum(st, theta), eta)[0].as_matrix()

    mix = TruncatedTwoModeState(
        rho_a.dim, weight * rho_a.matrix + (1.0 - weight) * rho_b.matrix
    )
    diff = cond(mix) - (weight * cond(rho_a) + (1.0 - weight) * cond(rho_b))
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


# --------------------------------------------------------------------------
# characteristic function


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """Exact Fock matrix elements ``<m|D(alpha)|n>`` for ``m, n < dim``."""
    alpha = complex(alpha)
    D = np.zeros((dim, dim), dtype=complex)
    sq = np.sqrt(np.arange(dim))
    D[0, 0] = np.exp(-0.5 * abs(alpha) ** 2)
    for m in range(1, dim):
        D[m, 0] = alpha / sq[m] * D[m - 1, 0]
    for n in range(1, dim):
        D[0, n] = -alpha.conjugate() / sq[n] * D[0, n - 1]
        D[1:, n] = (-alpha.conjugate() * D[1:, n - 1] + sq[1:] * D[:-1, n - 1]) / sq[n]
    return D


def char_function(rho: TruncatedTwoModeState, lambda1: complex, lambda2: complex) -> complex:
    """tr{rho D1(lambda1) D2(lambda2)} with no normalization or truncation checks."""
    d = rho.dim
    D1 = displacement_matrix(lambda1, d)
    D2 = displacement_matrix(lambda2, d)
    return complex(np.einsum("abcd,ca,db->", rho.matrix, D1, D2))


def displacement_defect(lam: complex, dim: int, extra: int = 40) -> float:
    """Worst row-norm deficit of ``<m|D(lam)|k>`` (m < dim) summed over ``k < dim + extra``.

    Zero up to rounding when the recurrence is accurate and ``|lam|`` is small
    enough that the rows are fully captured; grows once ``|lam|^2`` approaches
    the cutoff.
    """
    D = displacement_matrix(lam, dim + extra)[:dim, :]
    return float(np.abs(1.0 - (np.abs(D) ** 2).sum(axis=1)).max())


def conditional_char_value(
    rho_c: TruncatedTwoModeState, lambda1: complex, lambda2: complex, tol: float = 1e-8
) -> complex:
    for lam in (lambda1, lambda2):
        defect = displacement_defect(lam, rho_c.dim)
        if defect > tol:
            raise TruncationTooCoarse(
                f"displacement {lam} not resolved at cutoff {rho_c.dim} (row-norm defect {defect:.3g})"
            )
    return char_function(rho_c, lambda1, lambda2)


def char_via_superoperator(
    rho12: TruncatedTwoModeState, theta: float, eta: float, lambda1: complex, lambda2: complex
) -> complex:
    """Conditional characteristic function assembled from the vacuum superoperators:
    C = p34^-1 Cvac(-l1 cos) Cvac(-l2 cos) tr{rho' D1(l1 sin) D2(l2 sin)}."""
    rho_p = apply_vacuum_superoperator(rho12, theta, eta)
    s, c = math.sin(theta), math.cos(theta)
    p34 = rho_p.trace()
    cvac = math.exp(-0.5 * (abs(lambda1) ** 2 + abs(lambda2) ** 2) * c * c)
    return cvac * char_function(rho_p, lambda1 * s, lambda2 * s) / p34


def squeezed_char_closed_form(lambda1: complex, lambda2: complex, r: float) -> complex:
    """Gaussian characteristic function of the two-mode squeezed vacuum.

    The cross term is Re(lambda1 lambda2): the state correlates ``a b`` (not
    ``a^dag b``), which is what makes homodyne statistics depend on the phase
    sum.
    """
    return math.exp(
        -0.5 * math.cosh(2 * r) * (abs(lambda1) ** 2 + abs(lambda2) ** 2)
        + math.sinh(2 * r) * (lambda1 * lambda2).real
    )


# --------------------------------------------------------------------------
# quadrature statistics


def hermite_functions(x: np.ndarray, dim: int) -> np.ndarray:
    """``psi[i, n] = <x_i|n>`` for ``x = (a + a^dag)/2``."""
    x = np.asarray(x, dtype=float)
    X = math.sqrt(2.0) * x
    out = np.zeros((x.size, dim))
    out[:, 0] = (2.0 / math.pi) ** 0.25 * np.exp(-0.5 * X * X)
    if dim > 1:
        out[:, 1] = math.sqrt(2.0) * X * out[:, 0]
    for n in range(1, dim - 1):
        out[:, n + 1] = math.sqrt(2.0 / (n + 1)) * X * out[:, n] - math.sqrt(n / (n + 1)) * out[:, n - 1]
    return out


def _rotated_wavefunctions(x: np.ndarray, phi: float, dim: int) -> np.ndarray:
    # <x_phi|n> = e^{-i phi n} <x|n>
    return hermite_functions(x, dim) * np.exp(-1j * phi * np.arange(dim))[None, :]


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform grid on [-x_max, x_max] with a node at 0 and an even number of
    intervals on each half (so Simpson's rule applies to either half)."""

    points: np.ndarray
    step: float
    x_max: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if not np.allclose(self.points, -self.points[::-1], atol=1e-12 * self.x_max):
            raise ValueError("grid must be symmetric about 0")

    @classmethod
    def symmetric(cls, x_max: float, n_half: int) -> "QuadratureGrid":
        if n_half % 2:
            n_half += 1
        points = np.linspace(-x_max, x_max, 2 * n_half + 1)
        return cls(points, x_max / n_half, x_max)

    @classmethod
    def for_state(cls, rho: TruncatedTwoModeState, n_half: int = 100, r: Optional[float] = None,
                  width: float = 7.0) -> "QuadratureGrid":
        """Grid reaching ``width`` standard deviations of the wider local quadrature
        (never less than 5 sqrt(cosh 2r)/2 when the source squeezing is given)."""
        nbar = max(rho.mean_photons(1), rho.mean_photons(2))
        x_max = width * math.sqrt(2.0 * nbar + 1.0) / 2.0
        if r is not None:
            x_max = max(x_max, 5.0 * math.sqrt(math.cosh(2 * r)) / 2.0)
        return cls.symmetric(x_max, n_half)

    @property
    def n_half(self) -> int:
        return (self.points.size - 1) // 2

    @property
    def nonnegative(self) -> np.ndarray:
        return self.points[self.n_half:]

    def refined(self) -> "QuadratureGrid":
        return QuadratureGrid.symmetric(self.x_max, 2 * self.n_half)


def simpson_weights(n_points: int, h: float) -> np.ndarray:
    if n_points % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number of points")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _density(rho: TruncatedTwoModeState, phi1: float, phi2: float,
             x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    d = rho.dim
    a1 = _rotated_wavefunctions(x1, phi1, d)
    a2 = _rotated_wavefunctions(x2, phi2, d)
    # M[x, (n, m)] = <x|n><m|x>
    m1 = np.einsum("xn,xm->xnm", a1, a1.conj()).reshape(x1.size, d * d)
    m2 = np.einsum("xn,xm->xnm", a2, a2.conj()).reshape(x2.size, d * d)
    r = rho.matrix.transpose(0, 2, 1, 3).reshape(d * d, d * d)  # [(n1, m1), (n2, m2)]
    return ((m1 @ r) @ m2.T).real


def quadrature_density(
    rho_c: TruncatedTwoModeState, phi1: float, phi2: float, grid: QuadratureGrid, tol: float = 1e-6
) -> np.ndarray:
    """Joint density p(x1, x2) of x_phi1 on mode 1 and x_phi2 on mode 2 on ``grid x grid``."""
    p = _density(rho_c, phi1, phi2, grid.points, grid.points)
    w = simpson_weights(grid.points.size, grid.step)
    total = float(w @ p @ w)
    if abs(total - rho_c.trace()) > tol:
        raise GridTooCoarse(f"density integrates to {total!r}, expected {rho_c.trace()!r}")
    return p


def _quadrant_mass(rho, phi1, phi2, grid, sign1=+1, sign2=+1):
    x = grid.nonnegative
    p = _density(rho, phi1, phi2, sign1 * x, sign2 * x)
    w = simpson_weights(x.size, grid.step)
    return float(w @ p @ w)


def p_plus_plus_oracle(
    rho_c: TruncatedTwoModeState,
    phi1: float,
    phi2: float,
    grid: Optional[QuadratureGrid] = None,
    rtol: float = 1e-6,
    max_refinements: int = 4,
) -> float:
    """Mass of the quadrature density on x1 >= 0, x2 >= 0 (composite Simpson,
    halving the step until successive estimates agree to ``rtol``)."""
    grid = QuadratureGrid.for_state(rho_c, n_half=50) if grid is None else grid
    # normalization check on the 1-D marginals keeps this cheap
    for mode in (1, 2):
        marginal_plus_mass(rho_c, mode, phi1 if mode == 1 else phi2, grid)
    prev = _quadrant_mass(rho_c, phi1, phi2, grid)
    for _ in range(max_refinements):
        grid = grid.refined()
        cur = _quadrant_mass(rho_c, phi1, phi2, grid)
        if abs(cur - prev) < rtol:
            return cur
        prev = cur
    raise GridTooCoarse(f"quadrant mass not converged after {max_refinements} refinements")


def marginal_plus_mass(
    rho_c: TruncatedTwoModeState, mode: int, phi: float, grid: Optional[QuadratureGrid] = None,
    tol: float = 1e-6,
) -> float:
    """Probability that x_phi on one mode is nonnegative."""
    grid = QuadratureGrid.for_state(rho_c, n_half=200) if grid is None else grid
    red = rho_c.reduced(mode)
    a = _rotated_wavefunctions(grid.points, phi, rho_c.dim)
    p = np.einsum("xn,nm,xm->x", a, red, a.conj()).real
    w = simpson_weights(grid.points.size, grid.step)
    total = float(w @ p)
    if abs(total - rho_c.trace()) > tol:
        raise GridTooCoarse(f"marginal integrates to {total!r}, expected {rho_c.trace()!r}")
    half = grid.n_half
    return float(simpson_weights(half + 1, grid.step) @ p[half:])
