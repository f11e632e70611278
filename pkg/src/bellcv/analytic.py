"""Closed-form Bell statistics for click-conditioned homodyne detection of a
two-mode squeezed vacuum, plus threshold and maximum searches in ``r``.

All probabilities depend on the local-oscillator phases only through the sum
``phi1 + phi2``; functions here therefore take that sum directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import mpmath as mp
import numpy as np
from scipy import optimize

from .errors import BellCVError, NoCrossing
from .model import (
    BellResult,
    ClosedFormCoefficients,
    ExperimentParams,
    PhaseQuad,
    standard_phases,
)

TSIRELSON = 2.0 * math.sqrt(2.0)


def coefficients(params: ExperimentParams, phi_sum: float) -> ClosedFormCoefficients:
    sin2, cos2, eta = params.sin2, params.cos2, params.eta
    sh2 = math.sinh(params.r) ** 2

    big_a = sin2 * math.sinh(2.0 * params.r) * math.cos(phi_sum)
    b1 = 1.0 + 2.0 * sin2 * sh2
    d1 = b1 + eta * cos2 * sh2
    d2 = d1 - 2.0 * eta * sin2 * cos2 * sh2
    b2 = math.sqrt(d1 * d2)
    b3 = b1 + eta * (2.0 - eta) * cos2**2 * sh2
    # the differences are written out so they stay exact as eta -> 0
    c2 = -2.0 / (1.0 + eta * cos2 * sh2)
    c3 = 1.0 / (1.0 + eta * (2.0 - eta) * cos2**2 * sh2 + 2.0 * eta * sin2 * cos2 * sh2)

    coeffs = ClosedFormCoefficients(
        big_a=big_a, b1=b1, b2=b2, b3=b3, c1=1.0, c2=c2, c3=c3, d1=d1, d2=d2,
        big_b=params.big_b,
    )
    coeffs.check_guard()
    return coeffs


def p_joint_click(params: ExperimentParams) -> float:
    """Probability that both click detectors fire."""
    big_b = params.big_b
    t2 = math.tanh(params.r) ** 2
    q = 1.0 - big_b
    num = big_b**2 * t2 * (1.0 + q * t2)
    den = (1.0 - q * t2) * (1.0 - q * q * t2)
    return num / den


def _working_digits(p34: float) -> int:
    # the arctan sum is O(p34) built from O(1) terms: spend log10(1/p34) extra digits
    return 20 + max(0, math.ceil(-math.log10(p34)))


def _arctan_sum(params: ExperimentParams, phi_sum: float, p34: float):
    """Sum of c_i arctan(A / sqrt(b_i^2 - A^2)) in extended precision (an mpf)."""
    with mp.workdps(_working_digits(p34)):
        r = mp.mpf(params.r)
        sin2 = mp.mpf(params.reflectance)
        cos2 = 1 - sin2
        eta = mp.mpf(params.eta)
        sh2 = mp.sinh(r) ** 2
        a = sin2 * mp.sinh(2 * r) * mp.cos(mp.mpf(phi_sum))
        b1 = 1 + 2 * sin2 * sh2
        d1 = b1 + eta * cos2 * sh2
        d2 = d1 - 2 * eta * sin2 * cos2 * sh2
        b2 = mp.sqrt(d1 * d2)
        b3 = b1 + eta * (2 - eta) * cos2**2 * sh2
        c2 = -2 / (1 + d1 - b1)
        c3 = 1 / (1 + b3 - b1 + d1 - d2)
        terms = [c * mp.atan(a / mp.sqrt(b * b - a * a)) for c, b in ((1, b1), (c2, b2), (c3, b3))]
        return mp.fsum(terms)


def p_plus_plus(params: ExperimentParams, phi_sum: float) -> float:
    """Probability that both homodyne outcomes are nonnegative.

    The float coefficients are checked against the guard b_i > |A|; the sum
    itself is evaluated with enough digits to survive its O(p34) cancellation.
    """
    coefficients(params, phi_sum)
    p34 = p_joint_click(params)
    s = _arctan_sum(params, phi_sum, p34)
    with mp.workdps(_working_digits(p34)):
        return float(mp.mpf(1) / 4 + s / (2 * mp.pi * mp.mpf(p34)))


def p_plus_marginal(params: ExperimentParams, phi: float) -> float:
    """Single-arm probability of a nonnegative outcome.

    The reduced state of either arm is diagonal in the Fock basis, so its
    quadrature density is even and the answer is 1/2 at every phase.
    """
    return 0.5


def correlation_e(params: ExperimentParams, phi_sum: float) -> float:
    return 4.0 * p_plus_plus(params, phi_sum) - 1.0


def _p_settings(params: ExperimentParams, phases: PhaseQuad) -> tuple[float, float, float, float]:
    """P++ at (phi, varphi, varphi_alt, phi_alt)."""
    return tuple(p_plus_plus(params, s) for s in (phases.phi, phases.varphi, phases.varphi_alt, phases.phi_alt))


def _chsh_from(p: tuple[float, float, float, float]) -> float:
    e = [4.0 * x - 1.0 for x in p]
    return abs(e[0] - e[1] + e[2] + e[3])


def _ch_from(params: ExperimentParams, phases: PhaseQuad, p: tuple[float, float, float, float]) -> float:
    den = p_plus_marginal(params, phases.phi1_alt) + p_plus_marginal(params, phases.phi2)
    return (p[0] - p[1] + p[2] + p[3]) / den


def bell_chsh(params: ExperimentParams, phases: PhaseQuad) -> float:
    return _chsh_from(_p_settings(params, phases))


def bell_ch(params: ExperimentParams, phases: PhaseQuad) -> float:
    return _ch_from(params, phases, _p_settings(params, phases))


def bell_result(params: ExperimentParams, phases: PhaseQuad) -> BellResult:
    """All statistics for one parameter point; P++ and E are reported at ``phases.phi``."""
    p = _p_settings(params, phases)
    return BellResult(
        p_pp=p[0],
        e_corr=4.0 * p[0] - 1.0,
        b_chsh=_chsh_from(p),
        b_ch=_ch_from(params, phases, p),
        p34=p_joint_click(params),
    )


def _chsh_of_r(reflectance: float, eta: float, psi: float):
    phases = standard_phases(psi)

    def f(r: float) -> float:
        return bell_chsh(ExperimentParams(r, reflectance, eta), phases)

    return f


def threshold_r(
    reflectance: float,
    eta: float,
    psi: float = math.pi / 4,
    r_lo: float = 1e-4,
    r_hi: float = 2.0,
    n_coarse: int = 100,
    xtol: float = 1e-7,
) -> float:
    """Smallest ``r`` in ``(r_lo, r_hi]`` where B_CHSH crosses 2 from below.

    A coarse scan locates the first violating grid point and bisection
    refines the crossing between it and its predecessor.
    """
    ExperimentParams(r_lo, reflectance, eta)  # validate R and eta up front
    f = _chsh_of_r(reflectance, eta, psi)
    grid = np.linspace(r_lo, r_hi, n_coarse + 1)
    values = np.array([f(r) for r in grid]) - 2.0
    above = np.flatnonzero(values > 0)
    if above.size == 0:
        raise NoCrossing(
            f"B_CHSH <= 2 on [{r_lo}, {r_hi}] at R = {reflectance}, eta = {eta}, psi = {psi}"
            f" (max {values.max() + 2.0:.6f})"
        )
    i = above[0]
    if i == 0:
        raise NoCrossing(f"B_CHSH already exceeds 2 at the lower bracket end r = {r_lo}")
    return optimize.bisect(lambda r: f(r) - 2.0, grid[i - 1], grid[i], xtol=xtol)


def argmax_r(
    reflectance: float,
    eta: float,
    psi: float = math.pi / 4,
    r_lo: float = 1e-3,
    r_hi: float = 3.0,
    n_coarse: int = 60,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Location and value of the maximum of B_CHSH over ``r``.

    The coarse grid supplies a bracketing triple for a golden-section search.
    """
    ExperimentParams(r_hi, reflectance, eta)
    f = _chsh_of_r(reflectance, eta, psi)
    grid = np.linspace(r_lo, r_hi, n_coarse + 1)
    values = np.array([f(r) for r in grid])
    i = int(np.argmax(values))
    if i == 0 or i == len(grid) - 1:
        # maximum sits on the boundary; nothing to refine
        return float(grid[i]), float(values[i])
    res = optimize.minimize_scalar(
        lambda r: -f(r), bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=tol
    )
    return float(res.x), float(-res.fun)


@dataclass(frozen=True)
class SweepPoint:
    r: float
    reflectance: float
    eta: float
    psi: float
    params: Optional[ExperimentParams]
    result: Optional[BellResult]
    status: str = "ok"


def sweep(
    r_grid: Iterable[float],
    reflectance_grid: Iterable[float],
    eta: float,
    psi: float = math.pi / 4,
) -> list[SweepPoint]:
    """Evaluate every cell of the (r, R) grid, r outer.

    Degenerate cells are returned with ``result=None`` and the error class
    name in ``status`` instead of aborting the sweep.
    """
    phases = standard_phases(psi)
    reflectance_grid = list(reflectance_grid)
    points = []
    for r in r_grid:
        for refl in reflectance_grid:
            try:
                params = ExperimentParams(float(r), float(refl), float(eta))
                result = bell_result(params, phases)
            except BellCVError as exc:
                points.append(SweepPoint(float(r), float(refl), float(eta), psi, None, None,
                                         type(exc).__name__))
                continue
            points.append(SweepPoint(params.r, params.reflectance, params.eta, psi, params, result))
    return points
