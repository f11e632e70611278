"""Cross-checks between the closed forms and the Fock-space oracle.

Each check returns a :class:`CheckResult`; ``run_checks`` drives the
``verify`` subcommand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import analytic, fock_oracle, wigner
from .model import ExperimentParams, standard_phases

# (r, R, eta, phi1, phi2): r in [0.2, 0.8], R in {0.8, 0.95, 0.99}, eta in {0.3, 1}
ORACLE_POINTS = [
    (0.20, 0.80, 0.3, 0.0, math.pi / 4),
    (0.35, 0.95, 1.0, 0.3, math.pi / 5 - 0.3),
    (0.50, 0.99, 0.3, 0.0, math.pi / 3),
    (0.65, 0.80, 1.0, -0.2, math.pi / 4 + 0.2),
    (0.80, 0.95, 0.3, 0.0, 0.1),
    (0.30, 0.99, 1.0, 0.5, 0.5),
    (0.45, 0.80, 0.3, 1.0, 1.0),
    (0.60, 0.95, 1.0, 0.0, 3 * math.pi / 4),
    (0.75, 0.99, 1.0, math.pi / 8, math.pi / 8),
    (0.55, 0.99, 0.3, 0.0, -math.pi / 4),
]

P_PP_TOL = 1e-4
P34_TOL = 1e-8
CHAR_TOL = 1e-7


@dataclass(frozen=True)
class CheckResult:
    """``value`` is compared with ``bound``; most checks are ``|delta| <= tol``."""

    name: str
    value: float
    bound: float
    passed: bool

    @classmethod
    def within(cls, name: str, delta: float, tol: float) -> "CheckResult":
        return cls(name, delta, tol, bool(delta <= tol))

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<44s} value={self.value:.3e}  bound={self.bound:.1e}"


def oracle_point_checks(r, reflectance, eta, phi1, phi2) -> list[CheckResult]:
    params = ExperimentParams(r, reflectance, eta)
    rho_c, p34 = fock_oracle.conditioned_state(r, reflectance, eta)
    tag = f"r={r:g} R={reflectance:g} eta={eta:g} phi={phi1 + phi2:.4f}"
    p_or = fock_oracle.p_plus_plus_oracle(rho_c, phi1, phi2)
    return [
        CheckResult.within(f"p34 {tag}", abs(p34 - analytic.p_joint_click(params)), P34_TOL),
        CheckResult.within(f"P++ {tag}", abs(p_or - analytic.p_plus_plus(params, phi1 + phi2)), P_PP_TOL),
    ]


def char_pipeline_check(r=0.6, reflectance=0.95, eta=0.3, n_points=20, seed=7) -> CheckResult:
    """Directly conditioned characteristic function vs the vacuum-superoperator assembly."""
    theta = math.asin(math.sqrt(reflectance))
    source = fock_oracle.squeezed_state(r)
    rho_c, _ = fock_oracle.condition_on_clicks(fock_oracle.beamsplit_with_vacuum(source, theta), eta)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        l1, l2 = (rng.uniform(0, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi)) for _ in range(2))
        direct = fock_oracle.conditional_char_value(rho_c, l1, l2)
        assembled = fock_oracle.char_via_superoperator(source, theta, eta, l1, l2)
        worst = max(worst, abs(direct - assembled))
    return CheckResult.within(f"char fn pipelines r={r:g} R={reflectance:g} eta={eta:g}", worst, CHAR_TOL)


def marginal_check(r=0.6, reflectance=0.9891, eta=1.0, n_phases=20, seed=11) -> CheckResult:
    rho_c, _ = fock_oracle.conditioned_state(r, reflectance, eta)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for phi in rng.uniform(-np.pi, np.pi, n_phases):
        for mode in (1, 2):
            worst = max(worst, abs(fock_oracle.marginal_plus_mass(rho_c, mode, phi) - 0.5))
    return CheckResult.within("local marginals P_i+ = 1/2", worst, 1e-6)


def resplit_check(r=0.6, reflectance=0.9891, eta=1.0) -> CheckResult:
    rho_c, _ = fock_oracle.conditioned_state(r, reflectance, eta)
    a = fock_oracle.p_plus_plus_oracle(rho_c, math.pi / 8, math.pi / 8)
    b = fock_oracle.p_plus_plus_oracle(rho_c, 0.0, math.pi / 4)
    return CheckResult.within("P++ invariant under arm re-split", abs(a - b), 1e-6)


def wigner_negativity_check(r=0.6, reflectance=0.99, eta=1.0) -> CheckResult:
    """Passes when the conditioned state's Wigner minimum on the slice is negative."""
    rho_c, _ = fock_oracle.conditioned_state(r, reflectance, eta)
    xs = np.linspace(-2.0, 2.0, 21)
    w_min = float(wigner.wigner_slice(rho_c, xs, xs).min())
    return CheckResult("conditioned Wigner minimum < 0", w_min, 0.0, w_min < 0.0)


def wigner_positivity_check(r=0.6) -> CheckResult:
    source = fock_oracle.squeezed_state(r, fock_oracle.DIM_CAP)
    xs = np.linspace(-2.0, 2.0, 21)
    w_min = float(wigner.wigner_slice(source, xs, xs, math.pi).min())
    return CheckResult("squeezed source Wigner >= 0", w_min, -1e-12, w_min >= -1e-12)


def nonlinearity_check(reflectance=0.9, eta=1.0) -> CheckResult:
    theta = math.asin(math.sqrt(reflectance))
    a = fock_oracle.squeezed_state(0.3, 30)
    b = fock_oracle.squeezed_state(0.6, 30)
    w = fock_oracle.nonlinearity_witness(a, b, 0.5, theta, eta)
    return CheckResult("nonlinearity witness > 1e-4", w, 1e-4, w > 1e-4)


def fast_suite() -> list[Callable[[], list[CheckResult]]]:
    return [lambda p=p: oracle_point_checks(*p) for p in ORACLE_POINTS[:3]]


def full_suite() -> list[Callable[[], list[CheckResult]]]:
    jobs = [lambda p=p: oracle_point_checks(*p) for p in ORACLE_POINTS]
    jobs += [
        lambda: [char_pipeline_check()],
        lambda: [marginal_check()],
        lambda: [resplit_check()],
        lambda: [wigner_negativity_check()],
        lambda: [wigner_positivity_check()],
        lambda: [nonlinearity_check()],
    ]
    return jobs


def run_checks(jobs: Iterable[Callable[[], list[CheckResult]]], pmap=map) -> list[CheckResult]:
    out: list[CheckResult] = []
    for results in pmap(lambda job: job(), list(jobs)):
        out.extend(results)
    return out


def identity_scan(n_points: int = 1000, seed: int = 2003) -> dict[str, float]:
    """Worst deviations of the closed-form identities over random parameter points."""
    rng = np.random.default_rng(seed)
    worst = {"ch_identity": 0.0, "chsh_vs_4E": 0.0, "chsh_max": 0.0}
    phases = standard_phases(math.pi / 4)
    for _ in range(n_points):
        params = ExperimentParams(rng.uniform(0.01, 3.0), rng.uniform(0.01, 0.999), rng.uniform(0.01, 1.0))
        chsh = analytic.bell_chsh(params, phases)
        ch = analytic.bell_ch(params, phases)
        e = analytic.correlation_e(params, math.pi / 4)
        worst["ch_identity"] = max(worst["ch_identity"], abs(4 * ch - chsh - 2))
        worst["chsh_vs_4E"] = max(worst["chsh_vs_4E"], abs(chsh - 4 * e))
        worst["chsh_max"] = max(worst["chsh_max"], chsh)
    return worst
