"""Parameter and result types shared by the analytic, oracle and sampling code."""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

from .errors import DegenerateConditioning, InternalInconsistency, RangeError

__all__ = [
    "ExperimentParams",
    "PhaseQuad",
    "ClosedFormCoefficients",
    "BellResult",
    "validate_params",
    "standard_phases",
]


@dataclass(frozen=True)
class ExperimentParams:
    """Squeezing ``r``, beam-splitter reflectance ``reflectance`` = sin^2(theta)
    and click-detector efficiency ``eta``.

    Construction validates the point; every point that survives has a
    strictly positive joint click probability.
    """

    r: float
    reflectance: float
    eta: float

    def __post_init__(self):
        values = (self.r, self.reflectance, self.eta)
        if not all(isinstance(v, numbers.Real) and math.isfinite(v) for v in values):
            raise RangeError(f"non-finite parameter in (r, R, eta) = {values}")
        if self.r <= 0:
            raise DegenerateConditioning(f"r = {self.r} <= 0: no photons reach the click detectors")
        if self.reflectance >= 1:
            raise DegenerateConditioning(
                f"reflectance R = {self.reflectance} >= 1: click detectors receive no light"
            )
        if self.eta <= 0:
            raise DegenerateConditioning(f"eta = {self.eta} <= 0: click detectors never fire")
        if self.reflectance <= 0:
            raise RangeError(f"reflectance R = {self.reflectance} must lie in (0, 1)")
        if self.eta > 1:
            raise RangeError(f"eta = {self.eta} must lie in (0, 1]")
        # normalise ints so downstream arithmetic and repr are uniform
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "reflectance", float(self.reflectance))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.reflectance))

    @property
    def sin2(self) -> float:
        return self.reflectance

    @property
    def cos2(self) -> float:
        return 1.0 - self.reflectance

    @property
    def big_b(self) -> float:
        """Effective detector-arm transmission eta * cos^2(theta)."""
        return self.eta * (1.0 - self.reflectance)


def validate_params(r: float, reflectance: float, eta: float) -> ExperimentParams:
    return ExperimentParams(r, reflectance, eta)


@dataclass(frozen=True)
class PhaseQuad:
    """Per-arm local-oscillator phases; the four CHSH phase sums are derived.

    Storing arms rather than sums makes ``phi + phi_alt == varphi + varphi_alt``
    hold by construction.
    """

    phi1: float
    phi1_alt: float
    phi2: float
    phi2_alt: float

    @property
    def phi(self) -> float:
        return self.phi1 + self.phi2

    @property
    def phi_alt(self) -> float:
        return self.phi1_alt + self.phi2_alt

    @property
    def varphi(self) -> float:
        return self.phi1_alt + self.phi2

    @property
    def varphi_alt(self) -> float:
        return self.phi1 + self.phi2_alt

    def sums(self) -> tuple[float, float, float, float]:
        """(phi, phi_alt, varphi, varphi_alt)."""
        return self.phi, self.phi_alt, self.varphi, self.varphi_alt

    def settings(self) -> list[tuple[str, float, float, int]]:
        """The four (label, arm-1 phase, arm-2 phase, CHSH sign) measurement settings."""
        return [
            ("phi", self.phi1, self.phi2, +1),
            ("varphi", self.phi1_alt, self.phi2, -1),
            ("varphi_alt", self.phi1, self.phi2_alt, +1),
            ("phi_alt", self.phi1_alt, self.phi2_alt, +1),
        ]


def standard_phases(psi: float = math.pi / 4) -> PhaseQuad:
    """Arm phases giving sums phi = phi' = psi, varphi = 3 psi, varphi' = -psi."""
    if not math.isfinite(psi):
        raise RangeError(f"psi = {psi} is not finite")
    return PhaseQuad(phi1=0.0, phi1_alt=2.0 * psi, phi2=psi, phi2_alt=-psi)


@dataclass(frozen=True)
class ClosedFormCoefficients:
    big_a: float
    b1: float
    b2: float
    b3: float
    c1: float
    c2: float
    c3: float
    d1: float
    d2: float
    big_b: float

    @property
    def bs(self) -> tuple[float, float, float]:
        return self.b1, self.b2, self.b3

    @property
    def cs(self) -> tuple[float, float, float]:
        return self.c1, self.c2, self.c3

    def check_guard(self) -> None:
        for i, b in enumerate(self.bs, start=1):
            if not b > abs(self.big_a):
                raise InternalInconsistency(f"b{i} = {b!r} <= |A| = {abs(self.big_a)!r}")


@dataclass(frozen=True)
class BellResult:
    p_pp: float
    e_corr: float
    b_chsh: float
    b_ch: float
    p34: float

    def check(self, atol: float = 1e-12) -> None:
        """Raise InternalInconsistency if any result invariant is broken."""
        problems = []
        if not -atol <= self.p_pp <= 0.5 + atol:
            problems.append(f"P++ = {self.p_pp} outside [0, 1/2]")
        if abs(self.e_corr) > 1 + atol:
            problems.append(f"|E| = {abs(self.e_corr)} > 1")
        if not 0 < self.p34 <= 1 + atol:
            problems.append(f"p34 = {self.p34} outside (0, 1]")
        if abs(4 * self.b_ch - self.b_chsh - 2) > atol:
            problems.append(f"4 B_CH - B_CHSH = {4 * self.b_ch - self.b_chsh} != 2")
        if problems:
            raise InternalInconsistency("; ".join(problems))
