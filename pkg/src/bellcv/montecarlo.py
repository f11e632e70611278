"""Monte-Carlo homodyne records from the conditioned state and CHSH estimates from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .fock_oracle import QuadratureGrid, TruncatedTwoModeState, conditioned_state, quadrature_density
from .model import ExperimentParams, PhaseQuad

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SampleBatch:
    pairs: np.ndarray
    seed: SeedLike
    n: int
    phi1: float
    phi2: float

    def signs(self) -> np.ndarray:
        # nonnegative -> +1, including x == 0
        return np.where(self.pairs >= 0.0, 1, -1)

    def counts(self) -> tuple[int, int, int, int]:
        """(n_pp, n_pm, n_mp, n_mm)."""
        s = self.signs()
        p1, p2 = s[:, 0] > 0, s[:, 1] > 0
        return (
            int(np.count_nonzero(p1 & p2)),
            int(np.count_nonzero(p1 & ~p2)),
            int(np.count_nonzero(~p1 & p2)),
            int(np.count_nonzero(~p1 & ~p2)),
        )


class QuadratureSampler:
    """Tabulated inverse-CDF sampler for the joint density at fixed phases.

    Cell masses come from the trapezoid average of the density at the four
    corners; within a cell the CDF is interpolated linearly, i.e. the position
    is uniform.
    """

    def __init__(self, rho_c: TruncatedTwoModeState, phi1: float, phi2: float,
                 grid: Optional[QuadratureGrid] = None):
        self.grid = QuadratureGrid.for_state(rho_c, n_half=200) if grid is None else grid
        self.phi1, self.phi2 = phi1, phi2
        p = np.clip(quadrature_density(rho_c, phi1, phi2, self.grid), 0.0, None)
        h = self.grid.step
        cells = 0.25 * (p[:-1, :-1] + p[1:, :-1] + p[:-1, 1:] + p[1:, 1:]) * h * h
        self._ncell = cells.shape[1]
        self._flat_cdf = np.cumsum(cells.ravel())
        row_mass = cells.sum(axis=1)
        self._row_cdf = np.cumsum(row_mass)
        self._row_mass = row_mass
        self._total = self._row_cdf[-1]

    def draw(self, n: int, seed: SeedLike) -> SampleBatch:
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.default_rng(seed)
        u = rng.random((n, 2))
        x0, h, nc = self.grid.points[0], self.grid.step, self._ncell

        # marginal of x1
        t1 = u[:, 0] * self._total
        i = np.minimum(np.searchsorted(self._row_cdf, t1, side="right"), nc - 1)
        below = np.where(i > 0, self._row_cdf[i - 1], 0.0)
        f1 = np.clip((t1 - below) / self._row_mass[i], 0.0, 1.0)
        x1 = x0 + h * (i + f1)

        # x2 given the x1 cell, read off the row-major cumulative table
        start = np.where(i > 0, self._flat_cdf[i * nc - 1], 0.0)
        t2 = start + u[:, 1] * self._row_mass[i]
        flat = np.searchsorted(self._flat_cdf, t2, side="right")
        flat = np.clip(flat, i * nc, i * nc + nc - 1)
        j = flat - i * nc
        lo = np.where(flat > 0, self._flat_cdf[flat - 1], 0.0)
        cell_mass = self._flat_cdf[flat] - lo
        with np.errstate(invalid="ignore", divide="ignore"):
            f2 = np.where(cell_mass > 0, (t2 - lo) / cell_mass, 0.5)
        x2 = x0 + h * (j + np.clip(f2, 0.0, 1.0))

        return SampleBatch(np.column_stack([x1, x2]), seed, n, self.phi1, self.phi2)


def sample_quadratures(rho_c: TruncatedTwoModeState, phi1: float, phi2: float, n: int,
                       seed: SeedLike, grid: Optional[QuadratureGrid] = None) -> SampleBatch:
    return QuadratureSampler(rho_c, phi1, phi2, grid).draw(n, seed)


@dataclass(frozen=True)
class BellEstimate:
    b_chsh_hat: float
    stderr: float
    n_per_setting: int
    correlations: tuple[float, ...] = field(default=())
    counts: tuple[tuple[int, int, int, int], ...] = field(default=())
    phi_sums: tuple[float, ...] = field(default=())


def correlation_from_counts(counts: tuple[int, int, int, int]) -> tuple[float, float]:
    """E = (n_pp + n_mm - n_pm - n_mp) / n and its binomial standard error."""
    n_pp, n_pm, n_mp, n_mm = counts
    n = n_pp + n_pm + n_mp + n_mm
    e = (n_pp + n_mm - n_pm - n_mp) / n
    return e, math.sqrt(max(1.0 - e * e, 0.0) / n)


def setting_samplers(rho_c: TruncatedTwoModeState, phases: PhaseQuad,
                     grid: Optional[QuadratureGrid] = None) -> list[tuple[int, QuadratureSampler]]:
    return [(sign, QuadratureSampler(rho_c, p1, p2, grid)) for _, p1, p2, sign in phases.settings()]


def estimate_from_samplers(samplers: list[tuple[int, QuadratureSampler]], n_per_setting: int,
                           seed: int) -> BellEstimate:
    """One independent substream per setting, spawned from ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(len(samplers))
    es, var, counts, sums = [], 0.0, [], []
    total = 0.0
    for (sign, sampler), ss in zip(samplers, streams):
        c = sampler.draw(n_per_setting, ss).counts()
        e, se = correlation_from_counts(c)
        total += sign * e
        var += se * se
        es.append(e)
        counts.append(c)
        sums.append(sampler.phi1 + sampler.phi2)
    return BellEstimate(abs(total), math.sqrt(var), n_per_setting, tuple(es), tuple(counts), tuple(sums))


def estimate_bell(params: ExperimentParams, phases: PhaseQuad, n_per_setting: int, seed: int,
                  dim: Optional[int] = None) -> BellEstimate:
    if n_per_setting < 100:
        raise ValueError("n_per_setting must be at least 100")
    rho_c, _ = conditioned_state(params.r, params.reflectance, params.eta, dim)
    return estimate_from_samplers(setting_samplers(rho_c, phases), n_per_setting, seed)
