import math

import numpy as np
import pytest

from bellcv import analytic, fock_oracle as fo, wigner
from bellcv.errors import TruncationTooCoarse
from bellcv.model import ExperimentParams, standard_phases


def _coherent(beta, dim):
    n = np.arange(dim)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    return np.exp(-0.5 * abs(beta) ** 2 - 0.5 * logfact) * beta**n


def _product(c1, c2):
    return fo.TruncatedTwoModeState.from_pure(np.outer(c1, c2))


def test_vacuum_peak():
    vac = _product(_coherent(0, 6), _coherent(0, 6))
    assert wigner.wigner_value(vac, 0, 0) == pytest.approx((2 / math.pi) ** 2, rel=1e-12)


def test_coherent_product_is_displaced_gaussian():
    b1, b2 = 0.6 - 0.3j, -0.2 + 0.4j
    rho = _product(_coherent(b1, 25), _coherent(b2, 25))
    for a1, a2 in [(0.1, 0.2j), (b1, b2), (0.9 + 0.1j, -0.5)]:
        expected = (2 / math.pi) ** 2 * math.exp(-2 * abs(a1 - b1) ** 2 - 2 * abs(a2 - b2) ** 2)
        assert wigner.wigner_value(rho, a1, a2) == pytest.approx(expected, abs=1e-10)


def test_laguerre_kernels_match_displaced_parity():
    dim = 10
    for alpha in (0.0, 0.3 + 0.4j, -1.1 + 0.2j):
        K = wigner.wigner_kernels(np.array(alpha), dim)
        P = (2 / math.pi) * wigner.displaced_parity(alpha, dim)
        # W = sum rho[n, m] K[m, n] = tr(rho P): K[m, n] is P[m, n]
        assert np.allclose(K, P, atol=1e-12)


def test_displaced_parity_rejects_far_points():
    with pytest.raises(TruncationTooCoarse):
        wigner.displaced_parity(9.0, 20, extra=10)


def test_conditioned_state_is_negative_somewhere(negativity_state):
    xs = np.linspace(-2.0, 2.0, 21)
    w = wigner.wigner_slice(negativity_state, xs, xs)
    assert w.min() < -0.01


def test_squeezed_source_is_nonnegative():
    # the default cutoff leaves a ~1e-9 truncation dip; the full cap resolves it
    source = fo.squeezed_state(0.6, fo.DIM_CAP)
    xs = np.linspace(-2.0, 2.0, 21)
    for phase in (0.0, math.pi / 2, math.pi):
        assert wigner.wigner_slice(source, xs, xs, phase).min() >= -1e-12


def test_squeezed_wigner_matches_gaussian():
    r = 0.5
    source = fo.squeezed_state(r, fo.DIM_CAP)
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    for a1, a2 in [(0.3, -0.3), (0.2 + 0.1j, 0.4 - 0.3j), (0.0, 0.5j)]:
        # Fourier transform of exp(-c/2 (|l1|^2+|l2|^2) + s Re(l1 l2))
        q = c * (abs(a1) ** 2 + abs(a2) ** 2) - 2 * s * (a1 * a2).real
        expected = (2 / math.pi) ** 2 * math.exp(-2 * q)
        assert wigner.wigner_value(source, a1, a2) == pytest.approx(expected, abs=1e-10)


def test_wigner_route_matches_oracle():
    rho, _ = fo.conditioned_state(0.5, 0.95, 1.0)
    via_w = wigner.p_plus_plus_via_wigner(rho, 0.0, math.pi / 4)
    via_x = fo.p_plus_plus_oracle(rho, 0.0, math.pi / 4)
    assert abs(via_w - via_x) < 5e-3
    assert abs(via_w - analytic.p_plus_plus(ExperimentParams(0.5, 0.95, 1.0), math.pi / 4)) < 5e-3


def test_wigner_route_orthogonal_phases(fig3b_state):
    rho, _ = fig3b_state
    assert wigner.p_plus_plus_via_wigner(rho, 0.0, math.pi / 2) == pytest.approx(0.25, abs=5e-3)


def test_unconditioned_source_respects_chsh():
    # a nonnegative Wigner function is a local model for sign-binned homodyne outcomes
    source = fo.squeezed_state(0.6)
    phases = standard_phases(math.pi / 4)
    e = {name: 4 * wigner.p_plus_plus_via_wigner(source, p1, p2, n_half=60) - 1
         for name, p1, p2, _ in phases.settings()}
    chsh = abs(e["phi"] - e["varphi"] + e["varphi_alt"] + e["phi_alt"])
    assert chsh <= 2.0
