import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from bellcv import analytic, fock_oracle as fo
from bellcv.errors import DegenerateConditioning, DimensionOverflow, TruncationTooCoarse
from bellcv.model import ExperimentParams


def _rand_lambda(rng, scale=1.2):
    return rng.uniform(0, scale) * np.exp(1j * rng.uniform(0, 2 * np.pi))


def _ladder(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1)


# ---------------------------------------------------------------- source


def test_squeezed_char_matches_gaussian_form():
    r = 0.6
    rho = fo.squeezed_state(r)
    rng = np.random.default_rng(3)
    for _ in range(20):
        l1, l2 = _rand_lambda(rng), _rand_lambda(rng)
        got = fo.char_function(rho, l1, l2)
        assert abs(got - fo.squeezed_char_closed_form(l1, l2, r)) < 1e-8


def test_squeezed_char_depends_on_product_not_conjugate_product():
    # a conjugated cross term would make l2 -> conj(l2) a symmetry; it is not one
    rho = fo.squeezed_state(0.6)
    l1, l2 = 0.5 + 0.3j, 0.2 + 0.6j
    assert abs(fo.char_function(rho, l1, l2) - fo.char_function(rho, l1, l2.conjugate())) > 1e-2


def test_tiny_squeezing_is_nearly_vacuum():
    rho = fo.squeezed_state(1e-4)
    assert abs(rho.matrix[0, 0, 0, 0] - 1.0) < 1e-7
    assert rho.mean_photons(1) == pytest.approx(math.sinh(1e-4) ** 2, rel=1e-6)


@pytest.mark.parametrize("r, dim", [(0.3, 12), (0.6, 25), (0.8, 33)])
def test_discarded_weight(r, dim):
    psi, tail = fo.two_mode_squeezed(r, dim)
    assert tail == pytest.approx(math.tanh(r) ** (2 * dim), rel=1e-12)
    assert np.sum(np.abs(psi) ** 2) == pytest.approx(1.0 - tail, abs=1e-14)


def test_coarse_cutoff_rejected():
    with pytest.raises(TruncationTooCoarse):
        fo.two_mode_squeezed(0.8, 10)


def test_dimension_cap():
    with pytest.raises(DimensionOverflow):
        fo.default_dim(2.5)
    assert fo.default_dim(0.8) <= fo.DIM_CAP


def test_mean_photons_sinh2():
    rho = fo.squeezed_state(0.7)
    assert rho.mean_photons(2) == pytest.approx(math.sinh(0.7) ** 2, rel=1e-9)


# ---------------------------------------------------------------- beam splitter


@pytest.mark.parametrize("theta", [0.3, 0.7, 1.2, math.pi / 2])
def test_arm_amplitudes_match_generator(theta):
    n = 9
    a = _ladder(n)
    ah, ad = np.kron(a, np.eye(n)), np.kron(np.eye(n), a)
    U = expm((theta - math.pi / 2) * (ah.conj().T @ ad - ah @ ad.conj().T))
    amp = fo.arm_amplitudes(theta, n)
    for photons in range(5):
        col = U[:, photons * n]
        for k in range(photons + 1):
            assert col[(photons - k) * n + k] == pytest.approx(amp[photons, k], abs=1e-12)


def test_single_photon_split():
    theta = 0.4
    amp = fo.arm_amplitudes(theta, 3)
    assert amp[1, 0] == pytest.approx(math.sin(theta))
    assert amp[1, 1] == pytest.approx(math.cos(theta))


def test_full_reflection_is_identity():
    amp = fo.arm_amplitudes(math.pi / 2, 10)
    assert np.allclose(amp[:, 0], 1.0)
    assert np.allclose(amp[:, 1:], 0.0)


@given(st.floats(0.05, math.pi / 2))
@settings(max_examples=30, deadline=None)
def test_beam_splitter_preserves_photon_number_weight(theta):
    amp = fo.arm_amplitudes(theta, 20)
    assert np.allclose((amp**2).sum(axis=1), 1.0, atol=1e-12)


def test_vacuum_passes_unchanged(theta_of):
    psi = np.zeros((6, 6))
    psi[0, 0] = 1.0
    vac = fo.TruncatedTwoModeState.from_pure(psi)
    split = fo.beamsplit_with_vacuum(vac, theta_of(0.9))
    assert np.allclose(split.homodyne_state().matrix, vac.matrix)
    pops = split.detector_populations()
    assert pops[0, 0] == pytest.approx(1.0)


def test_homodyne_state_is_normalized(theta_of):
    rho = fo.squeezed_state(0.5)
    h = fo.beamsplit_with_vacuum(rho, theta_of(0.8)).homodyne_state()
    assert h.trace() == pytest.approx(rho.trace(), abs=1e-13)


# ---------------------------------------------------------------- conditioning


@pytest.mark.parametrize("eta", [0.3, 1.0])
@pytest.mark.parametrize("r, refl", [(0.4, 0.8), (0.6, 0.9891), (0.75, 0.99)])
def test_p34_matches_closed_form(r, refl, eta):
    _, p34 = fo.conditioned_state(r, refl, eta)
    assert abs(p34 - analytic.p_joint_click(ExperimentParams(r, refl, eta))) < 1e-8


def test_p34_at_unit_efficiency_is_nonvacuum_probability(theta_of):
    split = fo.beamsplit_with_vacuum(fo.squeezed_state(0.5), theta_of(0.9))
    pops = split.detector_populations()
    expected = pops[1:, 1:].sum()
    _, p34 = fo.condition_on_clicks(split, 1.0)
    assert p34 == pytest.approx(expected, abs=1e-13)


def test_vacuum_input_cannot_be_conditioned(theta_of):
    psi = np.zeros((5, 5))
    psi[0, 0] = 1.0
    split = fo.beamsplit_with_vacuum(fo.TruncatedTwoModeState.from_pure(psi), theta_of(0.9))
    with pytest.raises(DegenerateConditioning):
        fo.condition_on_clicks(split, 1.0)


def test_conditioned_state_is_physical(fig3b_state, low_eta_state):
    for rho, _ in (fig3b_state, low_eta_state):
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)
        assert rho.hermiticity_defect() < 1e-12
        assert rho.eigenvalues().min() >= -1e-10


def test_click_probabilities():
    f = fo.click_probabilities(0.3, 5)
    assert f[0] == 0.0
    assert f[1] == pytest.approx(0.3)
    assert f[4] == pytest.approx(1 - 0.7**4)


# ---------------------------------------------------------------- superoperator route


def test_superoperator_vanishes_at_full_reflection():
    rho = fo.squeezed_state(0.5)
    out = fo.apply_vacuum_superoperator(rho, math.pi / 2, 1.0)
    assert np.abs(out.matrix).max() < 1e-15


def test_superoperator_trace_is_p34(theta_of):
    r, refl, eta = 0.6, 0.95, 0.3
    out = fo.apply_vacuum_superoperator(fo.squeezed_state(r), theta_of(refl), eta)
    assert out.trace() == pytest.approx(analytic.p_joint_click(ExperimentParams(r, refl, eta)), abs=1e-12)


def test_superoperator_on_thermal_product(theta_of):
    # for a product of thermal states the two factors act independently
    theta, eta, n1, n2 = theta_of(0.7), 0.6, 0.4, 0.9
    rho = fo.thermal_product(n1, n2, 40)
    out = fo.apply_vacuum_superoperator(rho, theta, eta)
    g = eta * math.cos(theta) ** 2

    def single(nbar):
        # 1 - <(1 - g)^n> for thermal statistics
        return 1.0 - 1.0 / (1.0 + g * nbar)

    assert out.trace() == pytest.approx(single(n1) * single(n2), rel=1e-9)


def test_char_pipelines_agree(low_eta_state, theta_of):
    r, refl, eta = 0.6, 0.95, 0.3
    theta = theta_of(refl)
    source = fo.squeezed_state(r)
    rho_c, _ = fo.condition_on_clicks(fo.beamsplit_with_vacuum(source, theta), eta)
    rng = np.random.default_rng(17)
    for _ in range(20):
        l1, l2 = _rand_lambda(rng, 1.5), _rand_lambda(rng, 1.5)
        direct = fo.conditional_char_value(rho_c, l1, l2)
        assembled = fo.char_via_superoperator(source, theta, eta, l1, l2)
        assert abs(direct - assembled) < 1e-7


# ---------------------------------------------------------------- characteristic function


def test_char_at_origin_is_trace(fig3b_state):
    rho, _ = fig3b_state
    assert fo.char_function(rho, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_char_conjugate_symmetry(fig3b_state):
    rho, _ = fig3b_state
    l1, l2 = 0.4 - 0.2j, -0.3 + 0.5j
    assert fo.char_function(rho, -l1, -l2) == pytest.approx(fo.char_function(rho, l1, l2).conjugate(), abs=1e-12)


def test_displacement_matrix_is_unitary_block():
    D = fo.displacement_matrix(0.7 - 0.4j, 80)
    block = D[:20, :20]
    full = D[:20, :] @ D[:20, :].conj().T
    assert np.allclose(full, np.eye(20), atol=1e-12)
    assert not np.allclose(block @ block.conj().T, np.eye(20), atol=1e-3)


def test_large_displacement_flagged():
    rho = fo.squeezed_state(0.3)
    with pytest.raises(TruncationTooCoarse):
        fo.conditional_char_value(rho, 6.0, 0.0)


# ---------------------------------------------------------------- quadratures


def test_hermite_functions_orthonormal():
    grid = fo.QuadratureGrid.symmetric(8.0, 400)
    psi = fo.hermite_functions(grid.points, 30)
    w = fo.simpson_weights(grid.points.size, grid.step)
    gram = psi.T @ (w[:, None] * psi)
    assert np.allclose(gram, np.eye(30), atol=1e-10)


def test_vacuum_quadrature_variance():
    grid = fo.QuadratureGrid.symmetric(6.0, 200)
    psi0 = fo.hermite_functions(grid.points, 1)[:, 0]
    w = fo.simpson_weights(grid.points.size, grid.step)
    assert w @ (grid.points**2 * psi0**2) == pytest.approx(0.25, abs=1e-12)


def test_density_normalized(fig3b_state):
    rho, _ = fig3b_state
    grid = fo.QuadratureGrid.for_state(rho, n_half=100)
    p = fo.quadrature_density(rho, 0.2, 0.5, grid)
    w = fo.simpson_weights(grid.points.size, grid.step)
    assert w @ p @ w == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("phi", [0.0, 0.9, -2.3])
def test_marginals_are_one_half(fig3b_state, phi):
    rho, _ = fig3b_state
    for mode in (1, 2):
        assert abs(fo.marginal_plus_mass(rho, mode, phi) - 0.5) < 1e-6


def test_orthogonal_phase_sum_gives_quarter(fig3b_state):
    rho, _ = fig3b_state
    assert fo.p_plus_plus_oracle(rho, 0.0, math.pi / 2) == pytest.approx(0.25, abs=1e-6)


def test_resplit_invariance(fig3b_state):
    rho, _ = fig3b_state
    a = fo.p_plus_plus_oracle(rho, math.pi / 8, math.pi / 8)
    b = fo.p_plus_plus_oracle(rho, 0.0, math.pi / 4)
    c = fo.p_plus_plus_oracle(rho, -0.4, math.pi / 4 + 0.4)
    assert abs(a - b) < 1e-6 and abs(a - c) < 1e-6


def test_oracle_matches_closed_form(fig3b_state):
    rho, _ = fig3b_state
    params = ExperimentParams(0.6, 0.9891, 1.0)
    for phi in (0.0, math.pi / 4, 3 * math.pi / 4):
        assert abs(fo.p_plus_plus_oracle(rho, 0.0, phi) - analytic.p_plus_plus(params, phi)) < 1e-4


# ---------------------------------------------------------------- nonlinearity


def test_witness_zero_for_identical_inputs(theta_of):
    a = fo.squeezed_state(0.4, 30)
    assert fo.nonlinearity_witness(a, a, 0.3, theta_of(0.9), 1.0) < 1e-12


def test_witness_positive_and_continuous(theta_of):
    a, b = fo.squeezed_state(0.3, 30), fo.squeezed_state(0.6, 30)
    theta = theta_of(0.9)
    assert fo.nonlinearity_witness(a, b, 0.5, theta, 1.0) > 1e-4
    assert fo.nonlinearity_witness(a, b, 1e-6, theta, 1.0) < 1e-4
