import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockforge.conditioning import (
    AncillaSpec,
    DetectionSpec,
    extract_conditional_operator,
    lift_unitary,
)
from fockforge.fock import FockBasis, MixedState, TotalPhotonCutoff
from fockforge.interferometer import ModeUnitary
from fockforge.lossy import (
    ChannelOperator,
    DetectorModel,
    LossyBSParams,
    choose_T_for_sigma_z,
    dilation_unitary,
    lossy_bs_channel,
    noisy_sigma_z_experiment,
    povm_element,
)


def random_density(basis, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((basis.dimension, basis.dimension))
    m = m + 1j * rng.standard_normal(m.shape)
    rho = m @ m.conj().T
    return MixedState(basis, rho / np.trace(rho))


# ---------------------------------------------------------------------------
# the absorbing element and its dilation


def test_symmetric_slab_structure():
    p = LossyBSParams.symmetric_slab(0.5, 0.3)
    t = p.t_matrix
    assert t[0, 0] == t[1, 1] == 0.5
    assert t[0, 1] == t[1, 0]
    assert abs(t[0, 1] - 1j * math.sqrt(1.0 - 0.25 - 0.09)) < 1e-12
    assert np.max(np.abs(p.a_matrix - 0.3 * np.eye(2))) < 1e-12


def test_slab_closure_rejection():
    with pytest.raises(ValueError):
        LossyBSParams.symmetric_slab(0.9, 0.9)
    with pytest.raises(ValueError):
        LossyBSParams(np.eye(2), 0.5 * np.eye(2))
    with pytest.raises(ValueError):
        LossyBSParams(np.eye(3), np.zeros((3, 3)))


def test_m_matrix_closure_identity():
    for t, a in ((0.5, 0.3), (0.366, 0.2), (0.1, 0.6)):
        p = LossyBSParams.symmetric_slab(t, a)
        m = p.m_matrix()
        lhs = m @ m.conj().T
        rhs = np.eye(2) - p.t_matrix @ p.t_matrix.conj().T
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_m_matrix_breaks_down_at_total_absorption():
    p = LossyBSParams(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(ArithmeticError):
        p.m_matrix()


def test_dilation_unitary():
    p = LossyBSParams.symmetric_slab(0.45, 0.25)
    u = dilation_unitary(p).matrix
    assert u.shape == (4, 4)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12
    assert np.max(np.abs(u[:2, :2] - p.t_matrix)) < 1e-12


# ---------------------------------------------------------------------------
# the generated channel


def test_channel_trace_preservation():
    ch = lossy_bs_channel(LossyBSParams.symmetric_slab(0.5, 0.3), 2)
    rho = random_density(ch.basis, 7)
    out = ch.apply(rho)
    assert abs(out.trace() - 1.0) < 1e-12


def test_channel_kraus_completeness():
    ch = lossy_bs_channel(LossyBSParams.symmetric_slab(0.4, 0.35), 2)
    total = sum(k.conj().T @ k for k in ch.kraus)
    assert np.max(np.abs(total - np.eye(ch.basis.dimension))) < 1e-10
    assert len(ch.kraus) >= 3


def test_channel_rejects_broken_kraus_family():
    ch = lossy_bs_channel(LossyBSParams.symmetric_slab(0.5, 0.3), 1)
    with pytest.raises(ValueError):
        ChannelOperator(ch.basis, ch.extended_unitary, ch.kraus[:1])


def test_lossless_channel_is_the_unitary_lift():
    t = 0.6
    p = LossyBSParams.symmetric_slab(t, 0.0)
    ch = lossy_bs_channel(p, 3)
    assert len(ch.kraus) == 1
    direct = lift_unitary(ModeUnitary(2, p.t_matrix), ch.basis).matrix
    assert np.max(np.abs(ch.kraus[0] - direct)) < 1e-12


def test_vacuum_sector_channel_is_trivial():
    ch = lossy_bs_channel(LossyBSParams.symmetric_slab(0.5, 0.3), 0)
    assert len(ch.kraus) == 1
    assert abs(ch.kraus[0][0, 0] - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# inefficient detectors


def test_povm_completeness_is_exact():
    det = DetectorModel(0.6, 6)
    total = sum(povm_element(n, det).matrix for n in range(7))
    assert np.max(np.abs(total - np.eye(7))) < 1e-12


def test_povm_sharp_at_unit_efficiency():
    det = DetectorModel(1.0, 4)
    for n in range(5):
        diag = np.diag(povm_element(n, det).matrix).real
        want = np.zeros(5)
        want[n] = 1.0
        assert np.max(np.abs(diag - want)) < 1e-12


def test_povm_binomial_entry():
    det = DetectorModel(0.5, 3)
    # two photons arrived, one seen: C(2,1) * 0.5 * 0.5
    assert abs(povm_element(1, det).matrix[2, 2] - 0.5) < 1e-12


def test_povm_validation():
    with pytest.raises(ValueError):
        DetectorModel(1.2, 3)
    with pytest.raises(ValueError):
        povm_element(5, DetectorModel(0.5, 3))


# ---------------------------------------------------------------------------
# the noisy sign-flip experiment


def test_chosen_transmission_endpoints():
    assert abs(choose_T_for_sigma_z(0.0) - (math.sqrt(3.0) - 1.0) / 2.0) < 1e-12
    assert abs(choose_T_for_sigma_z(1.0)) < 1e-12
    with pytest.raises(ValueError):
        choose_T_for_sigma_z(1.5)


def test_chosen_transmission_satisfies_the_doubled_relation():
    # the operating point solves per T = -2 T22, a factor two off the
    # exact sign-flip condition, so the residual against per T = -T22
    # equals the transmission itself
    rep = noisy_sigma_z_experiment(0.3, 0.8, 0.6, 0.8)
    per = rep.extras["per_t"]
    assert abs(per + 2.0 * rep.transmission) < 1e-12
    assert abs(rep.sign_flip_condition_residual - rep.transmission) < 1e-12


def test_branch_weights_sum_to_trace():
    rep = noisy_sigma_z_experiment(0.25, 0.65, 0.8, 0.6)
    total = rep.wanted_weight + rep.detector_weight + rep.absorption_weight
    assert abs(total - rep.output.trace()) < 1e-12


def test_wanted_branch_is_the_conditioned_pure_state():
    c0, c1 = 0.6, 0.8
    rep = noisy_sigma_z_experiment(0.2, 0.75, c0, c1)
    t = rep.transmission
    per = rep.extras["per_t"]
    expect = 0.75 * (c0**2 * t**2 + c1**2 * abs(per) ** 2)
    assert abs(rep.wanted_weight - expect) < 1e-12
    evals = np.linalg.eigvalsh(rep.wanted_matrix)
    assert evals[-1] > 0
    assert np.max(np.abs(evals[:-1])) < 1e-12 * evals[-1]


def test_detector_coefficient_matches_closed_form():
    for a, eta in ((0.0, 0.5), (0.3, 0.7), (0.55, 0.2)):
        rep = noisy_sigma_z_experiment(a, eta, 1.0 / math.sqrt(3.0), math.sqrt(2.0 / 3.0))
        s = math.sqrt(3.0 - 2.0 * a * a)
        assert abs(rep.detector_closed_form - (a**4 - 3.0 + 2.0 * s)) < 1e-12
        assert abs(rep.detector_coefficient - rep.detector_closed_form) < 1e-9
        assert abs(rep.absorption_coefficient - rep.absorption_closed_form) < 1e-9
        assert abs(rep.absorption_closed_form - a * a * (1.0 - a * a)) < 1e-12


def test_detector_coefficient_at_zero_absorption():
    rep = noisy_sigma_z_experiment(0.0, 0.5, 0.0, 1.0)
    assert abs(rep.detector_coefficient - (2.0 * math.sqrt(3.0) - 3.0)) < 1e-9
    assert rep.absorption_weight < 1e-14


def test_unit_efficiency_has_no_detector_branch():
    rep = noisy_sigma_z_experiment(0.4, 1.0, 0.6, 0.8)
    assert rep.detector_weight == 0.0
    # the coefficient falls back to the closed form rather than 0/0
    assert abs(rep.detector_coefficient - rep.detector_closed_form) < 1e-12


def test_perfect_limit_matches_the_ideal_pipeline():
    c0, c1 = 0.6, 0.8
    rep = noisy_sigma_z_experiment(0.0, 1.0, c0, c1)
    t = choose_T_for_sigma_z(0.0)
    r = math.sqrt(1.0 - t * t)
    tm = np.array([[t, 1j * r], [1j * r, t]])
    cond = extract_conditional_operator(
        ModeUnitary(2, tm), (0,), AncillaSpec((1,)), DetectionSpec((1,)), 2
    )
    psi = np.array([c0, c1, 0.0], dtype=complex)
    v = cond.operator.matrix @ psi
    assert np.max(np.abs(rep.output.matrix - np.outer(v, v.conj()))) < 1e-10


def test_experiment_validation():
    with pytest.raises(ValueError):
        noisy_sigma_z_experiment(1.0, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        noisy_sigma_z_experiment(0.2, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        noisy_sigma_z_experiment(0.2, 0.5, 1.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(min_value=0.0, max_value=0.8),
    eta=st.floats(min_value=0.05, max_value=0.99),
)
def test_coefficients_track_closed_forms_everywhere(a, eta):
    rep = noisy_sigma_z_experiment(a, eta, 0.6, 0.8)
    assert abs(rep.detector_coefficient - rep.detector_closed_form) < 1e-8
    assert abs(rep.absorption_coefficient - rep.absorption_closed_form) < 1e-8
    total = rep.wanted_weight + rep.detector_weight + rep.absorption_weight
    assert abs(total - rep.output.trace()) < 1e-10


@settings(max_examples=20, deadline=None)
@given(
    t=st.floats(min_value=0.05, max_value=0.9),
    frac=st.floats(min_value=0.0, max_value=0.95),
)
def test_channel_preserves_trace_everywhere(t, frac):
    a = frac * math.sqrt(1.0 - t * t)
    ch = lossy_bs_channel(LossyBSParams.symmetric_slab(t, a), 2)
    out = ch.apply(random_density(ch.basis, 3))
    assert abs(out.trace() - 1.0) < 1e-10
