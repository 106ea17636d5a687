import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockforge.fock import (
    CutoffOverflowError,
    FockBasis,
    FockOperator,
    MixedState,
    PerModeCutoff,
    PureState,
    TotalPhotonCutoff,
    apply_annihilation,
    apply_creation,
    coherent_state,
    displacement_operator_for,
    fock_state,
    ladder_matrix,
    number_polynomial,
    partial_trace,
    tensor_product,
    vacuum_state,
)


def test_total_cutoff_dimension_is_binomial():
    for modes in range(1, 5):
        for cut in range(5):
            basis = FockBasis(modes, TotalPhotonCutoff(cut))
            assert basis.dimension == math.comb(modes + cut, modes)


def test_per_mode_cutoff_dimension_is_power():
    basis = FockBasis(3, PerModeCutoff(2))
    assert basis.dimension == 27


def test_index_of_round_trips():
    basis = FockBasis(3, TotalPhotonCutoff(4))
    for i, occ in enumerate(basis.occupations):
        assert basis.index_of(occ) == i
    with pytest.raises(KeyError):
        basis.index_of((5, 0, 0))


def test_pure_state_rejects_norm_above_one():
    basis = FockBasis(1, TotalPhotonCutoff(1))
    with pytest.raises(ValueError):
        PureState(basis, np.array([1.0, 1.0]))
    PureState(basis, np.array([1.0, 1.0]), unchecked=True)


def test_ladder_operators_match_matrix_route():
    basis = FockBasis(2, TotalPhotonCutoff(3))
    rng = np.random.default_rng(5)
    amps = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
    # keep the top photon layer empty so creation stays inside the basis
    for i, occ in enumerate(basis.occupations):
        if sum(occ) == 3:
            amps[i] = 0.0
    amps /= 2.0 * np.linalg.norm(amps)
    state = PureState(basis, amps)
    for mode in range(2):
        up = apply_creation(state, mode)
        up_m = ladder_matrix(basis, mode, "create").matrix @ amps
        assert np.max(np.abs(up.amplitudes - up_m)) < 1e-12
        down = apply_annihilation(state, mode)
        down_m = ladder_matrix(basis, mode, "annihilate").matrix @ amps
        assert np.max(np.abs(down.amplitudes - down_m)) < 1e-12


def test_creation_commutator_is_identity():
    basis = FockBasis(1, TotalPhotonCutoff(6))
    a = ladder_matrix(basis, 0, "annihilate").matrix
    ad = ladder_matrix(basis, 0, "create").matrix
    comm = a @ ad - ad @ a
    # the commutator is the identity away from the truncation edge
    assert np.max(np.abs(comm[:6, :6] - np.eye(7)[:6, :6])) < 1e-12


def test_creation_off_top_level_raises():
    basis = FockBasis(1, TotalPhotonCutoff(2))
    top = fock_state(basis, (2,))
    with pytest.raises(CutoffOverflowError):
        apply_creation(top, 0)


def test_coherent_state_moments():
    alpha = 0.6 - 0.3j
    state = coherent_state(alpha, 24)
    n = np.arange(25)
    mean = float(np.sum(n * np.abs(state.amplitudes) ** 2))
    assert abs(mean - abs(alpha) ** 2) < 1e-10
    assert abs(state.norm() - 1.0) < 1e-10


def test_displacement_displaces_vacuum():
    alpha = 0.4 + 0.2j
    op = displacement_operator_for(alpha, 6)
    u = op.matrix
    moved = u[:, 0]
    target = coherent_state(alpha, u.shape[0] - 1).amplitudes
    # the guarded block is exact; the very top rows may carry truncation
    assert np.max(np.abs(moved[:7] - target[:7])) < 1e-9


def test_displacement_for_top_level_guards_growth():
    op = displacement_operator_for(0.5, 3)
    assert op.basis.policy.max_per_mode >= 3


def test_number_polynomial_diagonal():
    basis = FockBasis(1, TotalPhotonCutoff(4))
    op = number_polynomial((1.0, 0.5, -0.5), 0, basis)
    diag = np.diag(op.matrix).real
    expect = [1.0 + 0.5 * n - 0.5 * n * n for n in range(5)]
    assert np.max(np.abs(diag - expect)) < 1e-12


def test_tensor_product_of_fock_states():
    a = fock_state(FockBasis(1, PerModeCutoff(2)), (1,))
    b = fock_state(FockBasis(1, PerModeCutoff(2)), (2,))
    joint = tensor_product(a, b)
    idx = joint.basis.index_of((1, 2))
    assert abs(joint.amplitudes[idx] - 1.0) < 1e-12
    assert abs(joint.norm() - 1.0) < 1e-12


def test_tensor_product_needs_per_mode_policy():
    a = fock_state(FockBasis(1, TotalPhotonCutoff(2)), (1,))
    b = fock_state(FockBasis(1, TotalPhotonCutoff(2)), (2,))
    with pytest.raises(TypeError):
        tensor_product(a, b)


def test_partial_trace_of_product_state_is_pure():
    a = coherent_state(0.3, 3)
    b = fock_state(FockBasis(1, PerModeCutoff(3)), (1,))
    joint = tensor_product(a, b)
    reduced = partial_trace(joint, (0,))
    pure = np.outer(a.amplitudes, a.amplitudes.conj())
    assert np.max(np.abs(reduced.matrix - pure)) < 1e-12


def test_partial_trace_keeps_trace():
    basis = FockBasis(2, TotalPhotonCutoff(3))
    rng = np.random.default_rng(0)
    m = rng.standard_normal((basis.dimension, basis.dimension))
    rho = m @ m.T
    rho /= np.trace(rho)
    state = MixedState(basis, rho.astype(complex))
    red = partial_trace(state, (1,))
    assert abs(red.trace() - 1.0) < 1e-12


def test_mixed_state_rejects_non_hermitian():
    basis = FockBasis(1, TotalPhotonCutoff(1))
    with pytest.raises(ValueError):
        MixedState(basis, np.array([[0.5, 0.4], [0.1, 0.5]], dtype=complex))


def test_operator_compose_associates_with_matrix_product():
    basis = FockBasis(1, TotalPhotonCutoff(3))
    a = ladder_matrix(basis, 0, "create")
    b = ladder_matrix(basis, 0, "annihilate")
    both = a.compose(b)
    assert np.max(np.abs(both.matrix - a.matrix @ b.matrix)) < 1e-12


@given(st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5))
@settings(max_examples=30, deadline=None)
def test_fock_states_are_orthonormal(n, m):
    basis = FockBasis(1, TotalPhotonCutoff(5))
    sn = fock_state(basis, (n,))
    sm = fock_state(basis, (m,))
    expect = 1.0 if n == m else 0.0
    assert abs(sn.overlap(sm) - expect) < 1e-12


@given(
    st.complex_numbers(max_magnitude=0.8, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=0.8, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=25, deadline=None)
def test_coherent_overlap_closed_form(alpha, beta):
    sa = coherent_state(alpha, 30)
    sb = coherent_state(beta, 30)
    expect = np.exp(
        -0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta
    )
    assert abs(sa.overlap(sb) - expect) < 1e-9
