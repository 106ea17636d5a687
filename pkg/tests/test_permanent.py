import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockforge.interferometer import random_unitary
from fockforge.permanent import (
    PermanentSizeError,
    check_appendix_bounds,
    permanent_naive,
    permanent_ryser,
    repeated_index_permanent,
    subpermanent,
)

from oracles import permanent_expansion


def _random_complex(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def test_known_small_values():
    assert permanent_ryser(np.array([[3.0 + 0j]])) == 3.0
    m = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    assert abs(permanent_ryser(m) - 10.0) < 1e-12
    ones = np.ones((4, 4), dtype=complex)
    assert abs(permanent_ryser(ones) - math.factorial(4)) < 1e-10


def test_ryser_matches_naive_up_to_seven():
    for n in range(1, 8):
        for seed in range(3):
            m = _random_complex(n, 100 * n + seed)
            a = permanent_ryser(m)
            b = permanent_naive(m)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_ryser_matches_polynomial_expansion_oracle():
    for n in range(1, 5):
        u = random_unitary(n, n).matrix
        assert abs(permanent_ryser(u) - permanent_expansion(u)) < 1e-10


def test_size_limits():
    with pytest.raises(PermanentSizeError):
        permanent_naive(np.eye(10, dtype=complex))
    with pytest.raises(PermanentSizeError):
        permanent_ryser(np.eye(31, dtype=complex))


def test_subpermanent_expands_by_minors():
    m = _random_complex(4, 7)
    # Laplace-style expansion of the permanent along the first row
    total = sum(m[0, j] * subpermanent(m, [0], [j]) for j in range(4))
    assert abs(total - permanent_ryser(m)) < 1e-10


def test_repeated_index_permanent_matches_explicit_expansion():
    m = _random_complex(3, 11)
    big = m[np.ix_([0, 0, 1, 2], [0, 1, 1, 2])]
    direct = permanent_ryser(big)
    packed = repeated_index_permanent(m, (2, 1, 1), (1, 2, 1))
    assert abs(direct - packed) < 1e-10


def test_repeated_index_rejects_mismatched_totals():
    m = _random_complex(3, 1)
    with pytest.raises(ValueError):
        repeated_index_permanent(m, (2, 0, 0), (1, 0, 0))


def test_appendix_bounds_clean_on_defaults():
    rep = check_appendix_bounds(7, 300, 0)
    assert rep.unitary_bound_violations == 0
    assert rep.marcus_newman_violations == 0
    assert rep.su3_bound_violations == 0
    assert rep.max_abs_permanent <= 1.0 + 1e-12
    assert rep.max_abs_subpermanent <= 1.0 + 1e-12
    assert rep.max_marcus_newman_ratio <= 1.0 + 1e-9
    assert rep.max_su3_phase_ratio <= 1.0 + 1e-10


def test_appendix_bounds_rejects_large_dimension():
    with pytest.raises(ValueError):
        check_appendix_bounds(8, 10, 0)


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=1000))
@settings(max_examples=30, deadline=None)
def test_permanent_is_permutation_invariant(n, seed):
    m = _random_complex(n, seed)
    rng = np.random.default_rng(seed + 1)
    pr = rng.permutation(n)
    pc = rng.permutation(n)
    a = permanent_ryser(m)
    b = permanent_ryser(m[np.ix_(pr, pc)])
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=0, max_value=1000),
    st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=30, deadline=None)
def test_permanent_is_linear_in_one_row(n, seed, scale):
    m = _random_complex(n, seed)
    scaled = m.copy()
    scaled[0] *= scale
    a = permanent_ryser(m)
    b = permanent_ryser(scaled)
    assert abs(b - scale * a) <= 1e-9 * max(1.0, abs(scale) * abs(a))


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=1000))
@settings(max_examples=30, deadline=None)
def test_transpose_invariance(n, seed):
    m = _random_complex(n, seed)
    a = permanent_ryser(m)
    b = permanent_ryser(m.T)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))
