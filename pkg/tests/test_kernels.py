import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordertail import kernels


def _random_inputs(seed, m=5000, n=4):
    rng = np.random.default_rng(seed)
    x = rng.pareto(2.0, (m, n)) + 1.0
    c = rng.random(n) * 2.0
    return x, c


def test_weighted_sums_matches_brute_force():
    x, c = _random_inputs(0, m=500)
    out = kernels.weighted_sums(x, c)
    expect = np.array([np.sort(row)[::-1] @ c for row in x])
    np.testing.assert_allclose(out, expect, rtol=1e-13)


def test_backends_bit_identical_weighted_sums():
    if not kernels.NUMBA_ENABLED:
        pytest.skip("numba backend disabled in this run")
    x, c = _random_inputs(1)
    a = kernels._weighted_sums_numba(x, c)
    b = kernels.weighted_sums_numpy(x, c)
    np.testing.assert_array_equal(a, b)


def test_backends_bit_identical_varying_c0():
    if not kernels.NUMBA_ENABLED:
        pytest.skip("numba backend disabled in this run")
    x, _ = _random_inputs(2)
    rng = np.random.default_rng(3)
    c0 = rng.random(x.shape[0]) + 0.5
    rest = rng.random(x.shape[1] - 1)
    a = kernels._weighted_sums_varying_c0_numba(x, c0, rest)
    b = kernels.weighted_sums_varying_c0_numpy(x, c0, rest)
    np.testing.assert_array_equal(a, b)


def test_backends_bit_identical_fgm_density():
    if not kernels.NUMBA_ENABLED:
        pytest.skip("numba backend disabled in this run")
    rng = np.random.default_rng(4)
    u = rng.random((4000, 3))
    idx, off, th = kernels.encode_subsets([(0, 1), (0, 2), (1, 2), (0, 1, 2)], [0.5, -0.3, 0.2, 0.5])
    a = kernels._fgm_density_numba(u, idx, off, th)
    b = kernels.fgm_density_numpy(u, idx, off, th)
    np.testing.assert_array_equal(a, b)


def test_fgm_density_closed_form_bivariate():
    u = np.array([[0.1, 0.9], [0.5, 0.5], [0.0, 0.0]])
    idx, off, th = kernels.encode_subsets([(0, 1)], [0.7])
    out = kernels.fgm_density(u, idx, off, th)
    expect = 1.0 + 0.7 * (1.0 - 2.0 * u[:, 0]) * (1.0 - 2.0 * u[:, 1])
    np.testing.assert_allclose(out, expect, rtol=1e-15)


def test_varying_c0_reduces_to_fixed():
    x, c = _random_inputs(5)
    c0 = np.full(x.shape[0], c[0])
    a = kernels.weighted_sums_varying_c0(x, c0, c[1:])
    b = kernels.weighted_sums(x, c)
    np.testing.assert_array_equal(a, b)


def test_shape_validation():
    with pytest.raises(ValueError):
        kernels.weighted_sums(np.ones((3, 2)), np.ones(3))
    with pytest.raises(ValueError):
        kernels.weighted_sums_varying_c0(np.ones((3, 2)), np.ones(2), np.ones(1))


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_weighted_sums_row_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.random((20, n))
    c = rng.random(n)
    perm = rng.permutation(n)
    np.testing.assert_array_equal(
        kernels.weighted_sums(x, c), kernels.weighted_sums(x[:, perm], c)
    )
