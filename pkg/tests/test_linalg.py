import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biloc.linalg import jacobi_eigh, jacobi_svd


def _hermitian(rng, n, complex_=True):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


@pytest.mark.parametrize("n,complex_", [(3, False), (4, True), (4, False), (16, True)])
def test_eigh_matches_numpy(rng, n, complex_):
    for _ in range(50):
        a = _hermitian(rng, n, complex_)
        w, v = jacobi_eigh(a)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-11)
        np.testing.assert_allclose(a @ v, v * w, atol=1e-11)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_eigh_diagonal_input_is_returned_sorted():
    w, v = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(w, [-1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_eigh_degenerate_spectrum():
    w, _ = jacobi_eigh(np.eye(4) / 4)
    np.testing.assert_allclose(w, np.full(4, 0.25))


def test_svd_matches_numpy(rng):
    for _ in range(200):
        m = rng.standard_normal((3, 3))
        u, s, v = jacobi_svd(m)
        np.testing.assert_allclose(s, np.linalg.svd(m, compute_uv=False), atol=1e-12)
        np.testing.assert_allclose(u @ np.diag(s) @ v.T, m, atol=1e-12)
        np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-12)


def test_svd_rank_deficient():
    m = np.outer([1.0, 2.0, 0.0], [0.0, 1.0, 1.0])
    u, s, v = jacobi_svd(m)
    np.testing.assert_allclose(s, [np.sqrt(10.0), 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(u @ np.diag(s) @ v.T, m, atol=1e-12)


def test_svd_zero_matrix():
    u, s, v = jacobi_svd(np.zeros((3, 3)))
    np.testing.assert_array_equal(s, np.zeros(3))
    np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
def test_svd_reconstruction_property(m):
    u, s, v = jacobi_svd(m)
    assert np.all(np.diff(s) <= 1e-15)
    assert np.all(s >= 0)
    np.testing.assert_allclose(u @ np.diag(s) @ v.T, m, atol=1e-12)


@pytest.mark.parametrize("scale", [1e-150, 1e-119, 1e150])
def test_svd_extreme_scales(scale):
    m = scale * np.array([[0.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    u, s, v = jacobi_svd(m)
    np.testing.assert_allclose(s / scale, np.linalg.svd(m / scale, compute_uv=False), atol=1e-12)
    np.testing.assert_allclose(u @ np.diag(s / scale) @ v.T, m / scale, atol=1e-12)
