import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from elliptica.errors import InvalidDimensionError
from elliptica.grid import (
    dirichlet_laplacian_eigenvalues,
    dirichlet_laplacian_matrix,
    enforce_dirichlet,
    laplacian,
    norm_l2,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_laplacian_of_zero_is_zero():
    assert np.array_equal(laplacian(np.zeros((3, 3))), np.zeros((3, 3)))


def test_laplacian_center_impulse():
    u = np.zeros((3, 3))
    u[1, 1] = 1.0
    expected = np.zeros((3, 3))
    expected[1, 1] = -4.0
    assert np.array_equal(laplacian(u), expected)


def test_laplacian_of_row_ramp_vanishes():
    u = np.repeat(np.arange(5.0)[:, None], 5, axis=1)
    assert np.array_equal(laplacian(u), np.zeros((5, 5)))


@pytest.mark.parametrize("shape", [(2, 5), (5, 2), (1, 1), (4,)])
def test_laplacian_rejects_small_grids(shape):
    with pytest.raises(InvalidDimensionError):
        laplacian(np.zeros(shape))


def test_rejects_non_finite():
    u = np.zeros((4, 4))
    u[2, 2] = np.nan
    with pytest.raises(ValueError):
        laplacian(u)


@given(arrays(np.float64, (7, 9), elements=finite), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_laplacian_of_affine_field_vanishes(noise, a, b, c):
    i, j = np.indices((7, 9))
    u = a * i + b * j + c
    lap = laplacian(u)
    assert np.allclose(lap, 0.0, atol=1e-10)


def test_laplacian_linearity(rng):
    u, v = rng.standard_normal((2, 32, 32))
    a, b = 1.7, -0.3
    lhs = laplacian(a * u + b * v)
    rhs = a * laplacian(u) + b * laplacian(v)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_laplacian_self_adjoint_on_dirichlet_fields(rng):
    for _ in range(20):
        u, v = (enforce_dirichlet(x) for x in rng.standard_normal((2, 12, 15)))
        left = np.vdot(u, laplacian(v))
        right = np.vdot(laplacian(u), v)
        assert abs(left - right) <= 1e-10 * max(abs(left), 1.0)
        assert np.vdot(u, laplacian(u)) <= 0.0


def test_enforce_dirichlet():
    out = enforce_dirichlet(np.ones((3, 3)))
    expected = np.zeros((3, 3))
    expected[1, 1] = 1.0
    assert np.array_equal(out, expected)


@given(arrays(np.float64, (5, 6), elements=finite))
def test_enforce_dirichlet_idempotent(u):
    once = enforce_dirichlet(u)
    assert np.array_equal(enforce_dirichlet(once), once)
    assert np.array_equal(once[1:-1, 1:-1], u[1:-1, 1:-1])


def test_enforce_dirichlet_leaves_clean_field_alone():
    u = np.zeros((5, 5))
    u[1:-1, 1:-1] = 3.0
    assert np.array_equal(enforce_dirichlet(u), u)


def test_enforce_dirichlet_does_not_mutate():
    u = np.ones((4, 4))
    enforce_dirichlet(u)
    assert np.all(u == 1.0)


@pytest.mark.parametrize(
    "u, expected",
    [
        (np.zeros((4, 4)), 0.0),
        (np.pad([[3.0]], 1), 3.0),
        (np.ones((5, 7)), np.sqrt(35.0)),
    ],
)
def test_norm_l2(u, expected):
    assert norm_l2(u) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=30)
@given(st.integers(3, 12), st.integers(3, 12))
def test_closed_form_eigenvalues_match_dense_matrix(rows, cols):
    ev = np.linalg.eigvalsh(dirichlet_laplacian_matrix(rows, cols))
    lam_min, lam_max = dirichlet_laplacian_eigenvalues(rows, cols)
    assert lam_min == pytest.approx(ev[0], rel=1e-10, abs=1e-12)
    assert lam_max == pytest.approx(ev[-1], rel=1e-10)


def test_dense_matrix_matches_stencil(rng):
    u = enforce_dirichlet(rng.standard_normal((6, 8)))
    A = dirichlet_laplacian_matrix(6, 8)
    assert np.allclose(A @ u[1:-1, 1:-1].ravel(), -laplacian(u)[1:-1, 1:-1].ravel(), atol=1e-13)
