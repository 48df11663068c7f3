import math

import numpy as np
import pytest
from scipy import ndimage

from elliptica.errors import InvalidParameterError
from elliptica.nonlocal_op import (
    KernelSpec,
    gaussian_convolve,
    make_gaussian_kernel,
    operator_mass,
    operator_matrix,
    operator_norm,
)


def reflect(k, n):
    # half-sample symmetric extension: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
    while k < 0 or k >= n:
        k = -k - 1 if k < 0 else 2 * n - 1 - k
    return k


def dense_convolve(u, kernel):
    r = kernel.truncation_radius
    k2 = kernel.kernel_2d
    rows, cols = u.shape
    out = np.zeros_like(u)
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for a in range(-r, r + 1):
                for b in range(-r, r + 1):
                    acc += k2[a + r, b + r] * u[reflect(i + a, rows), reflect(j + b, cols)]
            out[i, j] = acc
    return out


def test_sigma_half_has_radius_two_and_unit_sum():
    k = make_gaussian_kernel(0.5)
    assert k.truncation_radius == 2
    assert k.taps.size == 5
    assert np.array_equal(k.taps, k.taps[::-1])
    assert k.taps.sum() == pytest.approx(1.0, abs=1e-15)


def test_sigma_half_center_tap_by_direct_summation():
    total = sum(math.exp(-(k * k) / 0.5) for k in range(-2, 3))
    center = 1.0 / total
    assert center == pytest.approx(0.78657072588734, rel=1e-13)
    assert make_gaussian_kernel(0.5).taps[2] == pytest.approx(center, rel=1e-15)


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0, 1.7, 3.0])
def test_radius_and_mass(sigma):
    k = make_gaussian_kernel(sigma)
    assert k.truncation_radius == math.ceil(4 * sigma)
    assert k.kernel_2d.sum() == pytest.approx(1.0, abs=1e-14)
    assert operator_mass(k) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("nan")])
def test_invalid_sigma(sigma):
    with pytest.raises(InvalidParameterError):
        make_gaussian_kernel(sigma)


def test_kernel_rejects_asymmetric_taps():
    with pytest.raises(InvalidParameterError):
        KernelSpec(1.0, 1, np.array([0.2, 0.5, 0.3]))


def test_scaled_kernel_mass():
    assert operator_mass(make_gaussian_kernel(1.3).scaled(0.5)) == pytest.approx(0.5, abs=1e-14)


def test_constant_field_preserved():
    u = np.full((9, 11), 0.37)
    out = gaussian_convolve(u, make_gaussian_kernel(2.0))
    assert np.allclose(out, 0.37, rtol=0, atol=1e-15)


def test_linearity(rng):
    k = make_gaussian_kernel(1.5)
    u, v = rng.standard_normal((2, 20, 17))
    lhs = gaussian_convolve(2.0 * u - 0.7 * v, k)
    rhs = 2.0 * gaussian_convolve(u, k) - 0.7 * gaussian_convolve(v, k)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_impulse_response_is_the_kernel():
    k = make_gaussian_kernel(2.0)
    u = np.zeros((21, 21))
    u[10, 10] = 1.0
    out = gaussian_convolve(u, k)
    assert np.allclose(out, dense_convolve(u, k), atol=1e-15)
    r = k.truncation_radius
    assert np.allclose(out[10 - r : 11 + r, 10 - r : 11 + r], k.kernel_2d, atol=1e-15)


@pytest.mark.parametrize("shape, sigma", [((7, 9), 0.5), ((6, 6), 3.0), ((12, 5), 1.0)])
def test_matches_dense_oracle_with_wide_reflection(rng, shape, sigma):
    k = make_gaussian_kernel(sigma)
    u = rng.standard_normal(shape)
    assert np.allclose(gaussian_convolve(u, k), dense_convolve(u, k), atol=1e-13)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 3.0])
def test_agrees_with_scipy_gaussian_filter(rng, sigma):
    u = rng.random((40, 33))
    ref = ndimage.gaussian_filter(u, sigma=sigma, mode="reflect", truncate=4.0)
    assert np.allclose(gaussian_convolve(u, make_gaussian_kernel(sigma)), ref, rtol=0, atol=1e-15)


def test_positivity_preservation(rng):
    k = make_gaussian_kernel(1.2)
    for _ in range(20):
        u = rng.random((15, 15)) * (rng.random((15, 15)) > 0.7)
        assert np.all(gaussian_convolve(u, k) >= 0.0)


def test_norm_bound_on_random_fields(rng):
    k = make_gaussian_kernel(1.0)
    m = operator_mass(k)
    for _ in range(100):
        u = rng.standard_normal((16, 16))
        assert np.linalg.norm(gaussian_convolve(u, k)) <= m * np.linalg.norm(u) * (1 + 1e-14)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.5])
def test_operator_matrix_is_symmetric(sigma):
    A = operator_matrix((6, 6), make_gaussian_kernel(sigma))
    assert np.array_equal(A, A.T)


def test_operator_matrix_matches_convolution(rng):
    k = make_gaussian_kernel(0.8)
    u = rng.standard_normal((5, 7))
    A = operator_matrix(u.shape, k)
    assert np.allclose(A @ u.ravel(), gaussian_convolve(u, k).ravel(), atol=1e-14)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-14)


def test_operator_norm_at_most_mass():
    k = make_gaussian_kernel(1.0)
    assert operator_norm((10, 10), k, interior_only=False) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 < operator_norm((10, 10), k) <= 1.0


def test_operator_is_nearly_positive_semidefinite():
    # truncation plus repeated reflection can push the smallest eigenvalue
    # marginally below zero when the radius exceeds the grid
    for sigma, floor in ((0.5, 0.0), (1.0, 0.0), (3.0, -1e-4)):
        A = operator_matrix((8, 8), make_gaussian_kernel(sigma))
        assert np.linalg.eigvalsh(A).min() > floor
