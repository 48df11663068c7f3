"""Nonlocal smoothing operator: truncated, normalized Gaussian convolution.

The operator is linear and separable. Taps are sampled from
``exp(-k^2 / (2 sigma^2))`` for ``|k| <= radius`` and renormalized so they
sum to one; the 2-D kernel is their outer product. Outside the grid the
field is extended by half-sample reflection (``d c b a | a b c d | d c b a``),
which keeps the induced matrix symmetric and is the default boundary rule of
``scipy.ndimage``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import ndimage

from .errors import InvalidParameterError
from .grid import as_field

TRUNCATE = 4.0


@dataclass(frozen=True)
class KernelSpec:
    """Separable kernel ``gain * outer(taps, taps)``.

    ``taps`` has length ``2 * truncation_radius + 1`` and is symmetric.
    ``gain`` is 1 for every kernel built by :func:`make_gaussian_kernel`.
    """

    sigma: float
    truncation_radius: int
    taps: np.ndarray = field(repr=False)
    gain: float = 1.0

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size != 2 * self.truncation_radius + 1:
            raise InvalidParameterError("taps length must be 2 * truncation_radius + 1")
        if np.any(taps < 0):
            raise InvalidParameterError("taps must be nonnegative")
        if not np.array_equal(taps, taps[::-1]):
            raise InvalidParameterError("taps must be symmetric")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def kernel_2d(self):
        return self.gain * np.outer(self.taps, self.taps)

    def scaled(self, factor):
        """Same kernel with its 2-D weights multiplied by ``factor``."""
        return KernelSpec(self.sigma, self.truncation_radius, self.taps, self.gain * factor)


def make_gaussian_kernel(sigma, truncation_radius=None):
    """Build normalized Gaussian taps with radius ``ceil(4 sigma)`` by default."""
    if not (sigma > 0 and math.isfinite(sigma)):
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if truncation_radius is None:
        truncation_radius = math.ceil(TRUNCATE * sigma)
    truncation_radius = int(truncation_radius)
    if truncation_radius < 1:
        raise InvalidParameterError("truncation_radius must be >= 1")
    k = np.arange(1, truncation_radius + 1, dtype=np.float64)
    half = np.exp(-(k * k) / (2.0 * sigma * sigma))
    raw = np.concatenate([half[::-1], [1.0], half])
    return KernelSpec(float(sigma), truncation_radius, raw / raw.sum())


def gaussian_convolve(u, kernel):
    """Apply the kernel along rows, then columns, with reflect extension."""
    u = as_field(u)
    out = ndimage.correlate1d(u, kernel.taps, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, kernel.taps, axis=1, mode="reflect")
    if kernel.gain != 1.0:
        out *= kernel.gain
    return out


def operator_mass(kernel):
    """Row-sum bound ``M`` of the induced linear map (1 for normalized taps).

    Reflection folds out-of-grid taps back onto grid sites, so every row of
    the matrix sums to ``gain * (sum |taps|)^2`` regardless of grid size.
    """
    return float(abs(kernel.gain) * np.abs(kernel.taps).sum() ** 2)


def operator_matrix(shape, kernel):
    """Dense matrix of the convolution on a grid of ``shape`` (row-major sites).

    Column ``k`` is the response to a unit impulse at site ``k``.
    """
    rows, cols = shape
    return impulse_responses(shape, kernel, np.arange(rows * cols)).T


def operator_norm(shape, kernel, interior_only=True):
    """Measured spectral norm of the operator, optionally restricted to the interior.

    The restricted version is the Lipschitz constant that governs the
    relaxation, where the field is always zero on the boundary.
    """
    A = operator_matrix(shape, kernel)
    if interior_only:
        rows, cols = shape
        idx = np.flatnonzero(
            np.pad(np.ones((rows - 2, cols - 2), dtype=bool), 1)
        )
        A = A[np.ix_(idx, idx)]
    return float(np.linalg.norm(A, 2))


def impulse_responses(shape, kernel, sites):
    """Responses to unit impulses at flat ``sites``, one flattened field per row."""
    rows, cols = shape
    sites = np.asarray(sites)
    impulses = np.zeros((sites.size, rows * cols))
    impulses[np.arange(sites.size), sites] = 1.0
    resp = ndimage.correlate1d(impulses.reshape(-1, rows, cols), kernel.taps, axis=1, mode="reflect")
    resp = ndimage.correlate1d(resp, kernel.taps, axis=2, mode="reflect")
    return kernel.gain * resp.reshape(sites.size, rows * cols)
