"""Color restoration and post-processing pipeline.

Images are float arrays of shape ``(rows, cols, 3)`` with values in [0, 1].
The stages are: per-channel PDE restoration, additive Gaussian noise,
non-local means, and a median filter.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage

from .color import lab_to_rgb, rgb_to_lab
from .errors import InvalidDimensionError, InvalidParameterError
from .solver import solve_pde


def as_rgb(img, name="img"):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidDimensionError(f"{name} must have shape (rows, cols, 3), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class NLMeansParams:
    """Non-local means settings.

    Attributes
    ----------
    template_radius : int
        Patch half-width ``r``; patches are ``(2r+1) x (2r+1)``.
    search_radius : int
        Window half-width ``R``; candidates come from ``(2R+1) x (2R+1)``.
    h : float
        Filtering parameter. Weights are ``exp(-d / h^2)`` where ``d`` is the
        squared patch difference averaged over all patch pixels and channels.
    color_space : {"rgb", "lab"}
        ``"rgb"`` uses one weight field for the three channels. ``"lab"``
        converts to CIE Lab, encodes it in [0, 1] the 8-bit way
        (``L / 100``, ``(a + 128) / 255``, ``(b + 128) / 255``), filters
        lightness and the two chroma channels with separate weight fields,
        and converts back.
    """

    template_radius: int = 3
    search_radius: int = 10
    h: float = 15.0 / 255.0
    color_space: str = "rgb"

    def __post_init__(self):
        if self.template_radius < 1:
            raise InvalidParameterError("template_radius must be >= 1")
        if self.search_radius < self.template_radius:
            raise InvalidParameterError("search_radius must be >= template_radius")
        if not (self.h > 0 and self.h * self.h > 0 and math.isfinite(self.h)):
            raise InvalidParameterError("h must be positive")
        if self.color_space not in ("rgb", "lab"):
            raise InvalidParameterError(f"color_space must be 'rgb' or 'lab', got {self.color_space!r}")


def add_gaussian_noise(img, sigma, seed):
    """Add i.i.d. ``N(0, sigma^2)`` noise and clip to [0, 1].

    Samples come from ``numpy.random.Generator(PCG64(seed)).standard_normal``
    (ziggurat) drawn in C order over ``(rows, cols, channel)``, so a seed
    reproduces bit-exactly across platforms.
    """
    img = as_rgb(img)
    if not sigma >= 0:
        raise InvalidParameterError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.clip(img + sigma * rng.standard_normal(img.shape), 0.0, 1.0)


def _box_mean(a, r):
    """Mean over ``(2r+1)^2`` windows of a 2-D array, shrinking each side by ``r``."""
    k = 2 * r + 1
    c = np.cumsum(np.cumsum(a, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    s = c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]
    return s / (k * k)


def _nl_means(arr, r, R, h2):
    rows, cols, channels = arr.shape
    p = R + r
    pad = np.pad(arr, ((p, p), (p, p), (0, 0)), mode="symmetric")
    base = pad[R : R + rows + 2 * r, R : R + cols + 2 * r]
    acc = np.zeros_like(arr)
    z = np.zeros((rows, cols))
    for di in range(-R, R + 1):
        for dj in range(-R, R + 1):
            shifted = pad[R + di : R + di + rows + 2 * r, R + dj : R + dj + cols + 2 * r]
            if di == 0 and dj == 0:
                w = np.ones((rows, cols))
            else:
                diff = shifted - base
                d = _box_mean(np.einsum("ijc,ijc->ij", diff, diff), r) / channels
                w = np.exp(-d / h2)
            z += w
            acc += w[..., None] * shifted[r : r + rows, r : r + cols]
    return acc / z[..., None]


def nl_means(img, params=NLMeansParams()):
    """Non-local means over a ``(2R+1)^2`` search window.

    Each output pixel is ``sum_q w(p, q) img(q) / sum_q w(p, q)``. The image
    is reflect-extended so every pixel has a full window and full patches.
    The self term contributes weight 1, so the normalizer never vanishes.
    """
    img = as_rgb(img)
    r, R, h2 = params.template_radius, params.search_radius, params.h**2
    if params.color_space == "rgb":
        return _nl_means(img, r, R, h2)
    lab = rgb_to_lab(img)
    light = _nl_means(lab[..., :1] / 100.0, r, R, h2) * 100.0
    chroma = _nl_means((lab[..., 1:] + 128.0) / 255.0, r, R, h2) * 255.0 - 128.0
    return lab_to_rgb(np.concatenate([light, chroma], axis=-1))


def median_filter(img, k=3):
    """Per-channel ``k x k`` median with reflect extension."""
    img = as_rgb(img)
    if int(k) != k or k < 3 or k % 2 == 0:
        raise InvalidParameterError(f"median window must be odd and >= 3, got {k}")
    return ndimage.median_filter(img, size=(int(k), int(k), 1), mode="reflect")


def restore_rgb(img, config, return_reports=False):
    """Run the PDE solver on each channel independently, then clip to [0, 1].

    With ``return_reports`` the per-channel :class:`SolveReport` list is
    returned as a second value.
    """
    img = as_rgb(img)
    out = np.empty_like(img)
    kernel = config.kernel
    reports = []
    for c in range(3):
        out[..., c], rep = solve_pde(np.ascontiguousarray(img[..., c]), config, kernel=kernel)
        reports.append(rep)
    out = np.clip(out, 0.0, 1.0)
    return (out, reports) if return_reports else out


def denoise_stage(restored, noise_sigma, seed, nlm=NLMeansParams(), median_k=3):
    """Noise injection, non-local means, median filter; returns ``(noisy, denoised)``."""
    noisy = add_gaussian_noise(restored, noise_sigma, seed)
    denoised = median_filter(nl_means(noisy, nlm), median_k)
    return noisy, np.clip(denoised, 0.0, 1.0)


def run_pipeline(img, config, noise_sigma, seed, nlm=NLMeansParams(), median_k=3):
    """Restore, degrade, denoise; returns ``(restored, noisy, denoised)``."""
    restored = restore_rgb(img, config)
    noisy, denoised = denoise_stage(restored, noise_sigma, seed, nlm, median_k)
    return restored, noisy, denoised
