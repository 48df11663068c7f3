"""Image quality metrics for images with data range 1.

SSIM uses a 7x7 uniform window evaluated at every position where the window
fits entirely inside the image, with plain (population) means, variances and
covariance, then averages the map. Color images are scored per channel and
averaged.
"""

from dataclasses import asdict, dataclass
import json
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidDimensionError

SSIM_WINDOW = 7
K1, K2 = 0.01, 0.03
DATA_RANGE = 1.0


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b):
    a, b = _pair(a, b)
    d = a - b
    return float(np.mean(d * d))


def psnr_from_mse(value):
    if value == 0:
        return math.inf
    return float(20.0 * math.log10(DATA_RANGE / math.sqrt(value)))


def psnr(a, b):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    return psnr_from_mse(mse(a, b))


def _ssim_channel(x, y):
    c1 = (K1 * DATA_RANGE) ** 2
    c2 = (K2 * DATA_RANGE) ** 2
    w = (SSIM_WINDOW, SSIM_WINDOW)

    def local_mean(z):
        return sliding_window_view(z, w).mean(axis=(-2, -1))

    mx, my = local_mean(x), local_mean(y)
    vx = local_mean(x * x) - mx * mx
    vy = local_mean(y * y) - my * my
    cxy = local_mean(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def ssim(a, b):
    """Mean structural similarity; 2-D inputs or ``(rows, cols, channels)``."""
    a, b = _pair(a, b)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if a.ndim != 3 or min(a.shape[:2]) < SSIM_WINDOW:
        raise InvalidDimensionError(
            f"SSIM needs images at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}"
        )
    return float(np.mean([_ssim_channel(a[..., c], b[..., c]) for c in range(a.shape[2])]))


@dataclass(frozen=True)
class MetricReport:
    mse: float
    psnr_db: float
    ssim: float

    def to_dict(self):
        d = asdict(self)
        if math.isinf(d["psnr_db"]):
            d["psnr_db"] = "inf"
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        p = d["psnr_db"]
        return cls(float(d["mse"]), math.inf if p == "inf" else float(p), float(d["ssim"]))


def evaluate(reference, processed):
    m = mse(reference, processed)
    return MetricReport(m, psnr_from_mse(m), ssim(reference, processed))
