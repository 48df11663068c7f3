import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from elliptica.errors import InvalidDimensionError
from elliptica.metrics import MetricReport, evaluate, mse, psnr, psnr_from_mse, ssim


def naive_ssim(x, y, win=7):
    c1, c2 = 0.01**2, 0.03**2
    vals = []
    for i in range(x.shape[0] - win + 1):
        for j in range(x.shape[1] - win + 1):
            a = x[i : i + win, j : j + win].ravel()
            b = y[i : i + win, j : j + win].ravel()
            ma, mb = a.mean(), b.mean()
            va, vb = ((a - ma) ** 2).mean(), ((b - mb) ** 2).mean()
            cov = ((a - ma) * (b - mb)).mean()
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def test_mse_against_loop(rng):
    a, b = rng.random((5, 4, 3)), rng.random((5, 4, 3))
    total = sum((a[i, j, c] - b[i, j, c]) ** 2 for i in range(5) for j in range(4) for c in range(3))
    assert mse(a, b) == pytest.approx(total / 60, rel=1e-14)


def test_mse_shape_mismatch():
    with pytest.raises(InvalidDimensionError):
        mse(np.zeros((3, 3)), np.zeros((3, 4)))


def test_psnr_known_values():
    assert psnr_from_mse(0.01) == pytest.approx(20.0, abs=1e-12)
    assert psnr_from_mse(0.002240) == pytest.approx(10 * math.log10(1 / 0.002240), abs=1e-12)
    assert psnr_from_mse(0.0) == math.inf


def test_psnr_identical_is_infinite(rng):
    a = rng.random((8, 8, 3))
    assert psnr(a, a) == math.inf


def test_ssim_identical_is_one(rng):
    a = rng.random((12, 12, 3))
    assert ssim(a, a) == 1.0


def test_ssim_matches_window_loop(rng):
    x, y = rng.random((16, 16)), rng.random((16, 16))
    assert ssim(x, y) == pytest.approx(naive_ssim(x, y), abs=1e-10)


def test_ssim_color_is_channel_mean(rng):
    x, y = rng.random((10, 11, 3)), rng.random((10, 11, 3))
    per = np.mean([naive_ssim(x[..., c], y[..., c]) for c in range(3)])
    assert ssim(x, y) == pytest.approx(per, abs=1e-10)


def test_ssim_matches_skimage_population_variant(rng):
    metrics = pytest.importorskip("skimage.metrics")
    x, y = rng.random((24, 20, 3)), rng.random((24, 20, 3))
    ref = metrics.structural_similarity(
        x, y, win_size=7, data_range=1.0, channel_axis=2, use_sample_covariance=False, gaussian_weights=False
    )
    assert ssim(x, y) == pytest.approx(ref, abs=1e-10)


def test_ssim_too_small():
    with pytest.raises(InvalidDimensionError):
        ssim(np.zeros((6, 10)), np.zeros((6, 10)))


@settings(max_examples=25, deadline=None)
@given(
    arrays(np.float64, (9, 9), elements=st.floats(0, 1)),
    arrays(np.float64, (9, 9), elements=st.floats(0, 1)),
)
def test_ssim_symmetric_and_bounded(x, y):
    s = ssim(x, y)
    assert s == pytest.approx(ssim(y, x), abs=1e-12)
    assert -1.0 - 1e-12 <= s <= 1.0 + 1e-12


def test_report_json_round_trip(rng):
    a = rng.random((8, 8, 3))
    rep = evaluate(a, a)
    data = json.loads(rep.to_json())
    assert data["psnr_db"] == "inf"
    assert MetricReport.from_dict(data) == rep
    other = evaluate(a, np.clip(a + 0.1, 0, 1))
    assert MetricReport.from_dict(json.loads(other.to_json())) == other
