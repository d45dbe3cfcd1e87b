"""Full-reference image quality metrics: PSNR and single-scale SSIM.

PSNR works in the normalized [0, 1] domain with peak 1.0. SSIM follows the
original sliding-Gaussian-window formulation (11x11 window, sigma 1.5,
k1=0.01, k2=0.03) evaluated on luma; color inputs are converted with
Rec.601 weights first. Identical images are reported as an infinite PSNR
sentinel, which batch reports exclude from means (with a count) and
serialize as the string "inf", never as a float infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from patchforge.imgcore import ShapeError

_REC601 = (0.299, 0.587, 0.114)


class EmptyInputError(ValueError):
    """A metric batch needs at least one pair."""


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be > 0")


@dataclass(frozen=True)
class MetricReport:
    """Aggregate means plus the per-image values they were computed from."""

    psnr_db: float
    ssim: float
    per_image: list = field(default_factory=list)
    psnr_excluded: int = 0

    def to_dict(self) -> dict:
        return {
            "psnr_db": _json_value(self.psnr_db),
            "ssim": self.ssim,
            "psnr_excluded": self.psnr_excluded,
            "per_image": [
                {"id": i, "psnr_db": _json_value(p), "ssim": s}
                for i, p, s in self.per_image
            ],
        }

    def render(self) -> str:
        psnr = "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.2f}"
        return f"{psnr} / {self.ssim:.2f} / n/a"


def _json_value(x: float):
    return "inf" if math.isinf(x) else x


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 3 or b.ndim != 3:
        raise ShapeError("images must be 3-D (height, width, channels)")
    for axis, name in enumerate(("height", "width", "channels")):
        if a.shape[axis] != b.shape[axis]:
            raise ShapeError(f"{name} mismatch: {a.shape[axis]} != {b.shape[axis]}")


def to_luma(img: np.ndarray) -> np.ndarray:
    """Collapse to a 2-D luma plane (Rec.601 for RGB, squeeze for grayscale)."""
    if img.shape[2] == 1:
        return np.asarray(img[:, :, 0], dtype=np.float64)
    r, g, b = _REC601
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE) over all samples; math.inf when MSE is zero."""
    _check_pair(a, b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(coords * coords) / (2.0 * sigma * sigma))
    win = np.outer(g, g)
    return win / win.sum()


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over sliding Gaussian-weighted windows.

    Windowed means/variances/covariance feed the standard
    luminance-contrast-structure product; only fully valid window positions
    contribute (no padding).
    """
    _check_pair(a, b)
    h, w = a.shape[:2]
    if min(h, w) < params.window_size:
        raise ShapeError(
            f"image {w}x{h} smaller than SSIM window {params.window_size}")
    x = to_luma(a)
    y = to_luma(b)
    win = _gaussian_window(params.window_size, params.window_sigma)
    mu_x = convolve2d(x, win, mode="valid")
    mu_y = convolve2d(y, win, mode="valid")
    var_x = convolve2d(x * x, win, mode="valid") - mu_x * mu_x
    var_y = convolve2d(y * y, win, mode="valid") - mu_y * mu_y
    cov = convolve2d(x * y, win, mode="valid") - mu_x * mu_y
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def batch_report(pairs, ids=None, params: SsimParams = SsimParams()) -> MetricReport:
    """Per-image PSNR/SSIM plus means; infinite PSNR entries are excluded
    from the mean and counted instead.

    ``pairs`` may be a lazy iterable; images are released as soon as their
    metrics are computed, so large datasets never sit in memory at once.
    """
    per_image = []
    for index, (a, b) in enumerate(pairs):
        sample_id = ids[index] if ids is not None else str(index)
        per_image.append((sample_id, psnr(a, b), ssim(a, b, params)))
    if not per_image:
        raise EmptyInputError("metric batch is empty")
    finite = [p for _, p, _ in per_image if not math.isinf(p)]
    excluded = len(per_image) - len(finite)
    psnr_mean = float(np.mean(finite)) if finite else math.inf
    ssim_mean = float(np.mean([s for _, _, s in per_image]))
    return MetricReport(
        psnr_db=psnr_mean,
        ssim=ssim_mean,
        per_image=per_image,
        psnr_excluded=excluded,
    )
