"""Pixel buffers, paired-sample validation, the blending kernel, and file I/O.

Images are float64 arrays of shape (height, width, channels) with channels
1 (grayscale) or 3 (RGB) and samples in [0, 1]. Files are quantized to 8 bits
only at the I/O boundary; all in-memory math stays in normalized floats.
Alpha masks are 2-D float64 arrays broadcast across channels.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from patchforge import kernels

_AXIS_NAMES = ("height", "width", "channels")


class ShapeError(ValueError):
    """Dimension mismatch between images or masks, naming the offending axis."""


class ValidationError(ValueError):
    """One or more invariant violations; ``violations`` lists all of them."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class PairedSample:
    """A degraded input image registered with its clean ground truth."""

    input: np.ndarray
    target: np.ndarray
    id: str = ""


def image_violations(img, name: str = "image") -> list[str]:
    """Collect every Image-invariant violation of ``img`` (empty list if valid)."""
    problems = []
    if not isinstance(img, np.ndarray):
        return [f"{name}: expected ndarray, got {type(img).__name__}"]
    if img.ndim != 3:
        return [f"{name}: expected 3 dims (height, width, channels), got {img.ndim}"]
    h, w, c = img.shape
    if h < 1:
        problems.append(f"{name}: height must be >= 1, got {h}")
    if w < 1:
        problems.append(f"{name}: width must be >= 1, got {w}")
    if c not in (1, 3):
        problems.append(f"{name}: channels must be 1 or 3, got {c}")
    if not np.issubdtype(img.dtype, np.floating):
        problems.append(f"{name}: dtype must be floating, got {img.dtype}")
    elif img.size:
        lo = float(img.min())
        hi = float(img.max())
        if not np.isfinite(lo) or not np.isfinite(hi):
            problems.append(f"{name}: contains non-finite samples")
        else:
            if lo < 0.0:
                problems.append(f"{name}: sample {lo} below 0")
            if hi > 1.0:
                problems.append(f"{name}: sample {hi} above 1")
    return problems


def validate_image(img, name: str = "image") -> None:
    """Raise :class:`ValidationError` unless ``img`` satisfies the Image invariants."""
    problems = image_violations(img, name)
    if problems:
        raise ValidationError(problems)


def pair_violations(sample: PairedSample) -> list[str]:
    """Collect every violation of a paired sample (dimensions, channels, range)."""
    problems = image_violations(sample.input, "input")
    problems += image_violations(sample.target, "target")
    if (isinstance(sample.input, np.ndarray) and isinstance(sample.target, np.ndarray)
            and sample.input.ndim == 3 and sample.target.ndim == 3):
        for axis, axis_name in enumerate(_AXIS_NAMES):
            a = sample.input.shape[axis]
            b = sample.target.shape[axis]
            if a != b:
                problems.append(f"{axis_name}: input {a} != target {b}")
    return problems


def validate_pair(sample: PairedSample) -> None:
    """Raise :class:`ValidationError` listing all violations; no-op when valid."""
    problems = pair_violations(sample)
    if problems:
        raise ValidationError(problems)


def _check_same_shape(a, b, a_name: str, b_name: str) -> None:
    for axis, axis_name in enumerate(_AXIS_NAMES[:min(a.ndim, b.ndim)]):
        if a.shape[axis] != b.shape[axis]:
            raise ShapeError(
                f"{axis_name} mismatch: {a_name} {a.shape[axis]} != "
                f"{b_name} {b.shape[axis]}")


def blend(i_in: np.ndarray, i_out: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Blend two images through an alpha mask: (1-a)*i_in + a*i_out per pixel.

    The mask is a 2-D field of per-pixel coefficients in [0, 1], broadcast
    across channels. Inputs are untouched; the result is clamped to [0, 1]
    to absorb 1-ulp floating-point excursions at the range edges.
    """
    if i_in.ndim != 3 or i_out.ndim != 3:
        raise ShapeError("images must be 3-D (height, width, channels)")
    if mask.ndim != 2:
        raise ShapeError("mask must be 2-D (height, width)")
    _check_same_shape(i_in, i_out, "i_in", "i_out")
    _check_same_shape(mask, i_in, "mask", "image")
    return kernels.blend(
        np.ascontiguousarray(i_in, dtype=np.float64),
        np.ascontiguousarray(i_out, dtype=np.float64),
        np.ascontiguousarray(mask, dtype=np.float64),
    )


def quantize(img: np.ndarray) -> np.ndarray:
    """Map [0, 1] floats to 8-bit, rounding half away from zero."""
    scaled = np.floor(np.asarray(img, dtype=np.float64) * 255.0 + 0.5)
    return np.clip(scaled, 0.0, 255.0).astype(np.uint8)


def dequantize(buf: np.ndarray) -> np.ndarray:
    """Map 8-bit samples back to [0, 1] floats."""
    return np.asarray(buf, dtype=np.float64) / 255.0


def read_image(path) -> np.ndarray:
    """Read a PNG or JPEG into a normalized float image.

    Grayscale files come back as (H, W, 1), everything else as (H, W, 3);
    palette and alpha variants are converted to RGB.
    """
    with PILImage.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im)[:, :, None]
        else:
            arr = np.asarray(im.convert("RGB"))
    return dequantize(arr)


def write_png(path, img: np.ndarray) -> None:
    """Quantize and write an image as 8-bit PNG (grayscale or RGB)."""
    buf = quantize(img)
    if buf.ndim == 3 and buf.shape[2] == 1:
        buf = buf[:, :, 0]
    mode = "L" if buf.ndim == 2 else "RGB"
    PILImage.fromarray(buf, mode=mode).save(Path(path), format="PNG")
