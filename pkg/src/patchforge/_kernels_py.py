"""Pure-NumPy kernels, bit-identical to the compiled twins in ``_kernels``.

Every expression here mirrors the operation order of the Cython version so
that either backend produces byte-for-byte equal results.
"""

import math

import numpy as np


def blend(i_in, i_out, alpha):
    """Per-pixel convex combination (1-a)*i_in + a*i_out, clamped to [0,1]."""
    a = alpha[:, :, None]
    out = (1.0 - a) * i_in + a * i_out
    np.clip(out, 0.0, 1.0, out=out)
    return out


def fill_rect_max(mask, x0, y0, ex, ey, value):
    """Max-combine ``value`` into the ex-by-ey rectangle at (x0, y0)."""
    region = mask[y0:y0 + ey, x0:x0 + ex]
    np.maximum(region, value, out=region)


def fill_circle_max(mask, cx, cy, radius, value):
    """Max-combine ``value`` into the circle; pixel (x, y) is inside iff its
    center (x+0.5, y+0.5) lies within ``radius`` of (cx, cy)."""
    h, w = mask.shape
    x_lo = max(0, int(math.ceil(cx - radius - 0.5)))
    x_hi = min(w - 1, int(math.floor(cx + radius - 0.5)))
    y_lo = max(0, int(math.ceil(cy - radius - 0.5)))
    y_hi = min(h - 1, int(math.floor(cy + radius - 0.5)))
    if x_lo > x_hi or y_lo > y_hi:
        return
    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64)
    ys = np.arange(y_lo, y_hi + 1, dtype=np.float64)
    dx = (xs + 0.5) - cx
    dy = (ys + 0.5) - cy
    inside = (dx * dx)[None, :] + (dy * dy)[:, None] <= radius * radius
    region = mask[y_lo:y_hi + 1, x_lo:x_hi + 1]
    np.maximum(region, np.where(inside, value, 0.0), out=region)
