# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled per-pixel kernels: alpha blending and patch rasterization.

Semantics must stay bit-identical to ``_kernels_py``; the arithmetic is
written with the exact same operation order (and the extension is built
with -ffp-contract=off so the compiler cannot fuse it).
"""

import numpy as np

from libc.math cimport ceil, floor


def blend(double[:, :, ::1] i_in, double[:, :, ::1] i_out,
          double[:, ::1] alpha):
    """Per-pixel convex combination (1-a)*i_in + a*i_out, clamped to [0,1]."""
    cdef Py_ssize_t h = i_in.shape[0]
    cdef Py_ssize_t w = i_in.shape[1]
    cdef Py_ssize_t c = i_in.shape[2]
    out_arr = np.empty((h, w, c), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x, k
    cdef double a, r
    for y in range(h):
        for x in range(w):
            a = alpha[y, x]
            for k in range(c):
                r = (1.0 - a) * i_in[y, x, k] + a * i_out[y, x, k]
                if r < 0.0:
                    r = 0.0
                elif r > 1.0:
                    r = 1.0
                out[y, x, k] = r
    return out_arr


def fill_rect_max(double[:, ::1] mask, Py_ssize_t x0, Py_ssize_t y0,
                  Py_ssize_t ex, Py_ssize_t ey, double value):
    """Max-combine ``value`` into the ex-by-ey rectangle at (x0, y0)."""
    cdef Py_ssize_t y, x
    for y in range(y0, y0 + ey):
        for x in range(x0, x0 + ex):
            if mask[y, x] < value:
                mask[y, x] = value


def fill_circle_max(double[:, ::1] mask, double cx, double cy,
                    double radius, double value):
    """Max-combine ``value`` into the circle; pixel (x, y) is inside iff its
    center (x+0.5, y+0.5) lies within ``radius`` of (cx, cy)."""
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef Py_ssize_t x_lo = <Py_ssize_t>ceil(cx - radius - 0.5)
    cdef Py_ssize_t x_hi = <Py_ssize_t>floor(cx + radius - 0.5)
    cdef Py_ssize_t y_lo = <Py_ssize_t>ceil(cy - radius - 0.5)
    cdef Py_ssize_t y_hi = <Py_ssize_t>floor(cy + radius - 0.5)
    if x_lo < 0:
        x_lo = 0
    if y_lo < 0:
        y_lo = 0
    if x_hi > w - 1:
        x_hi = w - 1
    if y_hi > h - 1:
        y_hi = h - 1
    cdef double rr = radius * radius
    cdef Py_ssize_t y, x
    cdef double dx, dy
    for y in range(y_lo, y_hi + 1):
        dy = (<double>y + 0.5) - cy
        for x in range(x_lo, x_hi + 1):
            dx = (<double>x + 0.5) - cx
            if dx * dx + dy * dy <= rr:
                if mask[y, x] < value:
                    mask[y, x] = value
