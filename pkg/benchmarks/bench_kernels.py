#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs the blend and rasterization hot paths on realistic image sizes, checks
both backends produce bit-identical results, and prints a timing table
(optionally CSV). The compiled backend is imported directly, so this works
regardless of which backend the package selected at import.

Usage:
    python benchmarks/bench_kernels.py [--repeats 7] [--csv out.csv]
"""

import argparse
import csv
import sys
import time

import numpy as np

from patchforge import _kernels_py

try:
    from patchforge import _kernels
except ImportError:
    _kernels = None

SIZES = [(400, 600), (720, 1280)]


def best_of(repeats, fn, *args):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        timings.append(time.perf_counter() - start)
    return min(timings)


def bench_blend(impl, height, width, repeats):
    gen = np.random.default_rng(1)
    x = gen.random((height, width, 3))
    y = gen.random((height, width, 3))
    a = gen.random((height, width))
    return best_of(repeats, impl.blend, x, y, a), impl.blend(x, y, a)


def bench_rects(impl, height, width, repeats):
    gen = np.random.default_rng(2)
    rects = []
    for _ in range(64):
        ex = int(gen.integers(1, width // 4))
        ey = int(gen.integers(1, height // 4))
        x0 = int(gen.integers(0, width - ex + 1))
        y0 = int(gen.integers(0, height - ey + 1))
        rects.append((x0, y0, ex, ey, float(gen.random())))

    def run():
        mask = np.zeros((height, width))
        for x0, y0, ex, ey, v in rects:
            impl.fill_rect_max(mask, x0, y0, ex, ey, v)
        return mask

    return best_of(repeats, run), run()


def bench_circles(impl, height, width, repeats):
    gen = np.random.default_rng(3)
    circles = []
    for _ in range(64):
        d = int(gen.integers(1, min(width, height) // 4))
        x0 = int(gen.integers(0, width - d + 1))
        y0 = int(gen.integers(0, height - d + 1))
        circles.append((x0 + d / 2.0, y0 + d / 2.0, d / 2.0, float(gen.random())))

    def run():
        mask = np.zeros((height, width))
        for cx, cy, r, v in circles:
            impl.fill_circle_max(mask, cx, cy, r, v)
        return mask

    return best_of(repeats, run), run()


BENCHES = [
    ("blend", bench_blend),
    ("fill_rect_max x64", bench_rects),
    ("fill_circle_max x64", bench_circles),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--csv", help="also write results as CSV")
    args = parser.parse_args(argv)

    if _kernels is None:
        print("compiled backend not built; run pip install -e . first",
              file=sys.stderr)
        return 1

    rows = []
    print(f"{'op':<22} {'size':<10} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for height, width in SIZES:
        for name, bench in BENCHES:
            t_py, out_py = bench(_kernels_py, height, width, args.repeats)
            t_cy, out_cy = bench(_kernels, height, width, args.repeats)
            if not np.array_equal(out_py, out_cy):
                print(f"MISMATCH: {name} at {width}x{height}", file=sys.stderr)
                return 1
            rows.append({
                "op": name,
                "size": f"{width}x{height}",
                "python_ms": t_py * 1e3,
                "compiled_ms": t_cy * 1e3,
                "speedup": t_py / t_cy,
            })
            print(f"{name:<22} {width}x{height:<5} {t_py * 1e3:>8.2f}ms "
                  f"{t_cy * 1e3:>8.2f}ms {t_py / t_cy:>7.2f}x")

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
