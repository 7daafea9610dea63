#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference backend.

Times apply() for every operator with each backend on the same image and
prints per-operator timings plus speedups. The two backends are also
checked for byte equality on every run, since that equivalence is what
makes the fallback safe.

Usage:
    python benchmarks/bench_kernels.py [--width 1280] [--height 720]
                                       [--strength 0.6] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from weathergauge.augment import ALL_OPERATORS, apply
from weathergauge.augment import kernels as active_kernels
from weathergauge.augment.kernels import reference

try:
    from weathergauge.augment.kernels import _core as compiled
except ImportError:
    compiled = None


def _swap_backend(impl) -> None:
    for name in active_kernels.__all__:
        if name == "BACKEND":
            continue
        setattr(active_kernels, name, getattr(impl, name))


def _time_apply(op, image, strength, seed, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = apply(op, image, strength, seed)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=1280)
    ap.add_argument("--height", type=int, default=720)
    ap.add_argument("--strength", type=float, default=0.6)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    image = rng.integers(0, 256, size=(args.height, args.width, 3), dtype=np.uint8)

    if compiled is None:
        print("compiled kernels not built; timing the reference backend only")

    print(
        f"image {args.width}x{args.height}, strength {args.strength}, "
        f"best of {args.repeat} runs"
    )
    header = f"{'operator':<12} {'reference':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    mismatches = 0
    for op in ALL_OPERATORS:
        _swap_backend(reference)
        t_ref, out_ref = _time_apply(op, image, args.strength, args.seed, args.repeat)
        if compiled is not None:
            _swap_backend(compiled)
            t_com, out_com = _time_apply(op, image, args.strength, args.seed, args.repeat)
            equal = np.array_equal(out_ref, out_com)
            mismatches += 0 if equal else 1
            note = "" if equal else "  BYTE MISMATCH"
            print(
                f"{op.value:<12} {t_ref * 1e3:>10.2f}ms {t_com * 1e3:>10.2f}ms "
                f"{t_ref / t_com:>8.1f}x{note}"
            )
        else:
            print(f"{op.value:<12} {t_ref * 1e3:>10.2f}ms {'-':>12} {'-':>9}")

    if compiled is not None:
        print("-" * len(header))
        print("byte equality:", "OK" if mismatches == 0 else f"{mismatches} operators differ")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
