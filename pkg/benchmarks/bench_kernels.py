#!/usr/bin/env python3
"""Time the compiled kernels against their pure numpy twins.

Runs each hot kernel on a realistic workload (the (204,102) outer code with
a 01 marker every 5 coded bits) with both backends in one process and
reports per-call medians plus the speedup ratio.

    python3 benchmarks/bench_kernels.py [--repeats N] [--seed S]
"""
import argparse
import statistics
import time

import numpy as np

from markerdec import _kernels_np, bcjr, ldpc
from markerdec.channel import ChannelParams, transmit
from markerdec.marker import (MarkerConfig, insert_markers, interleave,
                              make_interleaver)
from markerdec.pipeline import resolve_path

try:
    from markerdec import _speedups
except ImportError:
    _speedups = None


def bench(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(
        description="compare compiled and numpy kernel backends")
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    code = ldpc.load_alist(resolve_path("builtin:ldpc_204_102.alist"))
    mcfg = MarkerConfig(marker=(0, 1), nc=5)
    il = make_interleaver(code.n, 1)
    tmpl = bcjr.make_template(mcfg, code.n)
    m = rng.integers(0, 2, code.k).astype(np.uint8)
    x = insert_markers(interleave(code.encode(m), il), mcfg)
    y = transmit(x, ChannelParams(0.05, 0.02), seed=7)
    emit = bcjr.emission_table(tmpl, 0.02)
    alpha, beta, _, _ = _kernels_np.drift_forward_backward(y, emit, 0.05)

    # SPA workload: all-zero codeword pushed to a few-iteration noise level.
    llr = 4.0 + rng.normal(0.0, 2.4, code.n)
    vals = 1.0 - 2.0 * rng.integers(0, 2, 210).astype(np.float64) \
        + rng.normal(0.0, 0.8, 210)

    workloads = [
        ("drift_forward_backward",
         lambda impl: impl.drift_forward_backward(y, emit, 0.05)),
        ("drift_posteriors",
         lambda impl: impl.drift_posteriors(y, emit, 0.05, 0.02, alpha, beta)),
        ("spa_decode", lambda impl: impl.spa_decode(llr, code.cn_idx, 50)),
        ("viterbi_57", lambda impl: impl.viterbi_57(vals)),
    ]
    print(f"{'kernel':24s} {'numpy':>11s} {'cython':>11s} {'speedup':>8s}"
          f"   (median of {args.repeats})")
    for name, call in workloads:
        t_np = bench(lambda: call(_kernels_np), args.repeats)
        if _speedups is None:
            print(f"{name:24s} {t_np * 1e3:9.3f}ms {'n/a':>11s}")
            continue
        t_cy = bench(lambda: call(_speedups), args.repeats)
        print(f"{name:24s} {t_np * 1e3:9.3f}ms {t_cy * 1e3:9.3f}ms"
              f" {t_np / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
