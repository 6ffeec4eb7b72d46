"""Timing comparison of the numba kernels against the numpy fallback.

Run:  python benchmarks/bench_backends.py [--quick]

Covers the two hot paths: Monte-Carlo null simulation of the Wald
statistic (dominates p-values, critical values and the experiment
harness) and AR-GARCH path simulation / likelihood evaluation
(dominates model fitting). Both backends consume identical random
streams, so the printed agreement columns double as a consistency
check.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from esbacktest import _rng, momentengine
from esbacktest.backend import get_backend


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    nb = get_backend("numba")
    npb = get_backend("numpy")

    spec = momentengine.preset("global", K=4, Kprime=3, alpha=0.05)
    _, fam, kk, jj = momentengine.encode_conditions(spec)
    jp, jq = momentengine._required_orders(spec)
    key = np.uint64(_rng.stream_key(7, 0))

    scale = 0.25 if args.quick else 1.0
    B, n = int(2000 * scale), 2500
    T, paths = 2500, int(400 * scale)
    Tll = int(100_000 * scale)

    # warm up / compile
    nb.direct_wald_stats(2, 50, 0.05, fam, kk, jj, jp, jq, key, 0, 0, 0.0, 1.0)
    nb.garch_simulate_batch(0.0, 0.05, 0.05, 0.1, 0.85, 5.0, 0.7746, 100, 50, key, 2)

    print(f"{'kernel':<34}{'numba':>10}{'numpy':>10}{'speedup':>9}  agreement")

    t1, s1 = _time(lambda: nb.direct_wald_stats(B, n, 0.05, fam, kk, jj, jp, jq,
                                                key, 0, 0, 0.0, 1.0))
    t2, s2 = _time(lambda: npb.direct_wald_stats(B, n, 0.05, fam, kk, jj, jp, jq,
                                                 key, 0, 0, 0.0, 1.0))
    print(f"{f'null Wald stats B={B} n={n}':<34}{t1:>9.3f}s{t2:>9.3f}s"
          f"{t2 / t1:>8.1f}x  max|diff|={np.abs(s1 - s2).max():.2e}")

    t1, g1 = _time(lambda: nb.garch_simulate_batch(0.0, 0.05, 0.05, 0.1, 0.85, 5.0,
                                                   0.7746, T, 500, key, paths))
    t2, g2 = _time(lambda: npb.garch_simulate_batch(0.0, 0.05, 0.05, 0.1, 0.85, 5.0,
                                                    0.7746, T, 500, key, paths))
    print(f"{f'GARCH paths B={paths} T={T}':<34}{t1:>9.3f}s{t2:>9.3f}s"
          f"{t2 / t1:>8.1f}x  max|diff|={np.abs(g1[0] - g2[0]).max():.2e}")

    y, _, y0 = nb.garch_simulate(0.0, 0.05, 0.05, 0.1, 0.85, 5.0, 0.7746, Tll, 1000, key)
    s2i = float(np.var(y))
    t1, l1 = _time(lambda: nb.garch_neg_loglik(0.0, 0.05, 0.05, 0.1, 0.85, 5.0, y, y0, s2i))
    t2, l2 = _time(lambda: npb.garch_neg_loglik(0.0, 0.05, 0.05, 0.1, 0.85, 5.0, y, y0, s2i))
    print(f"{f'neg log-likelihood T={Tll}':<34}{t1:>9.4f}s{t2:>9.4f}s"
          f"{t2 / t1:>8.1f}x  |diff|={abs(l1 - l2):.2e}")


if __name__ == "__main__":
    main()
