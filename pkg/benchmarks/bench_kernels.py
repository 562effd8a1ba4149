"""Compare the numba and numpy kernel backends on batched gauge norms and pair extrema.

Usage: python3 benchmarks/bench_kernels.py [--rows 20000] [--support 6] [--repeat 5]
"""
import argparse
import time

import numpy as np

from orlicz import kernels
from orlicz.young import YoungFunction


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--support", type=int, default=6)
    ap.add_argument("--ell", type=int, default=401, help="length of the sequence for pair extrema")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernels.numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    w = 10.0 ** rng.uniform(-3, 3, size=(args.rows, args.support))
    c = rng.uniform(-5, 5, size=(args.rows, args.support))
    ell = np.cumsum(rng.normal(size=args.ell))
    n_max = args.ell // 2

    families = [YoungFunction("power", p=2.0), YoungFunction("exp_minus_one"), YoungFunction("p_log", p=1.5)]
    print(f"{'kernel':<28}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for phi in families:
        code, p, a, tx, ty, sl = phi.kernel_params
        results = {}
        for be in (kernels.numpy_kernels, kernels.numba_kernels):
            be.gauge(code, p, a, tx, ty, sl, w[:2], c[:2], 1e-13)  # compile / warm up
            results[be.name] = best_of(lambda: be.gauge(code, p, a, tx, ty, sl, w, c, 1e-13), args.repeat)
        dmax = np.max(np.abs(results["numpy"][1][0] - results["numba"][1][0]) / results["numba"][1][0])
        tn, tj = results["numpy"][0], results["numba"][0]
        print(f"{'gauge ' + phi.family:<28}{tn:>12.4f}{tj:>12.4f}{tn / tj:>10.1f}   max rel diff {dmax:.1e}")

    results = {}
    for be in (kernels.numpy_kernels, kernels.numba_kernels):
        be.pair_extrema(ell[:8], 2, 0, 7)
        results[be.name] = best_of(lambda: be.pair_extrema(ell, n_max, 0, ell.size - 1), args.repeat)
    same = all(np.allclose(a, b) for a, b in zip(results["numpy"][1], results["numba"][1]))
    tn, tj = results["numpy"][0], results["numba"][0]
    print(f"{'pair_extrema':<28}{tn:>12.4f}{tj:>12.4f}{tn / tj:>10.1f}   agree {same}")


if __name__ == "__main__":
    main()
