"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 2000,5000] [--d 6]

Both backends are run on the same clouds, and their outputs are checked for
equality before timings are reported.
"""

import argparse
import time

import numpy as np

from ballmapper import _pykernels, kernels
from ballmapper.net import _transpose


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", default="1000,5000,20000")
    parser.add_argument("--d", type=int, default=6)
    parser.add_argument("--eps", default="0.5,1,2")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    ck = kernels.compiled_kernels()
    if ck is None:
        raise SystemExit("compiled extension not built; run pip install --no-build-isolation -e .")

    print(f"{'n':>6} {'d':>3} {'eps':>5} {'balls':>6} {'kernel':<6} {'numpy s':>9} {'cython s':>9} {'speedup':>8}")
    for n in (int(v) for v in args.n.split(",")):
        pts = np.random.default_rng(0).standard_normal((n, args.d))
        order = np.arange(n)
        for eps in (float(v) for v in args.eps.split(",")):
            t_py, scan_py = best_of(lambda: _pykernels.greedy_net_scan(pts, eps, 0, order), args.repeat)
            t_c, scan_c = best_of(lambda: ck.greedy_net_scan(pts, eps, 0, order), args.repeat)
            assert all(np.array_equal(a, b) for a, b in zip(scan_py, scan_c))
            centers, ptr, idx = scan_c
            k = len(centers)
            print(f"{n:>6} {args.d:>3} {eps:>5g} {k:>6} {'scan':<6} {t_py:>9.4f} {t_c:>9.4f} {t_py / t_c:>7.1f}x")

            mptr, midx = _transpose(ptr, idx, n)
            t_py, e_py = best_of(lambda: _pykernels.ball_edges(ptr, idx, mptr, midx, k), args.repeat)
            t_c, e_c = best_of(lambda: ck.ball_edges(ptr, idx, mptr, midx, k), args.repeat)
            assert all(np.array_equal(a, b) for a, b in zip(e_py, e_c))
            print(f"{n:>6} {args.d:>3} {eps:>5g} {k:>6} {'edges':<6} {t_py:>9.4f} {t_c:>9.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
