"""Time the DTW kernels: compiled (numba) against the pure-numpy fallback.

    python benchmarks/bench_dtw.py
    FLOWRENDER_DISABLE_NUMBA=1 python benchmarks/bench_dtw.py   # fallback only

Both backends are timed in-process when numba is importable; the env flag
only changes which one ``flowrender.metrics.dtw`` dispatches to.
"""

import argparse
import time

import numpy as np

from flowrender import _kernels


def best_of(fn, cost, repeats):
    fn(cost)  # warm-up (triggers compilation for the numba path)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(cost)
        times.append(time.perf_counter() - start)
    return min(times)


def run_pair(accumulate, backtrack):
    def go(cost):
        return backtrack(accumulate(cost))
    return go


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="50,200,800")
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()

    backends = {"numpy": run_pair(_kernels.dtw_accumulate_numpy, _kernels.dtw_backtrack_numpy)}
    if hasattr(_kernels, "dtw_accumulate_numba"):
        backends["numba"] = run_pair(_kernels.dtw_accumulate_numba, _kernels.dtw_backtrack_numba)
    print(f"dispatch: {'numba' if _kernels.HAVE_NUMBA else 'numpy'}")
    rng = np.random.default_rng(0)
    for n in (int(s) for s in args.sizes.split(",")):
        cost = rng.random((n, n))
        row = [f"n={n:5d}"]
        for name, fn in backends.items():
            row.append(f"{name} {best_of(fn, cost, args.repeats) * 1e3:9.3f} ms")
        print("  ".join(row))


if __name__ == "__main__":
    main()
