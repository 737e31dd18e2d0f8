"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on both backends with identical inputs; the table reports
the best wall time of ``--repeat`` runs and the speed-up of the compiled
backend. Outputs are also compared so a regression in either backend shows
up here as well.
"""

import argparse
import time

import numpy as np

from gbmissing import kernels
from gbmissing.approximant import ApproximantParams
from gbmissing.arith import sieve_primes


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "fc":
        return bool(np.allclose(a, b, rtol=1e-9, atol=1e-9))
    return bool(np.array_equal(a, b))


def cases():
    primes = sieve_primes(int((10**7 + 10**6) ** 0.5) + 1).primes
    rng = np.random.default_rng(0)
    ns = np.arange(10**6 - 10**4, 10**6, dtype=np.uint64)
    ws = rng.random(ns.shape[0])
    alphas = rng.random(200)
    approx = ApproximantParams.build(10**6, 0.27, r4_override=10)
    return {
        "sieve_window 1e6 @ 1e7": lambda b: kernels.sieve_window(10**7, 10**6, primes, backend=b),
        "expsum 1e4 terms x 200": lambda b: kernels.expsum(ns, ws, alphas, backend=b),
        "d4sharp_accumulate H=1e4": lambda b: kernels.d4sharp_accumulate(10**6, 10**4, approx.pm_table, backend=b),
        "farey_sequence Q=1000": lambda b: kernels.farey_sequence(1000, backend=b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speed-up':>10s}{'agree':>7s}")
    for name, fn in cases().items():
        times, outs = [], []
        for b in backends:
            t, out = best_time(lambda: fn(b), args.repeat)
            times.append(t)
            outs.append(out)
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else f"{'':>10s}"
        agree = "yes" if all(same(outs[0], o) for o in outs[1:]) else "NO"
        print(f"{name:28s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times) + speed + f"{agree:>7s}")


if __name__ == "__main__":
    main()
