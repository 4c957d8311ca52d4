"""Time the compiled and pure-Python kernels on the same workloads.

    python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

Each row also checks that both backends return identical arrays.
"""
import argparse
import time

import numpy as np

from restricted_mg1 import backend, dist


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000, help="replicas (cycles for the regenerative case)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = backend.available()
    if "cython" not in names:
        print("compiled extension not built; only the Python backend is available")
    d = dist.Exponential(2.0)
    cases = {
        "workload_batch m1 t=10": lambda k: k.workload_batch(1, 0.0, 10.0, 1.0, d, 1, 0, args.n),
        "workload_batch m2 t=10": lambda k: k.workload_batch(2, 0.0, 10.0, 1.0, d, 1, 0, args.n),
        "coupled_batch m1": lambda k: k.coupled_batch(1, 0.0, 1.0, 1.0, d, 1, 0, args.n, 50.0),
        "regenerative m1": lambda k: k.regenerative(1, 1.0, d, 1, args.n, 1.0, 64),
    }
    print(f"{'case':<26}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}{'identical':>11}")
    for label, fn in cases.items():
        times, outs = [], []
        for name in names:
            t, out = best_of(lambda: fn(backend.get(name)), args.repeat)
            times.append(t)
            outs.append(out)
        speed = f"{times[-1] / times[0]:9.1f}x" if len(times) == 2 else f"{'-':>10}"
        ident = same(outs[0], outs[-1])
        print(f"{label:<26}" + "".join(f"{t:11.4f}s" for t in times) + f"{speed}{str(ident):>11}")


if __name__ == "__main__":
    main()
