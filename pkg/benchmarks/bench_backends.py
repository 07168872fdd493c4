"""Time the numba and numpy kernels on the same workloads and check they agree.

    python benchmarks/bench_backends.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from localdkw import _accel, _kernels
from localdkw.exact_dkw import TailSide, UnitInterval, exceedance_probability
from localdkw.inversion import _solve


def _exceedance_grid():
    eps = np.linspace(1e-3, 0.999, 200).tolist()
    iv = UnitInterval(0.1, 0.6)
    return sum(exceedance_probability(500, e, iv, TailSide.ABOVE) for e in eps)


def _inversion_sweep():
    _solve.cache_clear()
    deltas = np.linspace(0.01, 0.5, 40).tolist()
    return sum(_solve(200, d, 0.0, 0.3, TailSide.BELOW, 1e-7).epsilon for d in deltas)


def _sup_batch():
    u = np.sort(np.random.default_rng(0).random((20_000, 100)), axis=1)
    return float(_kernels.sup_left_batch(u, 0.05, 0.5).sum())


def _running():
    stream = np.random.default_rng(1).random(300)
    return float(_kernels.running_sup(stream, 0.0, 1.0, True).sum())


WORKLOADS = {
    "exceedance n=500 x200 eps": _exceedance_grid,
    "inversion n=200 x40 delta": _inversion_sweep,
    "sup batch 20000x100": _sup_batch,
    "running sup n=300": _running,
}


def bench(repeat):
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    results = {}
    for name in backends:
        _accel.set_backend(name)
        for label, fn in WORKLOADS.items():
            fn()  # warm-up (JIT compile)
            best = float("inf")
            for _ in range(repeat):
                t0 = time.perf_counter()
                value = fn()
                best = min(best, time.perf_counter() - t0)
            results[(name, label)] = (best, value)
    return backends, results


def main():
    parser = argparse.ArgumentParser(description=__doc__, allow_abbrev=False)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends, results = bench(args.repeat)
    print("workload,backend,seconds,checksum")
    for label in WORKLOADS:
        for name in backends:
            sec, val = results[(name, label)]
            print(f"{label},{name},{sec:.4g},{val:.12g}")
    if len(backends) == 2:
        print()
        for label in WORKLOADS:
            t_np, v_np = results[("numpy", label)]
            t_nb, v_nb = results[("numba", label)]
            agree = abs(v_np - v_nb) <= 1e-9 * max(1.0, abs(v_np))
            print(f"{label}: speedup x{t_np / t_nb:.1f}, agree={agree}")


if __name__ == "__main__":
    main()
