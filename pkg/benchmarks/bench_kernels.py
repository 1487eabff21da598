"""Time the classical ensemble kernel under both backends.

    python benchmarks/bench_kernels.py --trajectories 20000 --toggles 200
"""

import argparse
import time

import numpy as np

from qratchet import classical, kernels
from qratchet._accel import numba_available


def bench(backend, args, params):
    bases, freqs = classical.configurations(params)
    holds = classical.draw_holds(params.hold_law, params.mean_hold, args.toggles, params.seed, 0)
    holds = np.tile(holds, (args.trajectories, 1))
    x0 = np.tile([1.0, 1.0], (args.trajectories, 1))
    p0 = np.zeros_like(x0)
    kernels.propagate(x0[:2], p0[:2], holds[:2], bases, freqs, backend=backend)  # warm-up / compile
    best = np.inf
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        energies, *_ = kernels.propagate(x0, p0, holds, bases, freqs, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, energies


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trajectories", type=int, default=20_000)
    parser.add_argument("--toggles", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    params = classical.ClassicalParams(1.0, 2.0, 0.3)
    backends = ["numpy"] + (["numba"] if numba_available() else [])
    results = {b: bench(b, args, params) for b in backends}
    steps = args.trajectories * args.toggles
    for b, (seconds, _) in results.items():
        print(f"{b:>6}: {seconds:8.4f} s  ({steps / seconds / 1e6:6.2f} M segments/s)")
    if len(results) == 2:
        diff = np.max(np.abs(results["numba"][1] - results["numpy"][1]) / results["numpy"][1])
        print(f"speed-up {results['numpy'][0] / results['numba'][0]:.2f}x, max relative difference {diff:.2e}")
    else:
        print("numba not installed; only the numpy backend was timed")


if __name__ == "__main__":
    main()
