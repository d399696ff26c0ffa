"""Compare the numba and numpy kernel backends.

Each backend runs in a fresh interpreter with ``SEFPP_BACKEND`` set, so
module-level kernel binding happens exactly as it would for a user. Numba
compile time is excluded by one warm-up call per kernel.

    python benchmarks/bench_backends.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    fn()  # warm-up, triggers JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_cases(repeat):
    from sefpp import kernels

    rng = np.random.default_rng(0)
    M = rng.standard_normal((400, 300))
    v0 = np.full(300, 1 / np.sqrt(300))
    S = rng.standard_normal((6, 6))
    s0 = np.full(6, 1 / np.sqrt(6))
    X = rng.uniform(-1, 1, (1500, 3))
    TX = np.sin(2 * X)
    n = 4
    A1, A2 = 0.3 * rng.standard_normal((n, n)), 0.3 * rng.standard_normal((n, n))
    b1, b2 = rng.standard_normal(n), rng.standard_normal(n)
    D1, D2 = rng.standard_normal((3, n)), rng.standard_normal((3, n))
    steps = 20_000
    alphas = np.full(steps, 0.5)
    taus = 0.05 / (np.arange(steps) + 1.0)

    cases = {
        "power_iteration 6x6": lambda: kernels.power_iteration(S, s0, 1e-12, 10_000),
        "power_iteration 400x300": lambda: kernels.power_iteration(M, v0, 1e-12, 10_000),
        "pairwise_lipschitz 1500 pts": lambda: kernels.pairwise_lipschitz(X, TX),
        "affine_sefpp_run 20k steps": lambda: kernels.affine_sefpp_run(
            A1, b1, A2, b2, D1, D2, 0.1, 0.2, 0.1, 0.2, alphas, taus, np.ones(n), np.ones(n), 0.0),
    }
    return kernels.BACKEND, {name: _best(fn, repeat) for name, fn in cases.items()}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        backend, timings = run_cases(args.repeat)
        print(json.dumps({"backend": backend, "timings": timings}))
        return 0

    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SEFPP_BACKEND=backend)
        proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{backend}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        out = json.loads(proc.stdout)
        results[out["backend"]] = out["timings"]

    names = next(iter(results.values())).keys() if results else []
    print(f"{'kernel':<30}" + "".join(f"{b:>12}" for b in results) + f"{'speedup':>10}")
    for name in names:
        row = [results[b][name] for b in results]
        speed = ""
        if {"numpy", "numba"} <= results.keys():
            speed = f"{results['numpy'][name] / results['numba'][name]:>9.1f}x"
        print(f"{name:<30}" + "".join(f"{t * 1e3:>10.3f}ms" for t in row) + speed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
