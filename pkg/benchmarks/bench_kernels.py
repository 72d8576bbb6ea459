"""Compare the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py            # kernels + end-to-end trials
    python benchmarks/bench_kernels.py --no-e2e   # kernels only

The end-to-end section runs the Monte Carlo driver in a subprocess per backend
(the backend is fixed at import time by UCMVDR_BACKEND).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ucmvdr import kernels

E2E_SNIPPET = """
import time
from ucmvdr import load_config, run_experiment, BACKEND
from ucmvdr.experiment import run_trials
cfg = load_config("paper_fig3.cfg").replace(n_trials={trials}, methods=("SMI", "UC"))
run_trials(cfg.replace(n_trials=2))  # warm-up / JIT
t = time.perf_counter()
run_trials(cfg)
print(BACKEND, time.perf_counter() - t)
"""


def _inputs(rng, n):
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    return {
        "steering_matrix": (n, 0.5, rng.uniform(-1, 1, 2001)),
        "array_response": (c(n), 0.5, rng.uniform(-1, 1, 2001)),
        "sample_covariance": (c(n, n + 1),),
        "poly_from_zeros": (c(n - 1),),
        "polyval_zinv": (c(n), np.exp(1j * rng.uniform(-np.pi, np.pi, 2001))),
        "project_angles": (rng.uniform(-np.pi, np.pi, n - 1), 0.0, 2 * np.pi / n),
    }


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18} {'N':>4} {'numba [us]':>11} {'numpy [us]':>11} {'speedup':>8}")
    for n in sizes:
        for name, args in _inputs(rng, n).items():
            loop, vec = kernels.PAIRS[name]
            loop(*args)  # compile
            t_nb = min(timeit.repeat(lambda: loop(*args), number=repeat, repeat=5)) / repeat
            t_np = min(timeit.repeat(lambda: vec(*args), number=repeat, repeat=5)) / repeat
            print(f"{name:<18} {n:>4} {t_nb * 1e6:>11.2f} {t_np * 1e6:>11.2f} {t_np / t_nb:>8.2f}")


def bench_e2e(trials):
    print(f"\nend-to-end: {trials} trials of SMI + UC")
    for backend in ("numba", "numpy"):
        env = dict(os.environ, UCMVDR_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", E2E_SNIPPET.format(trials=trials)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<6} {float(out[1]):8.3f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--sizes", type=int, nargs="+", default=[11, 32])
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--no-e2e", action="store_true")
    args = p.parse_args()
    bench_kernels(args.sizes, args.repeat)
    if not args.no_e2e:
        bench_e2e(args.trials)


if __name__ == "__main__":
    main()
