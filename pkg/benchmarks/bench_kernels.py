"""Compare the numba kernels with their pure NumPy twins.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--repeat K] [--sweep]

Both implementations run in one process on identical inputs; the script
checks that they agree before reporting timings.  ``--sweep`` additionally
times a small Omega/Gamma sweep end to end in two subprocesses, one per
value of ``IRREVBOUND_NUMBA``.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from irrevbound.kernels import (
    _dopri5_affine_nb,
    _dopri5_affine_py,
    _qubit_entropies_nb,
    _qubit_entropies_py,
    dopri5_affine,
    qubit_entropies,
)
from irrevbound.twolevel import SystemParams2, bloch_generator

SWEEP_SNIPPET = (
    "import time, numpy as np\n"
    "from irrevbound.initial import EXCITED\n"
    "from irrevbound.scans import ddr_sweep\n"
    "t = time.perf_counter()\n"
    "ddr_sweep(EXCITED, np.logspace(-1, 1, 9), horizon_factor=20.0, points_per_scale=100)\n"
    "print(time.perf_counter() - t)\n"
)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_dopri5(n_points, repeat):
    p = SystemParams2.from_ratio(1.8)
    M, c = bloch_generator(p)
    grid = np.linspace(0.0, 30.0 / p.gamma, n_points)
    y0 = np.array([0.0, 0.0, 1.0])
    args = (M, c, y0, grid, 1e-12, 1e-14, 5_000_000, np.inf)
    dopri5_affine(M, c, y0, grid[:3], impl=_dopri5_affine_nb)  # compile outside the timing
    y_nb = _dopri5_affine_nb(*args)[0]
    y_py = _dopri5_affine_py(*args)[0]
    diff = float(np.max(np.abs(y_nb - y_py)))
    return diff, best_of(lambda: _dopri5_affine_nb(*args), repeat), best_of(lambda: _dopri5_affine_py(*args), repeat)


def bench_entropies(n_points, repeat):
    rng = np.random.default_rng(0)
    R = rng.normal(size=(n_points, 3))
    R *= (rng.uniform(size=(n_points, 1)) ** (1 / 3)) / np.linalg.norm(R, axis=1, keepdims=True)
    r0 = R[0].copy()
    qubit_entropies(R[:3], r0, impl=_qubit_entropies_nb)
    s_nb, d_nb = _qubit_entropies_nb(R, r0)
    s_py, d_py = _qubit_entropies_py(R, r0)
    diff = float(max(np.max(np.abs(s_nb - s_py)), np.max(np.abs(d_nb - d_py))))
    return diff, best_of(lambda: _qubit_entropies_nb(R, r0), repeat), best_of(lambda: _qubit_entropies_py(R, r0), repeat)


def bench_sweep():
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, IRREVBOUND_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", SWEEP_SNIPPET], env=env, capture_output=True, text=True, check=True)
        out[flag] = float(res.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=20001, help="samples per kernel call")
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions (best is reported)")
    parser.add_argument("--sweep", action="store_true", help="also time an end-to-end sweep per flag value")
    args = parser.parse_args(argv)

    print(f"{'kernel':<18}{'max |nb - py|':>15}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}")
    for name, bench in (("dopri5_affine", bench_dopri5), ("qubit_entropies", bench_entropies)):
        diff, t_nb, t_py = bench(args.points, args.repeat)
        print(f"{name:<18}{diff:>15.2e}{t_nb:>12.4f}{t_py:>12.4f}{t_py / t_nb:>10.1f}")
    if args.sweep:
        times = bench_sweep()
        print(f"sweep (9 ratios): IRREVBOUND_NUMBA=1 {times['1']:.2f} s, IRREVBOUND_NUMBA=0 {times['0']:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
