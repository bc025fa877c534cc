"""Time the numba and numpy implementations of every hot kernel.

    python benchmarks/bench_kernels.py --repeat 5

Each kernel runs once on both paths before timing (numba compiles on the
first call) and the outputs are compared so a speedup never hides a wrong
answer.
"""

import argparse
import time

import numpy as np

from tfgamma.kernels import numba_impl, numpy_impl


def _cases(rng, scale):
    n1 = int(20000 * scale)
    n3 = max(8, int(24 * scale ** (1 / 3)))
    t = np.linspace(0.002, 8.0, int(2000 * scale))
    wf = np.exp(-t**2 / 2) * (t[1] - t[0])
    diag = 2.0 - rng.random(n1)
    return {
        "convolve_full 1d": ("convolve_full", (rng.random(n1), rng.random(401))),
        "convolve_full 3d": ("convolve_full", (rng.random((n3,) * 3), rng.random((9, 9, 9)))),
        "sturm_count": ("sturm_count", (diag, np.ones(n1 - 1), np.linspace(-1.0, 0.0, 256), 1e-300)),
        "sine_density_1d": ("sine_density_1d", (np.arange(1, 501, dtype=float), np.linspace(0, 1, n1), 1.0)),
        "radial_ball_overlap": ("radial_ball_overlap", (t, wf, np.linspace(0.01, 9.0, 256), 2.5)),
    }


def _best(fn, args, repeat):
    out = fn(*args)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for label, (name, kargs) in _cases(rng, args.scale).items():
        t_nb, out_nb = _best(getattr(numba_impl, name), kargs, args.repeat)
        t_np, out_np = _best(getattr(numpy_impl, name), kargs, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb, dtype=float) - np.asarray(out_np, dtype=float))))
        print(f"{label:<22}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
