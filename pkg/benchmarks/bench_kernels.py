"""Time the numba and numpy kernel paths side by side.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N wall time of each path and the
speedup.  The numba path is compiled (and checked against numpy) before
timing.  Without numba installed only the numpy column is filled.
"""
import argparse
import timeit

import numpy as np

from mapc import _accel, kernels


def _scene_args(rng, n_fast=213, n_chirp=64, n_rx=4, n_tx=2, n_targets=8):
    out = np.zeros((n_fast, n_chirp, n_rx), dtype=np.complex128)
    alpha = rng.standard_normal(n_targets) + 1j * rng.standard_normal(n_targets)
    fb = rng.uniform(0, 0.5, n_targets)
    fd = rng.uniform(-0.5, 0.5, n_targets)
    spatial = rng.uniform(-2, 2, (n_targets, n_tx, n_rx))
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128)
    code = np.tile(h, (n_chirp // n_tx, 1))
    return out, alpha, fb, fd, spatial, code


def cases(rng):
    scene = _scene_args(rng)
    power = rng.exponential(size=4096)
    series = rng.normal(-30, 10, 1800)
    return [
        ("accumulate_scene", kernels.accumulate_scene_np, kernels.accumulate_scene_nb,
         lambda f: f(np.zeros_like(scene[0]), *scene[1:])),
        ("ca_cfar", kernels.ca_cfar_np, kernels.ca_cfar_nb,
         lambda f: f(power, 2, 8, 5.0, True)),
        ("moving_stats", kernels.moving_stats_np, kernels.moving_stats_nb,
         lambda f: f(series, 5)),
    ]


def _best(call, repeat):
    return min(timeit.repeat(call, number=1, repeat=repeat))


def _agree(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-9, atol=1e-9) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"numba available: {_accel.HAVE_NUMBA}")
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  agree")
    for name, f_np, f_nb, run in cases(rng):
        t_np = _best(lambda: run(f_np), args.repeat)
        if _accel.HAVE_NUMBA:
            ok = _agree(run(f_np), run(f_nb))  # also triggers compilation
            t_nb = _best(lambda: run(f_nb), args.repeat)
            print(f"{name:<18}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}x  {ok}")
        else:
            print(f"{name:<18}{1e3 * t_np:>12.3f}{'-':>12}{'-':>10}  -")


if __name__ == "__main__":
    main()
