"""Timing comparison of the accelerated and plain-numpy stencil kernels.

Run as a script:

    python3 benchmarks/bench_kernels.py --size 257 --reps 200

With ANISOFAST_NO_NUMBA=1 only the numpy path is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from anisofast._accel import USING_NUMBA
from anisofast.kernels import cauchy_step, phi_values, rescaled_step_arrays


def _setup(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.0, 1.0, n)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    v = np.exp(-3.0 * (xx**2 + yy**2)) + 1e-4 * rng.random((n, n))
    v = np.ascontiguousarray(v)
    phis = [np.empty_like(v), np.empty_like(v)]
    m = (0.6, 0.8)
    eps = 1e-8
    for ax in range(2):
        phi_values(v, m[ax], eps, phis[ax], use_numba=False)
    h = 2.0 / (n - 1)
    rs = (1e-5 / h**2, 1e-5 / h**2)
    faces = 0.5 * (x[:-1] + x[1:])
    wfs = [0.7 * faces, 0.5 * faces]
    qs = (1e-5 / h, 1e-5 / h)
    return v, phis, rs, wfs, qs


def _time(fn, reps: int) -> float:
    fn()  # warm-up (JIT compile, cache touch)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=257, help="grid points per side")
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    n = args.size
    v, phis, rs, wfs, qs = _setup(n)
    out = np.empty_like(v)
    nodes = v.size

    rows = []
    for name, fn in [
        ("cauchy", lambda ub: cauchy_step(v, phis, rs, out, use_numba=ub)),
        ("rescaled", lambda ub: rescaled_step_arrays(v, phis, rs, wfs, qs, out, use_numba=ub)),
        ("phi", lambda ub: phi_values(v, 0.6, 1e-8, out, use_numba=ub)),
    ]:
        t_np = _time(lambda: fn(False), args.reps)
        if USING_NUMBA:
            t_nb = _time(lambda: fn(True), args.reps)
            rows.append((name, t_np, t_nb, t_np / t_nb))
        else:
            rows.append((name, t_np, None, None))

    print(f"grid {n}x{n} ({nodes} nodes), {args.reps} reps, numba={'on' if USING_NUMBA else 'off'}")
    print(f"{'kernel':<10} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, t_np, t_nb, sp in rows:
        if t_nb is None:
            print(f"{name:<10} {1e3 * t_np:>10.3f} {'-':>10} {'-':>8}")
        else:
            print(f"{name:<10} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {sp:>8.2f}")


if __name__ == "__main__":
    main()
