"""Compiled vs NumPy kernels: timings and agreement.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
called on identical seeded inputs through both backends; the table reports the
best-of-N wall time and the largest absolute difference between outputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from glvortex import _pykernels
from glvortex.matching import SignedConfig, connect_euclidean
from glvortex.zeta import ball_quadrature, build_zeta

try:
    from glvortex import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _zeta_inputs(k: int, n: int, rng):
    cfg = SignedConfig(rng.uniform(0, 1, (k, 3)), rng.uniform(0, 1, (k, 3)))
    conn = connect_euclidean(cfg)
    z = build_zeta(cfg, conn.zeta_p, conn.zeta_n)
    x = rng.uniform(-0.2, 1.2, (n, 3))
    return z, x


def cases(rng):
    n = 60
    cost = rng.uniform(0, 1, (n, n))
    yield "hungarian n=60", lambda m: m.hungarian(cost), lambda r: np.asarray(r[0])

    z, x = _zeta_inputs(6, 20000, rng)
    dp = np.zeros(z.P.shape[0])
    dx = np.zeros(len(x))
    yield ("zeta_eval k=6 x20000",
           lambda m: m.zeta_eval(x, z.P, z.nu, z.zstar, dp, dx, 0), lambda r: np.asarray(r[0]))

    z, x = _zeta_inputs(4, 2000, rng)
    y, w, gw = ball_quadrature(7)
    offs = 1e-3 * y
    gws = gw / 1e-3
    yield ("zeta_smooth k=4 x2000 q=343",
           lambda m: m.zeta_smooth(x, offs, w, gws, z.P, z.nu, z.zstar, True),
           lambda r: np.concatenate([np.ravel(r[0]), np.ravel(r[1]), np.ravel(r[2])]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; only the NumPy backend is timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} {'numpy [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, call, flat in cases(rng):
        t_py = best_of(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:32s} {t_py:11.4f} {'-':>11s} {'-':>8s} {'-':>11s}")
            continue
        t_c = best_of(lambda: call(_ckernels), args.repeat)
        diff = float(np.max(np.abs(flat(call(_pykernels)) - flat(call(_ckernels)))))
        print(f"{name:32s} {t_py:11.4f} {t_c:11.4f} {t_py / t_c:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
