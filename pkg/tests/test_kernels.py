import subprocess
import sys

import numpy as np
import pytest

from glvortex import _pykernels, kernels
from glvortex.matching import SignedConfig, connect_euclidean
from glvortex.zeta import ball_quadrature, build_zeta

_ck = pytest.importorskip("glvortex._ckernels")


def _zeta(rng, k, n):
    cfg = SignedConfig(rng.uniform(0, 1, (k, 3)), rng.uniform(0, 1, (k, 3)))
    conn = connect_euclidean(cfg)
    return build_zeta(cfg, conn.zeta_p, conn.zeta_n), rng.uniform(-0.2, 1.2, (n, 3))


def test_compiled_backend_is_active():
    assert kernels.BACKEND == "cython"


def test_pure_python_switch():
    code = "import glvortex.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env={"GLVORTEX_PURE_PYTHON": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_hungarian_parity(rng):
    for n in (1, 2, 7, 30):
        cost = rng.uniform(0, 1, (n, n))
        a, b = _ck.hungarian(cost), _pykernels.hungarian(cost)
        assert np.array_equal(np.asarray(a[0]), np.asarray(b[0]))
        assert cost[np.arange(n), np.asarray(a[0])].sum() == pytest.approx(cost[np.arange(n), np.asarray(b[0])].sum())


def test_zeta_eval_parity(rng):
    z, x = _zeta(rng, 5, 3000)
    dp, dx = np.zeros(z.P.shape[0]), np.zeros(len(x))
    a = _ck.zeta_eval(x, z.P, z.nu, z.zstar, dp, dx, 0)
    b = _pykernels.zeta_eval(x, z.P, z.nu, z.zstar, dp, dx, 0)
    assert np.allclose(np.asarray(a[0]), np.asarray(b[0]), atol=1e-13, rtol=0)


def test_zeta_smooth_parity(rng):
    z, x = _zeta(rng, 3, 400)
    y, w, gw = ball_quadrature(5)
    lam = 1e-2
    a = _ck.zeta_smooth(x, lam * y, w, gw / lam, z.P, z.nu, z.zstar, 1)
    b = _pykernels.zeta_smooth(x, lam * y, w, gw / lam, z.P, z.nu, z.zstar, 1)
    for u, v in zip(a, b):
        assert np.allclose(np.asarray(u), np.asarray(v), atol=1e-11, rtol=0)
