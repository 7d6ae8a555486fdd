from functools import lru_cache

import numpy as np
import pytest

from glvortex.current import build_vortex_current
from glvortex.dynamics import (continuity_residual, current_pairing, product_estimate_check, slice_integrals,
                               smooth_cutoff, space_vorticity, static_vortex, translating_vortex, velocity_field)
from glvortex.errors import UnsupportedGeometry
from glvortex.grid import choose_grid


def _gauge(t, x1, x2):
    g = 0.8 * np.sin(2 * t) + 0.5 * x1 * x2
    return g, 1.6 * np.cos(2 * t), 0.5 * x2, 0.5 * x1


@lru_cache(maxsize=None)
def _moving(n=65, eps=0.02):
    stf = translating_vortex(n, eps)
    fld = stf.fld
    grid = choose_grid(fld, eps, 16 * fld.h, rng_seed=0)
    return stf, build_vortex_current(fld, grid, eps)


def _weights():
    f = smooth_cutoff((0.5, 0.5, 0.5), (0.4, 0.3, 0.3))
    g = smooth_cutoff((0.5, 0.5, 0.5), (0.45, 0.45, 0.45))
    X = lambda p: np.stack([g(p), np.zeros(p.shape[:-1])], axis=-1)  # noqa: E731
    return f, X


def test_vorticity_integrates_to_two_pi_per_slice():
    stf = translating_vortex(33, 0.05)
    assert np.allclose(slice_integrals(stf), 2 * np.pi, rtol=0.02)
    assert np.allclose(slice_integrals(translating_vortex(33, 0.05, degree=-1)), -2 * np.pi, rtol=0.02)


def test_velocity_integral_is_speed_times_flux():
    stf = translating_vortex(33, 0.05, speed=0.3)
    V = velocity_field(stf)
    w = stf.h ** 2
    mid = len(stf.times) // 2
    # V carries the vorticity flux along the motion: int V_1 = 2 pi speed
    assert float(np.sum(V[mid, ..., 0]) * w) == pytest.approx(2 * np.pi * 0.3, rel=0.03)
    assert abs(float(np.sum(V[mid, ..., 1]) * w)) < 0.02


def test_static_vortex_has_no_velocity_and_zero_residual():
    stf = static_vortex(33, 0.05)
    assert np.abs(velocity_field(stf)).max() < 1e-12
    assert continuity_residual(stf)["max"] < 1e-12


def test_continuity_residual_converges():
    a = continuity_residual(translating_vortex(33, 0.05))["l1"]
    b = continuity_residual(translating_vortex(65, 0.05))["l1"]
    assert a / b >= 1.8


def test_gauge_invariance_improves_with_resolution():
    diffs = []
    for n in (33, 65):
        J0 = space_vorticity(translating_vortex(n, 0.05))
        J1 = space_vorticity(translating_vortex(n, 0.05, chi=_gauge))
        diffs.append(np.abs(J0 - J1).max() / np.abs(J0).max())
    assert diffs[1] < diffs[0]


def test_velocity_needs_three_slices():
    stf = translating_vortex(33, 0.05)
    from glvortex.dynamics import SpaceTimeField
    from glvortex.field import LatticeField3
    short = SpaceTimeField(LatticeField3(u=stf.u[:2], h=stf.h))
    with pytest.raises(ValueError):
        velocity_field(short)


def test_pairing_sees_only_the_spatial_tangent():
    stf, nu = _moving()
    f, X = _weights()
    along = current_pairing(nu, f, X, stf)["pairing"]
    across = current_pairing(nu, f, lambda p: np.stack([np.zeros(p.shape[:-1]), f(p)], axis=-1), stf)["pairing"]
    assert along > 0
    assert abs(across) < 0.1 * along


def test_product_estimate_holds_on_translating_vortex():
    stf, nu = _moving()
    f, X = _weights()
    r = product_estimate_check(stf, f, X, None, 0.02, nu)
    assert r["pass"]
    assert r["lhs"] > 0 and r["main"] > 0


def test_product_estimate_rejects_weights_touching_boundary():
    stf, nu = _moving()
    with pytest.raises(UnsupportedGeometry):
        product_estimate_check(stf, lambda p: np.ones(p.shape[:-1]), lambda p: np.ones(p.shape[:-1] + (2,)),
                               1.0, 0.02, nu)
