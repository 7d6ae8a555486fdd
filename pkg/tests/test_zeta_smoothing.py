import numpy as np
import pytest

from glvortex.errors import KappaTooLarge, ThetaTooLarge, VariantMismatch
from glvortex.field import Domain
from glvortex.matching import SignedConfig, connect_euclidean, connect_through_boundary
from glvortex.zeta import (ball_quadrature, build_zeta, bump, critical_planes, critical_set_probe, direction_constraints,
                           displace_points, fibonacci_sphere, mollify, approximate_boundary, quadrature_drift)

from conftest import random_config


def _zeta(rng, k, theta=1e-3):
    cfg = displace_points(random_config(rng, k, 0.5), theta, seed=0).config
    conn = connect_euclidean(cfg)
    return cfg, conn, build_zeta(cfg, conn.zeta_p, conn.zeta_n)


def test_quadrature_normalized_and_gradient_weights_sum_to_zero():
    y, w, gw = ball_quadrature(7)
    assert np.all(np.linalg.norm(y, axis=1) < 1)
    assert w.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(gw.sum(axis=0), 0.0, atol=1e-12)
    assert bump(np.zeros((1, 3)))[0] > 0 and bump(np.array([[1.0, 0, 0]]))[0] == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_zeta_interpolates_potentials(rng, k):
    cfg, conn, z = _zeta(rng, k)
    assert np.max(np.abs(z(cfg.positives) - conn.zeta_p)) <= 1e-12
    assert np.max(np.abs(z(cfg.negatives) - conn.zeta_n)) <= 1e-12


def test_zeta_is_one_lipschitz(rng):
    _, _, z = _zeta(rng, 3)
    a, b = rng.uniform(-1, 1, (2, 5000, 3))
    ratio = np.abs(z(a) - z(b)) / np.linalg.norm(a - b, axis=1)
    assert ratio.max() <= 1 + 1e-12


def test_mollified_close_and_gradient_bounded(rng):
    cfg, conn, z = _zeta(rng, 2)
    lam = 1e-3
    mz = mollify(z, lam, 0.45)
    x = rng.uniform(-0.6, 0.6, (400, 3))
    assert np.max(np.abs(z(x) - mz(x))) <= lam
    assert np.max(np.linalg.norm(mz.grad(x), axis=1)) <= 1 + 1e-6
    assert quadrature_drift(mz, x[:20]) < 1e-6


def test_mollified_gradient_matches_finite_differences(rng):
    _, _, z = _zeta(rng, 2)
    mz = mollify(z, 0.05, 0.45)
    x = rng.uniform(-0.5, 0.5, (50, 3))
    g = mz.grad(x)
    # the quadrature sum is piecewise smooth; a short stencil rarely straddles a node's kink
    step = 1e-7
    fd = np.stack([(mz(x + step * e) - mz(x - step * e)) / (2 * step) for e in np.eye(3)], axis=1)
    assert np.max(np.abs(fd - g)) <= 1e-4 * max(1.0, np.abs(g).max())


def test_sum_identity_survives_mollification(rng):
    cfg, conn, z = _zeta(rng, 3)
    mz = mollify(z, 1e-6, 0.45)
    assert np.sum(mz(cfg.positives) - mz(cfg.negatives)) == pytest.approx(conn.length, abs=1e-5)


def test_displacement_constraints(rng):
    cfg = random_config(rng, 3, 0.5)
    d = displace_points(cfg, 1e-3, seed=1)
    cross, det = direction_constraints(d.config.points)
    assert cross >= 1e-3 and det >= 1e-6
    assert sorted(d.ranks) == list(range(1, 7))
    assert np.all(d.shifts <= d.C_logged * d.diameter * d.ranks ** 5 * 1e-3 * (1 + 1e-12))


def test_repeated_points_are_separated():
    # a duplicated pair seen from a distant point: the diameter pair goes first
    cfg = SignedConfig([[0, 0, 0], [0, 0, 0]], [[0.05, 0, 0], [1.0, 0.2, 0]])
    d = displace_points(cfg, 1e-3, seed=0)
    pts = d.config.points
    assert np.min([np.linalg.norm(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]) > 0
    cross, det = direction_constraints(pts)
    assert cross >= 1e-3 and det >= 1e-6
    assert d.shifts[d.ranks <= 2].max() == 0


def test_displacement_rejects_large_theta(rng):
    with pytest.raises(ThetaTooLarge):
        displace_points(random_config(rng, 2), 0.2)


def test_collinear_points_get_moved():
    cfg = SignedConfig([[0, 0, 0], [2, 0, 0]], [[1, 0, 0], [3, 0, 0]])
    d = displace_points(cfg, 1e-3, seed=0)
    assert d.shifts.max() > 0
    assert direction_constraints(d.config.points)[0] >= 1e-3


def test_variant_mismatch():
    cfg = SignedConfig([[0.1, 0, 0]], [[-0.1, 0.05, 0]])
    conn = connect_through_boundary(cfg, Domain.ball((0, 0, 0), 1.0))
    with pytest.raises(VariantMismatch):
        build_zeta(cfg, conn.zeta_p, conn.zeta_n, metric_tag=conn.metric)


def test_boundary_variant_constant_on_boundary():
    dom = Domain.ball((0, 0, 0), 1.0)
    cfg = SignedConfig([[0.3, 0.1, 0], [0.8, 0, 0.1]], [[-0.2, 0.3, 0.1], [0, -0.85, 0]])
    conn = connect_through_boundary(cfg, dom)
    z = build_zeta(cfg, conn.zeta_p, conn.zeta_n, variant="boundary", domain=dom, metric_tag=conn.metric)
    s = fibonacci_sphere(500)
    vals = z(s)
    assert np.ptp(vals) <= 1e-12
    assert np.max(np.abs(z(cfg.positives) - conn.zeta_p)) <= 1e-12


def test_critical_planes_and_probe(rng):
    _, _, z = _zeta(rng, 3)
    planes = critical_planes(z)
    assert len(planes) == 3
    for nu, s, c in planes:
        assert np.linalg.norm(nu) == pytest.approx(1.0)
    lam = 1e-3 ** (1 / 0.45)
    mz = mollify(z, lam, 0.45)
    pr = critical_set_probe(mz, lam ** 0.9 / 6, n=10)
    assert pr["cover_count"] <= pr["cover_budget"]
    assert pr["excluded_measure"] <= pr["excluded_budget"] + 1e-15
    with pytest.raises(KappaTooLarge):
        critical_set_probe(mz, 1.0, n=4)


def test_boundary_polyhedron_quadratic_accuracy():
    dom = Domain.ball((0, 0, 0), 1.0)
    rng = np.random.default_rng(0)
    z = rng.normal(size=(1000, 3))
    z = z / np.linalg.norm(z, axis=1)[:, None] * rng.uniform(0, 1, (1000, 1)) ** (1 / 3)
    for tau in (0.3, 0.2):
        bp = approximate_boundary(dom, tau)
        assert np.all(bp.distance(z) >= dom.distance(z) - 1e-12)
        assert np.max(bp.distance(z) - dom.distance(z)) <= 5 * tau ** 2
        assert len(bp.points) <= 10 / tau ** 2


def test_box_is_its_own_polyhedron():
    dom = Domain.box((0, 0, 0), (1, 2, 1))
    bp = approximate_boundary(dom, 0.1)
    x = np.random.default_rng(1).uniform([0, 0, 0], [1, 2, 1], (200, 3))
    assert np.allclose(bp.distance(x), dom.distance(x))
