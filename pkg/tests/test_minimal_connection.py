import itertools

import numpy as np
import pytest

from glvortex.errors import PointOutsideDomain, Unbalanced
from glvortex.field import Domain
from glvortex.matching import (PolySurface, SignedConfig, augment_collection, c_transform_potentials,
                               connect_euclidean, connect_on_polyhedron, connect_through_boundary,
                               d_boundary_matrix, discrete_dual_norm, pairwise_euclid, solve_assignment)

from conftest import random_config


def brute_force(cost):
    k = len(cost)
    return min((cost[np.arange(k), list(p)].sum() for p in itertools.permutations(range(k))), default=0.0)


def cube_surface(lo=0.1, hi=0.9, m=2):
    """Boundary of [lo, hi]^3 split into m x m squares per side, outward normals."""
    s = (hi - lo) / m
    C, EA, EB, N = [], [], [], []
    for ax in range(3):
        a, b = [i for i in range(3) if i != ax]
        for side, sg in ((lo, -1), (hi, 1)):
            for i in range(m):
                for j in range(m):
                    c = np.zeros(3)
                    c[ax], c[a], c[b] = side, lo + i * s, lo + j * s
                    ea, eb, n = np.zeros(3), np.zeros(3), np.zeros(3)
                    ea[a], eb[b], n[ax] = s, s, sg
                    C.append(c)
                    EA.append(ea)
                    EB.append(eb)
                    N.append(n)
    return PolySurface(np.array(C), np.array(EA), np.array(EB), np.array(N))


def test_unbalanced_config_rejected():
    with pytest.raises(Unbalanced):
        SignedConfig(np.zeros((2, 3)), np.zeros((1, 3)))


def test_empty_config():
    conn = connect_euclidean(SignedConfig(np.zeros((0, 3)), np.zeros((0, 3))))
    assert conn.length == 0.0


def test_hungarian_matches_brute_force(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        cost = rng.uniform(0, 1, (n, n))
        sigma, u, v = solve_assignment(cost)
        assert cost[np.arange(n), sigma].sum() == pytest.approx(brute_force(cost), abs=1e-12)
        # dual feasibility
        assert np.all(u[:, None] + v[None, :] <= cost + 1e-12)


def test_euclidean_length_and_duality(rng):
    for _ in range(100):
        cfg = random_config(rng, int(rng.integers(1, 6)))
        conn = connect_euclidean(cfg)
        assert conn.length == pytest.approx(brute_force(pairwise_euclid(cfg.positives, cfg.negatives)), abs=1e-9)
        assert conn.length == pytest.approx(conn.legs_length(), abs=1e-12)
        z = np.concatenate([conn.zeta_p, conn.zeta_n])
        D = pairwise_euclid(cfg.points, cfg.points)
        assert np.all(np.abs(z[:, None] - z[None]) <= D + 1e-9)
        assert np.sum(conn.zeta_p) - np.sum(conn.zeta_n) == pytest.approx(conn.length, abs=1e-9)


def test_boundary_metric_uses_exit(rng):
    ball = Domain.ball((0, 0, 0), 1.0)
    cfg = SignedConfig([[0.95, 0, 0]], [[-0.95, 0, 0]])
    conn = connect_through_boundary(cfg, ball)
    assert conn.length == pytest.approx(0.1)
    assert conn.metric == "d_bdry"
    # one leg with two pieces to the boundary: [b_p, p] and [n, b_n]
    (leg,) = conn.legs
    assert leg.kind == "boundary"
    assert np.allclose(leg.pieces[0], [[1, 0, 0], [0.95, 0, 0]])
    assert np.allclose(leg.pieces[1], [[-0.95, 0, 0], [-1, 0, 0]])


def test_boundary_metric_is_pseudometric(rng):
    ball = Domain.ball((0, 0, 0), 1.0)
    cfg = random_config(rng, 4, 0.9)
    D, _ = d_boundary_matrix(cfg.points, cfg.points, ball)
    assert np.allclose(D, D.T)
    n = len(D)
    for i, j, k in itertools.product(range(n), repeat=3):
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-12


def test_point_outside_domain():
    with pytest.raises(PointOutsideDomain):
        connect_through_boundary(SignedConfig([[2.0, 0, 0]], [[0, 0, 0]]), Domain.ball((0, 0, 0), 1.0))


def test_c_transform_is_identity_on_metric_potentials(rng):
    cfg = random_config(rng, 4)
    conn = connect_euclidean(cfg)
    cost = pairwise_euclid(cfg.positives, cfg.negatives)
    u = c_transform_potentials(cost, -conn.zeta_n)
    assert np.allclose(u, conn.zeta_p)


def test_polyhedral_path_matches_unfolding():
    surf = cube_surface()
    p, n = np.array([0.5, 0.4, 0.9]), np.array([0.9, 0.6, 0.3])
    conn = connect_on_polyhedron(SignedConfig([p], [n]), surf, Domain.box((-5, -5, -5), (6, 6, 6)))
    exact = np.hypot(0.5 - 1.5, 0.4 - 0.6)
    assert exact <= conn.length <= exact * 1.02


def test_polyhedral_uses_boundary_exit_when_cheaper():
    surf = cube_surface()
    cfg = SignedConfig([[0.5, 0.5, 0.9]], [[0.5, 0.5, 0.1]])
    conn = connect_on_polyhedron(cfg, surf, Domain.box((0, 0, 0), (1, 1, 1)))
    assert conn.length == pytest.approx(0.2)


def test_augmented_collection_identities():
    surf = cube_surface()
    cfg = SignedConfig([[0.5, 0.4, 0.9]], [[0.9, 0.6, 0.3]])
    conn = connect_on_polyhedron(cfg, surf, Domain.box((-5, -5, -5), (6, 6, 6)))
    aug = augment_collection(conn)
    assert aug.n_added >= 1
    assert aug.length == pytest.approx(conn.length, abs=1e-9)
    assert np.sum(aug.zeta_p - aug.zeta_n) == pytest.approx(aug.length, abs=1e-9)


def test_dual_norm_single_pair():
    x, y = np.array([[0.0, 0, 0]]), np.array([[0.3, 0, 0]])
    w = np.array([1])
    assert discrete_dual_norm(x, w, y, w, 1.0) == pytest.approx(0.3)
    assert discrete_dual_norm(x, w, y, w, 0.5) == pytest.approx(np.sqrt(0.3))
    assert discrete_dual_norm(x, w, y, w, 0.0) == 2.0
    far = np.array([[5.0, 0, 0]])
    assert discrete_dual_norm(x, w, far, w, 1.0) == 2.0
    assert discrete_dual_norm(x, w, x, w, 0.0) == 0.0


def test_dual_norm_unbalanced_uses_ground():
    x = np.array([[0.0, 0, 0]])
    assert discrete_dual_norm(x, np.array([3]), np.zeros((0, 3)), np.zeros(0, dtype=int), 1.0) == 3.0
