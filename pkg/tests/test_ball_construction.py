import numpy as np
import pytest

from glvortex.balls import enclosing_disk, grow_balls, grow_balls_metric, make_kernel, weighted_face_energy
from glvortex.field import synth_field
from glvortex.slices import face_energy, planar_slice


def _face(kind="straight_line", eps=0.01, params=None, size=0.9, n=257):
    fld, _ = synth_field(kind, params or {"point": (0.503, 0.497, 0.5)}, dims=129, eps=eps)
    return planar_slice(fld, (0.5, 0.5, 0.5), (1, 0, 0), (0, 1, 0), size, n)


def test_kernel_properties():
    eps, C0 = 0.01, 2.0
    lam = make_kernel(eps, C0)
    t = np.geomspace(1e-4, 1.0, 400)
    ratio = lam(t) / t
    assert np.all(np.diff(ratio) <= 1e-12)
    assert ratio.max() == pytest.approx(np.pi / (C0 * eps))
    far = t[t > eps]
    assert np.max(np.abs(lam(far) - np.pi * np.log(far / eps))) <= np.pi * max(0.5, abs(1 - np.log(C0))) + 1e-12


def test_enclosing_disk_contains_both():
    c, r = enclosing_disk(np.array([0.0, 0.0]), 1.0, np.array([3.0, 0.0]), 0.5)
    assert r == pytest.approx(2.25)
    assert np.allclose(c, [1.25, 0.0])
    c, r = enclosing_disk(np.array([0.0, 0.0]), 2.0, np.array([0.5, 0.0]), 0.5)
    assert r == 2.0


@pytest.fixture(scope="module")
def face():
    return _face()


def test_single_vortex_bound_bracketed(face):
    eps = 0.01
    bf = grow_balls(face, eps, 0.3)
    assert np.pi * (np.log(0.3 / eps) - 2.0) <= bf.lower_bound <= face_energy(face, eps)
    assert bf.total_radius == pytest.approx(0.3)


def test_final_radius_capped_at_quarter_diameter(face):
    bf = grow_balls(face, 0.01, 5.0)
    cap = bf.kernel_params["r_cap"]
    assert cap == pytest.approx(0.25 * 0.9 * np.sqrt(2))
    assert bf.total_radius == pytest.approx(cap)
    assert bf.kernel_params["r1_requested"] == 5.0


def test_bound_increases_with_final_radius(face):
    b = [grow_balls(face, 0.01, r).lower_bound for r in (0.1, 0.2, 0.25, 0.3)]
    assert np.all(np.diff(b) > 0)


def test_identity_metric_matches_isotropic_bitwise(face):
    a = grow_balls(face, 0.01, 0.3)
    b = grow_balls_metric(face, 0.01, (1.0, 1.0), 0.3)
    assert a.lower_bound == b.lower_bound
    assert [x.radius for x in a.balls] == [x.radius for x in b.balls]
    assert np.array_equal(a.balls[0].center, b.balls[0].center)


def test_anisotropic_bound_below_weighted_energy(face):
    bm = grow_balls_metric(face, 0.01, (4.0, 1.0), 0.2)
    assert 0 < bm.lower_bound <= weighted_face_energy(face, 0.01, (4.0, 1.0))
    a, b = bm.balls[0].semi_axes
    assert a == pytest.approx(b / 2)


def test_dipole_merges_to_degree_zero():
    f = _face("dipole_pair", params={"separation": 0.2})
    bf = grow_balls(f, 0.01, 0.3)
    assert len(bf.merge_events) == 1
    assert bf.merge_events[0]["degrees"] == [1, -1]
    assert bf.balls[0].degree == 0
    assert bf.lower_bound == 0.0


def test_metric_rejects_nonpositive(face):
    with pytest.raises(ValueError):
        grow_balls_metric(face, 0.01, (0.0, 1.0), 0.2)
