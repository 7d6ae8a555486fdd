import numpy as np
import pytest

from glvortex.current import (PolyhedralCurrent, boundary_residual, dual_norm_estimate, empty_current,
                              face_compatibility, flux_consistency, hausdorff_to_polylines, mass, sample_polyline,
                              support_volume)
from glvortex.errors import GammaOutOfRange

from conftest import FIXTURES, pipeline


def _true_mass(fil):
    return sum(2 * np.pi * abs(f.multiplicity) * np.sum(np.linalg.norm(np.diff(f.points, axis=0), axis=1))
               for f in fil)


@pytest.mark.parametrize("kind", FIXTURES)
def test_current_has_no_interior_boundary(kind):
    fld, _, grid, _, nu = pipeline(kind)
    assert boundary_residual(nu, fld.domain) == {}
    assert face_compatibility(nu, grid)
    assert flux_consistency(nu)


@pytest.mark.parametrize("kind", FIXTURES)
def test_current_tracks_true_filaments(kind):
    fld, fil, grid, _, nu = pipeline(kind)
    d = hausdorff_to_polylines(nu, [f.points for f in fil], fld.h / 2)
    assert d <= 2 * (fld.h + grid.delta)
    assert nu.total_mass() == pytest.approx(_true_mass(fil), rel=0.15)


def test_straight_line_mass_is_exact():
    _, _, _, _, nu = pipeline("straight_line")
    assert nu.total_mass() == pytest.approx(2 * np.pi, rel=1e-12)


def test_ring_stays_inside_the_cubes():
    fld, _, grid, _, nu = pipeline("ring")
    assert not nu.theta_used
    assert all(p.startswith("cube:") for p in nu.provenance)
    assert support_volume(nu, grid) == pytest.approx(len(nu.support_cubes) * grid.delta ** 3)


def test_mass_restricted_to_half_space():
    _, _, _, _, nu = pipeline("straight_line")
    # the line runs along z through the unit box
    half = mass(nu, lambda x: x[:, 2] < 0.5)
    assert half == pytest.approx(np.pi, rel=1e-6)
    assert mass(nu) == pytest.approx(nu.total_mass())


def test_json_round_trip():
    _, _, _, _, nu = pipeline("helix")
    back = PolyhedralCurrent.from_json(nu.to_json())
    assert np.array_equal(back.starts, nu.starts) and np.array_equal(back.mult, nu.mult)
    assert back.provenance == nu.provenance


def test_empty_current():
    nu = empty_current()
    assert nu.n_segments == 0 and nu.total_mass() == 0.0 and mass(nu) == 0.0


def test_sample_polyline_spacing():
    pts = sample_polyline(np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 1.0, 0]]), 0.1)
    assert np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1)) <= 0.1 + 1e-12
    assert np.allclose(pts[-1], [1, 1, 0])


def test_dual_norm_interpolation_and_range():
    fld, _, grid, _, nu = pipeline("straight_line")
    e = {g: dual_norm_estimate(fld, nu, grid, g)["norm_estimate"] for g in (0.0, 0.5, 1.0)}
    assert e[0.5] == pytest.approx(np.sqrt(e[0.0] * e[1.0]), rel=1e-12)
    assert e[1.0] <= e[0.0]
    with pytest.raises(GammaOutOfRange):
        dual_norm_estimate(fld, nu, grid, 1.5)
