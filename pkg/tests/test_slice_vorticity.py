import numpy as np
import pytest

from glvortex.errors import BoundaryTouch
from glvortex.field import LatticeField3, synth_field
from glvortex.slices import (THRESHOLD, boundary_winding, detect_components, face_energy, face_fd_flux,
                             planar_slice, plaquette_windings, verify_2d_estimate)

from conftest import field


def _xy_slice(fld, center=(0.5, 0.5, 0.5), size=0.6, n=97):
    return planar_slice(fld, center, (1, 0, 0), (0, 1, 0), size, n)


def test_single_vortex_detected_with_degree_one():
    fld, _ = field("straight_line")
    vs = detect_components(_xy_slice(fld, (0.52, 0.47, 0.5)))
    assert len(vs.components) == 1
    c = vs.components[0]
    assert c.degree == 1
    assert np.allclose(c.centroid[:2], [0.5, 0.5], atol=fld.h)
    assert vs.outer_winding == 1


def test_orientation_flip_negates_degree():
    fld, _ = field("straight_line")
    up = detect_components(planar_slice(fld, (0.5, 0.5, 0.5), (1, 0, 0), (0, 1, 0), 0.6, 97))
    down = detect_components(planar_slice(fld, (0.5, 0.5, 0.5), (0, 1, 0), (1, 0, 0), 0.6, 97))
    assert up.total_degree == -down.total_degree == 1


def test_dipole_has_opposite_degrees():
    fld, _ = synth_field("dipole_pair", {"separation": 0.3}, dims=64, eps=0.02)
    vs = detect_components(_xy_slice(fld, size=0.8, n=129))
    assert sorted(c.degree for c in vs.components) == [-1, 1]
    assert vs.total_degree == 0


def test_no_vortex_face_is_empty():
    fld, _ = synth_field("uniform", dims=16)
    vs = detect_components(_xy_slice(fld, size=0.5, n=17))
    assert vs.components == [] and vs.r_omega == 0.0


def test_component_touching_boundary_raises():
    fld, _ = field("straight_line")
    with pytest.raises(BoundaryTouch):
        # the core sits on the face edge
        detect_components(planar_slice(fld, (0.6, 0.5, 0.5), (1, 0, 0), (0, 1, 0), 0.2, 33))


def test_plaquette_windings_sum_to_boundary_winding():
    fld, _ = field("straight_line")
    face = _xy_slice(fld)
    w, _ = plaquette_windings(face)
    assert int(w.sum()) == boundary_winding(face) == 1


def test_fd_flux_total_near_two_pi():
    fld, _ = field("straight_line")
    flux, _ = face_fd_flux(_xy_slice(fld))
    assert float(np.sum(flux)) == pytest.approx(2 * np.pi, rel=0.02)


def test_face_energy_grows_like_pi_log():
    # E(face) - pi log(R/eps) stays bounded as eps shrinks
    vals = []
    for eps in (0.04, 0.02):
        fld, _ = synth_field("straight_line", dims=64, eps=eps)
        vals.append(face_energy(_xy_slice(fld), eps) - np.pi * np.log(0.3 / eps))
    assert abs(vals[0] - vals[1]) < 0.5


def test_threshold_is_half():
    assert THRESHOLD == 0.5


def test_2d_estimate_lhs_below_rhs():
    fld, _ = synth_field("straight_line", dims=129, eps=0.02)
    face = _xy_slice(fld, size=0.6, n=193)
    r = verify_2d_estimate(face, detect_components(face), 0.02)
    assert 0 <= r["lhs_norm_estimate"] <= r["rhs_bound"]
