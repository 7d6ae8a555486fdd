import numpy as np
import pytest

from glvortex.current import cube_config
from glvortex.errors import DomainNotSupported, ParamsInfeasible
from glvortex.field import energy
from glvortex.lower_bound import (LBParams, boundary_certificate, coarea_certificate, coarea_diagnostic,
                                  default_params, degree_integral, degree_integral_riemann, theorem1_report)
from glvortex.matching import connect_euclidean
from glvortex.zeta import build_zeta, displace_points, mollify

from conftest import pipeline


def test_degree_integral_matches_riemann(rng):
    for _ in range(50):
        k = int(rng.integers(1, 6))
        zp, zn = rng.uniform(-1, 1, (2, k))
        assert degree_integral(zp, zn) == pytest.approx(degree_integral_riemann(zp, zn, 20000), abs=1e-3)


def test_degree_integral_is_sum_of_differences(rng):
    zp, zn = rng.normal(size=(2, 5))
    assert degree_integral(zp, zn) == pytest.approx(np.sum(zp) - np.sum(zn), abs=1e-12)
    assert degree_integral([], []) == 0.0


def test_default_params_are_feasible_and_clamped():
    p = default_params(0.01, 0.1, 50.0)
    assert p.lam >= 1e-12
    assert p.kappa < p.lam ** (2 * p.rho) / 3
    assert p.theta == pytest.approx(p.lam ** p.rho)
    q = default_params(0.01, 0.1, 50.0, variant="boundary")
    assert q.rho == pytest.approx(6 / 55)
    with pytest.raises(ValueError):
        default_params(0.01, 0.1, 50.0, variant="torus")


def test_infeasible_kappa_rejected():
    fld, _, grid, fs, _ = pipeline("straight_line")
    bad = LBParams(rho=0.3, lam=0.01, kappa=1.0, gamma_slice=0.1, M=10.0)
    with pytest.raises(ParamsInfeasible):
        coarea_certificate(fld, grid, [0], 0.02, bad, face_sets=fs)


@pytest.mark.parametrize("kind", ["straight_line", "ring"])
def test_coarea_certificate_is_sound(kind):
    fld, _, grid, fs, nu = pipeline(kind)
    cert = coarea_certificate(fld, grid, nu.support_cubes, 0.02, face_sets=fs)
    assert cert.sound
    assert cert.bound <= cert.measured_energy
    assert set(cert.ingredients) >= {"half_mass_times_L", "L_term", "log_correction"}


def test_generous_params_give_a_positive_sound_bound():
    # lambda, kappa, gamma near one make the log correction small
    fld, _, grid, fs, nu = pipeline("straight_line")
    F = energy(fld, 0.02).F_eps
    p = LBParams(rho=0.45, lam=0.5, kappa=0.05, gamma_slice=1.0, M=F)
    cert = coarea_certificate(fld, grid, nu.support_cubes, 0.02, p, face_sets=fs)
    assert cert.sound


def test_boundary_certificate_requires_smooth_domain():
    fld, _, grid, fs, _ = pipeline("straight_line")
    with pytest.raises(DomainNotSupported):
        boundary_certificate(fld, grid, 0.02, face_sets=fs)


def test_coarea_diagnostic_below_cube_energy():
    fld, _, grid, fs, nu = pipeline("straight_line")
    ci = nu.support_cubes[0]
    cfg = displace_points(cube_config(grid, ci, fs), 1e-3, seed=0).config
    conn = connect_euclidean(cfg)
    mz = mollify(build_zeta(cfg, conn.zeta_p, conn.zeta_n), 0.2 * grid.delta, 0.45)
    d = coarea_diagnostic(fld, grid, ci, 0.02, mz)
    assert 0 < d["slice_integral"] <= 1.05 * d["cube_energy"]


def test_theorem1_report_on_ball():
    fld, _, _, _, _ = pipeline("straight_line", ball=True)
    rep = theorem1_report(fld, 0.02, {"trials": 100})
    for name, item in rep["items"].items():
        assert item["pass"], name
    assert all(c["sound"] for c in rep["certificates"])
