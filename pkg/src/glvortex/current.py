"""Polyhedral vortex current assembled from face vortex sets by minimal connections."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import GammaOutOfRange, OrientationMismatch
from .field import (TWO_PI, LatticeField3, discrete_vorticity, plaquette_centers)
from .grid import GridSpec, samples_per_side
from .matching import (SignedConfig, connect_euclidean, connect_on_polyhedron, discrete_dual_norm)
from .slices import FaceField, FaceVortexSet, detect_components, plaquette_windings, verify_2d_estimate

log = logging.getLogger(__name__)

DETOUR_FRACTION = 1e-3


@dataclass
class PolyhedralCurrent:
    """nu = 2 pi sum_s m_s [start_s, end_s].

    Attributes:
        starts, ends: (S, 3) segment endpoints.
        mult: (S,) integer multiplicities.
        provenance: per segment ``"cube:<index>"`` or ``"theta"``.
        support_cubes: indices into ``grid.kept_cubes`` of cubes carrying vortices.
        theta_used: whether some face of the union boundary carries vortices.
        face_sets: face key -> FaceVortexSet (base orientation).
        detour_eta: inward displacement of in-face detours.
    """

    starts: np.ndarray
    ends: np.ndarray
    mult: np.ndarray
    provenance: list
    support_cubes: list = dc_field(default_factory=list)
    theta_used: bool = False
    face_sets: dict = dc_field(default_factory=dict)
    detour_eta: float = 0.0
    theta_paths: list = dc_field(default_factory=list)

    @property
    def n_segments(self) -> int:
        return len(self.mult)

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ends - self.starts, axis=1)

    def total_mass(self) -> float:
        return float(TWO_PI * np.sum(np.abs(self.mult) * self.lengths()))

    def to_json(self) -> dict:
        segs = [list(map(float, s)) + list(map(float, e)) + [int(m)]
                for s, e, m in zip(self.starts, self.ends, self.mult)]
        return {"prefactor": TWO_PI, "segments": segs, "provenance": list(self.provenance),
                "support_cubes": [int(c) for c in self.support_cubes], "theta_used": bool(self.theta_used),
                "detour_eta": self.detour_eta}

    @staticmethod
    def from_json(obj: dict) -> "PolyhedralCurrent":
        s = np.array(obj["segments"], dtype=float).reshape(-1, 7)
        return PolyhedralCurrent(s[:, :3], s[:, 3:6], s[:, 6].astype(np.int64), list(obj["provenance"]),
                                 list(obj.get("support_cubes", [])), bool(obj.get("theta_used", False)),
                                 detour_eta=float(obj.get("detour_eta", 0.0)))


def empty_current() -> PolyhedralCurrent:
    z = np.zeros((0, 3))
    return PolyhedralCurrent(z, z.copy(), np.zeros(0, dtype=np.int64), [])


# ---------------------------------------------------------------------------
# Faces
# ---------------------------------------------------------------------------


def sample_faces(fld: LatticeField3, grid: GridSpec, n: Optional[int] = None) -> dict:
    """FaceField for every face of the kept cubes, in base orientation, one interpolation pass."""
    keys = sorted(grid.faces)
    if not keys:
        return {}
    n = n or samples_per_side(fld, grid.delta)
    pts = np.stack([grid.face_points(k, n) for k in keys])
    u = fld.interp_u(pts)
    A = fld.interp_A(pts)
    out = {}
    for i, key in enumerate(keys):
        out[key] = FaceField(u=u[i], points=pts[i], A=A[i], key=key, sign=1, normal=grid.face_base_normal(key))
    return out


def detect_all(faces: dict) -> dict:
    """FaceVortexSet per face key (errors propagate with the face key attached)."""
    return {key: detect_components(f) for key, f in faces.items()}


def _repeat(points, degrees):
    pos, neg, pos_src, neg_src = [], [], [], []
    for x, src, d in zip(*points, degrees):
        for _ in range(abs(int(d))):
            (pos if d > 0 else neg).append(x)
            (pos_src if d > 0 else neg_src).append(src)
    return (SignedConfig(np.array(pos).reshape(-1, 3), np.array(neg).reshape(-1, 3)), pos_src, neg_src)


def _cube_points(grid: GridSpec, ci: int, sets: dict):
    xs, keys, degs = [], [], []
    for key, sign in grid.cube_faces(ci):
        x, d = sets[key].points_degrees()
        for xi, di in zip(x, d):
            xs.append(xi)
            keys.append(key)
            degs.append(sign * int(di))
    return xs, keys, degs


def cube_config(grid: GridSpec, ci: int, face_sets: dict) -> SignedConfig:
    """Configuration of cube ``ci``: face centroids repeated by outward degree."""
    xs, keys, degs = _cube_points(grid, ci, face_sets)
    return _repeat((xs, keys), degs)[0]


def theta_config(grid: GridSpec, face_sets: dict):
    """Configuration on the union boundary oriented by Theta's outward normal, and the raw point count."""
    xs, degs = [], []
    for key, sign in grid.boundary_faces():
        x, d = face_sets[key].points_degrees()
        for xi, di in zip(x, d):
            xs.append(xi)
            degs.append(-sign * int(di))
    return _repeat((xs, [None] * len(xs)), degs)[0], len(xs)


def _canonical(starts, ends, mult, prov, scale):
    """Merge coincident segments (either direction) and drop zero multiplicities."""
    q = 2.0 ** 30 / max(scale, 1e-300)
    acc: dict = {}
    order = []
    for s, e, m, p in zip(starts, ends, mult, prov):
        ks = tuple(np.rint(s * q).astype(np.int64))
        ke = tuple(np.rint(e * q).astype(np.int64))
        if ks == ke:
            continue
        key, sgn = ((ks, ke), 1) if ks < ke else ((ke, ks), -1)
        if key not in acc:
            acc[key] = [s if sgn == 1 else e, e if sgn == 1 else s, 0, p]
            order.append(key)
        acc[key][2] += sgn * int(m)
    S, E, M, P = [], [], [], []
    for key in order:
        s, e, m, p = acc[key]
        if m == 0:
            continue
        if m < 0:
            s, e, m = e, s, -m
        S.append(s)
        E.append(e)
        M.append(m)
        P.append(p)
    return (np.array(S).reshape(-1, 3), np.array(E).reshape(-1, 3), np.array(M, dtype=np.int64), P)


def build_vortex_current(fld: LatticeField3, grid: GridSpec, eps: float, n: Optional[int] = None,
                         face_sets: Optional[dict] = None, steiner: int = 8) -> PolyhedralCurrent:
    """Assemble nu from per-cube minimal connections plus the connection on the union boundary.

    Each cube collects the centroids of its six faces with degrees in the outward
    orientation; a Euclidean minimal connection joins them by segments from
    negative to positive points. Segments with both ends on one face are
    replaced by two legs through the face midpoint pushed inward by
    eta = 1e-3 delta. On the union boundary the degrees are taken with the
    opposite sign (the outward normal of Theta) and connected by the polyhedral
    metric with legs through the boundary of Omega.

    Raises:
        OrientationMismatch: a cube's face degrees do not sum to zero.
    """
    if face_sets is None:
        face_sets = detect_all(sample_faces(fld, grid, n))
    eta = DETOUR_FRACTION * grid.delta
    S, E, M, P = [], [], [], []
    support = []
    for ci in range(len(grid.kept_cubes)):
        xs, keys, degs = _cube_points(grid, ci, face_sets)
        if not xs:
            continue
        if sum(degs) != 0:
            raise OrientationMismatch("cube face degrees do not cancel", cube=ci, total=int(sum(degs)))
        support.append(ci)
        cfg, pk, nk = _repeat((xs, keys), degs)
        if cfg.k == 0:
            continue
        conn = connect_euclidean(cfg)
        signs = dict(grid.cube_faces(ci))
        for i, j in enumerate(conn.sigma):
            p, q = cfg.positives[i], cfg.negatives[j]
            if pk[i] == nk[j]:
                key = pk[i]
                inward = -signs[key] * grid.face_base_normal(key)
                mid = 0.5 * (p + q) + eta * inward
                S += [q, mid]
                E += [mid, p]
                M += [1, 1]
                P += [f"cube:{ci}"] * 2
            else:
                S.append(q)
                E.append(p)
                M.append(1)
                P.append(f"cube:{ci}")
    theta_used = False
    theta_paths: list = []
    cfg, n_pts = theta_config(grid, face_sets)
    if n_pts:
        theta_used = True
        if cfg.k:
            conn = connect_on_polyhedron(cfg, grid.boundary_surface(), fld.domain, steiner=steiner)
            theta_paths = conn.surface_paths
            for leg in conn.legs:
                for piece in leg.pieces:
                    for a, b in zip(piece[:-1], piece[1:]):
                        S.append(a)
                        E.append(b)
                        M.append(1)
                        P.append("theta")
    scale = float(np.max(np.abs(np.concatenate([fld.lo, fld.hi])))) or 1.0
    s, e, m, p = _canonical(S, E, M, P, scale)
    return PolyhedralCurrent(s, e, m, p, support, theta_used, face_sets, eta, theta_paths)


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def boundary_residual(nu: PolyhedralCurrent, domain, tol: Optional[float] = None) -> dict:
    """Signed endpoint degrees at nodes strictly inside Omega that do not cancel.

    Returns a dict position-key -> residual; empty means zero relative boundary.
    """
    if nu.n_segments == 0:
        return {}
    pts = np.concatenate([nu.starts, nu.ends])
    scale = float(np.max(np.abs(pts))) or 1.0
    tol = tol if tol is not None else 1e-9 * scale
    q = 2.0 ** 30 / scale
    acc: dict = {}
    pos: dict = {}
    for s, e, m in zip(nu.starts, nu.ends, nu.mult):
        for x, sgn in ((s, -1), (e, 1)):
            k = tuple(np.rint(x * q).astype(np.int64))
            acc[k] = acc.get(k, 0) + sgn * int(m)
            pos[k] = x
    out = {}
    for k, v in acc.items():
        if v != 0 and float(domain.distance(pos[k][None])[0]) > tol:
            out[k] = {"position": pos[k].tolist(), "residual": v}
    return out


def face_compatibility(nu: PolyhedralCurrent, grid: GridSpec) -> bool:
    """Interior faces induce opposite degree sets from their two cubes (exact)."""
    for key, owners in grid.faces.items():
        if len(owners) != 2:
            continue
        (_, s1), (_, s2) = owners
        if s1 != -s2:
            return False
        _, d = nu.face_sets[key].points_degrees()
        if np.any(s1 * d + s2 * d != 0):
            return False
    return True


def flux_consistency(nu: PolyhedralCurrent) -> bool:
    """Sum of component degrees equals the face's boundary winding on every face."""
    return all(fs.total_degree == fs.outer_winding for fs in nu.face_sets.values())


def _clip_fraction(a, b, inside: Callable, n: int = 256) -> float:
    t = np.linspace(0.0, 1.0, n + 1)
    x = a + t[:, None] * (b - a)
    flag = np.asarray(inside(x), dtype=bool)
    cuts = [0.0]
    for i in np.nonzero(flag[1:] != flag[:-1])[0]:
        lo, hi = t[i], t[i + 1]
        flo = flag[i]
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if bool(inside((a + mid * (b - a))[None])[0]) == flo:
                lo = mid
            else:
                hi = mid
        cuts.append(0.5 * (lo + hi))
    cuts.append(1.0)
    cuts = np.array(cuts)
    mids = 0.5 * (cuts[1:] + cuts[:-1])
    fin = np.asarray(inside(a + mids[:, None] * (b - a)), dtype=bool)
    return float(np.sum(np.diff(cuts)[fin]))


def mass(nu: PolyhedralCurrent, region: Optional[Callable] = None) -> float:
    """|nu|(region) = sum 2 pi |m| (length of the segment inside the region).

    Args:
        nu: the current.
        region: predicate on (N, 3) points; ``None`` means everywhere.
    """
    if nu.n_segments == 0:
        return 0.0
    L = nu.lengths()
    if region is None:
        return float(TWO_PI * np.sum(np.abs(nu.mult) * L))
    total = 0.0
    for s, e, m, l in zip(nu.starts, nu.ends, nu.mult, L):
        total += TWO_PI * abs(int(m)) * l * _clip_fraction(s, e, region)
    return float(total)


def support_volume(nu: PolyhedralCurrent, grid: GridSpec, fld: Optional[LatticeField3] = None) -> float:
    """Volume of the cubes whose faces carry vortices, plus |Theta| if the union boundary does."""
    vol = len(nu.support_cubes) * grid.delta ** 3
    if nu.theta_used:
        if fld is None:
            raise ValueError("theta volume needs the field")
        vol += grid.theta_volume(fld)
    return float(vol)


def sample_polyline(points: np.ndarray, step: float) -> np.ndarray:
    out = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        m = max(1, int(np.ceil(np.linalg.norm(b - a) / step)))
        t = np.linspace(0.0, 1.0, m + 1)[1:]
        out.append(a + t[:, None] * (b - a))
    return np.concatenate(out)


def hausdorff_to_polylines(nu: PolyhedralCurrent, polylines: list, step: float) -> float:
    """Symmetric Hausdorff distance between the current's support and polylines, sampled at ``step``."""
    from scipy.spatial import cKDTree
    if nu.n_segments == 0:
        return 0.0 if not polylines else np.inf
    a = np.concatenate([sample_polyline(np.array([s, e]), step) for s, e in zip(nu.starts, nu.ends)])
    b = np.concatenate([sample_polyline(np.asarray(p), step) for p in polylines])
    return float(max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max()))


# ---------------------------------------------------------------------------
# Dual norm estimate
# ---------------------------------------------------------------------------


def _vorticity_measure(fld: LatticeField3):
    """FD vorticity as vector Diracs at plaquette centers: (positions, vectors)."""
    vort = discrete_vorticity(fld, estimators="fd")
    X, V = [], []
    for k in range(3):
        f = vort.fd[k]
        c = plaquette_centers(fld, k)
        ok = np.isfinite(f) & (f != 0)
        X.append(c[ok])
        v = np.zeros((int(ok.sum()), 3))
        v[:, k] = f[ok] * fld.h
        V.append(v)
    return np.concatenate(X), np.concatenate(V)


def _face_point_part(face: FaceField, fs: FaceVortexSet) -> float:
    """Exact bounded-Lipschitz distance between plaquette windings and component Diracs (2 pi units)."""
    wind, _ = plaquette_windings(face)
    P = face.points
    ctr = 0.25 * (P[:-1, :-1] + P[1:, :-1] + P[:-1, 1:] + P[1:, 1:])
    ii, jj = np.nonzero(wind)
    w = wind[ii, jj]
    x, d = fs.points_degrees()
    pos_pts = np.concatenate([ctr[ii, jj][w > 0], x[d < 0]])
    pos_w = np.concatenate([w[w > 0], -d[d < 0]])
    neg_pts = np.concatenate([ctr[ii, jj][w < 0], x[d > 0]])
    neg_w = np.concatenate([-w[w < 0], d[d > 0]])
    return TWO_PI * discrete_dual_norm(pos_pts, pos_w, neg_pts, neg_w, 1.0)


def dual_norm_estimate(fld: LatticeField3, nu: PolyhedralCurrent, grid: GridSpec, gamma: float, eps: float = None,
                       faces: Optional[dict] = None, n_tests: int = 200, seed: int = 0) -> dict:
    """Upper estimate of ||mu(u, A) - nu|| in the dual of C^{0,gamma}.

    For gamma = 1 and a test form phi with sup and Lipschitz norms at most one,
    phi = phi_l + (phi - phi_l) on each cube with phi_l its value at the center:

    * the mean-value term bounds <mu - nu, phi - phi_l> by (sqrt(3)/2) delta (|mu| + |nu|)(C_l);
    * the constant part <mu - nu, phi_l> is |int_{C_l} mu - int_{C_l} nu| exactly;
    * outside the cubes the total variation |mu| + |nu| is used;
    * face audits add delta times the exact point part (plaquette windings against
      component Diracs) and the tent-tested field residual of each vortex-carrying face.

    gamma = 0 is the total variation |mu| + |nu|, and 0 < gamma < 1 interpolates,
    E_gamma = E_0^(1 - gamma) E_1^gamma.

    Raises:
        GammaOutOfRange: gamma outside [0, 1].
    """
    if not 0.0 <= gamma <= 1.0:
        raise GammaOutOfRange(f"gamma={gamma} outside [0, 1]")
    X, V = _vorticity_measure(fld)
    vnorm = np.linalg.norm(V, axis=1)
    ci = grid.cube_of(X) if len(X) else np.zeros(0, dtype=np.int64)
    inside = fld.domain.contains(X, tol=1e-12) if len(X) else np.zeros(0, dtype=bool)
    M = len(grid.kept_cubes)
    mu_tv = np.bincount(ci[ci >= 0], weights=vnorm[ci >= 0], minlength=M) if M else np.zeros(0)
    mu_int = np.stack([np.bincount(ci[ci >= 0], weights=V[ci >= 0, a], minlength=M) for a in range(3)],
                      axis=1) if M else np.zeros((0, 3))
    mu_theta = float(np.sum(vnorm[(ci < 0) & inside]))
    nu_tv = np.zeros(M)
    nu_int = np.zeros((M, 3))
    nu_theta = 0.0
    for s, e, m, p in zip(nu.starts, nu.ends, nu.mult, nu.provenance):
        if p.startswith("cube:"):
            c = int(p.split(":")[1])
            nu_tv[c] += TWO_PI * abs(m) * np.linalg.norm(e - s)
            nu_int[c] += TWO_PI * m * (e - s)
        else:
            nu_theta += TWO_PI * abs(m) * np.linalg.norm(e - s)
    delta = grid.delta
    mean_value = 0.5 * np.sqrt(3.0) * delta * float(np.sum(mu_tv + nu_tv))
    constant = float(np.sum(np.linalg.norm(mu_int - nu_int, axis=1)))
    theta_tv = mu_theta + nu_theta
    point_part = 0.0
    residual = 0.0
    n_faces = 0
    if nu.face_sets:
        if faces is None:
            keys = [k for k, fs in nu.face_sets.items() if fs.components]
            sub = GridSpec(grid.origin, grid.rotation, grid.delta, grid.kept_cubes)
            faces = {k: f for k, f in sample_faces(fld, sub).items() if k in set(keys)}
        for key, fs in nu.face_sets.items():
            if not fs.components or key not in faces:
                continue
            n_faces += 1
            point_part += _face_point_part(faces[key], fs)
            if eps is not None:
                residual += verify_2d_estimate(faces[key], fs, eps, n_tests=n_tests, seed=seed)["lhs_norm_estimate"]
    e1 = mean_value + constant + theta_tv + delta * (point_part + residual)
    e0 = float(np.sum(vnorm[inside])) + nu.total_mass()
    est = e0 if gamma == 0 else e1 if gamma == 1 else e0 ** (1.0 - gamma) * e1 ** gamma
    return {
        "norm_estimate": float(est),
        "gamma": gamma,
        "decomposition": {
            "mean_value": mean_value, "constant_part": constant, "theta_total_variation": theta_tv,
            "face_point_part": point_part, "face_field_residual": residual, "faces_audited": n_faces,
            "estimate_gamma0": e0, "estimate_gamma1": e1,
        },
    }
