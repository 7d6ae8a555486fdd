"""The max-min functions zeta, point displacement, mollification and boundary polyhedra.

zeta(x) = max_i (zeta*_i - max_j <p_i - x, nu_ij>), nu_ij = (p_i - a_j)/|p_i - a_j|
(zero when p_i = a_j), with j over all 2k points. The boundary variant replaces
max_j d_ij(x) by min[max(max_j d_ij(x), d(p_i) - d(x)), d(p_i) + d(x)].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from . import kernels
from .errors import KappaTooLarge, NonConvexDomain, ThetaTooLarge, VariantMismatch
from .field import Domain
from .matching import SignedConfig

log = logging.getLogger(__name__)

THETA_MAX = 0.1  # existence thresholds of the dipole and tripole lemmas


# ---------------------------------------------------------------------------
# Displacement
# ---------------------------------------------------------------------------


@dataclass
class Displacement:
    config: SignedConfig
    original: SignedConfig
    theta: float
    shifts: np.ndarray
    C_logged: float
    diameter: float
    ranks: Optional[np.ndarray] = None  # processing rank l of each point (1-based)


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n == 0, 1.0, n)


def _triple(a, b, c):
    """|det(a, b, c)| row-wise as the scalar triple product."""
    return np.abs(np.einsum("...i,...i->...", a, np.cross(b, c)))


def _valid_candidates(cands: np.ndarray, fixed: np.ndarray, theta: float, tol: float) -> np.ndarray:
    """Which candidate positions for the next point satisfy every constraint."""
    nc = len(cands)
    l = len(fixed)
    if l == 0:
        return np.ones(nc, dtype=bool)
    diff = cands[:, None, :] - fixed[None, :, :]                  # (nc, l, 3)
    ok = np.all(np.linalg.norm(diff, axis=-1) > tol, axis=1)
    if l < 2:
        return ok
    new = _unit(diff)                                              # directions (j, l)
    old_pairs = list(combinations(range(l), 2))
    old = _unit(np.array([fixed[i] - fixed[j] for i, j in old_pairs]))
    # new x old and new x new cross products
    c_no = np.linalg.norm(np.cross(new[:, :, None, :], old[None, None, :, :]), axis=-1)
    ok &= np.all(c_no >= theta, axis=(1, 2))
    iu, ju = np.triu_indices(l, 1)
    c_nn = np.linalg.norm(np.cross(new[:, iu], new[:, ju]), axis=-1)
    ok &= np.all(c_nn >= theta, axis=1)
    th2 = theta * theta
    # (new, new, new): union has 4 points whenever the three j differ
    if l >= 3:
        tri = np.array(list(combinations(range(l), 3)))
        d = _triple(new[:, tri[:, 0]], new[:, tri[:, 1]], new[:, tri[:, 2]])
        ok &= np.all(d >= th2, axis=1)
    # (new, new, old): union = {j, j', l} plus the old pair, >= 4 unless old pair = {j, j'}
    if l >= 2:
        rows = []
        for a, b in combinations(range(l), 2):
            for o, (i, j) in enumerate(old_pairs):
                if {i, j} != {a, b}:
                    rows.append((a, b, o))
        if rows:
            r = np.array(rows)
            d = _triple(new[:, r[:, 0]], new[:, r[:, 1]], old[r[:, 2]][None])
            ok &= np.all(d >= th2, axis=1)
    # (new, old, old): union = {j, l} plus the old pairs
    if len(old_pairs) >= 2:
        rows = []
        for a in range(l):
            for o1, o2 in combinations(range(len(old_pairs)), 2):
                u = {a, l} | set(old_pairs[o1]) | set(old_pairs[o2])
                if len(u) >= 4:
                    rows.append((a, o1, o2))
        if rows:
            r = np.array(rows)
            n1 = new[:, r[:, 0]]
            d = _triple(n1, old[r[:, 1]][None], old[r[:, 2]][None])
            ok &= np.all(d >= th2, axis=1)
    return ok


def displace_points(config: SignedConfig, theta: float, seed: int = 0, n_candidates: int = 64,
                    max_rounds: int = 50) -> Displacement:
    """Move points so pair directions satisfy cross >= theta and det >= theta^2.

    Points are processed in order (positives then negatives), except that a
    pair realizing the diameter goes first and is never moved. A point already
    satisfying every constraint against its predecessors stays put; otherwise
    candidates are drawn uniformly in balls of radius D theta 2^j, j = 0, 1, ...,
    and the valid candidate closest to the original position is kept.
    Determinant constraints apply to direction triples spanning at least four
    points (three directions among three points are always coplanar).

    Raises:
        ThetaTooLarge: theta >= 0.1, or no valid position was found.
    """
    if not 0 < theta < THETA_MAX:
        raise ThetaTooLarge(f"theta={theta} must lie in (0, {THETA_MAX})", theta=theta)
    pts = config.points
    m = len(pts)
    if m >= 2 and theta >= float(m) ** -6:
        log.warning("theta=%g exceeds m^-6=%g; constraints are verified constructively", theta, float(m) ** -6)
    D = config.diameter() or 1.0
    tol = 1e-12 * D
    rng = np.random.default_rng(seed)
    # the first two points stay put, so start from a pair realizing the diameter
    order = np.arange(m)
    if m >= 2:
        i0, j0 = np.unravel_index(np.argmax(cdist(pts, pts)), (m, m))
        order = np.array([i0, j0] + [i for i in range(m) if i not in (i0, j0)], dtype=np.int64)
    pts_o = pts[order]
    out = pts_o.copy()
    for l in range(m):
        fixed = out[:l]
        if _valid_candidates(pts_o[l:l + 1], fixed, theta, tol)[0]:
            continue
        found = False
        for j in range(max_rounds):
            r = D * theta * 2.0 ** j
            v = rng.normal(size=(n_candidates, 3))
            v = _unit(v) * rng.uniform(0.0, 1.0, (n_candidates, 1)) ** (1.0 / 3.0)
            cands = pts_o[l] + r * v
            ok = _valid_candidates(cands, fixed, theta, tol)
            if ok.any():
                dist = np.linalg.norm(cands - pts_o[l], axis=1)
                dist[~ok] = np.inf
                out[l] = cands[int(np.argmin(dist))]
                found = True
                break
        if not found:
            raise ThetaTooLarge("no admissible displacement found", point=l, theta=theta)
    placed = np.empty_like(out)
    placed[order] = out
    out = placed
    shifts = np.linalg.norm(out - pts, axis=1)
    # budget index l is the processing rank
    ls = np.empty(m)
    ls[order] = np.arange(1, m + 1, dtype=float)
    C = float(np.max(shifts / (D * ls ** 5 * theta))) if m else 0.0
    k = config.k
    new = SignedConfig(out[:k], out[k:])
    return Displacement(new, config, theta, shifts, C, D, ls)


def direction_constraints(points: np.ndarray):
    """Minimum cross product over distinct direction pairs and minimum |det| over
    direction triples spanning at least four points."""
    m = len(points)
    pairs = list(combinations(range(m), 2))
    if len(pairs) < 2:
        return np.inf, np.inf
    nu = _unit(np.array([points[i] - points[j] for i, j in pairs]))
    a, b = np.triu_indices(len(pairs), 1)
    cross = float(np.min(np.linalg.norm(np.cross(nu[a], nu[b]), axis=-1)))
    tri = np.array([t for t in combinations(range(len(pairs)), 3)
                    if len(set(pairs[t[0]]) | set(pairs[t[1]]) | set(pairs[t[2]])) >= 4]).reshape(-1, 3)
    best = float(np.min(_triple(nu[tri[:, 0]], nu[tri[:, 1]], nu[tri[:, 2]]))) if len(tri) else np.inf
    return cross, best


# ---------------------------------------------------------------------------
# Exact zeta
# ---------------------------------------------------------------------------


@dataclass
class ZetaExact:
    """Evaluable zeta with its active piece.

    Attributes:
        variant: ``"euclid"`` or ``"boundary"``.
        P: (k, 3) positive points.
        A: (2k, 3) all points (positives then negatives).
        nu: (k, 2k, 3) directions.
        zstar: (k,) potentials at positives.
        zstar_n: (k,) potentials at negatives (for audits).
        dist_fn, dist_grad_fn: boundary distance and its gradient (boundary variant).
    """

    variant: str
    P: np.ndarray
    A: np.ndarray
    nu: np.ndarray
    zstar: np.ndarray
    zstar_n: np.ndarray
    dist_fn: Optional[Callable] = None
    dist_grad_fn: Optional[Callable] = None
    dp: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))

    @property
    def k(self) -> int:
        return len(self.P)

    def _dx(self, x):
        if self.variant == "boundary":
            return np.ascontiguousarray(self.dist_fn(x), dtype=float)
        return np.zeros(len(x))

    def evaluate(self, x: np.ndarray):
        """(values, active i, active j, branch) at points x (N, 3)."""
        x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
        if self.k == 0:
            n = len(x)
            return np.zeros(n), np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(n, np.int32)
        dp = self.dp if self.variant == "boundary" else np.zeros(self.k)
        return kernels.zeta_eval(x, self.P, self.nu, self.zstar, np.ascontiguousarray(dp), self._dx(x),
                                 1 if self.variant == "boundary" else 0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)[0]

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """A.e. gradient: the active direction (ties to the smallest index)."""
        x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
        _, ai, aj, br = self.evaluate(x)
        if self.k == 0:
            return np.zeros((len(x), 3))
        g = self.nu[ai, aj]
        if self.variant == "boundary" and np.any(br > 0):
            gd = self.dist_grad_fn(x)
            g = np.where((br == 1)[:, None], gd, g)
            g = np.where((br == 2)[:, None], -gd, g)
        return g


def build_zeta(config: SignedConfig, zeta_p, zeta_n=None, variant: str = "euclid",
               domain: Optional[Domain] = None, metric_tag: Optional[str] = None,
               dist_fn: Optional[Callable] = None, dist_grad_fn: Optional[Callable] = None) -> ZetaExact:
    """Build zeta from a configuration and its potentials.

    Args:
        config: positives and negatives.
        zeta_p: potentials at the positives.
        zeta_n: potentials at the negatives (kept for audits).
        variant: ``"euclid"`` or ``"boundary"``.
        domain: boundary descriptor for the boundary variant.
        metric_tag: metric the potentials were computed for; checked against the variant.
        dist_fn, dist_grad_fn: override the boundary distance (e.g. a polyhedral one).

    Raises:
        VariantMismatch: potentials from a different metric than the variant needs.
    """
    if variant not in ("euclid", "boundary"):
        raise ValueError(f"unknown variant {variant!r}")
    if metric_tag is not None:
        want = ("euclid",) if variant == "euclid" else ("d_bdry", "d_hat_bdry")
        if metric_tag not in want:
            raise VariantMismatch(f"potentials for {metric_tag!r} cannot build the {variant} variant")
    P = np.ascontiguousarray(config.positives, dtype=float)
    A = config.points
    diff = P[:, None, :] - A[None, :, :]
    nrm = np.linalg.norm(diff, axis=-1, keepdims=True)
    nu = np.where(nrm > 0, diff / np.where(nrm > 0, nrm, 1.0), 0.0)
    z = ZetaExact(variant=variant, P=P, A=A, nu=np.ascontiguousarray(nu), zstar=np.ascontiguousarray(zeta_p, dtype=float),
                  zstar_n=np.asarray(zeta_n if zeta_n is not None else np.zeros(config.k), dtype=float))
    if variant == "boundary":
        if dist_fn is None:
            if domain is None:
                raise ValueError("boundary variant needs a domain or a distance function")
            dist_fn = domain.distance
            dist_grad_fn = domain.distance_grad
        z.dist_fn = dist_fn
        z.dist_grad_fn = dist_grad_fn
        z.dp = np.ascontiguousarray(dist_fn(P), dtype=float) if len(P) else np.zeros(0)
    return z


# ---------------------------------------------------------------------------
# Mollification
# ---------------------------------------------------------------------------


def bump(y: np.ndarray) -> np.ndarray:
    r2 = np.sum(np.asarray(y) ** 2, axis=-1)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def bump_grad(y: np.ndarray) -> np.ndarray:
    r2 = np.sum(y ** 2, axis=-1)
    s = np.where(r2 < 1.0, 1.0 - r2, 1.0)
    return np.where((r2 < 1.0)[..., None], bump(y)[..., None] * (-2.0 * y / (s ** 2)[..., None]), 0.0)


def ball_quadrature(n: int = 7):
    """Nodes y_q in the unit ball with weights for phi and grad phi.

    Gauss-Legendre in r (with the r^2 Jacobian) and in cos(theta), trapezoid in
    the azimuth. Returns (y, w, gw) with sum(w) = 1 and gw the weights of grad phi
    under the same normalization.
    """
    xr, wr = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (xr + 1.0)
    wr = 0.5 * wr * r ** 2
    ct, wt = np.polynomial.legendre.leggauss(n)
    ph = 2.0 * np.pi * np.arange(n) / n
    wp = np.full(n, 2.0 * np.pi / n)
    R, CT, PH = np.meshgrid(r, ct, ph, indexing="ij")
    ST = np.sqrt(1.0 - CT ** 2)
    y = np.stack([R * ST * np.cos(PH), R * ST * np.sin(PH), R * CT], axis=-1).reshape(-1, 3)
    W = np.einsum("i,j,k->ijk", wr, wt, wp).reshape(-1)
    phi = bump(y)
    c = 1.0 / np.sum(W * phi)
    w = c * W * phi
    gw = (c * W)[:, None] * bump_grad(y)
    return y, w, gw


@dataclass
class MollifiedZeta:
    """zeta_lambda = phi_lambda * zeta by a fixed ball quadrature."""

    base: ZetaExact
    lam: float
    rho: float
    nodes: np.ndarray
    w: np.ndarray
    gw: np.ndarray

    def evaluate(self, x: np.ndarray, want_hess: bool = False):
        """(values, gradients, hessians or None) at points x (N, 3)."""
        x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
        offs = np.ascontiguousarray(self.lam * self.nodes)
        gw = np.ascontiguousarray(self.gw / self.lam)
        z = self.base
        if z.k == 0:
            n = len(x)
            return np.zeros(n), np.zeros((n, 3)), (np.zeros((n, 3, 3)) if want_hess else None)
        if z.variant == "euclid":
            v, g, h = kernels.zeta_smooth(x, offs, self.w, gw, z.P, z.nu, z.zstar, 1 if want_hess else 0)
            return v, g, (h if want_hess else None)
        v = np.zeros(len(x))
        g = np.zeros((len(x), 3))
        h = np.zeros((len(x), 3, 3)) if want_hess else None
        for q in range(len(offs)):
            y = x - offs[q]
            vals, _, _, _ = z.evaluate(y)
            gr = z.gradient(y)
            v += self.w[q] * vals
            g += self.w[q] * gr
            if want_hess:
                h += gw[q][None, :, None] * gr[:, None, :]
        return v, g, h

    def __call__(self, x):
        return self.evaluate(x)[0]

    def grad(self, x):
        return self.evaluate(x)[1]

    def hess(self, x):
        return self.evaluate(x, want_hess=True)[2]


def mollify(zeta: ZetaExact, lam: float, rho: float, n_quad: int = 7) -> MollifiedZeta:
    """Mollify zeta at scale lam with a normalized exp(-1/(1-|x|^2)) bump."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not 0 < rho < 0.5:
        raise ValueError("rho must lie in (0, 1/2)")
    k = max(zeta.k, 1)
    if lam > (float(2 * k) ** -6) ** (1.0 / rho):
        log.info("lambda=%g above the nominal threshold ((2k)^-6)^(1/rho)", lam)
    y, w, gw = ball_quadrature(n_quad)
    return MollifiedZeta(zeta, float(lam), float(rho), y, w, gw)


def quadrature_drift(mz: MollifiedZeta, probes: np.ndarray, n_ref: int = 11) -> float:
    """Max relative change of values and gradients between the default and a finer rule."""
    ref = MollifiedZeta(mz.base, mz.lam, mz.rho, *ball_quadrature(n_ref))
    v1, g1, _ = mz.evaluate(probes)
    v2, g2, _ = ref.evaluate(probes)
    scale = max(1.0, float(np.max(np.abs(v2))))
    return float(max(np.max(np.abs(v1 - v2)) / scale, np.max(np.abs(g1 - g2))))


# ---------------------------------------------------------------------------
# Critical-set diagnostics
# ---------------------------------------------------------------------------


def critical_planes(zeta: ZetaExact):
    """Planes P_ij (i < j positives) as (normal, offset, value of zeta_(i,j) on the plane)."""
    out = []
    k = zeta.k
    for i in range(k):
        for j in range(i + 1, k):
            nu = zeta.nu[i, j]
            if not np.any(nu):
                continue
            s = 0.5 * (np.dot(zeta.P[i] + zeta.P[j], nu) - zeta.zstar[i] + zeta.zstar[j])
            c = zeta.zstar[i] - np.dot(zeta.P[i], nu) + s
            out.append((nu, s, c))
    return out


def _interval_union_length(intervals) -> float:
    if not intervals:
        return 0.0
    iv = sorted(intervals)
    total = 0.0
    lo, hi = iv[0]
    for a, b in iv[1:]:
        if a > hi:
            total += hi - lo
            lo, hi = a, b
        else:
            hi = max(hi, b)
    return total + hi - lo


def critical_set_probe(mz: MollifiedZeta, kappa: float, region: Optional[tuple] = None, n: int = 24,
                       C: float = 1.0) -> dict:
    """Points with |grad zeta_lambda| < kappa outside the slab set P_lambda, and their cover.

    Args:
        mz: mollified zeta.
        kappa: gradient threshold, below lambda^(2 rho)/3.
        region: (lo, hi) corners of the probe box; defaults to the configuration's
            bounding box with degenerate axes padded by a quarter diameter.
        n: probes per axis.
        C: constant of the cover radius C lambda / (lambda^(2 rho) - 3 kappa).

    Raises:
        KappaTooLarge: kappa >= lambda^(2 rho)/3.
    """
    lam, rho = mz.lam, mz.rho
    t2 = lam ** (2.0 * rho)
    if not kappa < t2 / 3.0:
        raise KappaTooLarge(f"kappa={kappa} must be below lambda^(2 rho)/3={t2 / 3.0}")
    z = mz.base
    if region is None:
        pts = z.A if len(z.A) else np.zeros((1, 3))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        D = float(np.max(hi - lo)) or 1.0
        pad = np.where(hi - lo < 1e-12, 0.25 * D, 0.0)
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = np.asarray(region[0], float), np.asarray(region[1], float)
    axes = [np.linspace(lo[a], hi[a], n) for a in range(3)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    _, g, _ = mz.evaluate(X)
    gnorm = np.linalg.norm(g, axis=1)
    planes = critical_planes(z)
    in_slab = np.zeros(len(X), dtype=bool)
    for nu, s, _ in planes:
        in_slab |= np.abs(X @ nu - s) <= 2.0 * lam
    bad = (gnorm < kappa) & ~in_slab
    radius = C * lam / (t2 - 3.0 * kappa)
    centers = []
    for x in X[bad]:
        if not centers or np.min(np.linalg.norm(np.array(centers) - x, axis=1)) > radius:
            centers.append(x)
    k = z.k
    excluded = [(c - 2.0 * lam, c + 2.0 * lam) for _, _, c in planes]
    return {
        "bad_points": X[bad],
        "n_bad": int(bad.sum()),
        "cover_balls": np.array(centers).reshape(-1, 3),
        "cover_radius": radius,
        "cover_count": len(centers),
        "cover_budget": float(2 * k) ** 8,
        "excluded_levels": excluded,
        "excluded_measure": _interval_union_length(excluded),
        "excluded_budget": 2.0 * lam * k * k,
        "min_grad": float(gnorm.min()) if len(gnorm) else 0.0,
    }


# ---------------------------------------------------------------------------
# Polyhedral approximation of a convex boundary
# ---------------------------------------------------------------------------


@dataclass
class BoundaryPolyhedron:
    """Intersection of tangent halfspaces {z : <z - y_l, nu_l> < 0}."""

    points: np.ndarray
    normals: np.ndarray
    tau: float
    domain: Domain
    theta: float = 0.0

    def distance(self, z: np.ndarray) -> np.ndarray:
        """min_l <y_l - z, nu_l>, the distance to the polytope boundary for interior z."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.min(np.einsum("lc,lc->l", self.points, self.normals)[None, :] - z @ self.normals.T, axis=1)

    def distance_grad(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        d = np.einsum("lc,lc->l", self.points, self.normals)[None, :] - z @ self.normals.T
        return -self.normals[np.argmin(d, axis=1)]

    def contains(self, z: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self.distance(z) >= -tol

    def to_json(self) -> dict:
        return {"n_points": int(len(self.points)), "tau": self.tau, "theta": self.theta}


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + 5.0 ** 0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _separated_subset(pts: np.ndarray, sep: float) -> np.ndarray:
    """Greedy maximal subset (in input order) with pairwise distances >= sep."""
    tree = cKDTree(pts)
    taken = np.zeros(len(pts), dtype=bool)
    chosen = []
    for i in range(len(pts)):
        if taken[i]:
            continue
        chosen.append(i)
        taken[tree.query_ball_point(pts[i], sep * (1.0 - 1e-12))] = True
    return pts[chosen]


def _displace_normals(normals: np.ndarray, theta: float, seed: int) -> np.ndarray:
    """Rotate unit normals slightly so every pair has cross >= theta and every triple det >= theta^2."""
    rng = np.random.default_rng(seed)
    out = normals.copy()
    n = len(out)
    th2 = theta * theta
    cr = np.zeros((n, n, 3))  # cr[i, j] = out[i] x out[j] for i < j < l
    for l in range(n):
        prev = out[:l]
        iu, ju = np.triu_indices(l, 1)
        pair_cross = cr[iu, ju]
        cand = out[l]
        for j in range(60):
            ok = l == 0 or np.all(np.linalg.norm(np.cross(prev, cand), axis=1) >= theta)
            if ok and l >= 2:
                ok = np.all(np.abs(pair_cross @ cand) >= th2)
            if ok:
                break
            step = theta * 2.0 ** (j // 4)
            v = rng.normal(size=3)
            v -= np.dot(v, out[l]) * out[l]
            cand = out[l] + step * v / np.linalg.norm(v)
            cand /= np.linalg.norm(cand)
        out[l] = cand
        if l:
            cr[:l, l] = np.cross(prev, cand)
    return out


def approximate_boundary(domain: Domain, tau: float, theta: Optional[float] = None, seed: int = 0) -> BoundaryPolyhedron:
    """Tangent-halfspace polyhedron of a convex domain.

    For a ball, a tau-separated, 3 tau-covering set is extracted greedily (at
    separation 1.5 tau) from a dense Fibonacci point set; the normals are then
    rotated so all pairs have cross >= theta and all triples det >= theta^2
    (theta defaults to tau^2 / 10). A box is its own polyhedron.

    Raises:
        NonConvexDomain: the descriptor is not a supported convex domain.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if domain.kind == "box":
        lo, hi = np.asarray(domain.lo), np.asarray(domain.hi)
        c = 0.5 * (lo + hi)
        pts, nrm = [], []
        for a in range(3):
            for s, v in ((-1.0, lo[a]), (1.0, hi[a])):
                p = c.copy()
                p[a] = v
                n = np.zeros(3)
                n[a] = s
                pts.append(p)
                nrm.append(n)
        return BoundaryPolyhedron(np.array(pts), np.array(nrm), tau, domain, 0.0)
    if domain.kind != "ball":
        raise NonConvexDomain(f"unsupported domain kind {domain.kind!r}")
    R = domain.radius
    ctr = np.asarray(domain.center)
    t = tau / R
    theta = t * t / 10.0 if theta is None else theta
    dense = fibonacci_sphere(int(np.ceil(4.0 * np.pi * 16.0 / t ** 2)))
    units = _separated_subset(dense, 1.5 * t)
    units = _displace_normals(units, theta, seed)
    return BoundaryPolyhedron(ctr + R * units, units, tau, domain, theta)
