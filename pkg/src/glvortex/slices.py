"""Vortex detection on planar faces and the 2D vorticity estimate.

A face is sampled on an n x n sub-lattice spanned by two in-plane axes. Phase
increments are computed edge by edge in the canonical increasing-index
direction, so faces that share a cube edge produce bitwise identical increments
on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import pdist

from .errors import BoundaryTouch, ZeroOnContour
from .field import LatticeField3, TWO_PI, edge_increment

THRESHOLD = 0.5


@dataclass
class FaceField:
    """Samples of (u, A) on a planar parallelogram.

    Attributes:
        u: (n, m) complex samples.
        points: (n, m, 3) world positions.
        A: (n, m, 3) world vector potential samples.
        key: face identifier.
        sign: orientation sign relative to the base normal.
        normal: base unit normal, equal to ta x tb.
    """

    u: np.ndarray
    points: np.ndarray
    A: np.ndarray
    key: object = None
    sign: int = 1
    normal: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("orientation sign must be +1 or -1")
        if self.normal is None:
            ta, tb = self.axes()
            nrm = np.cross(ta, tb)
            self.normal = nrm / np.linalg.norm(nrm)

    @property
    def shape(self):
        return self.u.shape

    def axes(self):
        """Unit in-plane axes (ta, tb)."""
        ta = self.points[1, 0] - self.points[0, 0]
        tb = self.points[0, 1] - self.points[0, 0]
        return ta / np.linalg.norm(ta), tb / np.linalg.norm(tb)

    def spacings(self):
        return (float(np.linalg.norm(self.points[1, 0] - self.points[0, 0])),
                float(np.linalg.norm(self.points[0, 1] - self.points[0, 0])))

    def plane_coords(self, x: np.ndarray) -> np.ndarray:
        ta, tb = self.axes()
        r = np.asarray(x, dtype=float) - self.points[0, 0]
        return np.stack([r @ ta, r @ tb], axis=-1)


def face_from_points(fld: LatticeField3, points: np.ndarray, key=None, sign: int = 1,
                     normal: Optional[np.ndarray] = None) -> FaceField:
    """Sample a field on given (n, m, 3) face points by trilinear interpolation."""
    u = fld.interp_u(points)
    A = fld.interp_A(points)
    return FaceField(u=u, points=points, A=A, key=key, sign=sign, normal=normal)


def planar_slice(fld: LatticeField3, center, ta, tb, size: float, n: int) -> FaceField:
    """Square slice of side ``size`` centered at ``center`` spanned by unit axes ta, tb."""
    ta = np.asarray(ta, dtype=float)
    tb = np.asarray(tb, dtype=float)
    t = np.linspace(-0.5 * size, 0.5 * size, n)
    pts = np.asarray(center, dtype=float) + t[:, None, None] * ta + t[None, :, None] * tb
    return face_from_points(fld, pts)


def face_increments(face: FaceField):
    """Gauge-invariant increments along +a (shape (n-1, m)) and +b (shape (n, m-1))."""
    u, P, A = face.u, face.points, face.A
    da = P[1:, :] - P[:-1, :]
    db = P[:, 1:] - P[:, :-1]
    ada = np.sum(0.5 * (A[1:, :] + A[:-1, :]) * da, axis=-1)
    adb = np.sum(0.5 * (A[:, 1:] + A[:, :-1]) * db, axis=-1)
    return edge_increment(u[:-1, :], u[1:, :], ada), edge_increment(u[:, :-1], u[:, 1:], adb)


def plaquette_windings(face: FaceField):
    """(integer windings, raw loop sums) per face plaquette, oriented by ta x tb."""
    ia, ib = face_increments(face)
    raw = ia[:, :-1] + ib[1:, :] - ia[:, 1:] - ib[:-1, :]
    return np.rint(raw / TWO_PI).astype(np.int64), raw


def boundary_winding(face: FaceField) -> int:
    """Winding of u/|u| along the outer ring of the face."""
    ia, ib = face_increments(face)
    total = ia[:, 0].sum() + ib[-1, :].sum() - ia[:, -1].sum() - ib[0, :].sum()
    return int(np.rint(total / TWO_PI))


@dataclass
class VortexComponent:
    centroid: np.ndarray
    degree: int
    diameter: float
    n_nodes: int
    grad_energy: float
    pseudo: bool = False

    def to_json(self) -> dict:
        return {"centroid": self.centroid.tolist(), "degree": int(self.degree),
                "diameter": float(self.diameter), "n_nodes": int(self.n_nodes), "pseudo": self.pseudo}


@dataclass
class FaceVortexSet:
    """Essential components of {|u| <= 1/2} on a face.

    Degrees are relative to the face's base normal; multiply by ``sign`` for the
    orientation induced by a cube.
    """

    components: list
    key: object = None
    sign: int = 1
    discarded_zero_degree: int = 0
    outer_winding: int = 0

    @property
    def r_omega(self) -> float:
        return float(sum(c.diameter for c in self.components))

    @property
    def I_omega(self) -> int:
        return len(self.components)

    @property
    def total_degree(self) -> int:
        return int(sum(c.degree for c in self.components))

    def points_degrees(self):
        if not self.components:
            return np.zeros((0, 3)), np.zeros(0, dtype=np.int64)
        return (np.array([c.centroid for c in self.components]),
                np.array([c.degree for c in self.components], dtype=np.int64))

    def to_json(self) -> dict:
        return {"key": None if self.key is None else list(self.key), "sign": self.sign,
                "components": [c.to_json() for c in self.components],
                "discarded_zero_degree": self.discarded_zero_degree}


def tangential_gradient(face: FaceField):
    """Covariant derivatives along ta and tb at face nodes (second-order interior)."""
    sa, sb = face.spacings()
    ta, tb = face.axes()
    ga = np.gradient(face.u, sa, axis=0)
    gb = np.gradient(face.u, sb, axis=1)
    Aa = face.A @ ta
    Ab = face.A @ tb
    return ga - 1j * Aa * face.u, gb - 1j * Ab * face.u


def detect_components(face: FaceField) -> FaceVortexSet:
    """Connected components of {|u| <= 1/2} with their degrees.

    The region of a component is the set of plaquettes touching its nodes (a
    plaquette touching two components goes to the lower label), and its degree
    is the sum of plaquette windings over that region, which equals the winding
    along the region's boundary, one cell outside the component (loop sums are
    added before rounding). Plaquettes
    with nonzero winding touching no component become single-plaquette
    pseudo-components so degrees add up to the outer winding exactly.

    Raises:
        BoundaryTouch: a component reaches the outer ring of the face.
        ZeroOnContour: |u| vanishes on a region boundary node.
    """
    mod = np.abs(face.u)
    mask = mod <= THRESHOLD
    ring = np.zeros_like(mask)
    ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
    if np.any(mask & ring):
        raise BoundaryTouch("vortex component touches the face boundary", key=face.key)
    labels, ncomp = ndimage.label(mask)
    wind, raw = plaquette_windings(face)
    sa, sb = face.spacings()
    corners = [labels[:-1, :-1], labels[1:, :-1], labels[:-1, 1:], labels[1:, 1:]]
    big = ncomp + 1
    plab = np.full(wind.shape, big, dtype=np.int64)
    for c in corners:
        plab = np.minimum(plab, np.where(c > 0, c, big))
    plab[plab == big] = 0
    ga, gb = tangential_gradient(face)
    g2 = (np.abs(ga) ** 2 + np.abs(gb) ** 2) * sa * sb
    comps = []
    discarded = 0
    if ncomp:
        idx = np.arange(1, ncomp + 1)
        # raw sums telescope to the region contour, so they stay quantized even
        # when |u| vanishes at a node inside the component
        degrees = np.rint(ndimage.sum_labels(raw, plab, idx) / TWO_PI).astype(np.int64)
        genergy = ndimage.sum_labels(g2, labels, idx)
        region = plab > 0
        # nodes on region boundaries: corners of region plaquettes not in a component
        pnodes = np.zeros_like(mask)
        pnodes[:-1, :-1] |= region
        pnodes[1:, :-1] |= region
        pnodes[:-1, 1:] |= region
        pnodes[1:, 1:] |= region
        if np.any(pnodes & ~mask & (mod == 0)):
            raise ZeroOnContour("|u| = 0 on a winding contour", key=face.key)
        objs = ndimage.find_objects(labels)
        for lab, sl in zip(idx, objs):
            d = int(degrees[lab - 1])
            if d == 0:
                discarded += 1
                continue
            sub = labels[sl] == lab
            ii, jj = np.nonzero(sub)
            ii = ii + sl[0].start
            jj = jj + sl[1].start
            pts = face.points[ii, jj]
            diam = float(pdist(pts).max()) if len(pts) > 1 else 0.0
            comps.append(VortexComponent(centroid=pts.mean(axis=0), degree=d, diameter=diam,
                                         n_nodes=len(pts), grad_energy=float(genergy[lab - 1])))
    orphan = (plab == 0) & (wind != 0)
    for i, j in zip(*np.nonzero(orphan)):
        c = 0.25 * (face.points[i, j] + face.points[i + 1, j] + face.points[i, j + 1] + face.points[i + 1, j + 1])
        comps.append(VortexComponent(centroid=c, degree=int(wind[i, j]), diameter=float(np.hypot(sa, sb)),
                                     n_nodes=0, grad_energy=0.0, pseudo=True))
    return FaceVortexSet(components=comps, key=face.key, sign=face.sign,
                         discarded_zero_degree=discarded, outer_winding=boundary_winding(face))


# ---------------------------------------------------------------------------
# 2D estimate
# ---------------------------------------------------------------------------


def face_fd_flux(face: FaceField):
    """Finite-difference vorticity per plaquette: circulation of j + A, with centers."""
    u, P = face.u, face.points
    ta, tb = face.axes()
    sa, sb = face.spacings()
    ga = np.gradient(u, sa, axis=0)
    gb = np.gradient(u, sb, axis=1)
    Aa = face.A @ ta
    Ab = face.A @ tb
    m2 = np.abs(u) ** 2
    ja = np.imag(np.conj(u) * ga) - Aa * m2 + Aa
    jb = np.imag(np.conj(u) * gb) - Ab * m2 + Ab
    ea = 0.5 * (ja[1:, :] + ja[:-1, :]) * sa
    eb = 0.5 * (jb[:, 1:] + jb[:, :-1]) * sb
    flux = ea[:, :-1] + eb[1:, :] - ea[:, 1:] - eb[:-1, :]
    centers = 0.25 * (P[:-1, :-1] + P[1:, :-1] + P[:-1, 1:] + P[1:, 1:])
    return flux, centers


def face_energy(face: FaceField, eps: float) -> float:
    """2D Ginzburg-Landau energy on the face (tangential gradient)."""
    ga, gb = tangential_gradient(face)
    pot = (1.0 - np.abs(face.u) ** 2) ** 2 / (4.0 * eps * eps)
    e = 0.5 * (np.abs(ga) ** 2 + np.abs(gb) ** 2) + pot
    # normal component of curl A from in-plane derivatives
    ta, tb = face.axes()
    sa, sb = face.spacings()
    Ab = face.A @ tb
    Aa = face.A @ ta
    curl_n = np.gradient(Ab, sa, axis=0) - np.gradient(Aa, sb, axis=1)
    e = e + 0.5 * curl_n ** 2
    wa = np.full(face.shape[0], sa)
    wa[0] = wa[-1] = 0.5 * sa
    wb = np.full(face.shape[1], sb)
    wb[0] = wb[-1] = 0.5 * sb
    return float(np.sum(e * np.outer(wa, wb)))


def boundary_energy(face: FaceField, eps: float) -> float:
    """1D energy along the outer ring (derivative along the ring)."""
    u, P, A = face.u, face.points, face.A
    ring_idx = ([(i, 0) for i in range(face.shape[0] - 1)]
                + [(face.shape[0] - 1, j) for j in range(face.shape[1] - 1)]
                + [(i, face.shape[1] - 1) for i in range(face.shape[0] - 1, 0, -1)]
                + [(0, j) for j in range(face.shape[1] - 1, 0, -1)])
    ii = np.array([r[0] for r in ring_idx])
    jj = np.array([r[1] for r in ring_idx])
    ur = u[ii, jj]
    pr = P[ii, jj]
    ar = A[ii, jj]
    un = np.roll(ur, -1)
    dpos = np.roll(pr, -1, axis=0) - pr
    ds = np.linalg.norm(dpos, axis=1)
    amid = 0.5 * (ar + np.roll(ar, -1, axis=0))
    du = (un - ur * np.exp(1j * np.sum(amid * dpos, axis=1))) / ds
    pot = (1.0 - np.abs(ur) ** 2) ** 2 / (4.0 * eps * eps)
    return float(np.sum((0.5 * np.abs(du) ** 2 + pot) * ds))


@dataclass
class TentFamily:
    """Seeded Lipschitz tents xi(x) = max(0, r - |M (x - c)|) / max(r, |M|) in plane coordinates."""

    centers: np.ndarray
    mats: np.ndarray
    radii: np.ndarray
    norms: np.ndarray

    @staticmethod
    def make(size: int, extent: np.ndarray, scale: float, seed: int = 0) -> "TentFamily":
        rng = np.random.default_rng(seed)
        centers = rng.uniform(0.0, 1.0, (size, 2)) * extent
        ang = rng.uniform(0.0, np.pi, size)
        s1 = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size)) / scale
        s2 = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size)) / scale
        c, s = np.cos(ang), np.sin(ang)
        R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        D = np.zeros((size, 2, 2))
        D[:, 0, 0] = s1
        D[:, 1, 1] = s2
        mats = R @ D @ np.transpose(R, (0, 2, 1))
        radii = rng.uniform(0.25, 1.0, size)
        lip = np.maximum(s1, s2)
        norms = np.maximum(radii, lip)
        return TentFamily(centers, mats, radii, norms)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        """Values (size, N) at plane points y (N, 2)."""
        d = y[None, :, :] - self.centers[:, None, :]
        md = np.einsum("fab,fnb->fna", self.mats, d)
        return np.maximum(0.0, self.radii[:, None] - np.linalg.norm(md, axis=-1)) / self.norms[:, None]


def verify_2d_estimate(face: FaceField, vortices: FaceVortexSet, eps: float, n_tests: int = 200,
                       seed: int = 0) -> dict:
    """Lower estimate of the vorticity error on a face and the estimate's right-hand side.

    lhs = max over a seeded tent family of |<mu_face - 2 pi sum d_i delta_{a_i}, xi>|,
    rhs = max(eps, r_omega) (1 + F(face) + F(boundary of face)).
    """
    flux, centers = face_fd_flux(face)
    yc = face.plane_coords(centers).reshape(-1, 2)
    extent = face.plane_coords(face.points[-1, -1])
    fam = TentFamily.make(n_tests, extent, scale=float(np.max(extent)) / 4.0, seed=seed)
    mu = fam(yc) @ flux.reshape(-1)
    pts, deg = vortices.points_degrees()
    if len(deg):
        mu = mu - TWO_PI * (fam(face.plane_coords(pts)) @ deg.astype(float))
    lhs = float(np.max(np.abs(mu))) if len(mu) else 0.0
    F_face = face_energy(face, eps)
    F_bdry = boundary_energy(face, eps)
    rhs = max(eps, vortices.r_omega) * (1.0 + F_face + F_bdry)
    return {"lhs_norm_estimate": lhs, "rhs_bound": rhs, "constant_fit": lhs / rhs,
            "F_face": F_face, "F_boundary": F_bdry, "r_omega": vortices.r_omega}
