"""Space-time vorticity, velocity and the product-estimate check on a (t, x1, x2) lattice."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .current import PolyhedralCurrent
from .errors import UnsupportedGeometry
from .field import LatticeField3

TWO_PI = 2.0 * np.pi
SLACK_TOLERANCE = 0.10

WeightLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float]


@dataclass
class SpaceTimeField:
    """A lattice field whose axis 0 is time.

    The gauge splits as A = (Phi, B1, B2): the scalar potential is the time
    component and B is the spatial 2-vector.
    """

    fld: LatticeField3

    def __post_init__(self):
        d = self.fld.dims
        if d[0] < 2 or min(d[1:]) < 2:
            raise ValueError("need at least 2 time slices and 2 nodes per spatial axis")

    @property
    def u(self) -> np.ndarray:
        return self.fld.u

    @property
    def h(self) -> float:
        return self.fld.h

    @property
    def Phi(self) -> np.ndarray:
        return self.fld.A_or_zero[..., 0]

    @property
    def B(self) -> np.ndarray:
        return self.fld.A_or_zero[..., 1:]

    @property
    def times(self) -> np.ndarray:
        return self.fld.axis_coords(0)


def _d(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    # centered inside, one-sided first order at the ends
    return np.gradient(f, h, axis=axis, edge_order=1)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Real inner product <a, b> = Re(a conj(b)) of complex arrays."""
    return (a * np.conj(b)).real


def slice_weights(dims, h: float) -> np.ndarray:
    """Trapezoid weights of one spatial slice."""
    w = [np.full(n, h) for n in dims]
    for v in w:
        v[0] = v[-1] = 0.5 * h
    return np.outer(w[0], w[1])


def spacetime_weights(dims, h: float) -> np.ndarray:
    wt = np.full(dims[0], h)
    wt[0] = wt[-1] = 0.5 * h
    return wt[:, None, None] * slice_weights(dims[1:], h)[None]


def space_vorticity(stf: SpaceTimeField) -> np.ndarray:
    """J = curl <grad u, iu> + curl((1 - |u|^2) B) at every node, per time slice."""
    u, h = stf.u, stf.h
    iu = 1j * u
    s = 1.0 - np.abs(u) ** 2
    a1 = _dot(_d(u, 1, h), iu) + s * stf.B[..., 0]
    a2 = _dot(_d(u, 2, h), iu) + s * stf.B[..., 1]
    return _d(a2, 1, h) - _d(a1, 2, h)


def velocity_field(stf: SpaceTimeField) -> np.ndarray:
    """V = 2<i d_t u, grad^perp u> + d_t((1-|u|^2) B^perp) - grad^perp((1-|u|^2) Phi).

    grad^perp = (-d_2, d_1) and B^perp = (-B_2, B_1). Returns an array of shape
    dims + (2,).
    """
    u, h = stf.u, stf.h
    if stf.fld.dims[0] < 3:
        raise ValueError("velocity needs at least 3 time slices")
    ut = _d(u, 0, h)
    d1, d2 = _d(u, 1, h), _d(u, 2, h)
    s = 1.0 - np.abs(u) ** 2
    B, Phi = stf.B, stf.Phi
    sP = s * Phi
    V1 = 2.0 * _dot(1j * ut, -d2) + _d(-s * B[..., 1], 0, h) + _d(sP, 2, h)
    V2 = 2.0 * _dot(1j * ut, d1) + _d(s * B[..., 0], 0, h) - _d(sP, 1, h)
    return np.stack([V1, V2], axis=-1)


def slice_integrals(stf: SpaceTimeField, data: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-slice integral of J (or of ``data``) with trapezoid weights."""
    J = space_vorticity(stf) if data is None else data
    w = slice_weights(stf.fld.dims[1:], stf.h)
    return np.einsum("tij,ij->t", J, w) if J.ndim == 3 else np.einsum("tij...,ij->t...", J, w)


def continuity_residual(stf: SpaceTimeField, trim: int = 2) -> dict:
    """r = d_t J + div V with per-slice max and L1 norms.

    Norms skip ``trim`` layers at every face of the box, where one-sided
    differences dominate. ``l1`` is the space-time L1 norm on the trimmed
    region; ``J_l1`` is the matching norm of J for scale.
    """
    h = stf.h
    J = space_vorticity(stf)
    V = velocity_field(stf)
    r = _d(J, 0, h) + _d(V[..., 0], 1, h) + _d(V[..., 1], 2, h)
    sl = tuple(slice(trim, n - trim) for n in r.shape)
    ri, Ji = r[sl], J[sl]
    cell = h ** 3
    per_slice_max = np.abs(ri).max(axis=(1, 2)) if ri.size else np.zeros(0)
    per_slice_l1 = np.abs(ri).sum(axis=(1, 2)) * h ** 2 if ri.size else np.zeros(0)
    return {
        "residual": r,
        "max": float(np.abs(ri).max()) if ri.size else 0.0,
        "l1": float(np.abs(ri).sum() * cell),
        "J_l1": float(np.abs(Ji).sum() * cell),
        "per_slice_max": per_slice_max,
        "per_slice_l1": per_slice_l1,
        "trim": trim,
    }


def _eval(w: WeightLike, stf: SpaceTimeField, points: np.ndarray, ncomp: int) -> np.ndarray:
    """Evaluate a callable, node array or constant at arbitrary points."""
    if callable(w):
        out = np.asarray(w(points), dtype=float)
    elif np.isscalar(w):
        out = np.full(points.shape[:-1] + ((ncomp,) if ncomp > 1 else ()), float(w))
    else:
        arr = np.asarray(w, dtype=float)
        if ncomp == 1:
            out = stf.fld.interpolate(arr, points)
        else:
            out = np.stack([stf.fld.interpolate(arr[..., c], points) for c in range(ncomp)], axis=-1)
    return out


def _touches_boundary(values: np.ndarray, tol: float = 1e-12) -> bool:
    v = np.abs(values)
    if v.ndim == 4:
        v = v.max(axis=-1)
    faces = [v[0], v[-1], v[:, 0], v[:, -1], v[:, :, 0], v[:, :, -1]]
    return any(float(np.max(f)) > tol for f in faces)


def current_pairing(nu: PolyhedralCurrent, f, X, stf: SpaceTimeField, n_gauss: int = 8) -> dict:
    """int f <X, tau_x> d|nu| and int max(|tau_1|, |tau_2|) d|nu|.

    tau_x is the spatial part of the oriented tangent; each segment carries
    2 pi times its multiplicity. The first pairing is the evaluation of
    f nu wedge (-X2 dx1 + X1 dx2) with nu identified with (J, V).
    """
    if nu.n_segments == 0:
        return {"pairing": 0.0, "transverse_mass": 0.0}
    s, w = np.polynomial.legendre.leggauss(n_gauss)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    d = nu.ends - nu.starts
    pts = nu.starts[:, None, :] + s[None, :, None] * d[:, None, :]
    fv = _eval(f, stf, pts, 1)
    Xv = _eval(X, stf, pts, 2)
    integrand = fv * np.einsum("sqc,sc->sq", Xv, d[:, 1:])
    weight = TWO_PI * nu.mult
    pairing = float(np.sum(weight * (integrand @ w)))
    transverse = float(np.sum(weight * np.maximum(np.abs(d[:, 1]), np.abs(d[:, 2]))))
    return {"pairing": pairing, "transverse_mass": transverse}


def product_estimate_check(stf: SpaceTimeField, f: WeightLike, X: WeightLike, Lam: Optional[float], eps: float,
                           nu: PolyhedralCurrent, C: float = 1.0, M_eps: Optional[float] = None,
                           tolerance: float = SLACK_TOLERANCE) -> dict:
    """Evaluate both sides of the product estimate.

    LHS = int |f|^2/Lam |d_t u - i u Phi|^2 + int Lam |X . (grad u - i u B)|^2,
    main = (|log eps| - C log M_eps) |int f nu wedge (-X2 dx1 + X1 dx2)|,
    correction = C int max(|nu wedge dx1|, |nu wedge dx2|),
    slack = LHS - (main - correction).

    ``Lam=None`` picks the balancing value, which turns the LHS into twice the
    geometric mean of the two integrals. M_eps defaults to exp(sqrt|log eps|).
    The O(|log eps|^-(m+3n)/2+1) remainder is not evaluated.

    Raises:
        UnsupportedGeometry: f or X is nonzero on the boundary of the box.
    """
    fld = stf.fld
    h = stf.h
    nodes = fld.node_positions()
    fv = _eval(f, stf, nodes, 1)
    Xv = _eval(X, stf, nodes, 2)
    if _touches_boundary(fv) or _touches_boundary(Xv):
        raise UnsupportedGeometry("f and X must vanish on the boundary of the space-time box")
    u = stf.u
    Dt = _d(u, 0, h) - 1j * u * stf.Phi
    D1 = _d(u, 1, h) - 1j * u * stf.B[..., 0]
    D2 = _d(u, 2, h) - 1j * u * stf.B[..., 1]
    wq = spacetime_weights(fld.dims, h)
    I_t = float(np.sum(wq * fv ** 2 * np.abs(Dt) ** 2))
    I_x = float(np.sum(wq * np.abs(Xv[..., 0] * D1 + Xv[..., 1] * D2) ** 2))
    if Lam is None:
        Lam = float(np.sqrt(I_t / I_x)) if I_t > 0 and I_x > 0 else 1.0
    if not Lam > 0:
        raise ValueError("Lambda must be positive")
    lhs = I_t / Lam + Lam * I_x
    if M_eps is None:
        M_eps = float(np.exp(np.sqrt(abs(np.log(eps)))))
    pr = current_pairing(nu, f, X, stf)
    coeff = abs(np.log(eps)) - C * np.log(M_eps)
    main = coeff * abs(pr["pairing"])
    correction = C * pr["transverse_mass"]
    slack = lhs - (main - correction)
    return {
        "lhs": lhs, "lhs_time": I_t / Lam, "lhs_space": Lam * I_x, "Lambda": Lam, "M_eps": M_eps, "C": C,
        "log_coefficient": coeff, "pairing": pr["pairing"], "main": main, "correction": correction,
        "slack": slack, "relative_slack": slack / lhs if lhs > 0 else 0.0,
        "pass": bool(slack >= -tolerance * lhs), "tolerance": tolerance,
    }


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


def translating_vortex(n: int = 33, eps: float = 0.05, speed: float = 0.3, direction=(1.0, 0.0),
                       start=(0.35, 0.5), degree: int = 1, chi: Optional[Callable] = None,
                       T: float = 1.0) -> SpaceTimeField:
    """Vortex x(t) = start + speed t e on [0, T] x [0, T]^2 with a tanh(r/eps) core.

    ``chi(t, x1, x2) -> (chi, d_t chi, d_1 chi, d_2 chi)`` applies the gauge
    transformation u -> u e^{i chi}, Phi -> Phi + d_t chi, B -> B + grad chi.
    """
    h = T / (n - 1)
    c = np.arange(n) * h
    t, x1, x2 = np.meshgrid(c, c, c, indexing="ij")
    e = np.asarray(direction, float)
    e = e / np.linalg.norm(e)
    y1 = x1 - start[0] - speed * e[0] * t
    y2 = x2 - start[1] - speed * e[1] * t
    r = np.hypot(y1, y2)
    u = np.tanh(r / eps) * np.exp(1j * degree * np.arctan2(y2, y1))
    A = np.zeros(u.shape + (3,))
    if chi is not None:
        g, gt, g1, g2 = chi(t, x1, x2)
        u = u * np.exp(1j * g)
        A[..., 0] += gt
        A[..., 1] += g1
        A[..., 2] += g2
    return SpaceTimeField(LatticeField3(u=u, h=h, A=A))


def static_vortex(n: int = 33, eps: float = 0.05, center=(0.5, 0.5), degree: int = 1) -> SpaceTimeField:
    return translating_vortex(n, eps, speed=0.0, start=center, degree=degree)


def smooth_cutoff(center, radii) -> Callable[[np.ndarray], np.ndarray]:
    """prod_a b((x_a - c_a)/r_a) with the C^infinity bump b(s) = exp(1 - 1/(1 - s^2)) on |s| < 1."""
    c = np.asarray(center, float)
    r = np.asarray(radii, float)

    def fn(x):
        s = (np.asarray(x, float) - c) / r
        inside = np.all(np.abs(s) < 1.0, axis=-1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = np.prod(np.exp(1.0 - 1.0 / (1.0 - np.minimum(s ** 2, 1.0 - 1e-300))), axis=-1)
        return np.where(inside, v, 0.0)

    return fn
