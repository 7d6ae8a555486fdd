"""Lattice representation of (u, A), energies, discrete vorticity and synthetic fields."""
from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    EmptyRegion,
    FormatError,
    GeometryOutOfBounds,
    ZeroModulus,
)

TWO_PI = 2.0 * np.pi
GLF3_MAGIC = b"GLF3"
GLF3_VERSION = 1
_HEADER = struct.Struct("<4sI3Id3dBB")


# ---------------------------------------------------------------------------
# Domain descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Analytic description of Omega: an axis-aligned box or a ball.

    Attributes:
        kind: ``"box"`` or ``"ball"``.
        lo, hi: box corners (box only).
        center, radius: ball geometry (ball only).
    """

    kind: str
    lo: tuple = (0.0, 0.0, 0.0)
    hi: tuple = (1.0, 1.0, 1.0)
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 1.0

    @staticmethod
    def box(lo: Sequence[float], hi: Sequence[float]) -> "Domain":
        return Domain("box", lo=tuple(float(v) for v in lo), hi=tuple(float(v) for v in hi))

    @staticmethod
    def ball(center: Sequence[float], radius: float) -> "Domain":
        return Domain("ball", center=tuple(float(v) for v in center), radius=float(radius))

    @staticmethod
    def parse(text: str, lattice_lo=None, lattice_hi=None) -> "Domain":
        """Parse ``box``, ``box:x0,y0,z0,x1,y1,z1`` or ``ball:cx,cy,cz,r``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        vals = [float(v) for v in rest.split(",")] if rest.strip() else []
        if kind == "box":
            if not vals:
                if lattice_lo is None:
                    raise ValueError("box domain needs bounds")
                return Domain.box(lattice_lo, lattice_hi)
            if len(vals) != 6:
                raise ValueError("box domain expects 6 numbers")
            return Domain.box(vals[:3], vals[3:])
        if kind == "ball":
            if len(vals) != 4 or vals[3] <= 0:
                raise ValueError("ball domain expects cx,cy,cz,r with r > 0")
            return Domain.ball(vals[:3], vals[3])
        raise ValueError(f"unknown domain kind {kind!r}")

    def describe(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}

    @property
    def is_convex(self) -> bool:
        return True

    def signed_distance(self, x) -> np.ndarray:
        """Signed distance to the boundary, negative inside."""
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.linalg.norm(x - np.asarray(self.center), axis=-1) - self.radius
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        q = np.maximum(lo - x, x - hi)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def distance(self, x) -> np.ndarray:
        """Unsigned distance d(x, boundary)."""
        return np.abs(self.signed_distance(x))

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return self.signed_distance(x) <= tol

    def distance_grad(self, x) -> np.ndarray:
        """Gradient of d(x, boundary) for interior points (a.e.; ties by lowest index)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "ball":
            r = x - np.asarray(self.center)
            nr = np.linalg.norm(r, axis=-1, keepdims=True)
            nr = np.where(nr == 0, 1.0, nr)
            return -r / nr
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        gaps = np.concatenate([x - lo, hi - x], axis=-1)
        idx = np.argmin(gaps, axis=-1)
        g = np.zeros_like(x)
        ax = idx % 3
        sign = np.where(idx < 3, 1.0, -1.0)
        g[np.arange(len(x)), ax] = sign
        return g

    def project(self, x) -> np.ndarray:
        """Nearest boundary point (for interior points)."""
        x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
        if self.kind == "ball":
            c = np.asarray(self.center)
            r = x - c
            nr = np.linalg.norm(r, axis=-1, keepdims=True)
            r = np.where(nr == 0, np.array([1.0, 0.0, 0.0]), r / np.where(nr == 0, 1.0, nr))
            return c + self.radius * r
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        gaps = np.concatenate([x - lo, hi - x], axis=-1)
        idx = np.argmin(gaps, axis=-1)
        rows = np.arange(len(x))
        ax = idx % 3
        x[rows, ax] = np.where(idx < 3, lo[ax], hi[ax])
        return x

    def outward_normal(self, x) -> np.ndarray:
        """Outward unit normal at the nearest boundary point."""
        return -self.distance_grad(x)


# ---------------------------------------------------------------------------
# Lattice field
# ---------------------------------------------------------------------------


@dataclass
class LatticeField3:
    """Order parameter ``u`` (and optional vector potential ``A``) on a regular lattice.

    Arrays are indexed ``[i, j, k]`` with ``x = origin + h * (i, j, k)``.

    Attributes:
        u: complex array of shape ``dims``.
        h: lattice spacing.
        origin: position of node ``(0, 0, 0)``.
        A: optional real array of shape ``dims + (3,)``.
        mask: optional boolean array marking nodes in Omega.
        domain: analytic boundary descriptor; defaults to the lattice box.
    """

    u: np.ndarray
    h: float
    origin: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))
    A: Optional[np.ndarray] = None
    mask: Optional[np.ndarray] = None
    domain: Optional[Domain] = None

    def __post_init__(self):
        self.u = np.asarray(self.u)
        if not np.iscomplexobj(self.u):
            self.u = self.u.astype(complex)
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if self.u.ndim != 3 or min(self.u.shape) < 2:
            raise ValueError("u must be a 3D array with every dimension >= 2")
        if not self.h > 0:
            raise ValueError("spacing h must be positive")
        if self.A is not None:
            self.A = np.asarray(self.A, dtype=float)
            if self.A.shape != self.u.shape + (3,):
                raise ValueError("A must have shape dims + (3,)")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.u.shape:
                raise ValueError("mask must have shape dims")
        if self.domain is None:
            self.domain = Domain.box(self.lo, self.hi)

    @property
    def dims(self) -> tuple:
        return tuple(int(d) for d in self.u.shape)

    @property
    def lo(self) -> np.ndarray:
        return self.origin.copy()

    @property
    def hi(self) -> np.ndarray:
        return self.origin + self.h * (np.asarray(self.dims) - 1)

    @property
    def valid(self) -> np.ndarray:
        """Nodes that may be read: the mask if present, otherwise all nodes."""
        if self.mask is None:
            return np.ones(self.dims, dtype=bool)
        return self.mask

    @property
    def A_or_zero(self) -> np.ndarray:
        if self.A is None:
            return np.zeros(self.dims + (3,))
        return self.A

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.h * np.arange(self.dims[axis])

    def node_positions(self) -> np.ndarray:
        gx, gy, gz = np.meshgrid(*(self.axis_coords(a) for a in range(3)), indexing="ij")
        return np.stack([gx, gy, gz], axis=-1)

    def with_(self, **changes) -> "LatticeField3":
        return dataclasses.replace(self, **changes)

    # -- interpolation -----------------------------------------------------

    def _corners(self, points: np.ndarray):
        pts = np.asarray(points, dtype=float)
        g = (pts - self.origin) / self.h
        dims = np.asarray(self.dims)
        g = np.clip(g, 0.0, dims - 1.0)
        i0 = np.minimum(np.floor(g).astype(np.int64), dims - 2)
        t = g - i0
        return i0, t

    def interpolate(self, data: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Trilinear interpolation of node data (scalar or trailing-vector) at points.

        Corner weights on masked-out nodes are dropped and the rest renormalized,
        so masked nodes are never read.
        """
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, 3)
        i0, t = self._corners(flat)
        extra = data.shape[3:]
        nx, ny, nz = self.dims
        base = (i0[:, 0] * ny + i0[:, 1]) * nz + i0[:, 2]
        dflat = data.reshape((-1,) + extra)
        vflat = None if self.mask is None else self.valid.reshape(-1)
        out = np.zeros((len(flat),) + extra, dtype=data.dtype)
        wsum = np.zeros(len(flat))
        s = 1.0 - t
        shape = (-1,) + (1,) * len(extra)
        for c in range(8):
            ox, oy, oz = (c >> 0) & 1, (c >> 1) & 1, (c >> 2) & 1
            idx = base + (ox * ny + oy) * nz + oz
            w = (t[:, 0] if ox else s[:, 0]) * (t[:, 1] if oy else s[:, 1]) * (t[:, 2] if oz else s[:, 2])
            if vflat is not None:
                w = np.where(vflat[idx], w, 0.0)
            out += dflat[idx] * w.reshape(shape)
            wsum += w
        if self.mask is not None:
            good = wsum > 0
            norm = np.where(good, wsum, 1.0).reshape((-1,) + (1,) * len(extra))
            out = out / norm
            out[~good] = np.nan
        return out.reshape(pts.shape[:-1] + extra)

    def interp_u(self, points: np.ndarray) -> np.ndarray:
        return self.interpolate(self.u, points)

    def interp_A(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.A is None:
            return np.zeros(pts.shape[:-1] + (3,))
        return self.interpolate(self.A, pts)


@dataclass
class Filament:
    """Ground-truth vortex filament: an oriented polyline with integer multiplicity."""

    points: np.ndarray
    multiplicity: int = 1

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def to_json(self) -> dict:
        return {"points": np.asarray(self.points).tolist(), "multiplicity": int(self.multiplicity)}


# ---------------------------------------------------------------------------
# GLF3 I/O
# ---------------------------------------------------------------------------


def write_glf3(path: Union[str, Path], fld: LatticeField3) -> None:
    """Write a field in the little-endian GLF3 format (samples x-fastest)."""
    nx, ny, nz = fld.dims
    head = _HEADER.pack(
        GLF3_MAGIC, GLF3_VERSION, nx, ny, nz, float(fld.h),
        *(float(v) for v in fld.origin), int(fld.A is not None), int(fld.mask is not None),
    )
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.asarray(fld.u.transpose(2, 1, 0), dtype="<c8").tobytes())
        if fld.A is not None:
            fh.write(np.asarray(fld.A.transpose(2, 1, 0, 3), dtype="<f4").tobytes())
        if fld.mask is not None:
            fh.write(np.asarray(fld.mask.transpose(2, 1, 0), dtype=np.uint8).tobytes())


def read_glf3(path: Union[str, Path], domain: Optional[Domain] = None) -> LatticeField3:
    """Read a GLF3 file. Unknown versions and truncated payloads are rejected."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("file too short for a GLF3 header")
    magic, version, nx, ny, nz, h, ox, oy, oz, has_a, has_mask = _HEADER.unpack_from(raw, 0)
    if magic != GLF3_MAGIC:
        raise FormatError("bad magic bytes")
    if version != GLF3_VERSION:
        raise FormatError(f"unsupported GLF3 version {version}")
    n = nx * ny * nz
    need = _HEADER.size + 8 * n + (12 * n if has_a else 0) + (n if has_mask else 0)
    if len(raw) != need:
        raise FormatError(f"payload size {len(raw)} does not match header ({need})")
    off = _HEADER.size
    u = np.frombuffer(raw, dtype="<c8", count=n, offset=off).reshape(nz, ny, nx).transpose(2, 1, 0)
    off += 8 * n
    A = None
    if has_a:
        A = np.frombuffer(raw, dtype="<f4", count=3 * n, offset=off)
        A = A.reshape(nz, ny, nx, 3).transpose(2, 1, 0, 3).astype(float)
        off += 12 * n
    mask = None
    if has_mask:
        mask = np.frombuffer(raw, dtype=np.uint8, count=n, offset=off)
        mask = mask.reshape(nz, ny, nx).transpose(2, 1, 0).astype(bool)
    return LatticeField3(
        u=np.ascontiguousarray(u).astype(np.complex128), h=float(h),
        origin=np.array([ox, oy, oz]), A=None if A is None else np.ascontiguousarray(A),
        mask=None if mask is None else np.ascontiguousarray(mask), domain=domain,
    )


def quantize_like_glf3(fld: LatticeField3) -> LatticeField3:
    """Round samples to the stored precision so a write/read round trip is exact."""
    u = fld.u.astype(np.complex64).astype(np.complex128)
    A = None if fld.A is None else fld.A.astype(np.float32).astype(float)
    return fld.with_(u=u, A=A)


# ---------------------------------------------------------------------------
# Derivatives and energies
# ---------------------------------------------------------------------------


def _shift(a: np.ndarray, offset: int, axis: int, fill) -> np.ndarray:
    """Return b with b[i] = a[i + offset] along axis, padded with ``fill``."""
    out = np.full_like(a, fill)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if offset > 0:
        src[axis] = slice(offset, n)
        dst[axis] = slice(0, n - offset)
    else:
        src[axis] = slice(0, n + offset)
        dst[axis] = slice(-offset, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def derivative(f: np.ndarray, axis: int, h: float, valid: Optional[np.ndarray] = None) -> np.ndarray:
    """Centered difference along ``axis``; one-sided next to the lattice end or a masked node."""
    if valid is None:
        valid = np.ones(f.shape[:3], dtype=bool)
    vext = valid.reshape(valid.shape + (1,) * (f.ndim - 3))
    fp = _shift(f, 1, axis, 0)
    fm = _shift(f, -1, axis, 0)
    vp = _shift(valid, 1, axis, False) & valid
    vm = _shift(valid, -1, axis, False) & valid
    vp = vp.reshape(vext.shape)
    vm = vm.reshape(vext.shape)
    central = (fp - fm) / (2.0 * h)
    fwd = (fp - f) / h
    bwd = (f - fm) / h
    out = np.where(vp & vm, central, np.where(vp, fwd, np.where(vm, bwd, 0.0)))
    return np.where(vext, out, 0.0)


def covariant_gradient(fld: LatticeField3, use_A: bool = True) -> np.ndarray:
    """Return (3,) + dims complex array with D_k u = d_k u - i A_k u."""
    valid = fld.valid
    out = np.empty((3,) + fld.dims, dtype=complex)
    for k in range(3):
        d = derivative(fld.u, k, fld.h, valid)
        if use_A and fld.A is not None:
            d = d - 1j * fld.A[..., k] * fld.u
        out[k] = d
    return out


def curl_A(fld: LatticeField3) -> np.ndarray:
    """Node-wise curl of A by the same stencil as the gradient; zeros if A is absent."""
    if fld.A is None:
        return np.zeros(fld.dims + (3,))
    v = fld.valid
    d = [[derivative(fld.A[..., c], a, fld.h, v) for c in range(3)] for a in range(3)]
    return np.stack([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]], axis=-1)


def energy_density(fld: LatticeField3, eps: float, use_A: bool = True) -> np.ndarray:
    """Node samples of e = 1/2|D_A u|^2 + (1-|u|^2)^2/(4 eps^2) + 1/2|curl A|^2.

    With ``use_A=False`` the density of E_eps (A ignored) is returned.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    g = covariant_gradient(fld, use_A=use_A)
    e = 0.5 * np.sum(np.abs(g) ** 2, axis=0)
    e += (1.0 - np.abs(fld.u) ** 2) ** 2 / (4.0 * eps * eps)
    if use_A and fld.A is not None:
        e += 0.5 * np.sum(curl_A(fld) ** 2, axis=-1)
    return np.where(fld.valid, e, 0.0)


def node_weights(dims: Sequence[int], h: float) -> np.ndarray:
    """Quadrature weight h^3/8 times the number of lattice cells touching each node."""
    counts = []
    for n in dims:
        c = np.full(n, 2.0)
        c[0] = c[-1] = 1.0
        counts.append(c)
    return (h ** 3 / 8.0) * np.einsum("i,j,k->ijk", *counts)


RegionLike = Union[None, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def region_mask(fld: LatticeField3, region: RegionLike) -> np.ndarray:
    """Resolve a node predicate (None, boolean array or callable on positions)."""
    if region is None:
        sel = np.ones(fld.dims, dtype=bool)
    elif callable(region):
        sel = np.asarray(region(fld.node_positions()), dtype=bool)
    else:
        sel = np.asarray(region, dtype=bool)
    return sel & fld.valid


@dataclass
class EnergyReport:
    F_eps: float
    E_eps: float
    GL_eps_excess: Optional[float]
    region_volume: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def energy(fld: LatticeField3, eps: float, region: RegionLike = None, H_ex=None) -> EnergyReport:
    """Lattice quadrature of F_eps and E_eps over a node region.

    Each lattice cell contributes h^3/8 times the density at each of its corners
    that lies in the region, so partial cells are weighted by their fraction of
    corners inside.

    Args:
        fld: the field.
        eps: Ginzburg-Landau parameter.
        region: node predicate (boolean array or callable on positions).
        H_ex: optional constant applied field; adds the ``int |curl A - H_ex|^2`` term.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    sel = region_mask(fld, region)
    if not sel.any():
        raise EmptyRegion("no lattice nodes selected")
    w = node_weights(fld.dims, fld.h) * sel
    F = float(np.sum(w * energy_density(fld, eps, use_A=True)))
    E = float(np.sum(w * energy_density(fld, eps, use_A=False)))
    excess = None
    if H_ex is not None:
        c = curl_A(fld) - np.asarray(H_ex, dtype=float)
        excess = float(np.sum(w * np.sum(c ** 2, axis=-1)))
    return EnergyReport(F_eps=F, E_eps=E, GL_eps_excess=excess, region_volume=float(w.sum()))


# ---------------------------------------------------------------------------
# Discrete vorticity
# ---------------------------------------------------------------------------


def principal(x: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, TWO_PI)


def edge_increment(ua: np.ndarray, ub: np.ndarray, a_dot: np.ndarray) -> np.ndarray:
    """Gauge-invariant phase increment from a to b.

    ``a_dot`` is the midpoint vector potential dotted with (b - a). The result is
    principal(arg(u_b conj u_a) - a_dot) + a_dot, whose sum around any closed loop
    is an exact multiple of 2 pi.
    """
    return principal(np.angle(ub * np.conj(ua)) - a_dot) + a_dot


@dataclass
class Vorticity:
    """Per-plaquette vorticity samples.

    ``winding[k]`` and ``fd[k]`` hold plaquettes normal to axis ``k``, indexed by
    their lowest corner; arrays have one fewer entry along the two in-plane axes.
    Both are fluxes (integrated over the plaquette), oriented by +e_k.
    """

    winding: list
    fd: list
    h: float

    def winding_integers(self, k: int) -> np.ndarray:
        return np.rint(self.winding[k] / TWO_PI).astype(np.int64)


def lattice_edge_increments(fld: LatticeField3) -> list:
    """Increments along +e_k for every lattice edge, k = 0, 1, 2."""
    A = fld.A
    out = []
    for k in range(3):
        sl_a = [slice(None)] * 3
        sl_b = [slice(None)] * 3
        sl_a[k] = slice(0, -1)
        sl_b[k] = slice(1, None)
        ua = fld.u[tuple(sl_a)]
        ub = fld.u[tuple(sl_b)]
        if A is None:
            a_dot = np.zeros(ua.shape)
        else:
            a_dot = 0.5 * (A[tuple(sl_a)][..., k] + A[tuple(sl_b)][..., k]) * fld.h
        out.append(edge_increment(ua, ub, a_dot))
    return out


def _plaquette_sum(ea: np.ndarray, eb: np.ndarray, a: int, b: int) -> np.ndarray:
    """Counterclockwise (a then b) loop sum from edge arrays along axes a and b."""
    def take(arr, ax, lo):
        sl = [slice(None)] * 3
        sl[ax] = slice(1, None) if lo else slice(0, -1)
        return arr[tuple(sl)]

    # ea has one fewer along a; eb one fewer along b.
    e_a0 = take(ea, b, False)        # edge along a at b = 0
    e_a1 = take(ea, b, True)         # edge along a at b = 1
    e_b0 = take(eb, a, False)        # edge along b at a = 0
    e_b1 = take(eb, a, True)         # edge along b at a = 1
    return e_a0 + e_b1 - e_a1 - e_b0


PLANE_AXES = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def discrete_vorticity(fld: LatticeField3, estimators: str = "both", zero_policy: str = "raise") -> Vorticity:
    """Plaquette vorticity by the winding estimator and the finite-difference estimator.

    The winding estimator is 2 pi times an integer on every plaquette. The
    finite-difference estimator is the circulation of j + A around the plaquette
    (trapezoid rule per edge), j = Im(conj(u) grad u) - A|u|^2, so it is the flux
    of curl(j + A).

    Args:
        fld: the field.
        estimators: ``"both"``, ``"winding"`` or ``"fd"``.
        zero_policy: ``"raise"`` raises ZeroModulus if |u| vanishes on a node used
            by the winding estimator; ``"nan"`` marks those plaquettes NaN.
    """
    winding = [None, None, None]
    fd = [None, None, None]
    valid = fld.valid
    if estimators in ("both", "winding"):
        zero = (np.abs(fld.u) == 0) & valid
        if zero.any() and zero_policy == "raise":
            raise ZeroModulus("|u| = 0 on a lattice node", count=int(zero.sum()))
        inc = lattice_edge_increments(fld)
        for k in range(3):
            a, b = PLANE_AXES[k]
            raw = _plaquette_sum(inc[a], inc[b], a, b)
            w = TWO_PI * np.rint(raw / TWO_PI)
            bad = _plaquette_any(zero | ~valid, k)
            if bad.any():
                w = np.where(bad, np.nan, w)
            winding[k] = w
    if estimators in ("both", "fd"):
        g = np.stack([derivative(fld.u, k, fld.h, valid) for k in range(3)], axis=-1)
        j = np.imag(np.conj(fld.u)[..., None] * g)
        if fld.A is not None:
            j = j - fld.A * (np.abs(fld.u) ** 2)[..., None] + fld.A
        for k in range(3):
            a, b = PLANE_AXES[k]
            ea = _edge_trapezoid(j[..., a], a) * fld.h
            eb = _edge_trapezoid(j[..., b], b) * fld.h
            flux = _plaquette_sum(ea, eb, a, b)
            bad = _plaquette_any(~valid, k)
            if bad.any():
                flux = np.where(bad, np.nan, flux)
            fd[k] = flux
    return Vorticity(winding=winding, fd=fd, h=fld.h)


def _edge_trapezoid(f: np.ndarray, axis: int) -> np.ndarray:
    sl_a = [slice(None)] * 3
    sl_b = [slice(None)] * 3
    sl_a[axis] = slice(0, -1)
    sl_b[axis] = slice(1, None)
    return 0.5 * (f[tuple(sl_a)] + f[tuple(sl_b)])


def _plaquette_any(flag: np.ndarray, k: int) -> np.ndarray:
    a, b = PLANE_AXES[k]
    out = np.zeros(_plaquette_shape(flag.shape, k), dtype=bool)
    for da in (0, 1):
        for db in (0, 1):
            sl = [slice(None)] * 3
            sl[a] = slice(da, flag.shape[a] - 1 + da)
            sl[b] = slice(db, flag.shape[b] - 1 + db)
            out |= flag[tuple(sl)]
    return out


def _plaquette_shape(shape, k):
    a, b = PLANE_AXES[k]
    s = list(shape)
    s[a] -= 1
    s[b] -= 1
    return tuple(s)


def plaquette_centers(fld: LatticeField3, k: int) -> np.ndarray:
    """World positions of the centers of plaquettes normal to axis k."""
    a, b = PLANE_AXES[k]
    coords = [fld.axis_coords(ax) for ax in range(3)]
    coords[a] = 0.5 * (coords[a][:-1] + coords[a][1:])
    coords[b] = 0.5 * (coords[b][:-1] + coords[b][1:])
    g = np.meshgrid(*coords, indexing="ij")
    return np.stack(g, axis=-1)


# ---------------------------------------------------------------------------
# Synthetic fields
# ---------------------------------------------------------------------------

SYNTH_KINDS = ("straight_line", "ring", "helix", "dipole_pair", "uniform")


def _frame(d) -> tuple:
    """Right-handed orthonormal frame (e1, e2, d) with e1 x e2 = d."""
    d = np.asarray(d, dtype=float)
    d = d / np.linalg.norm(d)
    trial = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - d * np.dot(trial, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


def _clip_line(point, d, lo, hi):
    """Parameter interval of the line point + t d inside the box."""
    t0, t1 = -np.inf, np.inf
    for a in range(3):
        if abs(d[a]) < 1e-15:
            if point[a] < lo[a] or point[a] > hi[a]:
                return None
            continue
        ta = (lo[a] - point[a]) / d[a]
        tb = (hi[a] - point[a]) / d[a]
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    if t1 <= t0:
        return None
    return t0, t1


def _line_phase(X, point, d, degree):
    e1, e2, d = _frame(d)
    r = X - np.asarray(point, dtype=float)
    x1 = r @ e1
    x2 = r @ e2
    rho = np.hypot(x1, x2)
    return degree * np.arctan2(x2, x1), rho


def _check_line_clearance(point, d, lo, hi, clear):
    iv = _clip_line(np.asarray(point, float), np.asarray(d, float) / np.linalg.norm(d), lo, hi)
    if iv is None:
        raise GeometryOutOfBounds("line misses the lattice box")
    dn = np.asarray(d, float) / np.linalg.norm(d)
    for t in iv:
        q = np.asarray(point, float) + t * dn
        on_face = np.isclose(q, lo, atol=1e-9) | np.isclose(q, hi, atol=1e-9)
        for a in range(3):
            if on_face[a]:
                continue
            if min(q[a] - lo[a], hi[a] - q[a]) < clear:
                raise GeometryOutOfBounds("line exits the box within 5 eps of an edge")
    return iv


def synth_field(kind: str, params: Optional[dict] = None, dims=(64, 64, 64), h: Optional[float] = None,
                eps: float = 0.02, origin=(0.0, 0.0, 0.0), domain: Optional[Domain] = None):
    """Synthetic vortex configurations with a tanh(r/eps) core profile.

    Args:
        kind: one of ``straight_line``, ``ring``, ``helix``, ``dipole_pair``, ``uniform``.
        params: geometry parameters (see below); missing keys take defaults
            relative to the lattice box.
        dims: lattice dimensions (int or 3-tuple).
        h: spacing; defaults to 1/(max(dims) - 1) so the longest side has length 1.
        eps: core size.
        origin: lattice origin.
        domain: optional ball domain; its mask is applied to the lattice.

    Parameters by kind:
        straight_line: ``point``, ``direction``, ``degree``.
        ring: ``center``, ``radius``, ``normal``, ``degree``.
        helix: ``center`` (x, y), ``radius``, ``pitch``, ``degree``.
        dipole_pair: ``center``, ``separation``, ``degree``.
        uniform: ``A_const`` (constant vector potential).
        All kinds accept ``A_const``.

    Returns:
        (field, filaments): the LatticeField3 and ground-truth polylines.
    """
    params = dict(params or {})
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),) * 3
    dims = tuple(int(d) for d in dims)
    if h is None:
        h = 1.0 / (max(dims) - 1)
    origin = np.asarray(origin, dtype=float)
    lo = origin
    hi = origin + h * (np.asarray(dims) - 1)
    center = 0.5 * (lo + hi)
    clear = 5.0 * eps
    gx, gy, gz = np.meshgrid(*(origin[a] + h * np.arange(dims[a]) for a in range(3)), indexing="ij")
    X = np.stack([gx, gy, gz], axis=-1)
    filaments: list = []

    if kind == "uniform":
        u = np.ones(dims, dtype=complex)
    elif kind == "straight_line":
        point = np.asarray(params.get("point", center), dtype=float)
        d = np.asarray(params.get("direction", (0.0, 0.0, 1.0)), dtype=float)
        d = d / np.linalg.norm(d)
        deg = int(params.get("degree", 1))
        t0, t1 = _check_line_clearance(point, d, lo, hi, clear)
        phase, rho = _line_phase(X, point, d, deg)
        u = np.tanh(rho / eps) * np.exp(1j * phase)
        pts = np.array([point + t0 * d, point + t1 * d])
        filaments.append(Filament(pts if deg > 0 else pts[::-1], abs(deg)))
    elif kind == "ring":
        c = np.asarray(params.get("center", center), dtype=float)
        R = float(params.get("radius", 0.3))
        e1, e2, n = _frame(params.get("normal", (0.0, 0.0, 1.0)))
        deg = int(params.get("degree", 1))
        phis = np.linspace(0.0, -TWO_PI, 721)
        ring_pts = c + R * (np.cos(phis)[:, None] * e1 + np.sin(phis)[:, None] * e2)
        if np.any(np.minimum(ring_pts - lo, hi - ring_pts) < clear):
            raise GeometryOutOfBounds("ring does not fit with 5 eps clearance")
        r = X - c
        zp = r @ n
        q = r - zp[..., None] * n
        rho = np.linalg.norm(q, axis=-1)
        u = np.tanh(np.hypot(rho - R, zp) / eps) * np.exp(1j * deg * np.arctan2(zp, rho - R))
        filaments.append(Filament(ring_pts if deg > 0 else ring_pts[::-1], abs(deg)))
    elif kind == "helix":
        c = np.asarray(params.get("center", center[:2]), dtype=float)
        a = float(params.get("radius", 0.15))
        pitch = float(params.get("pitch", 0.5))
        deg = int(params.get("degree", 1))
        if np.any(np.minimum(c - lo[:2], hi[:2] - c) < a + clear):
            raise GeometryOutOfBounds("helix does not fit with 5 eps clearance")
        z = X[..., 2]
        xh = c[0] + a * np.cos(TWO_PI * z / pitch)
        yh = c[1] + a * np.sin(TWO_PI * z / pitch)
        dx = X[..., 0] - xh
        dy = X[..., 1] - yh
        u = np.tanh(np.hypot(dx, dy) / eps) * np.exp(1j * deg * np.arctan2(dy, dx))
        zs = np.linspace(lo[2], hi[2], 401)
        pts = np.stack([c[0] + a * np.cos(TWO_PI * zs / pitch), c[1] + a * np.sin(TWO_PI * zs / pitch), zs], axis=1)
        filaments.append(Filament(pts if deg > 0 else pts[::-1], abs(deg)))
    elif kind == "dipole_pair":
        c = np.asarray(params.get("center", center), dtype=float)
        s = float(params.get("separation", 0.3))
        deg = int(params.get("degree", 1))
        d = np.array([0.0, 0.0, 1.0])
        pa = c - np.array([0.5 * s, 0.0, 0.0])
        pb = c + np.array([0.5 * s, 0.0, 0.0])
        ta = _check_line_clearance(pa, d, lo, hi, clear)
        tb = _check_line_clearance(pb, d, lo, hi, clear)
        ph_a, ra = _line_phase(X, pa, d, deg)
        ph_b, rb = _line_phase(X, pb, d, -deg)
        u = np.tanh(ra / eps) * np.tanh(rb / eps) * np.exp(1j * (ph_a + ph_b))
        la = np.array([pa + ta[0] * d, pa + ta[1] * d])
        lb = np.array([pb + tb[0] * d, pb + tb[1] * d])
        filaments.append(Filament(la if deg > 0 else la[::-1], abs(deg)))
        filaments.append(Filament(lb[::-1] if deg > 0 else lb, abs(deg)))
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")

    A = None
    if "A_const" in params and params["A_const"] is not None:
        A = np.broadcast_to(np.asarray(params["A_const"], dtype=float), dims + (3,)).copy()
    mask = None
    if domain is not None and domain.kind == "ball":
        mask = domain.contains(X)
        filaments = [_clip_filament(f, domain) for f in filaments]
        filaments = [f for f in filaments if f is not None]
    fld = LatticeField3(u=u, h=float(h), origin=origin, A=A, mask=mask, domain=domain)
    return fld, filaments


def _clip_filament(f: Filament, domain: Domain) -> Optional[Filament]:
    """Restrict a polyline to a ball by dense resampling (ground truth only)."""
    pts = f.points
    dense = []
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(2, int(np.ceil(np.linalg.norm(b - a) / 1e-3)))
        t = np.linspace(0, 1, n)[:, None]
        dense.append(a + t * (b - a))
    dense = np.concatenate(dense)
    inside = domain.contains(dense)
    if not inside.any():
        return None
    return Filament(dense[inside], f.multiplicity)


def filaments_to_json(filaments) -> dict:
    return {"filaments": [f.to_json() for f in filaments]}


def filaments_from_json(obj: dict) -> list:
    return [Filament(np.asarray(f["points"], dtype=float), int(f["multiplicity"])) for f in obj["filaments"]]
