"""Choice of a cubic grid whose 1-skeleton avoids vortex cores.

Grid coordinates g map to world coordinates by x = b + delta * R g. Cube ``I``
(an integer triple) is [I, I + 1]^3 in grid coordinates. Faces are keyed by
``(k, I)``: the face normal to grid axis k whose lowest corner is I. Its spanning
axes are the other two axes a < b, and its base orientation is e_a x e_b, which
is -e_k for k = 1 and +e_k otherwise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import GridNotFound
from .field import LatticeField3, energy, energy_density, node_weights
from .matching import PolySurface

log = logging.getLogger(__name__)

MODULUS_THRESHOLD = 5.0 / 8.0
SPAN = {0: (1, 2), 1: (0, 2), 2: (0, 1)}
BASE_SIGN = {0: 1, 1: -1, 2: 1}


def default_rotations() -> list:
    """Identity and the quarter turns about x, y and z."""
    rx = np.array([[1.0, 0, 0], [0, 0, -1], [0, 1, 0]])
    ry = np.array([[0.0, 0, 1], [0, 1, 0], [-1, 0, 0]])
    rz = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 1]])
    return [np.eye(3), rx, ry, rz]


@dataclass
class GridSpec:
    """Cubic grid with the cubes kept inside Omega.

    Attributes:
        origin: grid origin b.
        rotation: orthogonal matrix R with det +1.
        delta: cube side.
        kept_cubes: (M, 3) integer indices of cubes inside Omega.
    """

    origin: np.ndarray
    rotation: np.ndarray
    delta: float
    kept_cubes: np.ndarray
    _faces: Optional[dict] = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.kept_cubes = np.asarray(self.kept_cubes, dtype=np.int64).reshape(-1, 3)

    # -- coordinates -------------------------------------------------------

    def to_world(self, g: np.ndarray) -> np.ndarray:
        return self.origin + self.delta * (np.asarray(g, dtype=float) @ self.rotation.T)

    def to_grid(self, x: np.ndarray) -> np.ndarray:
        return ((np.asarray(x, dtype=float) - self.origin) @ self.rotation) / self.delta

    def cube_center(self, I) -> np.ndarray:
        return self.to_world(np.asarray(I, dtype=float) + 0.5)

    # -- faces ---------------------------------------------------------------

    @property
    def faces(self) -> dict:
        """Map face key (k, i, j, l) -> list of (cube index into kept_cubes, outward sign)."""
        if self._faces is None:
            out: dict = {}
            for ci, I in enumerate(self.kept_cubes):
                for k in range(3):
                    lo = (k,) + tuple(int(v) for v in I)
                    hi_I = I.copy()
                    hi_I[k] += 1
                    hi = (k,) + tuple(int(v) for v in hi_I)
                    out.setdefault(lo, []).append((ci, -BASE_SIGN[k]))
                    out.setdefault(hi, []).append((ci, BASE_SIGN[k]))
            self._faces = out
        return self._faces

    def cube_faces(self, ci: int) -> list:
        """The six (face key, outward sign) pairs of kept cube ``ci``."""
        I = self.kept_cubes[ci]
        out = []
        for k in range(3):
            hi_I = I.copy()
            hi_I[k] += 1
            out.append(((k,) + tuple(int(v) for v in I), -BASE_SIGN[k]))
            out.append(((k,) + tuple(int(v) for v in hi_I), BASE_SIGN[k]))
        return out

    def boundary_faces(self) -> list:
        """Faces of the union boundary, with the outward sign relative to the base orientation."""
        return sorted((key, owners[0][1]) for key, owners in self.faces.items() if len(owners) == 1)

    def interior_faces(self) -> list:
        return sorted(key for key, owners in self.faces.items() if len(owners) == 2)

    def face_base_normal(self, key) -> np.ndarray:
        k = key[0]
        e = np.zeros(3)
        e[k] = BASE_SIGN[k]
        return self.rotation @ e

    def face_axes(self, key):
        """World vectors (delta R e_a, delta R e_b) spanning the face."""
        a, b = SPAN[key[0]]
        return self.delta * self.rotation[:, a], self.delta * self.rotation[:, b]

    def face_grid_points(self, key, n: int) -> np.ndarray:
        """(n, n, 3) grid coordinates I + t_i e_a + t_j e_b, t uniform on [0, 1]."""
        k = key[0]
        a, b = SPAN[k]
        t = np.linspace(0.0, 1.0, n)
        g = np.zeros((n, n, 3))
        g[...] = np.asarray(key[1:], dtype=float)
        g[..., a] += t[:, None]
        g[..., b] += t[None, :]
        return g

    def face_points(self, key, n: int) -> np.ndarray:
        return self.to_world(self.face_grid_points(key, n))

    def edges(self) -> list:
        """Unique skeleton edges of kept cubes as (axis, i, j, l)."""
        return [tuple(int(v) for v in r) for r in self.edge_array()]

    def edge_array(self) -> np.ndarray:
        """Unique skeleton edges as an (E, 4) integer array (axis, i, j, l), sorted."""
        if len(self.kept_cubes) == 0:
            return np.zeros((0, 4), dtype=np.int64)
        rows = []
        for k in range(3):
            a, b = SPAN[k]
            for da in (0, 1):
                for db in (0, 1):
                    J = self.kept_cubes.copy()
                    J[:, a] += da
                    J[:, b] += db
                    rows.append(np.column_stack([np.full(len(J), k), J]))
        return np.unique(np.concatenate(rows), axis=0)

    def edge_points(self, key, n: int) -> np.ndarray:
        return self.edge_points_many(np.asarray([key]), n)[0]

    def edge_points_many(self, keys: np.ndarray, n: int) -> np.ndarray:
        """(E, n, 3) world points along edges given as (axis, i, j, l) rows."""
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, 4)
        g = np.repeat(keys[:, None, 1:].astype(float), n, axis=1)
        t = np.linspace(0.0, 1.0, n)
        g[np.arange(len(keys))[:, None], np.arange(n)[None, :], keys[:, :1]] += t[None, :]
        return self.to_world(g)

    def boundary_surface(self) -> PolySurface:
        """The union boundary as a PolySurface with outward normals."""
        faces = self.boundary_faces()
        if not faces:
            z = np.zeros((0, 3))
            return PolySurface(z, z, z, z)
        corners, ea, eb, normals = [], [], [], []
        for key, sign in faces:
            corners.append(self.to_world(np.asarray(key[1:], dtype=float)))
            va, vb = self.face_axes(key)
            ea.append(va)
            eb.append(vb)
            normals.append(sign * self.face_base_normal(key))
        return PolySurface(np.array(corners), np.array(ea), np.array(eb), np.array(normals))

    # -- regions ------------------------------------------------------------

    def cube_lookup(self) -> dict:
        return {tuple(int(v) for v in I): ci for ci, I in enumerate(self.kept_cubes)}

    def cube_of(self, x: np.ndarray) -> np.ndarray:
        """Index into kept_cubes of the cube containing each point, -1 outside."""
        g = self.to_grid(x)
        idx = np.floor(g).astype(np.int64)
        lut = self.cube_lookup()
        flat = idx.reshape(-1, 3)
        out = np.array([lut.get(tuple(r), -1) for r in flat], dtype=np.int64)
        return out.reshape(idx.shape[:-1])

    def union_mask(self, fld: LatticeField3) -> np.ndarray:
        """Nodes inside the union of kept cubes (closed cubes)."""
        if len(self.kept_cubes) == 0:
            return np.zeros(fld.dims, dtype=bool)
        g = self.to_grid(fld.node_positions())
        tol = 1e-9
        out = np.zeros(fld.dims, dtype=bool)
        lut = self.cube_lookup()
        # a node on a shared boundary belongs to the union if any adjacent cube is kept
        for off in np.ndindex(2, 2, 2):
            idx = np.floor(g - tol * (2 * np.array(off) - 1)).astype(np.int64)
            flat = idx.reshape(-1, 3)
            hit = np.array([tuple(r) in lut for r in map(tuple, flat)]).reshape(fld.dims)
            out |= hit
        return out & fld.valid

    def theta_mask(self, fld: LatticeField3) -> np.ndarray:
        """Nodes of Omega outside the open union of kept cubes."""
        g = self.to_grid(fld.node_positions())
        idx = np.floor(g).astype(np.int64)
        lut = self.cube_lookup()
        inside_open = np.zeros(fld.dims, dtype=bool)
        frac = g - idx
        interior = np.all((frac > 1e-9) & (frac < 1 - 1e-9), axis=-1)
        flat = idx.reshape(-1, 3)
        hit = np.array([tuple(r) in lut for r in map(tuple, flat)]).reshape(fld.dims)
        inside_open = hit & interior
        return fld.valid & ~inside_open

    def theta_volume(self, fld: LatticeField3) -> float:
        w = node_weights(fld.dims, fld.h)
        return float(np.sum(w * self.theta_mask(fld)))

    def to_json(self) -> dict:
        return {
            "origin": self.origin.tolist(),
            "rotation": self.rotation.tolist(),
            "delta": float(self.delta),
            "kept_cubes": self.kept_cubes.tolist(),
        }

    @staticmethod
    def from_json(obj: dict) -> "GridSpec":
        return GridSpec(np.array(obj["origin"]), np.array(obj["rotation"]), float(obj["delta"]),
                        np.array(obj["kept_cubes"], dtype=np.int64).reshape(-1, 3))


def samples_per_side(fld: LatticeField3, delta: float, refine: int = 1) -> int:
    """Points per face side so that the spacing is at most min(h, delta/16)/refine."""
    step = min(fld.h, delta / 16.0) / refine
    return int(np.ceil(delta / step - 1e-9)) + 1


def kept_cubes_for(fld: LatticeField3, origin, rotation, delta) -> np.ndarray:
    """Cubes whose corners lie in Omega and the lattice box, reading only valid nodes."""
    lo, hi = fld.lo, fld.hi
    box = np.array([[lo[0], lo[1], lo[2]], [hi[0], hi[1], hi[2]]])
    corners = np.array([[box[i, 0], box[j, 1], box[l, 2]] for i in (0, 1) for j in (0, 1) for l in (0, 1)])
    spec = GridSpec(origin, rotation, delta, np.zeros((0, 3)))
    g = spec.to_grid(corners)
    gmin = np.floor(g.min(axis=0)).astype(int) - 1
    gmax = np.ceil(g.max(axis=0)).astype(int) + 1
    rng = [np.arange(gmin[a], gmax[a]) for a in range(3)]
    I = np.stack(np.meshgrid(*rng, indexing="ij"), axis=-1).reshape(-1, 3)
    offs = np.array(list(np.ndindex(2, 2, 2)), dtype=float)
    cw = spec.to_world(I[:, None, :] + offs[None])  # (M, 8, 3)
    tol = 1e-9 * fld.h
    ok = np.all((cw >= lo - tol) & (cw <= hi + tol), axis=(1, 2))
    ok &= np.all(fld.domain.contains(cw, tol=tol), axis=1)
    if fld.mask is not None and ok.any():
        valid = fld.valid
        for m in np.nonzero(ok)[0]:
            gi = (cw[m] - fld.origin) / fld.h
            a = np.clip(np.floor(gi.min(axis=0) + 1e-9).astype(int), 0, np.asarray(fld.dims) - 1)
            b = np.clip(np.ceil(gi.max(axis=0) - 1e-9).astype(int), 0, np.asarray(fld.dims) - 1)
            if not valid[a[0]:b[0] + 1, a[1]:b[1] + 1, a[2]:b[2] + 1].all():
                ok[m] = False
    return I[ok]


@dataclass
class SkeletonEnergies:
    e1: float
    e2: float
    min_modulus_on_edges: float

    def to_json(self) -> dict:
        return {"e1": self.e1, "e2": self.e2, "min_modulus_on_edges": self.min_modulus_on_edges}


def _trap_weights(n: int) -> np.ndarray:
    w = np.full(n, 1.0 / (n - 1))
    w[0] = w[-1] = 0.5 / (n - 1)
    return w


def skeleton_energies(fld: LatticeField3, grid: GridSpec, eps: float, refine: int = 1,
                      density: Optional[np.ndarray] = None, min_modulus: Optional[float] = None) -> SkeletonEnergies:
    """Line and surface integrals of the energy density over the kept skeleton.

    The density is sampled at lattice nodes and interpolated trilinearly at
    points spaced min(h, delta/16)/refine along edges and on faces. With
    ``min_modulus`` set, the face integral is skipped (e2 = inf) when the edge
    modulus is already at or below it.
    """
    if len(grid.kept_cubes) == 0:
        return SkeletonEnergies(0.0, 0.0, 1.0)
    if density is None:
        density = energy_density(fld, eps)
    n = samples_per_side(fld, grid.delta, refine)
    w1 = _trap_weights(n) * grid.delta
    pts = grid.edge_points_many(grid.edge_array(), n)  # (E, n, 3)
    dens = fld.interpolate(density, pts)
    e1 = float(np.sum(dens * w1[None, :]))
    modu = np.abs(fld.interp_u(pts))
    min_mod = float(np.min(modu))
    if min_modulus is not None and min_mod <= min_modulus:
        return SkeletonEnergies(e1=e1, e2=float("inf"), min_modulus_on_edges=min_mod)
    w2 = np.outer(w1, w1)
    e2 = 0.0
    keys = sorted(grid.faces.keys())
    chunk = 256
    for s in range(0, len(keys), chunk):
        fp = np.stack([grid.face_points(k, n) for k in keys[s:s + chunk]])
        e2 += float(np.sum(fld.interpolate(density, fp) * w2[None]))
    return SkeletonEnergies(e1=e1, e2=e2, min_modulus_on_edges=min_mod)


@dataclass
class GridCandidate:
    grid: GridSpec
    energies: SkeletonEnergies
    accepted: bool
    trial: int


def _evaluate(fld, eps, delta, origin, rot, density, F, C_grid, trial) -> GridCandidate:
    kept = kept_cubes_for(fld, origin, rot, delta)
    grid = GridSpec(origin, rot, delta, kept)
    if len(kept) == 0:
        return GridCandidate(grid, SkeletonEnergies(0.0, 0.0, 0.0), False, trial)
    se = skeleton_energies(fld, grid, eps, density=density, min_modulus=MODULUS_THRESHOLD)
    ok = (se.min_modulus_on_edges > MODULUS_THRESHOLD
          and se.e1 <= C_grid * F / delta ** 2
          and se.e2 <= C_grid * F / delta)
    return GridCandidate(grid, se, bool(ok), trial)


def choose_grid(fld: LatticeField3, eps: float, delta: float, trials: int = 200, rng_seed: int = 0,
                C_grid: float = 100.0, rotations: Optional[Sequence[np.ndarray]] = None,
                executor=None, gamma_range: Optional[tuple] = None) -> GridSpec:
    """Randomized search for a grid satisfying the skeleton conditions.

    Offsets are uniform in [0, delta)^3 relative to the lattice origin and
    rotations cycle through ``rotations`` (identity and three quarter turns by
    default). The first candidate in trial order that passes is returned, even
    when candidates are evaluated in parallel through ``executor``.

    Raises:
        GridNotFound: after ``trials`` failures, with the best candidate's statistics.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    rotations = list(rotations) if rotations is not None else default_rotations()
    if gamma_range is not None:
        lo, hi = gamma_range
        if not lo <= delta <= hi:
            log.warning("delta=%g outside the nominal range [%g, %g]", delta, lo, hi)
    density = energy_density(fld, eps)
    w = node_weights(fld.dims, fld.h)
    F = float(np.sum(w * density))
    rng = np.random.default_rng(rng_seed)
    params = [(fld.origin + rng.uniform(0.0, delta, 3), rotations[t % len(rotations)], t) for t in range(trials)]
    best: Optional[GridCandidate] = None

    def run(p):
        return _evaluate(fld, eps, delta, p[0], p[1], density, F, C_grid, p[2])

    batch = 1 if executor is None else max(1, getattr(executor, "_max_workers", 1))
    for s in range(0, trials, batch):
        chunk = params[s:s + batch]
        results = list(map(run, chunk)) if executor is None else list(executor.map(run, chunk))
        for cand in results:
            if cand.accepted:
                return cand.grid
            if best is None or cand.energies.min_modulus_on_edges > best.energies.min_modulus_on_edges:
                best = cand
    stats = {} if best is None else {"trial": best.trial, **best.energies.to_json()}
    raise GridNotFound(f"no acceptable grid in {trials} trials", trials=trials, best_candidate_stats=stats)


def verify_grid(fld: LatticeField3, grid: GridSpec, eps: float, refine: int = 2, C_grid: float = 100.0) -> dict:
    """Re-check the three acceptance conditions at a finer sampling."""
    se = skeleton_energies(fld, grid, eps, refine=refine)
    F = energy(fld, eps).F_eps
    return {
        "min_modulus_ok": se.min_modulus_on_edges > MODULUS_THRESHOLD,
        "e1_ok": se.e1 <= C_grid * F / grid.delta ** 2,
        "e2_ok": se.e2 <= C_grid * F / grid.delta,
        **se.to_json(),
    }
