"""Minimal connections, Kantorovich potentials and the augmented boundary collection.

Three ground costs are supported:

* ``euclid``: |x - y|;
* ``d_bdry``: min(|x - y|, d(x) + d(y)) with d the distance to the domain boundary;
* ``d_hat_bdry``: min(dhat(x, y), d(x) + d(y)) with dhat the geodesic distance on a
  polyhedral surface made of square faces.

Matchings are exact (shortest augmenting paths with node potentials). The
potentials are the c-transform of the column duals, which is 1-Lipschitz for the
cost and tight on matched pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import kernels
from .errors import PointNotOnSurface, PointOutsideDomain, Unbalanced
from .field import Domain

METRICS = ("euclid", "d_bdry", "d_hat_bdry")


@dataclass
class SignedConfig:
    """Balanced collection of positive and negative points (repeated by degree)."""

    positives: np.ndarray
    negatives: np.ndarray

    def __post_init__(self):
        self.positives = np.asarray(self.positives, dtype=float).reshape(-1, 3)
        self.negatives = np.asarray(self.negatives, dtype=float).reshape(-1, 3)
        if len(self.positives) != len(self.negatives):
            raise Unbalanced(
                f"{len(self.positives)} positive vs {len(self.negatives)} negative points",
                n_pos=len(self.positives), n_neg=len(self.negatives),
            )

    @property
    def k(self) -> int:
        return len(self.positives)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.positives, self.negatives], axis=0)

    def diameter(self) -> float:
        pts = self.points
        if len(pts) < 2:
            return 0.0
        return float(np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1)))

    @staticmethod
    def from_degrees(points, degrees) -> "SignedConfig":
        """Repeat each point |d| times as positive (d > 0) or negative (d < 0)."""
        pos, neg = [], []
        for x, d in zip(np.asarray(points, dtype=float).reshape(-1, 3), degrees):
            d = int(d)
            (pos if d > 0 else neg).extend([x] * abs(d))
        return SignedConfig(np.array(pos).reshape(-1, 3), np.array(neg).reshape(-1, 3))


@dataclass
class Leg:
    """Geometric realization of one matched pair.

    ``pieces`` are polylines oriented from the negative point toward the positive
    point; a boundary-branch leg has two pieces (boundary -> p and n -> boundary).
    """

    kind: str
    pieces: list

    def length(self) -> float:
        return float(sum(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1)) for p in self.pieces))


@dataclass
class Connection:
    """Optimal pairing, its legs and the Kantorovich potentials.

    Attributes:
        config: the matched configuration.
        sigma: positive ``i`` is matched to negative ``sigma[i]``.
        costs: per-pair costs.
        length: total cost.
        legs: per-pair realizations.
        zeta_p, zeta_n: potentials at positives and negatives.
        metric: cost tag.
        branch: per-pair ``"euclid"``, ``"boundary"`` or ``"surface"``.
    """

    config: SignedConfig
    sigma: np.ndarray
    costs: np.ndarray
    length: float
    legs: list
    zeta_p: np.ndarray
    zeta_n: np.ndarray
    metric: str
    branch: list
    cost_matrix: np.ndarray
    surface_paths: list = dc_field(default_factory=list)
    metric_oracle: Optional[object] = None

    def legs_length(self) -> float:
        return float(sum(leg.length() for leg in self.legs))


# ---------------------------------------------------------------------------
# Generic machinery
# ---------------------------------------------------------------------------


def solve_assignment(cost: np.ndarray):
    """Exact min-cost perfect matching with duals ``cost - u - v >= 0``."""
    cost = np.ascontiguousarray(cost, dtype=float)
    if cost.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0)
    return kernels.hungarian(cost)


def c_transform_potentials(cost_to_neg: np.ndarray, v: np.ndarray, max_passes: Optional[int] = None,
                           full_cost: Optional[np.ndarray] = None) -> np.ndarray:
    """Potential zeta(x) = min_j (c(x, n_j) - v_j) at every row point.

    With ``full_cost`` (pairwise costs among all row points) the values are then
    tightened, zeta(a) <- min_b (zeta(b) + c(a, b)), until a fixpoint. For a
    metric cost the c-transform is already 1-Lipschitz and tightening is a no-op.
    """
    if cost_to_neg.shape[1] == 0:
        return np.zeros(cost_to_neg.shape[0])
    z = np.min(cost_to_neg - v[None, :], axis=1)
    if full_cost is not None and len(z):
        passes = max_passes if max_passes is not None else len(z) + 2
        for _ in range(passes):
            nz = np.minimum(z, np.min(z[None, :] + full_cost, axis=1))
            if np.array_equal(nz, z):
                break
            z = nz
    return z


def _finish(config, cost, full_cost, metric, legs_fn, oracle=None):
    k = config.k
    sigma, u, v = solve_assignment(cost)
    costs = cost[np.arange(k), sigma] if k else np.zeros(0)
    cost_to_neg = full_cost[:, k:]
    z = c_transform_potentials(cost_to_neg, v, full_cost=full_cost)
    legs, branch = legs_fn(sigma)
    return Connection(
        config=config, sigma=sigma, costs=costs, length=float(np.sum(costs)), legs=legs,
        zeta_p=z[:k], zeta_n=z[k:], metric=metric, branch=branch, cost_matrix=cost,
        metric_oracle=oracle,
    )


def pairwise_euclid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def d_boundary_matrix(a: np.ndarray, b: np.ndarray, domain: Domain):
    """Return (cost, use_boundary) for d_bdry; ties go to the Euclidean branch."""
    e = pairwise_euclid(a, b)
    bd = domain.distance(a)[:, None] + domain.distance(b)[None, :]
    use_b = bd < e
    return np.where(use_b, bd, e), use_b


# ---------------------------------------------------------------------------
# Euclidean and through-the-boundary connections
# ---------------------------------------------------------------------------


def connect_euclidean(config: SignedConfig) -> Connection:
    """Minimal connection L(A) under the Euclidean cost."""
    pts = config.points
    full = pairwise_euclid(pts, pts)
    k = config.k
    cost = full[:k, k:]

    def legs(sigma):
        out = [Leg("segment", [np.array([config.negatives[j], config.positives[i]])])
               for i, j in enumerate(sigma)]
        return out, ["euclid"] * k

    return _finish(config, cost, full, "euclid", legs)


def _check_inside(points: np.ndarray, domain: Domain, tol: float = 1e-12):
    sd = domain.signed_distance(points) if len(points) else np.zeros(0)
    if np.any(sd > tol):
        raise PointOutsideDomain("point outside the domain", worst=float(sd.max()))


def connect_through_boundary(config: SignedConfig, domain: Domain) -> Connection:
    """Minimal connection L_bdry(A) under d_bdry; boundary legs go to the nearest boundary points."""
    pts = config.points
    _check_inside(pts, domain)
    full, use_b_full = d_boundary_matrix(pts, pts, domain)
    k = config.k
    cost = full[:k, k:]
    use_b = use_b_full[:k, k:]

    def legs(sigma):
        out, br = [], []
        for i, j in enumerate(sigma):
            p, n = config.positives[i], config.negatives[j]
            if use_b[i, j]:
                bp = domain.project(p)[0]
                bn = domain.project(n)[0]
                out.append(Leg("boundary", [np.array([bp, p]), np.array([n, bn])]))
                br.append("boundary")
            else:
                out.append(Leg("segment", [np.array([n, p])]))
                br.append("euclid")
        return out, br

    return _finish(config, cost, full, "d_bdry", legs)


# ---------------------------------------------------------------------------
# Polyhedral surfaces made of planar parallelogram faces
# ---------------------------------------------------------------------------


@dataclass
class PolySurface:
    """Closed polyhedral surface as a list of planar parallelogram faces.

    Face ``f`` is {corner + s*ea + t*eb : s, t in [0, 1]} with outward unit normal
    ``normals[f]``.
    """

    corners: np.ndarray
    ea: np.ndarray
    eb: np.ndarray
    normals: np.ndarray

    @property
    def n_faces(self) -> int:
        return len(self.corners)

    def scale(self) -> float:
        if not self.n_faces:
            return 1.0
        return float(np.max(np.linalg.norm(self.ea, axis=1)))

    def face_params(self, x: np.ndarray):
        """Per-face (s, t, normal offset) of points x, shape (N, F) each."""
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        r = x[:, None, :] - self.corners[None]
        la = np.sum(self.ea ** 2, axis=1)
        lb = np.sum(self.eb ** 2, axis=1)
        s = np.einsum("nfc,fc->nf", r, self.ea) / la
        t = np.einsum("nfc,fc->nf", r, self.eb) / lb
        off = np.einsum("nfc,fc->nf", r, self.normals)
        return s, t, off

    def locate(self, x: np.ndarray, tol: Optional[float] = None) -> list:
        """Faces containing each point (list of index arrays)."""
        tol = 1e-9 * self.scale() if tol is None else tol
        s, t, off = self.face_params(x)
        rel = tol / self.scale()
        inside = (np.abs(off) <= tol) & (s >= -rel) & (s <= 1 + rel) & (t >= -rel) & (t <= 1 + rel)
        return [np.nonzero(row)[0] for row in inside]

    def area(self) -> float:
        return float(np.sum(np.linalg.norm(np.cross(self.ea, self.eb), axis=1)))


class SurfaceGraph:
    """Steiner-refined graph for geodesic distances on a PolySurface.

    Nodes are face corners, ``steiner`` interior points per face edge, and the
    extra points (config points) on their faces. Each face carries a complete
    graph on its nodes with Euclidean weights, so co-facial points are joined by
    their exact in-face distance.
    """

    def __init__(self, surface: PolySurface, extra_points: np.ndarray, steiner: int = 8):
        self.surface = surface
        scale = surface.scale()
        keyscale = 2.0 ** 24 / scale
        nodes: list = []
        index: dict = {}
        node_faces: list = []

        def add(x, f):
            key = tuple(np.rint(x * keyscale).astype(np.int64))
            if key not in index:
                index[key] = len(nodes)
                nodes.append(np.asarray(x, dtype=float))
                node_faces.append(set())
            i = index[key]
            node_faces[i].add(f)
            return i

        ts = np.linspace(0.0, 1.0, steiner + 2)
        face_nodes = [[] for _ in range(surface.n_faces)]
        for f in range(surface.n_faces):
            c, a, b = surface.corners[f], surface.ea[f], surface.eb[f]
            loop = [(c, a), (c + a, b), (c + a + b, -a), (c + b, -b)]
            for start, step in loop:
                for t in ts[:-1]:
                    face_nodes[f].append(add(start + t * step, f))
        extra_points = np.asarray(extra_points, dtype=float).reshape(-1, 3)
        located = surface.locate(extra_points)
        self.extra_ids = np.empty(len(extra_points), dtype=np.int64)
        for q, (x, faces) in enumerate(zip(extra_points, located)):
            if len(faces) == 0:
                raise PointNotOnSurface("point is not on the polyhedral surface", point=x.tolist())
            # extra points are never merged with lattice nodes so their ids are stable
            i = len(nodes)
            nodes.append(x.copy())
            node_faces.append(set(int(f) for f in faces))
            for f in faces:
                face_nodes[f].append(i)
            self.extra_ids[q] = i
        self.nodes = np.array(nodes).reshape(-1, 3)
        self.node_faces = node_faces
        rows, cols, wts = [], [], []
        for f in range(surface.n_faces):
            ids = np.unique(np.array(face_nodes[f], dtype=np.int64))
            if len(ids) < 2:
                continue
            iu, ju = np.triu_indices(len(ids), 1)
            a, b = ids[iu], ids[ju]
            w = np.linalg.norm(self.nodes[a] - self.nodes[b], axis=1)
            # scipy treats explicit zeros as missing edges
            w = np.maximum(w, 1e-300)
            rows.append(a)
            cols.append(b)
            wts.append(w)
        n = len(self.nodes)
        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
            w = np.concatenate(wts)
            # faces sharing an edge emit the same pair twice; keep the minimum
            self.graph = _dedupe_min(np.concatenate([r, c]), np.concatenate([c, r]), np.concatenate([w, w]), n)
        else:
            self.graph = coo_matrix((n, n)).tocsr()

    def common_face(self, i: int, j: int) -> Optional[int]:
        shared = self.node_faces[i] & self.node_faces[j]
        return min(shared) if shared else None


def _dedupe_min(rows, cols, wts, n):
    order = np.lexsort((wts, cols, rows))
    r, c, w = rows[order], cols[order], wts[order]
    keep = np.ones(len(r), dtype=bool)
    keep[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
    return coo_matrix((w[keep], (r[keep], c[keep])), shape=(n, n)).tocsr()


class PolyhedralMetric:
    """d_hat_bdry oracle on a set of points of a PolySurface."""

    def __init__(self, surface: PolySurface, points: np.ndarray, domain: Domain, steiner: int = 8):
        self.points = np.asarray(points, dtype=float).reshape(-1, 3)
        self.domain = domain
        self.sg = SurfaceGraph(surface, self.points, steiner=steiner)
        if len(self.points):
            self.dist, self.pred = dijkstra(self.sg.graph, directed=False, indices=self.sg.extra_ids,
                                            return_predecessors=True)
        else:
            self.dist = np.zeros((0, len(self.sg.nodes)))
            self.pred = np.zeros((0, len(self.sg.nodes)), dtype=np.int64)
        self.dnode = domain.distance(self.sg.nodes) if len(self.sg.nodes) else np.zeros(0)

    def dhat(self) -> np.ndarray:
        """Surface geodesic distance among the registered points."""
        return self.dist[:, self.sg.extra_ids]

    def cost(self):
        """(d_hat_bdry matrix, use_boundary flags) among the registered points."""
        dh = self.dhat()
        d = self.dnode[self.sg.extra_ids]
        bd = d[:, None] + d[None, :]
        use_b = bd < dh
        return np.where(use_b, bd, dh), use_b

    def cost_to_nodes(self, src: int, node_ids: np.ndarray) -> np.ndarray:
        """d_hat_bdry from registered point ``src`` to arbitrary graph nodes."""
        dh = self.dist[src, node_ids]
        bd = self.dnode[self.sg.extra_ids[src]] + self.dnode[node_ids]
        return np.minimum(dh, bd)

    def path(self, src: int, dst: int) -> list:
        """Node ids of a shortest surface path, simplified so every hop lies in one face."""
        target = int(self.sg.extra_ids[dst])
        start = int(self.sg.extra_ids[src])
        seq = [target]
        while seq[-1] != start:
            prev = int(self.pred[src, seq[-1]])
            if prev < 0:
                break
            seq.append(prev)
        seq = seq[::-1]
        out = [seq[0]]
        i = 0
        while i < len(seq) - 1:
            j = len(seq) - 1
            while j > i + 1 and self.sg.common_face(seq[i], seq[j]) is None:
                j -= 1
            out.append(seq[j])
            i = j
        return out


def connect_on_polyhedron(config: SignedConfig, surface: PolySurface, domain: Domain,
                          steiner: int = 8, c_star: int = 6) -> Connection:
    """Minimal connection under d_hat_bdry for points lying on the surface.

    Surface distances are graph geodesics on the Steiner-refined surface. Paths
    crossing more than ``c_star`` faces are reported in ``surface_paths`` with a
    flag rather than truncated, so the cost remains a metric.
    """
    k = config.k
    pts = config.points
    _check_inside(pts, domain, tol=1e-9)
    oracle = PolyhedralMetric(surface, pts, domain, steiner=steiner)
    full, use_b_full = oracle.cost()
    cost = full[:k, k:]
    paths: list = []

    def legs(sigma):
        out, br = [], []
        for i, j in enumerate(sigma):
            p, n = config.positives[i], config.negatives[j]
            if use_b_full[i, k + j]:
                bp = domain.project(p)[0]
                bn = domain.project(n)[0]
                out.append(Leg("boundary", [np.array([bp, p]), np.array([n, bn])]))
                br.append("boundary")
                paths.append(None)
            else:
                ids = oracle.path(k + j, i)
                poly = oracle.sg.nodes[ids]
                poly[0] = n
                poly[-1] = p
                out.append(Leg("surface", [poly]))
                br.append("surface")
                paths.append({"nodes": ids, "faces": len(ids) - 1, "exceeds_c_star": len(ids) - 1 > c_star})
        return out, br

    conn = _finish(config, cost, full, "d_hat_bdry", legs, oracle=oracle)
    conn.surface_paths = paths
    return conn


@dataclass
class AugmentedConfig:
    """Augmented collection with its co-facial pairing and potentials."""

    config: SignedConfig
    sigma: np.ndarray
    costs: np.ndarray
    zeta_p: np.ndarray
    zeta_n: np.ndarray
    n_added: int
    hop_faces: list

    @property
    def length(self) -> float:
        return float(np.sum(self.costs))


def augment_collection(conn: Connection) -> AugmentedConfig:
    """Add every interior crossing point of a surface leg once as + and once as -.

    The path n = x_J, ..., x_0 = p of a surface leg becomes the pairs
    (x_0, x_1), (x_1, x_2), ..., (x_{J-1}, x_J), each inside one face. Potentials
    at crossing points come from the same c-transform as the original ones, so
    every new pair is tight.
    """
    if conn.metric != "d_hat_bdry":
        raise ValueError("augmentation needs a polyhedral connection")
    cfg = conn.config
    k = cfg.k
    oracle: PolyhedralMetric = conn.metric_oracle
    pos, neg, costs, zp, zn, faces = [], [], [], [], [], []
    # potentials at arbitrary graph nodes: zeta(x) = min_j c(x, n_j) - v_j, recovered
    # from the stored negative potentials (zeta(n_j) = -v_j after the transform)
    added = 0
    for i, j in enumerate(conn.sigma):
        leg = conn.legs[i]
        path = conn.surface_paths[i] if conn.surface_paths else None
        if leg.kind != "surface" or path is None or len(path["nodes"]) <= 2:
            pos.append(cfg.positives[i])
            neg.append(cfg.negatives[j])
            costs.append(conn.costs[i])
            zp.append(conn.zeta_p[i])
            zn.append(conn.zeta_n[j])
            faces.append(None if leg.kind != "surface" else oracle.sg.common_face(path["nodes"][0], path["nodes"][-1]))
            continue
        ids = path["nodes"][::-1]  # from p to n
        poly = leg.pieces[0][::-1]  # p ... n
        zq = [conn.zeta_p[i]]
        for m in range(1, len(ids) - 1):
            zq.append(_node_potential(conn, ids[m]))
        zq.append(conn.zeta_n[j])
        for m in range(len(ids) - 1):
            pos.append(poly[m])
            neg.append(poly[m + 1])
            costs.append(float(np.linalg.norm(poly[m + 1] - poly[m])))
            zp.append(zq[m])
            zn.append(zq[m + 1])
            faces.append(oracle.sg.common_face(ids[m], ids[m + 1]))
        added += len(ids) - 2
    new = SignedConfig(np.array(pos).reshape(-1, 3), np.array(neg).reshape(-1, 3))
    return AugmentedConfig(
        config=new, sigma=np.arange(new.k), costs=np.array(costs), zeta_p=np.array(zp),
        zeta_n=np.array(zn), n_added=added, hop_faces=faces,
    )


def _node_potential(conn: Connection, node_id: int) -> float:
    oracle: PolyhedralMetric = conn.metric_oracle
    k = conn.config.k
    c = np.array([oracle.cost_to_nodes(k + j, np.array([node_id]))[0] for j in range(k)])
    return float(np.min(c + conn.zeta_n))


# ---------------------------------------------------------------------------
# Exact dual norms of discrete signed measures
# ---------------------------------------------------------------------------


def discrete_dual_norm(x: np.ndarray, wx: np.ndarray, y: np.ndarray, wy: np.ndarray, gamma: float) -> float:
    """Exact C^{0,gamma} dual norm of sum wx_i delta_{x_i} - sum wy_j delta_{y_j}.

    The test-function norm is max(sup|phi|, [phi]_gamma) for gamma > 0 and
    sup|phi| for gamma = 0. Weights must be nonnegative integers (unit masses
    after repetition). The dual problem is a transport with cost
    min(|x - y|^gamma, 2) between unit masses and cost 1 to a ground node;
    gamma = 0 gives the total variation (coincident opposite masses cancel).
    """
    xs = np.repeat(np.asarray(x, dtype=float).reshape(-1, 3), np.asarray(wx, dtype=np.int64), axis=0)
    ys = np.repeat(np.asarray(y, dtype=float).reshape(-1, 3), np.asarray(wy, dtype=np.int64), axis=0)
    P, N = len(xs), len(ys)
    if P + N == 0:
        return 0.0
    d = pairwise_euclid(xs, ys)
    if gamma == 0:
        c = np.where(d > 0, 2.0, 0.0)
    else:
        c = np.minimum(d ** gamma, 2.0)
    n = P + N
    cost = np.zeros((n, n))
    cost[:P, :N] = c
    cost[:P, N:] = 1.0
    cost[P:, :N] = 1.0
    sigma, _, _ = solve_assignment(cost)
    return float(cost[np.arange(n), sigma].sum())
