"""Ball construction on planar faces, isotropic and for a constant anisotropic metric."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryCollision
from .slices import FaceField, FaceVortexSet, detect_components, tangential_gradient

log = logging.getLogger(__name__)

GROWTH = 1.05


def make_kernel(eps: float, C0: float = 2.0) -> Callable[[np.ndarray], np.ndarray]:
    """Lambda_eps(t) = pi psi(t/eps), psi(s) = s/C0 for s <= C0 and 1 + log(s/C0) beyond.

    Lambda/t is nonincreasing, sup Lambda/t = pi/(C0 eps), and
    |Lambda(t) - pi log(t/eps)| <= pi max(1/2, |1 - log C0|) for t > eps.
    """
    def lam(t):
        s = np.asarray(t, dtype=float) / eps
        return np.pi * np.where(s <= C0, s / C0, 1.0 + np.log(np.maximum(s, C0) / C0))

    return lam


@dataclass
class Ball:
    center: np.ndarray       # plane coordinates (working frame)
    radius: float
    degree: int
    world_center: Optional[np.ndarray] = None
    semi_axes: Optional[tuple] = None

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "radius": float(self.radius), "degree": int(self.degree),
                "semi_axes": None if self.semi_axes is None else [float(a) for a in self.semi_axes]}


@dataclass
class BallFamily:
    balls: list
    total_radius: float
    lower_bound: float
    kernel_params: dict
    merge_events: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {"balls": [b.to_json() for b in self.balls], "total_radius": self.total_radius,
                "lower_bound": self.lower_bound, "kernel_params": self.kernel_params,
                "merge_events": self.merge_events}


def enclosing_disk(c1, r1, c2, r2):
    """Smallest disk containing two disks."""
    d = float(np.linalg.norm(c2 - c1))
    if d + r2 <= r1:
        return c1.copy(), r1
    if d + r1 <= r2:
        return c2.copy(), r2
    R = 0.5 * (d + r1 + r2)
    return c1 + (R - r1) * (c2 - c1) / d, R


def _contribution(lam, r, d):
    return 0.0 if d == 0 else abs(d) * float(lam(r / abs(d)))


def _merge_all(balls, lam, events, step):
    merged = True
    while merged:
        merged = False
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                ci, ri, di = balls[i]
                cj, rj, dj = balls[j]
                if np.linalg.norm(ci - cj) <= ri + rj:
                    c, r = enclosing_disk(ci, ri, cj, rj)
                    events.append({"step": step, "radii": [ri, rj], "degrees": [di, dj],
                                   "pre_merge_bounds": [_contribution(lam, ri, di), _contribution(lam, rj, dj)],
                                   "merged_radius": r, "merged_degree": di + dj})
                    balls[i] = (c, r, di + dj)
                    del balls[j]
                    merged = True
                    break
            if merged:
                break
    return balls


def _grow_core(seeds, extent, eps, r1, C0, growth=GROWTH):
    """Grow seeds (center, radius, degree) in a rectangle [0, ex] x [0, ey]."""
    lam = make_kernel(eps, C0)
    events: list = []
    balls = [(np.asarray(c, dtype=float), float(r), int(d)) for c, r, d in seeds]
    balls = _merge_all(balls, lam, events, 0)
    step = 0

    def check():
        for c, r, d in balls:
            if d != 0 and (np.any(c - r < 0.0) or np.any(c + r > extent)):
                raise BoundaryCollision("ball with nonzero degree leaves the face", center=c.tolist(), radius=r)

    check()
    while balls and sum(b[1] for b in balls) < r1 * (1.0 - 1e-12):
        step += 1
        total = sum(b[1] for b in balls)
        f = min(growth, r1 / total)
        balls = [(c, r * f, d) for c, r, d in balls]
        balls = _merge_all(balls, lam, events, step)
        check()
        if step > 100000:
            break
    lb = float(sum(_contribution(lam, r, d) for c, r, d in balls))
    return balls, lb, events


def grow_balls(face: FaceField, eps: float, final_radius: float, C0: float = 2.0,
               vortices: Optional[FaceVortexSet] = None) -> BallFamily:
    """Isotropic ball construction seeded by the essential components of a face.

    Seeds have radius diameter + 2 s (s the face spacing); all radii grow by the
    factor 1.05 in lockstep, overlapping balls merge into their smallest
    enclosing disk, and growth stops when the radii sum to ``final_radius``,
    capped at a quarter of the face diameter.
    """
    return _grow_scaled(face, eps, final_radius, C0, vortices, 1.0, 1.0)


def grow_balls_metric(face: FaceField, eps: float, metric, final_radius: float, C0: float = 2.0,
                      vortices: Optional[FaceVortexSet] = None) -> BallFamily:
    """Ball construction for the constant metric diag(g_tt, g_ww) in the face axes.

    Coordinates are rescaled by (sqrt g_tt, sqrt g_ww), the isotropic
    construction runs there with the same eps, and balls map back to ellipses
    with semi-axes (r / sqrt g_tt, r / sqrt g_ww). The lower bound is in the
    weighted energy of ``weighted_face_energy``.
    """
    g_tt, g_ww = float(metric[0]), float(metric[1])
    if not (g_tt > 0 and g_ww > 0):
        raise ValueError("metric entries must be positive")
    return _grow_scaled(face, eps, final_radius, C0, vortices, np.sqrt(g_tt), np.sqrt(g_ww))


def _grow_scaled(face, eps, r1, C0, vortices, st, sw):
    if vortices is None:
        vortices = detect_components(face)
    sa, sb = face.spacings()
    scale = np.array([st, sw])
    extent = face.plane_coords(face.points[-1, -1]) * scale
    seeds = []
    for c in vortices.components:
        y = face.plane_coords(c.centroid) * scale
        seeds.append((y, c.diameter * max(st, sw) + 2.0 * max(sa * st, sb * sw), c.degree))
    diam = float(np.linalg.norm(face.plane_coords(face.points[-1, -1]) - face.plane_coords(face.points[0, 0])))
    # the kernel's log form is only trusted up to r0, taken as a quarter of the face diameter
    r_cap = 0.25 * diam * min(st, sw)
    if r1 > r_cap:
        log.info("final radius %g capped at r0 = %g", r1, r_cap)
    params = {"eps": eps, "C0": C0, "growth": GROWTH, "r_cap": r_cap, "r1_requested": float(r1),
              "r1_used": float(min(r1, r_cap)), "metric": [st * st, sw * sw]}
    if not seeds:
        return BallFamily([], 0.0, 0.0, params)
    balls, lb, events = _grow_core(seeds, extent, eps, min(r1, r_cap), C0)
    ta, tb = face.axes()
    out = []
    for c, r, d in balls:
        y = c / scale
        world = face.points[0, 0] + y[0] * ta + y[1] * tb
        out.append(Ball(center=y, radius=r, degree=d, world_center=world, semi_axes=(r / st, r / sw)))
    return BallFamily(out, float(sum(b.radius for b in out)), lb, params, events)


def weighted_face_energy(face: FaceField, eps: float, metric=(1.0, 1.0)) -> float:
    """0.5 int (sqrt(g_ww/g_tt)|D_t u|^2 + sqrt(g_tt/g_ww)|D_w u|^2) + sqrt(g_tt g_ww) (1-|u|^2)^2/(4 eps^2)."""
    g_tt, g_ww = float(metric[0]), float(metric[1])
    ga, gb = tangential_gradient(face)
    pot = (1.0 - np.abs(face.u) ** 2) ** 2 / (4.0 * eps * eps)
    e = (0.5 * (np.sqrt(g_ww / g_tt) * np.abs(ga) ** 2 + np.sqrt(g_tt / g_ww) * np.abs(gb) ** 2)
         + np.sqrt(g_tt * g_ww) * pot)
    sa, sb = face.spacings()
    wa = np.full(face.shape[0], sa)
    wa[0] = wa[-1] = 0.5 * sa
    wb = np.full(face.shape[1], sb)
    wb[0] = wb[-1] = 0.5 * sb
    return float(np.sum(e * np.outer(wa, wb)))
