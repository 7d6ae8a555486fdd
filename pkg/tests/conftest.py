"""Shared fixtures: synthetic fields, grids and currents, built once per session."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from glvortex.current import build_vortex_current, detect_all, sample_faces
from glvortex.field import Domain, synth_field
from glvortex.grid import choose_grid

GRID_SEED = 7
FIXTURES = ("straight_line", "ring", "helix", "dipole_pair")


@lru_cache(maxsize=None)
def field(kind: str, eps: float = 0.02, dims: int = 64, ball: bool = False):
    domain = Domain.ball((0.5, 0.5, 0.5), 0.45) if ball else None
    return synth_field(kind, dims=dims, eps=eps, domain=domain)


@lru_cache(maxsize=None)
def pipeline(kind: str, eps: float = 0.02, dims: int = 64, ball: bool = False, delta_cells: int = 8):
    """(field, filaments, grid, face_sets, current) for a fixture."""
    fld, fil = field(kind, eps, dims, ball)
    grid = choose_grid(fld, eps, delta_cells * fld.h, rng_seed=GRID_SEED)
    fs = detect_all(sample_faces(fld, grid))
    nu = build_vortex_current(fld, grid, eps, face_sets=fs)
    return fld, fil, grid, fs, nu


def random_config(rng, k: int, radius: float = 1.0):
    """k positive and k negative points uniform in a ball."""
    from glvortex.matching import SignedConfig

    def sample(n):
        x = rng.normal(size=(n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True) + 1e-300
        return radius * x * rng.random((n, 1)) ** (1.0 / 3.0)

    return SignedConfig(sample(k), sample(k))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
