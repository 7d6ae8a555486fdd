"""Exception hierarchy. Every pipeline failure carries the stage that raised it."""
from __future__ import annotations


class GLVortexError(Exception):
    """Base class for pipeline errors (CLI exit code 3)."""

    stage = "pipeline"

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details


class ConfigError(ValueError):
    """Invalid configuration or parameters (CLI exit code 2)."""


class EmptyRegion(GLVortexError):
    stage = "field_core"


class ZeroModulus(GLVortexError):
    stage = "field_core"


class GeometryOutOfBounds(GLVortexError):
    stage = "field_core"


class FormatError(GLVortexError):
    stage = "field_core"


class GridNotFound(GLVortexError):
    stage = "grid_select"


class BoundaryTouch(GLVortexError):
    stage = "slice_vorticity"


class ZeroOnContour(GLVortexError):
    stage = "slice_vorticity"


class BoundaryCollision(GLVortexError):
    stage = "ball_construction"


class Unbalanced(GLVortexError):
    stage = "minimal_connection"


class PointOutsideDomain(GLVortexError):
    stage = "minimal_connection"


class PointNotOnSurface(GLVortexError):
    stage = "minimal_connection"


class ThetaTooLarge(GLVortexError):
    stage = "zeta_smoothing"


class VariantMismatch(GLVortexError):
    stage = "zeta_smoothing"


class KappaTooLarge(GLVortexError):
    stage = "zeta_smoothing"


class NonConvexDomain(GLVortexError):
    stage = "zeta_smoothing"


class OrientationMismatch(GLVortexError):
    stage = "current_builder"


class GammaOutOfRange(GLVortexError):
    stage = "current_builder"


class ParamsInfeasible(GLVortexError):
    stage = "lower_bound"


class DomainNotSupported(GLVortexError):
    stage = "lower_bound"


class UnsupportedGeometry(GLVortexError):
    stage = "dynamics"


class VerificationFailed(GLVortexError):
    stage = "verify"
