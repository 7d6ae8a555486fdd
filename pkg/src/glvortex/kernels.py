"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the NumPy
fallback is used. Setting ``GLVORTEX_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GLVORTEX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"

hungarian = _impl.hungarian
zeta_eval = _impl.zeta_eval
zeta_smooth = _impl.zeta_smooth

__all__ = ["BACKEND", "hungarian", "zeta_eval", "zeta_smooth"]
