"""Kernel backend selection.

The compiled extension is preferred; the pure numpy implementation is the
fallback. ``BETACHART_BACKEND=pure`` forces the fallback (used by the
benchmark and by tests that compare the two).
"""

import os

if os.environ.get("BETACHART_BACKEND", "").lower() == "pure":
    from . import pure as kernels
else:
    try:
        from . import _corekernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as kernels

BACKEND_NAME = kernels.NAME

__all__ = ["kernels", "BACKEND_NAME"]
