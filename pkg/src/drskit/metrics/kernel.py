"""Selects the mapping-search kernel at import time.

The compiled extension is preferred; the pure-Python twin is the fallback.
Set ``DRSKIT_NO_EXT=1`` to force the fallback (used by the benchmark and
by the kernel-agreement tests).
"""
from __future__ import annotations

import os

from . import _matchcore_py

if os.environ.get("DRSKIT_NO_EXT"):
    _impl = _matchcore_py
else:
    try:
        from . import _matchcore as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _matchcore_py

COMPILED = bool(getattr(_impl, "HAVE_C_KERNEL", False))
KERNEL_NAME = "compiled" if COMPILED else "pure-python"

solve = _impl.solve
