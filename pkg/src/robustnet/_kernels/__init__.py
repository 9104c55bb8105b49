"""Backend selection for the hot kernels.

The compiled extension (``_fast``) is used when it importable; otherwise the
pure NumPy/Python twin (``_slow``) is selected.  Set ROBUSTNET_PURE=1 to
force the pure backend, e.g. for parity testing or benchmarking.
"""

from __future__ import annotations

import os

from . import _slow

if os.environ.get("ROBUSTNET_PURE"):
    _backend = _slow
else:
    try:
        from . import _fast as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _slow

BACKEND = "pure" if _backend is _slow else "compiled"

rk4_path = _backend.rk4_path
exact_path = _backend.exact_path
johnson_cycles = _backend.johnson_cycles


def available_backends() -> dict:
    """Importable backends by name; used by parity tests and benchmarks."""
    out = {"pure": _slow}
    try:
        from . import _fast

        out["compiled"] = _fast
    except ImportError:
        pass
    return out
