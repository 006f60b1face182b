"""Back-substitution kernels with a compiled core and pure-Python fallback.

The backend is selected once at import time: the Cython extension if it
built, otherwise the numpy implementation.  Set ``PENCILPH_PURE_PYTHON=1``
to force the fallback (used by the benchmark and the parity tests).
"""

import os

from . import sylvester_py

__all__ = ["solve_sylvester_quasi_triangular", "backend_name", "available_backends"]

_FORCE_PY = os.environ.get("PENCILPH_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _FORCE_PY:
    try:
        from . import _sylvester_c as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    _impl = _compiled
    _BACKEND = "compiled"
else:
    _impl = sylvester_py
    _BACKEND = "python"

solve_sylvester_quasi_triangular = _impl.solve_sylvester_quasi_triangular


def backend_name():
    """Name of the active kernel backend ('compiled' or 'python')."""
    return _BACKEND


def available_backends():
    """Mapping of backend name to its solver callable (for benchmarks/tests)."""
    out = {"python": sylvester_py.solve_sylvester_quasi_triangular}
    try:
        from . import _sylvester_c
        out["compiled"] = _sylvester_c.solve_sylvester_quasi_triangular
    except ImportError:
        pass
    return out
