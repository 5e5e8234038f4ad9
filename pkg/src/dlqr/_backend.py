"""Numeric backend selection.

The compiled extension `dlqr._kernels` is preferred when importable; the
NumPy module `dlqr._kernels_py` is the fallback. Set DLQR_BACKEND to
"compiled" or "python" to force one (the benchmark command loads both
explicitly regardless of this switch).
"""

import os

from .errors import InvalidParameterError

_ALIASES = {
    "": "auto",
    "auto": "auto",
    "c": "compiled",
    "cython": "compiled",
    "compiled": "compiled",
    "py": "python",
    "numpy": "python",
    "python": "python",
}


def load_backend(name="auto"):
    """Import and return a kernel module by name ("auto"/"compiled"/"python")."""
    try:
        kind = _ALIASES[str(name).strip().lower()]
    except KeyError:
        raise InvalidParameterError(
            f"unknown backend {name!r}; expected 'auto', 'compiled' or 'python'"
        ) from None
    if kind == "python":
        from . import _kernels_py

        return _kernels_py
    try:
        from . import _kernels

        return _kernels
    except ImportError:
        if kind == "compiled":
            raise
        from . import _kernels_py

        return _kernels_py


kernels = load_backend(os.environ.get("DLQR_BACKEND", "auto"))
BACKEND_NAME = kernels.BACKEND_NAME
