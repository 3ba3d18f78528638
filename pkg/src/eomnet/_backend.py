"""Kernel selection: compiled Cython module if importable, else pure Python."""

from __future__ import annotations

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

scattering_stack = (_compiled or _pykernels).scattering_stack


def available_backends() -> dict:
    """Map backend name to its ``scattering_stack`` implementation."""
    found = {"python": _pykernels.scattering_stack}
    if _compiled is not None:
        found["compiled"] = _compiled.scattering_stack
    return found
