"""Kernel selection: compiled Cython stepper when available, numpy fallback.

Set ``PTRABI_PURE_PYTHON=1`` to force the fallback even when the extension
is built (used by the kernel benchmark and the equivalence tests).
"""

import os

from . import pyloop

try:
    from . import _cyloop
except ImportError:
    _cyloop = None

_FORCE_PY = os.environ.get("PTRABI_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes")

HAVE_COMPILED = _cyloop is not None
if HAVE_COMPILED and not _FORCE_PY:
    ACTIVE_KERNEL = "cython"
else:
    ACTIVE_KERNEL = "python"


def get_kernel(name=None):
    """Return the propagate() callable for 'cython', 'python', or the active one."""
    if name is None or name == "active":
        name = ACTIVE_KERNEL
    if name == "python":
        return pyloop.propagate
    if name == "cython":
        if _cyloop is None:
            raise RuntimeError("compiled kernel is not available in this install")
        return _cyloop.propagate
    raise ValueError(f"unknown kernel {name!r}; expected 'cython', 'python', or 'active'")


propagate = get_kernel()
