"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. Set ``UAVUDN_BACKEND=python`` to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_MODULES = {"python": _fallback}
if _compiled is not None:
    _MODULES["cython"] = _compiled


def available():
    return tuple(_MODULES)


def use(name):
    """Switch the active backend (``"cython"`` or ``"python"``)."""
    global kernels, BACKEND
    if name not in _MODULES:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    kernels = _MODULES[name]
    BACKEND = name


_requested = os.environ.get("UAVUDN_BACKEND", "").strip().lower()
if _requested:
    use(_requested)
else:
    use("cython" if _compiled is not None else "python")
