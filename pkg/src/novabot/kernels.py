"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``NOVABOT_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from novabot import _pykernels

python_backend = _pykernels

try:
    from novabot import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

if compiled_backend is not None and os.environ.get("NOVABOT_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    _impl = compiled_backend
else:
    BACKEND = "python"
    _impl = _pykernels

diffuse = _impl.diffuse
deposit_nearest = _impl.deposit_nearest
pair_velocities = _impl.pair_velocities


def backends():
    """Available backends keyed by name, compiled first when present."""
    found = {}
    if compiled_backend is not None:
        found["cython"] = compiled_backend
    found["python"] = _pykernels
    return found
