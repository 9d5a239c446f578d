"""Kernel backend selection: the compiled extension when importable, numpy otherwise.

Set ``EKMANQG_PURE=1`` to force the numpy backend.
"""
import os

from . import _kernels_py

BACKEND = "numpy"
_impl = _kernels_py
if os.environ.get("EKMANQG_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

face_rho = _impl.face_rho
divergence = _impl.divergence
gradient = _impl.gradient
cell_kinetic = _impl.cell_kinetic
vortex_force = _impl.vortex_force
viscous = _impl.viscous


def backend(name):
    """Module implementing the kernels for ``name`` in {"numpy", "cython"}."""
    if name == "numpy":
        return _kernels_py
    from . import _kernels
    return _kernels
