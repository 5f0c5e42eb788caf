"""Backend selection for the hot kernels.

The compiled extension ``weaklight._kernels`` is used when it imports;
otherwise the NumPy fallback in ``weaklight._pykernels`` is used. Setting
``WEAKLIGHT_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("WEAKLIGHT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

_BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    _BACKENDS["cython"] = _impl


def available_backends():
    return tuple(_BACKENDS)


def get_backend(name=None):
    """Kernel module by name; ``None`` gives the one selected at import."""
    if name is None:
        return _impl
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def heterodyne_masses(r, wr, cos_t, sin_t, wt, rho_vac, rho_b, rho_a, c_re, c_im,
                      backend=None):
    return get_backend(backend).heterodyne_masses(
        _c(r), _c(wr), _c(cos_t), _c(sin_t), _c(wt),
        float(rho_vac), float(rho_b), float(rho_a), float(c_re), float(c_im),
    )


def fisher_stencil(p0, p1p, p1m, p2p, p2m, h, p_floor, d_floor, backend=None):
    return get_backend(backend).fisher_stencil(
        _c(p0), _c(p1p), _c(p1m), _c(p2p), _c(p2m),
        float(h), float(p_floor), float(d_floor),
    )
