"""Batched 3x3 kernels with a compiled core and a NumPy fallback.

The compiled extension ``mbdarboux._kernels`` is used when it imports;
otherwise (or when ``MBD_BACKEND=python``) the pure-NumPy module is used.
Wrappers here accept arbitrary leading batch shapes.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("MBD_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def available_backends():
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def _backend(name):
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def _c(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def _coef(coef, n):
    return _c(np.broadcast_to(np.asarray(coef, dtype=np.complex128), (n,)))


def hermitian_projector(phi, backend=None):
    """Return ``(P, norm2)`` with ``P = phi phi^H / (phi^H phi)`` per batch entry.

    Entries with zero ``phi`` give ``P = 0`` and ``norm2 = 0``; the caller
    decides whether that is an error.
    """
    phi = np.asarray(phi)
    shape = phi.shape[:-1]
    flat = _c(phi.reshape(-1, 3))
    out = np.empty((flat.shape[0], 3, 3), dtype=np.complex128)
    norm2 = np.empty(flat.shape[0], dtype=np.float64)
    _backend(backend).hermitian_projector(flat, out, norm2)
    return out.reshape(shape + (3, 3)), norm2.reshape(shape)


def outer_projector(phi, chi, backend=None):
    """Return ``(P, inner)`` with ``P = phi (x) chi / (chi . phi)``."""
    phi, chi = np.broadcast_arrays(np.asarray(phi), np.asarray(chi))
    shape = phi.shape[:-1]
    f_phi = _c(phi.reshape(-1, 3))
    f_chi = _c(chi.reshape(-1, 3))
    out = np.empty((f_phi.shape[0], 3, 3), dtype=np.complex128)
    inner = np.empty(f_phi.shape[0], dtype=np.complex128)
    _backend(backend).outer_projector(f_phi, f_chi, out, inner)
    return out.reshape(shape + (3, 3)), inner.reshape(shape)


def rank_one_apply(P, v, coef, backend=None):
    """``v + coef * P v`` for column vectors ``v``."""
    shape = v.shape[:-1]
    fv = _c(v.reshape(-1, 3))
    fP = _c(np.broadcast_to(P, shape + (3, 3)).reshape(-1, 3, 3))
    c = _coef(np.broadcast_to(coef, shape).reshape(-1), fv.shape[0])
    out = np.empty_like(fv)
    _backend(backend).rank_one_apply(fP, fv, c, out)
    return out.reshape(shape + (3,))


def rank_one_apply_row(v, P, coef, backend=None):
    """``v + coef * v P`` for row vectors ``v``."""
    shape = v.shape[:-1]
    fv = _c(v.reshape(-1, 3))
    fP = _c(np.broadcast_to(P, shape + (3, 3)).reshape(-1, 3, 3))
    c = _coef(np.broadcast_to(coef, shape).reshape(-1), fv.shape[0])
    out = np.empty_like(fv)
    _backend(backend).rank_one_apply_row(fv, fP, c, out)
    return out.reshape(shape + (3,))


def dress_bloch(A, P, a_mu, a_nu, s, backend=None):
    """Per-node Bloch update ``A - 2s[a_mu A P - a_nu P A - (a_mu - a_nu) P A P]``.

    ``A`` has shape ``(..., M, 3, 3)``, ``P`` shape ``(..., 3, 3)`` and the
    node coefficients ``a_mu``, ``a_nu`` shape ``(M,)``.
    """
    shape = A.shape[:-3]
    M = A.shape[-3]
    fA = _c(A.reshape(-1, M, 3, 3))
    fP = _c(np.broadcast_to(P, shape + (3, 3)).reshape(-1, 3, 3))
    out = np.empty_like(fA)
    _backend(backend).dress_bloch(fA, fP, _c(a_mu), _c(a_nu), complex(s), out)
    return out.reshape(A.shape)


def dress_pure(a, P, coef, backend=None):
    """Per-node amplitude update ``a + coef_m P a``; ``a`` has shape ``(..., M, 3)``."""
    shape = a.shape[:-2]
    M = a.shape[-2]
    fa = _c(a.reshape(-1, M, 3))
    fP = _c(np.broadcast_to(P, shape + (3, 3)).reshape(-1, 3, 3))
    out = np.empty_like(fa)
    _backend(backend).dress_pure(fa, fP, _c(coef), out)
    return out.reshape(a.shape)
