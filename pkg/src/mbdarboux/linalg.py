"""Fixed-size (3-component) complex linear algebra.

Vectors are arrays with a trailing axis of length 3 and matrices arrays
with trailing shape ``(3, 3)``; every function broadcasts over leading
batch axes.
"""
import numpy as np

from . import kernels
from .errors import DegenerateVector

#: Default floor for ``(phi^H, phi)`` below which a projector is singular.
EPS_PROJ = 1e-300

J = np.diag([1.0, 1.0, -1.0]).astype(np.complex128)
IDENTITY = np.eye(3, dtype=np.complex128)


def as_vector(v):
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {v.shape}")
    return v


def as_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    if m.shape[-2:] != (3, 3):
        raise ValueError(f"expected trailing shape (3, 3), got {m.shape}")
    return m


def dagger(m):
    return np.swapaxes(np.conj(m), -1, -2)


def commutator(a, b):
    """Return ``ab - ba``."""
    return a @ b - b @ a


def commutator_J(m):
    """``[J, m]`` computed entrywise as ``(J_k - J_j) m_kj``."""
    d = np.array([1.0, 1.0, -1.0])
    return (d[:, None] - d[None, :]) * m


def max_norm(m, axis=None):
    """Max-entry norm; with ``axis=None`` reduces over everything."""
    return np.max(np.abs(m), axis=axis, initial=0.0)


def hermitian_deviation(m):
    return max_norm(m - dagger(m))


def anti_hermitian_deviation(m):
    return max_norm(m + dagger(m))


def norm_sq(v):
    v = np.asarray(v)
    return np.sum(v.real ** 2 + v.imag ** 2, axis=-1)


def outer(u, w):
    """``u (x) w`` without conjugation."""
    return u[..., :, None] * w[..., None, :]


def projector_from_vector(phi, eps=EPS_PROJ, tau=None, zeta=None):
    """Hermitian rank-one projector ``P_kj = phi_k conj(phi_j) / (phi^H phi)``.

    Raises :class:`DegenerateVector` wherever ``(phi^H phi) <= eps`` or the
    vector is not finite; when grid coordinates are supplied the first
    offending location is reported.
    """
    phi = as_vector(phi)
    P, n2 = kernels.hermitian_projector(phi)
    # n2 may overflow for huge but valid vectors; P itself is scale-safe
    bad = ~(n2 > eps) | ~np.all(np.isfinite(P), axis=(-2, -1))
    if np.any(bad):
        raise DegenerateVector("projector vector has vanishing or non-finite norm",
                               _first_location(bad, tau, zeta))
    return P


def _first_location(mask, tau, zeta):
    if tau is None or zeta is None:
        return None
    idx = np.unravel_index(int(np.argmax(mask)), mask.shape)
    t = np.broadcast_to(tau, mask.shape)[idx]
    z = np.broadcast_to(zeta, mask.shape)[idx]
    return (float(t), float(z))
