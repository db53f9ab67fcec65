"""Pure-NumPy reference implementations of the batched 3x3 kernels.

Signatures mirror the compiled ``_kernels`` module exactly: inputs are
C-contiguous complex128 arrays with a flat leading batch axis and results
are written into caller-provided output buffers.
"""
import numpy as np


_TINY = np.finfo(np.float64).tiny


def _scale(v):
    # subnormal scales are treated as zero: their reciprocal overflows
    s = np.max(np.maximum(np.abs(v.real), np.abs(v.imag)), axis=-1)
    return np.where(s >= _TINY, s, 0.0)


def hermitian_projector(phi, out, norm2):
    scale = _scale(phi)
    safe = np.where(scale > 0, scale, 1.0)
    v = phi / safe[:, None]
    n2 = np.einsum("nk,nk->n", v, v.conj()).real
    n2_safe = np.where(n2 > 0, n2, 1.0)
    out[...] = v[:, :, None] * v.conj()[:, None, :] / n2_safe[:, None, None]
    with np.errstate(over="ignore"):
        norm2[...] = n2 * scale * scale


def outer_projector(phi, chi, out, inner):
    sp = _scale(phi)
    sc = _scale(chi)
    v = phi / np.where(sp > 0, sp, 1.0)[:, None]
    w = chi / np.where(sc > 0, sc, 1.0)[:, None]
    ip = np.einsum("nk,nk->n", w, v)
    ip_safe = np.where(ip != 0, ip, 1.0)
    out[...] = v[:, :, None] * w[:, None, :] / ip_safe[:, None, None]
    with np.errstate(over="ignore", invalid="ignore"):
        inner[...] = ip * sp * sc


def rank_one_apply(P, v, coef, out):
    out[...] = v + coef[:, None] * np.einsum("nkj,nj->nk", P, v)


def rank_one_apply_row(v, P, coef, out):
    out[...] = v + coef[:, None] * np.einsum("nk,nkj->nj", v, P)


def dress_bloch(A, P, a_mu, a_nu, s, out):
    Pn = P[:, None, :, :]
    AP = A @ Pn
    PA = Pn @ A
    PAP = PA @ Pn
    am = a_mu[None, :, None, None]
    an = a_nu[None, :, None, None]
    out[...] = A - 2.0 * s * (am * AP - an * PA - (am - an) * PAP)


def dress_pure(a, P, coef, out):
    Pa = np.einsum("nkj,nmj->nmk", P, a)
    out[...] = a + coef[None, :, None] * Pa
