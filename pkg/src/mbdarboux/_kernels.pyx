# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched 3x3 complex kernels (see ``_kernels_py`` for the reference)."""

from libc.math cimport fabs


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline double _absmax3(const double complex[::1] v) noexcept nogil:
    cdef double m = 0.0, t
    cdef Py_ssize_t k
    for k in range(3):
        t = fabs(v[k].real)
        if t > m:
            m = t
        t = fabs(v[k].imag)
        if t > m:
            m = t
    return m


def hermitian_projector(const double complex[:, ::1] phi, double complex[:, :, ::1] out,
                        double[::1] norm2):
    cdef Py_ssize_t n, k, j, N = phi.shape[0]
    cdef double scale, n2
    cdef double complex v[3]
    with nogil:
        for n in range(N):
            scale = _absmax3(phi[n])
            if scale == 0.0:
                for k in range(3):
                    for j in range(3):
                        out[n, k, j] = 0.0
                norm2[n] = 0.0
                continue
            n2 = 0.0
            for k in range(3):
                v[k] = phi[n, k] / scale
                n2 = n2 + v[k].real * v[k].real + v[k].imag * v[k].imag
            for k in range(3):
                for j in range(3):
                    out[n, k, j] = v[k] * _conj(v[j]) / n2
            norm2[n] = n2 * scale * scale


def outer_projector(const double complex[:, ::1] phi, const double complex[:, ::1] chi,
                    double complex[:, :, ::1] out, double complex[::1] inner):
    cdef Py_ssize_t n, k, j, N = phi.shape[0]
    cdef double sp, sc
    cdef double complex ip
    cdef double complex v[3]
    cdef double complex w[3]
    with nogil:
        for n in range(N):
            sp = _absmax3(phi[n])
            sc = _absmax3(chi[n])
            if sp == 0.0:
                sp = 1.0
            if sc == 0.0:
                sc = 1.0
            ip = 0.0
            for k in range(3):
                v[k] = phi[n, k] / sp
                w[k] = chi[n, k] / sc
                ip = ip + w[k] * v[k]
            inner[n] = ip * sp * sc
            if ip == 0.0:
                ip = 1.0
            for k in range(3):
                for j in range(3):
                    out[n, k, j] = v[k] * w[j] / ip


def rank_one_apply(const double complex[:, :, ::1] P, const double complex[:, ::1] v,
                   const double complex[::1] coef, double complex[:, ::1] out):
    cdef Py_ssize_t n, k, j, N = v.shape[0]
    cdef double complex acc
    with nogil:
        for n in range(N):
            for k in range(3):
                acc = 0.0
                for j in range(3):
                    acc = acc + P[n, k, j] * v[n, j]
                out[n, k] = v[n, k] + coef[n] * acc


def rank_one_apply_row(const double complex[:, ::1] v, const double complex[:, :, ::1] P,
                       const double complex[::1] coef, double complex[:, ::1] out):
    cdef Py_ssize_t n, k, j, N = v.shape[0]
    cdef double complex acc
    with nogil:
        for n in range(N):
            for j in range(3):
                acc = 0.0
                for k in range(3):
                    acc = acc + v[n, k] * P[n, k, j]
                out[n, j] = v[n, j] + coef[n] * acc


def dress_bloch(const double complex[:, :, :, ::1] A, const double complex[:, :, ::1] P,
                const double complex[::1] a_mu, const double complex[::1] a_nu, double complex s,
                double complex[:, :, :, ::1] out):
    cdef Py_ssize_t n, m, i, j, k, N = A.shape[0], M = A.shape[1]
    cdef double complex AP[3][3]
    cdef double complex PA[3][3]
    cdef double complex PAP, acc1, acc2, am, an, two_s = 2.0 * s
    with nogil:
        for n in range(N):
            for m in range(M):
                am = a_mu[m]
                an = a_nu[m]
                for i in range(3):
                    for j in range(3):
                        acc1 = 0.0
                        acc2 = 0.0
                        for k in range(3):
                            acc1 = acc1 + A[n, m, i, k] * P[n, k, j]
                            acc2 = acc2 + P[n, i, k] * A[n, m, k, j]
                        AP[i][j] = acc1
                        PA[i][j] = acc2
                for i in range(3):
                    for j in range(3):
                        PAP = 0.0
                        for k in range(3):
                            PAP = PAP + PA[i][k] * P[n, k, j]
                        out[n, m, i, j] = A[n, m, i, j] - two_s * (
                            am * AP[i][j] - an * PA[i][j] - (am - an) * PAP)


def dress_pure(const double complex[:, :, ::1] a, const double complex[:, :, ::1] P,
               const double complex[::1] coef, double complex[:, :, ::1] out):
    cdef Py_ssize_t n, m, k, j, N = a.shape[0], M = a.shape[1]
    cdef double complex acc
    with nogil:
        for n in range(N):
            for m in range(M):
                for k in range(3):
                    acc = 0.0
                    for j in range(3):
                        acc = acc + P[n, k, j] * a[n, m, j]
                    out[n, m, k] = a[n, m, k] + coef[m] * acc
