# cython: language_level=3
"""Compiled alternating rank-one projection.

Same contract as ``sepfact._kernels_py.rank1_search``; see that module for
the algorithm description.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


def rank1_search(cplx[:, ::1] basis, int m, int n, cplx[:, ::1] starts,
                 int max_iter=2000, double tol=1e-12):
    cdef Py_ssize_t mn = basis.shape[0]
    cdef Py_ssize_t d = basis.shape[1]
    cdef Py_ssize_t restarts = starts.shape[0]
    if mn != m * n:
        raise ValueError("basis rows must equal m * n")
    if starts.shape[1] != d:
        raise ValueError("starts must have one coefficient per basis vector")

    e_out = np.zeros((restarts, m), dtype=np.complex128)
    f_out = np.zeros((restarts, n), dtype=np.complex128)
    res_out = np.full(restarts, np.inf)
    it_out = np.zeros(restarts, dtype=np.int64)
    cdef cplx[:, ::1] E = e_out
    cdef cplx[:, ::1] F = f_out
    cdef double[::1] R = res_out
    cdef long long[::1] IT = it_out

    cdef cplx[::1] v = np.zeros(mn, dtype=np.complex128)
    cdef cplx[::1] x = np.zeros(mn, dtype=np.complex128)
    cdef cplx[::1] c = np.zeros(d, dtype=np.complex128)
    cdef cplx[::1] u = np.zeros(m, dtype=np.complex128)
    cdef cplx[::1] w = np.zeros(n, dtype=np.complex128)

    cdef Py_ssize_t r, i, j, a, best
    cdef int it
    cdef double nrm, sigma, res, bestn
    cdef cplx acc

    with nogil:
        for r in range(restarts):
            # v = basis @ starts[r], normalised
            nrm = 0.0
            for i in range(mn):
                acc = 0
                for a in range(d):
                    acc = acc + basis[i, a] * starts[r, a]
                v[i] = acc
                nrm += _abs2(acc)
            nrm = sqrt(nrm)
            if nrm == 0.0:
                continue
            for i in range(mn):
                v[i] = v[i] / nrm

            # warm start: u = heaviest column of the reshaped vector
            best = 0
            bestn = -1.0
            for j in range(n):
                nrm = 0.0
                for i in range(m):
                    nrm += _abs2(v[i * n + j])
                if nrm > bestn:
                    bestn = nrm
                    best = j
            nrm = sqrt(bestn)
            for i in range(m):
                u[i] = v[i * n + best] / nrm
            # w = M^H u
            for j in range(n):
                acc = 0
                for i in range(m):
                    acc = acc + _conj(v[i * n + j]) * u[i]
                w[j] = acc

            res = 1e300
            sigma = 0.0
            for it in range(max_iter):
                # u = M w / |M w|
                nrm = 0.0
                for i in range(m):
                    acc = 0
                    for j in range(n):
                        acc = acc + v[i * n + j] * w[j]
                    u[i] = acc
                    nrm += _abs2(acc)
                nrm = sqrt(nrm)
                if nrm == 0.0:
                    break
                for i in range(m):
                    u[i] = u[i] / nrm
                # w = M^H u, sigma = |w|
                nrm = 0.0
                for j in range(n):
                    acc = 0
                    for i in range(m):
                        acc = acc + _conj(v[i * n + j]) * u[i]
                    w[j] = acc
                    nrm += _abs2(acc)
                sigma = sqrt(nrm)
                if sigma == 0.0:
                    break
                for j in range(n):
                    w[j] = w[j] / sigma
                # x = sigma u (x) conj(w)
                for i in range(m):
                    for j in range(n):
                        x[i * n + j] = sigma * u[i] * _conj(w[j])
                # c = basis^H x ; v = basis c
                for a in range(d):
                    acc = 0
                    for i in range(mn):
                        acc = acc + _conj(basis[i, a]) * x[i]
                    c[a] = acc
                nrm = 0.0
                res = 0.0
                for i in range(mn):
                    acc = 0
                    for a in range(d):
                        acc = acc + basis[i, a] * c[a]
                    v[i] = acc
                    nrm += _abs2(acc)
                    res += _abs2(x[i] - acc)
                res = sqrt(res) / sigma
                IT[r] = it + 1
                if res < tol:
                    break
                nrm = sqrt(nrm)
                if nrm == 0.0:
                    break
                for i in range(mn):
                    v[i] = v[i] / nrm

            R[r] = res
            for i in range(m):
                E[r, i] = u[i]
            for j in range(n):
                F[r, j] = _conj(w[j])

    return e_out, f_out, res_out, it_out
