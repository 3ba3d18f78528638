# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched scattering kernel.

Same contract as :func:`eomnet._pykernels.scattering_stack`: for every
frequency w, factor ``M - i w I`` by LU with partial pivoting and form
``S (M - i w I)^-1 S - I`` with ``S = diag(sqrt_gamma)``.
"""

import numpy as np

from libc.math cimport hypot

from .errors import SingularMatrixError
from .linalg import PIVOT_RTOL


cdef inline double cabs(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef int _one_frequency(const double complex[:, ::1] m, const double[::1] s, double w,
                        double rtol, double complex[:, ::1] a, Py_ssize_t[::1] perm,
                        double complex[:, ::1] u) noexcept nogil:
    """Fill ``u`` for one frequency; return -1 on success else the pivot column."""
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k, p, r, c, tmp
    cdef double amax = 0.0, v, best
    cdef double complex piv, f, t

    for i in range(n):
        perm[i] = i
        for j in range(n):
            a[i, j] = m[i, j]
        a[i, i] = a[i, i] - 1j * w
    for i in range(n):
        for j in range(n):
            v = cabs(a[i, j])
            if v > amax:
                amax = v

    for k in range(n):
        p = k
        best = cabs(a[k, k])
        for r in range(k + 1, n):
            v = cabs(a[r, k])
            if v > best:
                best = v
                p = r
        if best == 0.0 or best < rtol * amax:
            return <int>k
        if p != k:
            for c in range(n):
                t = a[k, c]
                a[k, c] = a[p, c]
                a[p, c] = t
            tmp = perm[k]
            perm[k] = perm[p]
            perm[p] = tmp
        piv = a[k, k]
        for r in range(k + 1, n):
            f = a[r, k] / piv
            a[r, k] = f
            if f != 0:
                for c in range(k + 1, n):
                    a[r, c] = a[r, c] - f * a[k, c]

    # column j of the right-hand side P S is s[j] at the row where perm == j
    for j in range(n):
        for i in range(n):
            u[i, j] = s[j] if perm[i] == j else 0.0
        for i in range(n):
            t = u[i, j]
            for k in range(i):
                t = t - a[i, k] * u[k, j]
            u[i, j] = t
        for i in range(n - 1, -1, -1):
            t = u[i, j]
            for k in range(i + 1, n):
                t = t - a[i, k] * u[k, j]
            u[i, j] = t / a[i, i]
    for i in range(n):
        for j in range(n):
            u[i, j] = s[i] * u[i, j]
        u[i, i] = u[i, i] - 1.0
    return -1


def scattering_stack(m, sqrt_gamma, omegas):
    cdef const double complex[:, ::1] mv = np.ascontiguousarray(m, dtype=np.complex128)
    cdef const double[::1] sv = np.ascontiguousarray(sqrt_gamma, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(omegas, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = mv.shape[0]
    cdef Py_ssize_t nw = wv.shape[0]
    if mv.shape[1] != n or sv.shape[0] != n:
        raise ValueError("shape mismatch between coefficient matrix and damping vector")
    out = np.empty((nw, n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef double complex[:, ::1] a = np.empty((n, n), dtype=np.complex128)
    cdef Py_ssize_t[::1] perm = np.empty(n, dtype=np.intp)
    cdef double rtol = PIVOT_RTOL
    cdef Py_ssize_t k
    cdef int status = -1
    with nogil:
        for k in range(nw):
            status = _one_frequency(mv, sv, wv[k], rtol, a, perm, ov[k])
            if status >= 0:
                break
    if status >= 0:
        raise SingularMatrixError(status, index=k)
    return out
