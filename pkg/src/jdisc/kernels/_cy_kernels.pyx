# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evaluation of the per-cell kernel integrals.

Same mathematics as _np_kernels (see its module docstring); scalar loops
with C complex arithmetic, which avoids the large broadcast temporaries
of the numpy path and runs the hot O(evals x cells) assembly several
times faster on one core.
"""
import numpy as np

cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex clog(double complex)
    double complex conj(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef double PI = 3.141592653589793238462643383279502884
cdef double _SELF_EPS = 1e-14


def cell_integrals(cells, double h, evals, bint want_i2=True):
    """Return (I1, I2) matrices of shape (len(evals), len(cells))."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(cells, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] e = np.ascontiguousarray(evals, dtype=np.complex128)
    cdef Py_ssize_t m = e.shape[0]
    cdef Py_ssize_t n = c.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] i1 = np.empty((m, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] i2
    cdef double complex[:, ::1] i2v
    if want_i2:
        i2 = np.empty((m, n), dtype=np.complex128)
        i2v = i2
    cdef double complex[:, ::1] i1v = i1
    cdef double complex[::1] cv = c
    cdef double complex[::1] ev = e

    cdef double hh = 0.5 * h
    cdef double complex u1[4]
    cdef double complex u2[4]
    cdef double al[4]
    cdef double complex be[4]
    u1[0] = -hh - 1j * hh; u2[0] = hh - 1j * hh;  al[0] = 1.0;  be[0] = 2j * hh
    u1[1] = hh - 1j * hh;  u2[1] = hh + 1j * hh;  al[1] = -1.0; be[1] = 2.0 * hh
    u1[2] = hh + 1j * hh;  u2[2] = -hh + 1j * hh; al[2] = 1.0;  be[2] = -2j * hh
    u1[3] = -hh + 1j * hh; u2[3] = -hh - 1j * hh; al[3] = -1.0; be[3] = -2.0 * hh

    cdef Py_ssize_t j, k, s
    cdef double complex d, w1, w2, lq, lin, a1, a2, val1, val2
    cdef double self_tol = _SELF_EPS * h
    with nogil:
        for j in range(m):
            for k in range(n):
                d = ev[j] - cv[k]
                a1 = 0
                a2 = 0
                for s in range(4):
                    w1 = u1[s] - d
                    w2 = u2[s] - d
                    lq = clog(w2 / w1)
                    lin = al[s] * d + be[s]
                    a1 = a1 + lin * lq
                    if want_i2:
                        a2 = a2 + al[s] * lq - lin * (1.0 / w2 - 1.0 / w1)
                val1 = -0.5j * a1
                if creal(d) < hh and creal(d) > -hh and cimag(d) < hh and cimag(d) > -hh:
                    val1 = val1 - PI * conj(d)
                if cabs(d) < self_tol:
                    val1 = 0
                i1v[j, k] = val1
                if want_i2:
                    val2 = -0.5j * a2
                    if cabs(d) < self_tol:
                        val2 = 0
                    i2v[j, k] = val2
    if want_i2:
        return i1, i2
    return i1, None
