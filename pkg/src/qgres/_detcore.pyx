# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hand-rolled complex LU kernels for secular determinants.

Mirrors qgres._detpy: det_many returns (mantissa, base-2 exponent) pairs,
logder_many returns tr(M^-1 M'). Matrices are small (a dozen rows), so a
dense in-place LU with partial pivoting beats round-tripping through LAPACK
per lambda.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef extern from *:
    double INFINITY "INFINITY"


cdef inline double complex _iexp(double re, double im) noexcept:
    # exp(i * (re + i im)) = e^{-im} (cos re + i sin re)
    cdef double r = exp(-im)
    return r * cos(re) + 1j * (r * sin(re))


cdef inline double _abs2(double complex z) noexcept:
    return z.real * z.real + z.imag * z.imag


cdef void _assemble(double complex *a, double complex *ap, int n,
                    int[::1] rows, int[::1] cols, double complex[::1] coefs,
                    double[::1] slen, double complex lam) noexcept:
    cdef Py_ssize_t t
    cdef double s
    cdef double complex v, ph
    for t in range(n * n):
        a[t] = 0
        if ap != NULL:
            ap[t] = 0
    for t in range(rows.shape[0]):
        s = slen[t]
        if s == 0.0:
            v = coefs[t]
        else:
            ph = _iexp(lam.real * s, lam.imag * s)
            v = coefs[t] * ph
        a[rows[t] * n + cols[t]] += v
        if ap != NULL and s != 0.0:
            ap[rows[t] * n + cols[t]] += v * (1j * s)


cdef int _lu(double complex *a, int n, int *piv) noexcept:
    """In-place LU with partial pivoting. Returns -1 if singular, else the
    number of row swaps."""
    cdef int k, i, j, p, swaps = 0
    cdef double best, cand
    cdef double complex factor, tmp
    for k in range(n):
        p = k
        best = _abs2(a[k * n + k])
        for i in range(k + 1, n):
            cand = _abs2(a[i * n + k])
            if cand > best:
                best = cand
                p = i
        if best == 0.0:
            return -1
        piv[k] = p
        if p != k:
            swaps += 1
            for j in range(n):
                tmp = a[k * n + j]
                a[k * n + j] = a[p * n + j]
                a[p * n + j] = tmp
        for i in range(k + 1, n):
            factor = a[i * n + k] / a[k * n + k]
            a[i * n + k] = factor
            for j in range(k + 1, n):
                a[i * n + j] -= factor * a[k * n + j]
    return swaps


def det_many(int n, int[::1] rows, int[::1] cols, double complex[::1] coefs,
             double[::1] slen, double complex[::1] lams):
    cdef Py_ssize_t nl = lams.shape[0], l
    cdef int k, swaps
    cdef long long e
    cdef double complex m
    mant = np.zeros(nl, dtype=complex)
    exp2 = np.zeros(nl, dtype=np.int64)
    cdef double complex[::1] mant_v = mant
    cdef long long[::1] exp_v = exp2
    cdef double complex *a = <double complex *> malloc(n * n * sizeof(double complex))
    cdef int *piv = <int *> malloc(n * sizeof(int))
    if a == NULL or piv == NULL:
        free(a)
        free(piv)
        raise MemoryError()
    try:
        for l in range(nl):
            _assemble(a, NULL, n, rows, cols, coefs, slen, lams[l])
            swaps = _lu(a, n, piv)
            if swaps < 0:
                mant_v[l] = 0
                exp_v[l] = 0
                continue
            m = 1.0 if swaps % 2 == 0 else -1.0
            e = 0
            for k in range(n):
                m *= a[k * n + k]
                while _abs2(m) >= 4.0:
                    m *= 0.5
                    e += 1
                while _abs2(m) < 1.0 and m != 0:
                    m *= 2.0
                    e -= 1
            mant_v[l] = m
            exp_v[l] = e
    finally:
        free(a)
        free(piv)
    return mant, exp2


def logder_many(int n, int[::1] rows, int[::1] cols, double complex[::1] coefs,
                double[::1] slen, double complex[::1] lams):
    cdef Py_ssize_t nl = lams.shape[0], l
    cdef int k, i, j, p, swaps
    cdef double complex acc, tr
    out = np.zeros(nl, dtype=complex)
    cdef double complex[::1] out_v = out
    cdef double complex *a = <double complex *> malloc(n * n * sizeof(double complex))
    cdef double complex *ap = <double complex *> malloc(n * n * sizeof(double complex))
    cdef double complex *x = <double complex *> malloc(n * sizeof(double complex))
    cdef int *piv = <int *> malloc(n * sizeof(int))
    if a == NULL or ap == NULL or x == NULL or piv == NULL:
        free(a)
        free(ap)
        free(x)
        free(piv)
        raise MemoryError()
    try:
        for l in range(nl):
            _assemble(a, ap, n, rows, cols, coefs, slen, lams[l])
            swaps = _lu(a, n, piv)
            if swaps < 0:
                out_v[l] = INFINITY
                continue
            tr = 0
            for j in range(n):
                # solve A x = ap[:, j], keep x[j]
                for i in range(n):
                    x[i] = ap[i * n + j]
                for k in range(n):
                    p = piv[k]
                    if p != k:
                        acc = x[k]
                        x[k] = x[p]
                        x[p] = acc
                for i in range(n):  # forward: L has unit diagonal
                    acc = x[i]
                    for k in range(i):
                        acc -= a[i * n + k] * x[k]
                    x[i] = acc
                for i in range(n - 1, -1, -1):  # backward
                    acc = x[i]
                    for k in range(i + 1, n):
                        acc -= a[i * n + k] * x[k]
                    x[i] = acc / a[i * n + i]
                tr += x[j]
            out_v[l] = tr
    finally:
        free(a)
        free(ap)
        free(x)
        free(piv)
    return out
