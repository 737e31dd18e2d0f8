# cython: language_level=3
"""Compiled inner loops.

Every function here has a numpy twin in :mod:`gbmissing._purepy` with the
same signature and semantics; :mod:`gbmissing.kernels` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, floor, sin, cos, M_PI
from libc.stdint cimport uint64_t, int64_t, uint32_t, int8_t, uint8_t

cnp.import_array()

DEF SEGMENT = 65536
DEF BLOCK = 128

cdef double TWO24 = 16777216.0
cdef double TWO48 = 281474976710656.0
cdef uint64_t MASK24 = (<uint64_t>1 << 24) - 1
cdef uint64_t MASK48 = (<uint64_t>1 << 48) - 1


def sieve_window(uint64_t start, int64_t length, const int64_t[:] primes):
    """Segmented smallest-prime sieve over [start, start + length).

    Returns (lambda, mobius, d2, d4, is_prime) arrays.
    """
    cdef uint64_t end = start + <uint64_t>length - 1
    cdef cnp.ndarray[uint64_t, ndim=1] rem_a = np.arange(start, start + <uint64_t>length, dtype=np.uint64)
    cdef cnp.ndarray[double, ndim=1] lam_a = np.zeros(length, dtype=np.float64)
    cdef cnp.ndarray[int8_t, ndim=1] mu_a = np.ones(length, dtype=np.int8)
    cdef cnp.ndarray[uint32_t, ndim=1] d2_a = np.ones(length, dtype=np.uint32)
    cdef cnp.ndarray[uint32_t, ndim=1] d4_a = np.ones(length, dtype=np.uint32)
    cdef cnp.ndarray[uint8_t, ndim=1] omega_a = np.zeros(length, dtype=np.uint8)
    cdef cnp.ndarray[uint64_t, ndim=1] lastp_a = np.zeros(length, dtype=np.uint64)
    cdef uint64_t[:] rem = rem_a
    cdef double[:] lam = lam_a
    cdef int8_t[:] mu = mu_a
    cdef uint32_t[:] d2 = d2_a
    cdef uint32_t[:] d4 = d4_a
    cdef uint8_t[:] omega = omega_a
    cdef uint64_t[:] lastp = lastp_a

    cdef Py_ssize_t np_used = 0
    cdef Py_ssize_t k
    cdef uint64_t p
    while np_used < primes.shape[0]:
        p = <uint64_t>primes[np_used]
        if p * p > end:
            break
        np_used += 1
    cdef cnp.ndarray[uint64_t, ndim=1] nxt_a = np.empty(np_used, dtype=np.uint64)
    cdef uint64_t[:] nxt = nxt_a
    for k in range(np_used):
        p = <uint64_t>primes[k]
        nxt[k] = ((start + p - 1) // p) * p

    cdef uint64_t seg_lo, seg_hi, n
    cdef Py_ssize_t i
    cdef uint32_t e
    seg_lo = start
    while seg_lo <= end:
        seg_hi = seg_lo + SEGMENT - 1
        if seg_hi > end:
            seg_hi = end
        for k in range(np_used):
            p = <uint64_t>primes[k]
            n = nxt[k]
            while n <= seg_hi:
                i = <Py_ssize_t>(n - start)
                e = 0
                while rem[i] % p == 0:
                    rem[i] //= p
                    e += 1
                if e >= 2:
                    mu[i] = 0
                else:
                    mu[i] = -mu[i]
                d2[i] *= e + 1
                d4[i] *= (e + 1) * (e + 2) * (e + 3) // 6
                omega[i] += 1
                lastp[i] = p
                n += p
            nxt[k] = n
        seg_lo = seg_hi + 1

    for i in range(length):
        if rem[i] > 1:
            mu[i] = -mu[i]
            d2[i] *= 2
            d4[i] *= 4
            omega[i] += 1
            lastp[i] = rem[i]
        if omega[i] == 1:
            lam[i] = log(<double>lastp[i])
    is_prime = (omega_a == 1) & (d2_a == 2)
    return lam_a, mu_a, d2_a, d4_a, is_prime


cdef inline void _split(double alpha, uint64_t* k1, uint64_t* k2, double* r3) nogil:
    cdef double f1 = floor(alpha * TWO24)
    cdef double r = alpha - f1 / TWO24
    cdef double f2 = floor(r * TWO48)
    cdef int64_t i1 = <int64_t>f1
    k1[0] = (<uint64_t>i1) & MASK24
    k2[0] = <uint64_t>f2
    r3[0] = r - f2 / TWO48


cdef inline double _phase(uint64_t n, uint64_t k1, uint64_t k2, double r3) nogil:
    cdef double ph = <double>((n * k1) & MASK24) / TWO24
    ph += <double>((n * k2) & MASK48) / TWO48
    ph += <double>n * r3
    return ph - floor(ph)


def expsum(const uint64_t[:] ns, const double[:] ws, const double[:] alphas):
    """Sum_i ws[i] e(ns[i] * alpha) for each alpha, with exact phase reduction."""
    cdef Py_ssize_t m = alphas.shape[0]
    cdef Py_ssize_t L = ns.shape[0]
    cdef cnp.ndarray[double complex, ndim=1] out_a = np.empty(m, dtype=np.complex128)
    cdef double complex[:] out = out_a
    cdef Py_ssize_t j, i, b
    cdef uint64_t k1, k2
    cdef double r3, ph, w, re, im, bre, bim
    with nogil:
        for j in range(m):
            _split(alphas[j], &k1, &k2, &r3)
            re = 0.0
            im = 0.0
            i = 0
            while i < L:
                bre = 0.0
                bim = 0.0
                b = i + BLOCK
                if b > L:
                    b = L
                while i < b:
                    w = ws[i]
                    if w != 0.0:
                        ph = 2.0 * M_PI * _phase(ns[i], k1, k2, r3)
                        bre += w * cos(ph)
                        bim += w * sin(ph)
                    i += 1
                re += bre
                im += bim
            out[j] = re + 1j * im
    return out_a


def d4sharp_accumulate(int64_t X, int64_t H, const double[:, :] coeffs):
    """out[n - X] = sum over m | n, 1 <= m < len(coeffs), of P_m(log n)."""
    cdef Py_ssize_t cutoff = coeffs.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out_a = np.zeros(H + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] logn_a = np.log(np.arange(X, X + H + 1, dtype=np.float64))
    cdef double[:] out = out_a
    cdef double[:] logn = logn_a
    cdef int64_t m, n, last = X + H
    cdef double t
    with nogil:
        for m in range(1, cutoff + 1):
            n = ((X + m - 1) // m) * m
            while n <= last:
                t = logn[n - X]
                out[n - X] += coeffs[m, 0] + t * (coeffs[m, 1] + t * (coeffs[m, 2] + t * coeffs[m, 3]))
                n += m
    return out_a


def farey_sequence(int64_t Q, int64_t count):
    """Numerators and denominators of the Farey sequence of order Q on [0, 1]."""
    cdef cnp.ndarray[int64_t, ndim=1] num_a = np.empty(count, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] den_a = np.empty(count, dtype=np.int64)
    cdef int64_t[:] num = num_a
    cdef int64_t[:] den = den_a
    cdef int64_t a = 0, b = 1, c = 1, d = Q, k, t0, t1
    cdef Py_ssize_t i = 0
    with nogil:
        num[0] = 0
        den[0] = 1
        i = 1
        while c <= Q and i < count:
            num[i] = c
            den[i] = d
            i += 1
            k = (Q + b) // d
            t0 = c
            t1 = d
            c = k * c - a
            d = k * d - b
            a = t0
            b = t1
    return num_a[:i], den_a[:i]
