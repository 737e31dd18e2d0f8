"""Numpy implementations of the compiled kernels (fallback backend)."""

from __future__ import annotations

import math

import numpy as np

SEGMENT = 1 << 16
_CHUNK = 1 << 15
_MASK24 = np.uint64((1 << 24) - 1)
_MASK48 = np.uint64((1 << 48) - 1)
_TWO24 = float(1 << 24)
_TWO48 = float(1 << 48)


def split_frequency(alpha: float) -> tuple[int, int, float]:
    """Split alpha into k1/2^24 + k2/2^48 + r3 (mod 1), all pieces exact.

    With this split, (n * alpha) mod 1 is reproduced to ~2^-52 for any
    n < 2^40, instead of losing log2(n) bits in the product.
    """
    f1 = math.floor(alpha * _TWO24)
    r = alpha - f1 / _TWO24
    f2 = math.floor(r * _TWO48)
    r3 = r - f2 / _TWO48
    return f1 % (1 << 24), int(f2), r3


def phases(ns: np.ndarray, alpha: float) -> np.ndarray:
    """(ns * alpha) mod 1 for a uint64 array ``ns``."""
    k1, k2, r3 = split_frequency(alpha)
    ns = np.asarray(ns, dtype=np.uint64)
    with np.errstate(over="ignore"):
        p1 = (ns * np.uint64(k1)) & _MASK24
        p2 = (ns * np.uint64(k2)) & _MASK48
    ph = p1.astype(np.float64) / _TWO24
    ph += p2.astype(np.float64) / _TWO48
    ph += ns.astype(np.float64) * r3
    return ph - np.floor(ph)


def sieve_window(start: int, length: int, primes: np.ndarray):
    end = start + length - 1
    rem = np.arange(start, start + length, dtype=np.uint64)
    lam = np.zeros(length, dtype=np.float64)
    mu = np.ones(length, dtype=np.int8)
    d2 = np.ones(length, dtype=np.uint32)
    d4 = np.ones(length, dtype=np.uint32)
    omega = np.zeros(length, dtype=np.uint8)
    lastp = np.zeros(length, dtype=np.uint64)
    for p in primes:
        p = int(p)
        if p * p > end:
            break
        first = -(-start // p) * p
        if first > end:
            continue
        sl = slice(first - start, None, p)
        sub = rem[sl]
        e = np.zeros(sub.shape[0], dtype=np.uint32)
        up = np.uint64(p)
        mask = np.ones(sub.shape[0], dtype=bool)
        while mask.any():
            sub[mask] //= up
            e[mask] += 1
            mask = sub % up == 0
        rem[sl] = sub
        m = mu[sl]
        mu[sl] = np.where(e >= 2, 0, -m).astype(np.int8)
        d2[sl] *= e + 1
        d4[sl] *= (e + 1) * (e + 2) * (e + 3) // 6
        omega[sl] += 1
        lastp[sl] = up
    big = rem > 1
    mu[big] = -mu[big]
    d2[big] *= 2
    d4[big] *= 4
    omega[big] += 1
    lastp[big] = rem[big]
    single = omega == 1
    lam[single] = np.log(lastp[single].astype(np.float64))
    is_prime = single & (d2 == 2)
    return lam, mu, d2, d4, is_prime


def expsum(ns: np.ndarray, ws: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    ns = np.asarray(ns, dtype=np.uint64)
    ws = np.asarray(ws, dtype=np.float64)
    keep = ws != 0.0
    ns, ws = ns[keep], ws[keep]
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    out = np.empty(alphas.shape[0], dtype=np.complex128)
    for j, a in enumerate(alphas):
        total = 0.0 + 0.0j
        for lo in range(0, ns.shape[0], _CHUNK):
            ph = 2.0 * np.pi * phases(ns[lo:lo + _CHUNK], float(a))
            w = ws[lo:lo + _CHUNK]
            total += complex(np.sum(w * np.cos(ph)), np.sum(w * np.sin(ph)))
        out[j] = total
    return out


def d4sharp_accumulate(X: int, H: int, coeffs: np.ndarray) -> np.ndarray:
    cutoff = coeffs.shape[0] - 1
    out = np.zeros(H + 1, dtype=np.float64)
    logn = np.log(np.arange(X, X + H + 1, dtype=np.float64))
    last = X + H
    # m <= H + 1 can have several multiples in the window; loop those.
    small = min(cutoff, H + 1)
    for m in range(1, small + 1):
        first = -(-X // m) * m
        if first > last:
            continue
        t = logn[first - X::m]
        c = coeffs[m]
        out[first - X::m] += c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    if cutoff > small:
        # Remaining m have at most one multiple each; accumulate in m order.
        ms = np.arange(small + 1, cutoff + 1, dtype=np.int64)
        first = -(-X // ms) * ms
        ok = first <= last
        ms, first = ms[ok], first[ok]
        t = logn[first - X]
        c = coeffs[ms]
        vals = c[:, 0] + t * (c[:, 1] + t * (c[:, 2] + t * c[:, 3]))
        np.add.at(out, first - X, vals)
    return out


def farey_sequence(Q: int, count: int):
    num = np.empty(count, dtype=np.int64)
    den = np.empty(count, dtype=np.int64)
    a, b, c, d = 0, 1, 1, Q
    num[0], den[0] = 0, 1
    i = 1
    while c <= Q and i < count:
        num[i], den[i] = c, d
        i += 1
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return num[:i], den[:i]
