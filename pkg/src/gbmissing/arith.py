"""Arithmetic kernel: sieves, pointwise functions, characters, Ramanujan and Gauss sums."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np
from sympy import factorint

from . import kernels
from .errors import DomainError, FormatError, ResourceLimitError

PRIME_LIMIT_CAP = 10**8
WINDOW_START_CAP = 10**12
WINDOW_LENGTH_CAP = 5 * 10**7
CHARACTER_MODULUS_CAP = 10**4
CACHE_MAGIC = b"GBSV1"


def e(x):
    """e(x) = exp(2 pi i x)."""
    return np.exp(2j * np.pi * x)


# ---------------------------------------------------------------------------
# Primes and windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return int(self.primes.shape[0])

    def __iter__(self):
        return iter(int(p) for p in self.primes)

    def tolist(self) -> list[int]:
        return [int(p) for p in self.primes]


def sieve_primes(limit: int) -> PrimeTable:
    """All primes <= limit by the sieve of Eratosthenes."""
    if limit < 0:
        raise DomainError("limit must be non-negative")
    if limit > PRIME_LIMIT_CAP:
        raise ResourceLimitError(f"prime sieve limit {limit} exceeds cap {PRIME_LIMIT_CAP}")
    if limit < 2:
        return PrimeTable(limit, np.zeros(0, dtype=np.int64))
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


@dataclass(frozen=True, eq=False)
class SieveWindow:
    """Arithmetic tables for the integers start, ..., start + length - 1."""

    start: int
    length: int
    lam: np.ndarray
    mobius: np.ndarray
    d2: np.ndarray
    d4: np.ndarray
    is_prime: np.ndarray

    @property
    def end(self) -> int:
        """Last integer covered (inclusive)."""
        return self.start + self.length - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.length, dtype=np.int64)

    def covers(self, lo: int, hi: int) -> bool:
        return lo >= self.start and hi <= self.end

    def require(self, lo: int, hi: int) -> None:
        if lo <= hi and not self.covers(lo, hi):
            raise DomainError(
                f"window [{self.start}, {self.end}] does not cover [{lo}, {hi}]"
            )

    def take(self, name: str, lo: int, hi: int) -> np.ndarray:
        """View of array ``name`` for the integers lo..hi (inclusive)."""
        self.require(lo, hi)
        arr = getattr(self, name)
        return arr[lo - self.start:hi - self.start + 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SieveWindow):
            return NotImplemented
        return (
            self.start == other.start
            and self.length == other.length
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("lam", "mobius", "d2", "d4", "is_prime")
            )
        )


def build_window(start: int, length: int, backend: str | None = None) -> SieveWindow:
    """Segmented sieve of Lambda, mu, d_2, d_4 and primality over a window."""
    if start < 1 or length < 1:
        raise DomainError("window needs start >= 1 and length >= 1")
    if start + length >= 2**64:
        raise DomainError("window end does not fit in 64 bits")
    if start > WINDOW_START_CAP:
        raise ResourceLimitError(f"window start {start} exceeds {WINDOW_START_CAP}")
    if length > WINDOW_LENGTH_CAP:
        raise ResourceLimitError(f"window length {length} exceeds {WINDOW_LENGTH_CAP}")
    end = start + length - 1
    primes = sieve_primes(math.isqrt(end)).primes
    lam, mu, d2, d4, isp = kernels.sieve_window(start, length, primes, backend=backend)
    for arr in (lam, mu, d2, d4, isp):
        arr.setflags(write=False)
    return SieveWindow(start, length, lam, mu, d2, d4, isp)


def write_window(window: SieveWindow, path) -> None:
    """Serialize in the GBSV1 layout (little-endian)."""
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", window.start, window.length))
        fh.write(np.asarray(window.lam, dtype="<f8").tobytes())
        fh.write(np.asarray(window.mobius, dtype="<i1").tobytes())
        fh.write(np.asarray(window.d2, dtype="<u4").tobytes())
        fh.write(np.asarray(window.d4, dtype="<u4").tobytes())
        fh.write(np.asarray(window.is_prime, dtype="<u1").tobytes())


def read_window(path) -> SieveWindow:
    data = Path(path).read_bytes()
    if data[:5] != CACHE_MAGIC:
        raise FormatError(f"{path}: bad magic")
    if len(data) < 21:
        raise FormatError(f"{path}: truncated header")
    start, length = struct.unpack_from("<QQ", data, 5)
    expected = 21 + length * (8 + 1 + 4 + 4 + 1)
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    off = 21
    arrays = []
    for dtype, size in (("<f8", 8), ("<i1", 1), ("<u4", 4), ("<u4", 4), ("<u1", 1)):
        arr = np.frombuffer(data, dtype=dtype, count=length, offset=off)
        off += size * length
        arrays.append(arr)
    lam = arrays[0].astype(np.float64)
    mu = arrays[1].astype(np.int8)
    d2 = arrays[2].astype(np.uint32)
    d4 = arrays[3].astype(np.uint32)
    isp = arrays[4].astype(bool)
    if np.any(arrays[4] > 1):
        raise FormatError(f"{path}: is_prime byte outside {{0, 1}}")
    for arr in (lam, mu, d2, d4, isp):
        arr.setflags(write=False)
    return SieveWindow(int(start), int(length), lam, mu, d2, d4, isp)


# ---------------------------------------------------------------------------
# Pointwise functions (factorization based, independent of the sieve)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    return dict(_factor(n))


def mangoldt(n: int) -> float:
    f = _factor(_check_positive(n))
    return math.log(f[0][0]) if len(f) == 1 else 0.0


def mobius(n: int) -> int:
    f = _factor(_check_positive(n))
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = 1
    for p, k in _factor(_check_positive(n)):
        out *= (p - 1) * p ** (k - 1)
    return out


def divisor_k(n: int, k: int) -> int:
    """d_k(n): number of ordered k-tuples with product n."""
    out = 1
    for _, a in _factor(_check_positive(n)):
        out *= math.comb(a + k - 1, k - 1)
    return out


def _check_positive(n: int) -> int:
    if n < 1:
        raise DomainError("arithmetic functions are defined for n >= 1")
    return int(n)


_KIND_ALIASES = {
    "lambda": "lambda", "Λ": "lambda", "mangoldt": "lambda",
    "mu": "mu", "μ": "mu", "mobius": "mu",
    "phi": "phi", "φ": "phi", "totient": "phi",
    "d": "d", "d_k": "d", "divisor": "d",
}


def pointwise(kind: str, n: int, k: int | None = None):
    """Evaluate Lambda, mu, phi or d_k at n by factorization."""
    name = _KIND_ALIASES.get(kind)
    if name is None and kind.startswith("d_") and kind[2:].isdigit():
        name, k = "d", int(kind[2:])
    if name is None:
        raise DomainError(f"unknown arithmetic function {kind!r}")
    if n == 0 or n < 0:
        raise DomainError("pointwise functions need n >= 1")
    if name == "lambda":
        return mangoldt(n)
    if name == "mu":
        return mobius(n)
    if name == "phi":
        return euler_phi(n)
    if k is None or not 2 <= k <= 8:
        raise DomainError("d_k needs 2 <= k <= 8")
    return divisor_k(n, k)


def totients(limit: int) -> np.ndarray:
    """phi(0..limit) as an int64 array (phi(0) = 0)."""
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in sieve_primes(limit):
        phi[p::p] -= phi[p::p] // p
    return phi


def mobius_table(limit: int) -> np.ndarray:
    """mu(0..limit) as an int8 array (mu(0) = 0)."""
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in sieve_primes(limit):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


# ---------------------------------------------------------------------------
# Ramanujan sums
# ---------------------------------------------------------------------------


def ramanujan_sum(q: int, m: int) -> int:
    """c_q(m) by the closed form mu(q/g) phi(q) / phi(q/g), g = gcd(q, m)."""
    if q < 1:
        raise DomainError("ramanujan_sum needs q >= 1")
    g = math.gcd(q, m)
    r = q // g
    return mobius(r) * (euler_phi(q) // euler_phi(r))


def ramanujan_sum_direct(q: int, m: int) -> complex:
    """c_q(m) as the exponential sum over reduced residues a mod q."""
    if q < 1:
        raise DomainError("ramanujan_sum needs q >= 1")
    a = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    return complex(np.sum(e(((m % q) * a % q) / q)))


# ---------------------------------------------------------------------------
# Dirichlet characters
# ---------------------------------------------------------------------------


def _primitive_root(p: int) -> int:
    factors = list(factorint(p - 1))
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in factors):
            return g
    return 1  # p == 2


@dataclass(frozen=True)
class _Cyclic:
    """One cyclic factor of (Z/qZ)^*: discrete-log table over residues mod q."""

    order: int
    ind: np.ndarray  # index in [0, order) for units, -1 otherwise
    prime: int
    exponent: int
    kind: str  # "odd", "minus1", "five"


@dataclass(frozen=True, eq=False)
class _UnitGroup:
    modulus: int
    factors: tuple[_Cyclic, ...]
    unit: np.ndarray  # boolean mask of units mod q
    exponent: int  # lcm of factor orders

    @classmethod
    def build(cls, q: int) -> "_UnitGroup":
        res = np.arange(q, dtype=np.int64)
        unit = np.gcd(res, q) == 1
        factors: list[_Cyclic] = []
        for p, k in sorted(factorint(q).items()):
            pk = p**k
            red = res % pk
            if p == 2:
                if k == 1:
                    continue
                minus = np.where(red % 4 == 1, 0, 1)
                ind = np.where(unit, minus, -1)
                factors.append(_Cyclic(2, ind.astype(np.int64), 2, k, "minus1"))
                if k >= 3:
                    order = 2 ** (k - 2)
                    table = np.full(pk, -1, dtype=np.int64)
                    x = 1
                    for j in range(order):
                        table[x] = j
                        table[pk - x] = j  # -5^j
                        x = x * 5 % pk
                    factors.append(_Cyclic(order, np.where(unit, table[red], -1), 2, k, "five"))
            else:
                g = _primitive_root(p)
                if k > 1 and pow(g, p - 1, p * p) == 1:
                    g += p
                order = (p - 1) * p ** (k - 1)
                table = np.full(pk, -1, dtype=np.int64)
                x = 1
                for j in range(order):
                    table[x] = j
                    x = x * g % pk
                factors.append(_Cyclic(order, np.where(unit, table[red], -1), p, k, "odd"))
        exponent = 1
        for f in factors:
            exponent = math.lcm(exponent, f.order)
        return cls(q, tuple(factors), unit, exponent)


def _component_conductor(f: _Cyclic, k: int) -> int:
    if f.kind == "odd":
        if k == 0:
            return 1
        p, e_ = f.prime, f.exponent
        for fexp in range(1, e_ + 1):
            if k % p ** (e_ - fexp) == 0:
                return p**fexp
        return p**e_
    if f.kind == "five":
        if k == 0:
            return 1
        e_ = f.exponent
        for fexp in range(3, e_ + 1):
            if k % 2 ** (e_ - fexp) == 0:
                return 2**fexp
        return 2**e_
    return 4 if k else 1  # "minus1"


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A Dirichlet character mod q, stored as exponents: chi(a) = e(exps[a] / order)."""

    modulus: int
    index: tuple[int, ...]
    conductor: int
    _group: _UnitGroup = field(repr=False)

    @property
    def principal(self) -> bool:
        return all(k == 0 for k in self.index)

    @property
    def primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def order(self) -> int:
        """Common denominator N of the value exponents (group exponent)."""
        return self._group.exponent

    @cached_property
    def exps(self) -> np.ndarray:
        """Integer exponent of chi(a) over ``order`` for a = 0..q-1; -1 on non-units."""
        g = self._group
        N = g.exponent
        out = np.zeros(self.modulus, dtype=np.int64)
        for f, k in zip(g.factors, self.index):
            if k:
                out = (out + k * (N // f.order) * np.where(f.ind >= 0, f.ind, 0)) % N
        out[~g.unit] = -1
        out.setflags(write=False)
        return out

    @cached_property
    def values(self) -> np.ndarray:
        ex = self.exps
        vals = np.where(ex >= 0, e(np.where(ex >= 0, ex, 0) / self.order), 0)
        vals.setflags(write=False)
        return vals

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def at(self, ns: np.ndarray) -> np.ndarray:
        return self.values[np.asarray(ns, dtype=np.int64) % self.modulus]


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, principal first."""
    if q < 1:
        raise DomainError("characters_mod needs q >= 1")
    if q > CHARACTER_MODULUS_CAP:
        raise ResourceLimitError(f"modulus {q} exceeds character cap {CHARACTER_MODULUS_CAP}")
    group = _UnitGroup.build(q)
    out = []
    for index in np.ndindex(*[f.order for f in group.factors]):
        index = tuple(int(k) for k in index)
        cond = 1
        for f, k in zip(group.factors, index):
            # Components at distinct primes are coprime; the two 2-adic ones nest.
            cond = math.lcm(cond, _component_conductor(f, k))
        out.append(DirichletCharacter(q, index, cond, group))
    return out


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum over units a mod q of chi(a) e(a/q)."""
    q, N = chi.modulus, chi.order
    a = np.arange(q, dtype=np.int64)
    ex = chi.exps
    units = ex >= 0
    # chi(a) e(a/q) = e((exps*q + a*N) / (N q)) computed in exact integers.
    num = (ex[units] * q + a[units] * N) % (N * q)
    return complex(np.sum(e(num / (N * q))))


def psi_chi(x: int, chi: DirichletCharacter, window: SieveWindow | None = None) -> complex:
    """psi(x, chi) = sum_{n <= x} Lambda(n) chi(n) by direct summation."""
    if x < 1:
        raise DomainError("psi_chi needs x >= 1")
    if window is None:
        window = build_window(1, x)
    lam = window.take("lam", 1, x)
    n = np.arange(1, x + 1, dtype=np.int64)
    mask = lam > 0
    return complex(np.sum(lam[mask] * chi.at(n[mask])))


def chebyshev_psi(x: int) -> float:
    if x < 1:
        return 0.0
    return float(build_window(1, x).lam.sum())


def character_inner(chi1: DirichletCharacter, chi2: DirichletCharacter) -> complex:
    return complex(np.sum(chi1.values * np.conj(chi2.values)))


def divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in _factor(_check_positive(n))]


def squarefree_divisors(n: int) -> Iterable[int]:
    ps = prime_divisors(n)
    out = [1]
    for p in ps:
        out += [d * p for d in out]
    return sorted(out)


def divisor_k_table(limit: int, k: int) -> np.ndarray:
    """d_k(0..limit) as int64 (d_k(0) = 0)."""
    out = np.ones(limit + 1, dtype=np.int64)
    out[0] = 0
    if limit < 2:
        return out
    top = int(math.log(limit, 2)) + 2
    comb = np.array([math.comb(a + k - 1, k - 1) for a in range(top + 1)], dtype=np.int64)
    ex = np.zeros(limit + 1, dtype=np.int64)
    for p in sieve_primes(limit):
        pk = p
        while pk <= limit:
            ex[pk::pk] += 1
            pk *= p
        out[p::p] *= comb[ex[p::p]]
        ex[p::p] = 0
    return out
