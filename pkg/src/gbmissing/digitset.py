"""Integers with a forbidden base-g digit: enumeration, counting, AP counts, Fourier transform."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.fft

from .errors import DomainError, ResourceLimitError
from .kernels import phases

ENUMERATION_CAP = 10**8
AP_STATE_CAP = 5 * 10**7
MAX_DIGITS = 64


@dataclass(frozen=True)
class DigitSystem:
    base: int
    forbidden: int

    def __post_init__(self):
        if self.base < 3:
            raise DomainError("base must be >= 3")
        if self.forbidden < 2:
            raise DomainError("forbidden digit must be ≥ 2")
        if self.forbidden > self.base - 1:
            raise DomainError("forbidden digit must be < base")

    def digits(self, n: int) -> list[int]:
        """Base-g digits of n, most significant first (n = 0 gives [0])."""
        out = []
        while True:
            n, r = divmod(n, self.base)
            out.append(r)
            if n == 0:
                return out[::-1]

    def allowed(self, n: int) -> bool:
        b, g = self.forbidden, self.base
        while n:
            n, r = divmod(n, g)
            if r == b:
                return False
        return True

    def allowed_mask(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64).copy()
        ok = np.ones(ns.shape, dtype=bool)
        while np.any(ns):
            ok &= ns % self.base != self.forbidden
            ns //= self.base
        return ok


@dataclass(frozen=True)
class RestrictedSet:
    """Members of [lo, hi] whose base-g expansion avoids the forbidden digit."""

    system: DigitSystem
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1:
            raise DomainError("restricted sets need lo >= 1")
        if self.lo > self.hi:
            raise DomainError("restricted sets need lo <= hi")
        if self.hi >= self.system.base**MAX_DIGITS:
            raise DomainError(f"hi must be below base**{MAX_DIGITS}")

    @classmethod
    def interval(cls, system: DigitSystem, X: int, H: int) -> "RestrictedSet":
        """The set [X, X+H]* = {X < n <= X + H with no forbidden digit}."""
        return cls(system, X + 1, X + H)

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi and self.system.allowed(n)


def members(s: RestrictedSet, chunk: int = 1 << 16) -> Iterator[int]:
    """Stream the members of ``s`` in ascending order."""
    if s.hi - s.lo > ENUMERATION_CAP:
        raise ResourceLimitError(f"enumeration range exceeds {ENUMERATION_CAP}")
    for lo in range(s.lo, s.hi + 1, chunk):
        ns = np.arange(lo, min(lo + chunk, s.hi + 1), dtype=np.int64)
        for n in ns[s.system.allowed_mask(ns)]:
            yield int(n)


def members_array(s: RestrictedSet) -> np.ndarray:
    if s.hi - s.lo > ENUMERATION_CAP:
        raise ResourceLimitError(f"enumeration range exceeds {ENUMERATION_CAP}")
    ns = np.arange(s.lo, s.hi + 1, dtype=np.int64)
    return ns[s.system.allowed_mask(ns)]


# ---------------------------------------------------------------------------
# Digit DP
# ---------------------------------------------------------------------------


def _count_upto(system: DigitSystem, N: int) -> int:
    """#{0 <= n <= N : n avoids the forbidden digit}; 0 for N < 0."""
    if N < 0:
        return 0
    g, b = system.base, system.forbidden
    digits = system.digits(N)
    total = 0
    for i, d in enumerate(digits):
        free = len(digits) - i - 1
        smaller = d - (1 if b < d else 0)
        total += smaller * (g - 1) ** free
        if d == b:
            return total
    return total + 1  # N itself


def count(s: RestrictedSet) -> int:
    """|s| without enumeration (digit DP over positions with a tight flag)."""
    return _count_upto(s.system, s.hi) - _count_upto(s.system, s.lo - 1)


def _residue_counts_upto(system: DigitSystem, N: int, q: int) -> np.ndarray:
    """Counts by residue mod q of allowed n in [0, N]; state is (position, residue, tight)."""
    free = np.zeros(q, dtype=np.int64)  # prefixes already below N's prefix, by residue
    if N < 0:
        return free
    g, b = system.base, system.forbidden
    allowed = [d for d in range(g) if d != b]
    times_g = (np.arange(q, dtype=np.int64) * g) % q
    tight, alive = 0, True
    for d_n in system.digits(N):
        shifted = np.zeros(q, dtype=np.int64)
        np.add.at(shifted, times_g, free)
        new = np.zeros(q, dtype=np.int64)
        for d in allowed:
            new += np.roll(shifted, d % q)
        if alive:
            for d in allowed:
                if d < d_n:
                    new[(tight * g + d) % q] += 1
            if d_n == b:
                alive = False
            tight = (tight * g + d_n) % q
        free = new
    if alive:
        free[tight] += 1
    return free


def residue_counts(s: RestrictedSet, q: int) -> np.ndarray:
    """Array c with c[a] = #{n in s : n = a mod q}."""
    if q < 1:
        raise DomainError("q must be >= 1")
    if q * s.system.base > AP_STATE_CAP:
        raise ResourceLimitError(f"DP state q*g = {q * s.system.base} exceeds {AP_STATE_CAP}")
    if count(s) >= 2**62:
        raise ResourceLimitError("counts overflow 64-bit DP state")
    return _residue_counts_upto(s.system, s.hi, q) - _residue_counts_upto(s.system, s.lo - 1, q)


def count_ap(s: RestrictedSet, q: int, a: int) -> int:
    """#{n in s : n = a (mod q)} via the residue-tracking digit DP."""
    if q < 1 or not 0 <= a < q:
        raise DomainError("count_ap needs q >= 1 and 0 <= a < q")
    return int(residue_counts(s, q)[a])


@dataclass
class DiscrepancyReport:
    system: DigitSystem
    X: int
    Qmax: int
    total: int
    per_q: dict[int, float] = field(default_factory=dict)
    coprime_sum: float = 0.0

    @property
    def normalized(self) -> float:
        return self.coprime_sum / self.total if self.total else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "max_a_discrepancy"])
        for q, v in self.per_q.items():
            w.writerow([q, repr(float(v))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "base": self.system.base,
            "forbidden": self.system.forbidden,
            "X": self.X,
            "Qmax": self.Qmax,
            "count": self.total,
            "per_q": {str(q): v for q, v in self.per_q.items()},
            "coprime_sum": self.coprime_sum,
            "normalized_ratio": self.normalized,
        }


def ap_discrepancy(system: DigitSystem, X: int, Qmax: int) -> DiscrepancyReport:
    """max_a | #{n in [1,X]* : n = a (q)} - |[1,X]*|/q | for q <= Qmax.

    The sum is restricted to q coprime to g(g-1); every q is reported.
    """
    if Qmax < 1 or Qmax > 10**4:
        raise DomainError("Qmax must be in [1, 10^4]")
    if X < 1 or X > 10**12:
        raise DomainError("X must be in [1, 10^12]")
    s = RestrictedSet(system, 1, X)
    total = count(s)
    rep = DiscrepancyReport(system, X, Qmax, total)
    g = system.base
    mod = g * (g - 1)
    acc = 0.0
    for q in range(1, Qmax + 1):
        c = residue_counts(s, q)
        # |c_a - total/q| = |q c_a - total| / q keeps the comparison exact.
        dev = int(np.max(np.abs(q * c - total)))
        val = dev / q
        rep.per_q[q] = val
        if math.gcd(q, mod) == 1:
            acc += val
    rep.coprime_sum = acc
    return rep


# ---------------------------------------------------------------------------
# Fourier transform of the indicator
# ---------------------------------------------------------------------------


def exp_sum(s: RestrictedSet, alpha: float) -> complex:
    """Sum over n in s of e(n alpha), by enumeration."""
    ns = members_array(s).astype(np.uint64)
    ph = 2.0 * np.pi * phases(ns, alpha)
    return complex(np.sum(np.cos(ph)), np.sum(np.sin(ph)))


def _block_sums(system: DigitSystem, alpha: float, k: int) -> list[complex]:
    """B_j = sum_{0 <= m < g^j, m allowed} e(m alpha) for j = 0..k, as digit products."""
    g, b = system.base, system.forbidden
    out = [1.0 + 0.0j]
    prod = 1.0 + 0.0j
    for j in range(k):
        ph = phases(np.array([g**j], dtype=np.uint64), alpha)[0]
        f = sum(np.exp(2j * np.pi * ((d * ph) % 1.0)) for d in range(g) if d != b)
        prod *= f
        out.append(prod)
    return out


def _exp_sum_upto(system: DigitSystem, N: int, alpha: float) -> complex:
    """Sum over allowed 0 <= n <= N of e(n alpha) as a sum of digit blocks."""
    if N < 0:
        return 0.0 + 0.0j
    g, b = system.base, system.forbidden
    digits = system.digits(N)
    L = len(digits)
    blocks = _block_sums(system, alpha, L)
    total = 0.0 + 0.0j
    prefix = 0
    for i, d_n in enumerate(digits):
        free = L - i - 1
        for d in range(d_n):
            if d == b:
                continue
            start = (prefix * g + d) * g**free
            ph = phases(np.array([start], dtype=np.uint64), alpha)[0]
            total += np.exp(2j * np.pi * ph) * blocks[free]
        if d_n == b:
            return total
        prefix = prefix * g + d_n
    ph = phases(np.array([N], dtype=np.uint64), alpha)[0]
    return total + np.exp(2j * np.pi * ph)


def exp_sum_dp(s: RestrictedSet, alpha: float) -> complex:
    """Sum over n in s of e(n alpha) without enumeration (digit-block products)."""
    if s.hi >= 2**63:
        raise DomainError("digit-block transform supports hi < 2^63")
    return _exp_sum_upto(s.system, s.hi, alpha) - _exp_sum_upto(s.system, s.lo - 1, alpha)


def fourier_F(s: RestrictedSet, alpha: float, method: str = "auto") -> float:
    """F(alpha) = |s|^{-1} |sum_{n in s} e(n alpha)|, in [0, 1]."""
    size = count(s)
    if size == 0:
        raise DomainError("fourier_F of an empty set")
    if method == "auto":
        method = "enumerate" if s.hi - s.lo <= 10**6 else "dp"
    if method == "enumerate":
        val = exp_sum(s, alpha)
    elif method == "dp":
        val = exp_sum_dp(s, alpha)
    else:
        raise DomainError(f"unknown method {method!r}")
    return min(1.0, abs(val) / size)


@dataclass
class L1Estimate:
    estimate: float
    error_bound: float
    comparator: float
    ratio: float
    gridN: int
    size: int
    grid_F: np.ndarray = field(repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "F"])
        for j, f in enumerate(self.grid_F):
            w.writerow([repr(j / self.gridN), repr(float(f))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "error_bound": self.error_bound,
            "comparator": self.comparator,
            "ratio": self.ratio,
            "gridN": self.gridN,
            "count": self.size,
        }


def l1_comparator(size: int, base: int) -> float:
    """|s|^{-1 + log(log g + 1)/log(g - 1)}."""
    return float(size) ** (-1.0 + math.log(math.log(base) + 1.0) / math.log(base - 1))


def l1_estimate(s: RestrictedSet, gridN: int) -> L1Estimate:
    """Left Riemann sum of F over the grid j/gridN, j = 0..gridN-1.

    F is 2*pi*hi-Lipschitz, which gives |error| <= pi*hi/gridN.
    """
    if gridN < 4 * (s.hi + 1):
        raise DomainError(f"gridN must be >= 4*(hi+1) = {4 * (s.hi + 1)}")
    ns = members_array(s)
    size = ns.shape[0]
    if size == 0:
        raise DomainError("l1_estimate of an empty set")
    ind = np.zeros(gridN, dtype=np.float64)
    ind[ns] = 1.0
    # sum_n e(n j / N) = N * ifft(ind)[j]
    vals = scipy.fft.ifft(ind) * gridN
    F = np.minimum(np.abs(vals) / size, 1.0)
    est = float(np.sum(F) / gridN)
    err = math.pi * s.hi / gridN
    comp = l1_comparator(size, s.system.base)
    return L1Estimate(est, err, comp, est / comp, gridN, size, F)
