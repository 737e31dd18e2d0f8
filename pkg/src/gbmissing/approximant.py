"""The truncated-divisor approximant of d_4 built from cubic polynomials P_m.

With L = log R4 and ordered triples m = n1 n2 n3 whose first j entries are
<= R4 and remaining entries lie in (R4, R4^2],

    P_m(t) = sum_j C(4, j) sum_triples (t - log(n1..nj R4^(4-j)))^(3-j) / ((3-j)! L^(3-j))

and d4sharp(n) = sum_{m | n, m <= R4^6} P_m(log n).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from sympy import divisors as _sympy_divisors

from . import kernels
from .arith import divisor_k_table
from .errors import DomainError, NumericError, ResourceLimitError

CUTOFF_CAP = 10**7
WINDOW_WORK_CAP = 5 * 10**8


@dataclass(frozen=True, eq=False)
class ApproximantParams:
    X: int
    epsilon: float
    R4: float
    cutoff: int
    pm_table: np.ndarray = field(repr=False)  # (cutoff + 1, 4); row m holds c0..c3

    @classmethod
    def build(cls, X: int, epsilon: float, r4_override: float | None = None) -> "ApproximantParams":
        """R4 = X^(epsilon/40) unless overridden; the table covers m <= floor(R4^6)."""
        if X < 2:
            raise DomainError("X must be >= 2")
        if not epsilon > 0:
            raise DomainError("epsilon must be positive")
        R4 = float(r4_override) if r4_override is not None else X ** (epsilon / 40.0)
        if R4 <= 1.0:
            raise DomainError("R4 must exceed 1")
        cutoff = math.floor(R4**6)
        if cutoff > CUTOFF_CAP:
            raise ResourceLimitError(f"cutoff floor(R4^6) = {cutoff} exceeds {CUTOFF_CAP}")
        table = pm_table(R4, cutoff)
        table.setflags(write=False)
        return cls(X, float(epsilon), R4, cutoff, table)

    def poly(self, m: int) -> np.ndarray:
        if not 1 <= m <= self.cutoff:
            raise DomainError(f"m must be in [1, {self.cutoff}]")
        return self.pm_table[m]

    def pm_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "c0", "c1", "c2", "c3"])
        for m in range(1, self.cutoff + 1):
            c = self.pm_table[m]
            if np.any(c):
                w.writerow([m] + [repr(float(x)) for x in c])
        return buf.getvalue()


def _ranges(R4: float) -> tuple[int, int]:
    """Largest 'small' factor (<= R4) and largest 'large' factor (<= R4^2)."""
    return math.floor(R4), math.floor(R4 * R4)


def _shift_poly(c: np.ndarray, deg: int, scale: float) -> np.ndarray:
    """Coefficients (in t) of scale * (t - c)^deg for an array of shifts c."""
    out = np.zeros((c.shape[0], 4))
    for k in range(deg + 1):
        out[:, k] = scale * math.comb(deg, k) * (-c) ** (deg - k)
    return out


def pm_table(R4: float, cutoff: int | None = None) -> np.ndarray:
    """Coefficient table of P_m for every m <= cutoff (vectorized over triples)."""
    small, large = _ranges(R4)
    if cutoff is None:
        cutoff = math.floor(R4**6)
    L = math.log(R4)
    table = np.zeros((cutoff + 1, 4))
    S = np.arange(1, small + 1, dtype=np.int64)
    B = np.arange(small + 1, large + 1, dtype=np.int64)

    def add(m: np.ndarray, coeffs: np.ndarray):
        keep = m <= cutoff
        m, coeffs = m[keep], coeffs[keep]
        for k in range(4):
            table[:, k] += np.bincount(m, weights=coeffs[:, k], minlength=cutoff + 1)

    for j in range(4):
        parts = [S] * j + [B] * (3 - j)
        grids = np.meshgrid(*parts, indexing="ij")
        m = np.ones(grids[0].shape, dtype=np.int64)
        for g in grids:
            m = m * g
        m = m.ravel()
        if j:
            head = np.ones(grids[0].shape, dtype=np.int64)
            for g in grids[:j]:
                head = head * g
            shift = np.log(head.ravel().astype(np.float64)) + (4 - j) * L
        else:
            shift = np.full(m.shape[0], 4 * L)
        deg = 3 - j
        scale = math.comb(4, j) / (math.factorial(deg) * L**deg)
        add(m, _shift_poly(shift, deg, scale))
    return table


@lru_cache(maxsize=None)
def _ordered_triples(m: int) -> tuple[tuple[int, int, int], ...]:
    out = []
    for n1 in _sympy_divisors(m):
        for n2 in _sympy_divisors(m // n1):
            out.append((n1, n2, m // (n1 * n2)))
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _pm_poly_cached(m: int, R4: float) -> tuple[float, float, float, float]:
    small, large = _ranges(R4)
    L = math.log(R4)
    coeffs = np.zeros(4)
    for trip in _ordered_triples(m):
        j = 0
        while j < 3 and trip[j] <= small:
            j += 1
        if any(not (small < n <= large) for n in trip[j:]):
            continue
        deg = 3 - j
        shift = math.log(math.prod(trip[:j])) + (4 - j) * L
        scale = math.comb(4, j) / (math.factorial(deg) * L**deg)
        for k in range(deg + 1):
            coeffs[k] += scale * math.comb(deg, k) * (-shift) ** (deg - k)
    return tuple(float(c) for c in coeffs)


def pm_poly(m: int, R4: float) -> np.ndarray:
    """Coefficients (c0, c1, c2, c3) of P_m(t) from the ordered factorizations of m."""
    if m < 1 or m > math.floor(R4**6):
        raise DomainError(f"pm_poly needs 1 <= m <= R4^6 (m={m})")
    return np.array(_pm_poly_cached(int(m), float(R4)))


def horner(c, t):
    return c[0] + t * (c[1] + t * (c[2] + t * c[3]))


def d4sharp_point(n: int, params: ApproximantParams) -> float:
    """sum over m | n with m <= cutoff of P_m(log n)."""
    if n < 1:
        raise DomainError("d4sharp_point needs n >= 1")
    t = math.log(n)
    total = 0.0
    for m in _sympy_divisors(n):
        if m > params.cutoff:
            break
        total += horner(pm_poly(m, params.R4), t)
    return total


def d4sharp_window(X: int, H: int, params: ApproximantParams, backend: str | None = None) -> np.ndarray:
    """d4sharp(n) for n = X..X+H by iterating multiples of each m <= cutoff."""
    if X < 1 or H < 0:
        raise DomainError("d4sharp_window needs X >= 1 and H >= 0")
    work = params.cutoff + (H + 1) * (math.log(params.cutoff) + 1)
    if work > WINDOW_WORK_CAP:
        raise ResourceLimitError(f"d4sharp window work {work:.3g} exceeds {WINDOW_WORK_CAP:.3g}")
    return kernels.d4sharp_accumulate(X, H, params.pm_table, backend=backend)


def envelope_constant(params: ApproximantParams, lo: int | None = None, hi: int | None = None) -> float:
    """Smallest C with |P_m(t)| <= C d_3(m) (1 + log X)^3 for all m and t in [log lo, log hi].

    Defaults to n in [X, 2X]. Extremes of each cubic are taken at the interval
    ends and at interior critical points, so the constant is exact.
    """
    lo = params.X if lo is None else lo
    hi = 2 * params.X if hi is None else hi
    a, b = math.log(lo), math.log(hi)
    c = params.pm_table[1:]
    active = np.any(c != 0, axis=1)
    m = np.arange(1, params.cutoff + 1)[active]
    c = c[active]
    best = np.maximum(np.abs(horner(c.T, a)), np.abs(horner(c.T, b)))
    # critical points of c0 + c1 t + c2 t^2 + c3 t^3: 3 c3 t^2 + 2 c2 t + c1 = 0
    A, B_, C_ = 3 * c[:, 3], 2 * c[:, 2], c[:, 1]
    disc = B_**2 - 4 * A * C_
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        roots = [(-B_ + sq) / (2 * A), (-B_ - sq) / (2 * A), np.where(B_ != 0, -C_ / B_, np.nan)]
    for i, r in enumerate(roots):
        if i == 2:
            r = np.where(A == 0, r, np.nan)
        else:
            r = np.where(A != 0, r, np.nan)
        ok = np.isfinite(r) & (r >= a) & (r <= b)
        val = np.where(ok, np.abs(horner(c.T, np.where(ok, r, a))), 0.0)
        best = np.maximum(best, val)
    d3 = divisor_k_table(params.cutoff, 3)[m]
    return float(np.max(best / (d3 * (1 + math.log(params.X)) ** 3)))


@dataclass
class GapReport:
    direct: complex
    mainterm: complex
    abs_gap: float
    nominal_errbound: float
    direct_abs_sum: float
    quad_closed_gap: float | None = None

    @property
    def relative_gap(self) -> float:
        return self.abs_gap / abs(self.direct) if self.direct else math.inf

    def to_dict(self) -> dict:
        return {
            "direct": [self.direct.real, self.direct.imag],
            "mainterm": [self.mainterm.real, self.mainterm.imag],
            "abs_gap": self.abs_gap,
            "relative_gap": self.relative_gap,
            "nominal_errbound": self.nominal_errbound,
            "quad_closed_gap": self.quad_closed_gap,
        }


def _log_power_antiderivative(k: int, u: float) -> float:
    """F with F' = (log u)^k: u sum_i (-1)^(k-i) k!/i! (log u)^i."""
    lu = math.log(u)
    return u * sum((-1) ** (k - i) * math.factorial(k) / math.factorial(i) * lu**i for i in range(k + 1))


def mainterm_poly(q: int, a: int, params: ApproximantParams) -> np.ndarray:
    """Coefficients of sum_{m <= cutoff} (sum_{b mod q} e(amb/q)) / (mq) P_m(t).

    The b-sum is q when q | am and 0 otherwise, so only m = 0 (mod q) survive.
    """
    m = np.arange(1, params.cutoff + 1, dtype=np.int64)
    bsum = np.where((a * m) % q == 0, q, 0)
    w = bsum / (m * q)
    return (params.pm_table[1:] * w[:, None]).sum(axis=0)


def prop33_compare(q: int, a: int, beta: float, X: int, H: int, params: ApproximantParams,
                   values: np.ndarray | None = None) -> GapReport:
    """Direct twisted sum of d4sharp on [X, X+H] against its integral main term."""
    if q < 1 or math.gcd(a, q) != 1:
        raise DomainError("prop33_compare needs gcd(a, q) = 1")
    if values is None:
        values = d4sharp_window(X, H, params)
    n = np.arange(X, X + H + 1, dtype=np.int64)
    ph = ((a * n) % q) / q + kernels.phases(n.astype(np.uint64), beta)
    direct = complex(np.sum(values * np.exp(2j * np.pi * ph)))

    G = mainterm_poly(q, a, params)
    tol = 1e-9 * H

    def integrand(u):
        return horner(G, math.log(u)) * complex(math.cos(2 * math.pi * beta * u), math.sin(2 * math.pi * beta * u))

    # Chunks no longer than one oscillation period keep quad well conditioned.
    pieces = 1 if beta == 0 else max(1, math.ceil(H * abs(beta)))
    edges = np.linspace(X, X + H, pieces + 1)
    main = 0.0 + 0.0j
    for lo_, hi_ in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(integrand, lo_, hi_, complex_func=True, epsabs=tol / pieces,
                                  epsrel=1e-12, limit=200)
        err = abs(err)
        if not np.isfinite(err) or err > 10 * tol / pieces:
            raise NumericError(f"quadrature did not converge (err={err:.3g})")
        main += val
    closed_gap = None
    if beta == 0:
        closed = sum(G[k] * (_log_power_antiderivative(k, X + H) - _log_power_antiderivative(k, X))
                     for k in range(4))
        closed_gap = abs(closed - main.real) / max(abs(closed), 1.0)
    errb = q * X ** (2 * params.epsilon) * (1 + H * abs(beta))
    return GapReport(direct, main, abs(direct - main), errb, float(np.sum(values)), closed_gap)


def mean_ratio(window_d4: np.ndarray, values: np.ndarray) -> float:
    """mean(d4sharp) / mean(d4) over the same window."""
    return float(np.mean(values) / np.mean(window_d4))
