"""Goldbach representations with one summand near X and one below H.

I1 = (X - H, X], I2 = (0, H] and R*(2n) = sum_{h + k = 2n, h in I1, k in I2} Lambda(h) Lambda(k).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy import integrate
from scipy.stats import qmc

from . import __version__, kernels
from .approximant import ApproximantParams, d4sharp_window, pm_poly
from .arith import SieveWindow, build_window, mobius_table, prime_divisors, sieve_primes, totients
from .digitset import DigitSystem, RestrictedSet, members_array
from .dissection import MINOR, CircleParams, classify
from .errors import DomainError, NumericError, ResourceLimitError

CONV_CAP = 1 << 27
SINGULAR_QMAX_CAP = 10**7
C2_PRIME_LIMIT = 10**7
SCHEMA = "scan-v1"


def _interval_lam(window: SieveWindow, X: int, H: int) -> tuple[np.ndarray, np.ndarray]:
    """Lambda on I1 = (X-H, X] and on I2 = (0, H]."""
    if not 1 <= H <= X:
        raise DomainError("need 1 <= H <= X")
    return window.take("lam", X - H + 1, X), window.take("lam", 1, H)


def r_star(two_n: int, X: int, H: int, window: SieveWindow) -> float:
    """R*(2n) by a direct loop over k in I2."""
    if two_n % 2:
        raise DomainError("two_n must be even")
    lam1, lam2 = _interval_lam(window, X, H)
    k_lo, k_hi = max(1, two_n - X), min(H, two_n - X + H - 1)
    if k_lo > k_hi:
        return 0.0
    k = np.arange(k_lo, k_hi + 1)
    h = two_n - k
    return float(np.sum(lam2[k - 1] * lam1[h - (X - H + 1)]))


def m_star(two_n: int, X: int, H: int) -> int:
    """|{k in (0, H] : 2n - k in (X - H, X]}| in closed form."""
    if two_n % 2:
        raise DomainError("two_n must be even")
    return max(0, min(H, two_n - X + H - 1) - max(1, two_n - X) + 1)


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0] + b.shape[0] - 1
    N = scipy.fft.next_fast_len(n, real=True)
    if N > CONV_CAP:
        raise ResourceLimitError(f"convolution length {N} exceeds {CONV_CAP}")
    return scipy.fft.irfft(scipy.fft.rfft(a, N) * scipy.fft.rfft(b, N), N)[:n]


def sum_convolution(X: int, H: int, window: SieveWindow) -> tuple[int, np.ndarray]:
    """(s0, c) with c[i] = sum over h in I1, k in I2, h + k = s0 + i of Lambda(h) Lambda(k).

    Every non-zero entry is at least (log 2)^2, so FFT noise below 0.1 is
    snapped to an exact zero.
    """
    lam1, lam2 = _interval_lam(window, X, H)
    c = _convolve(np.asarray(lam1, dtype=np.float64), np.asarray(lam2, dtype=np.float64))
    c[np.abs(c) < 0.1] = 0.0
    return X - H + 2, c


def r_star_all(X: int, H: int, window: SieveWindow | None = None) -> dict[int, float]:
    """R*(2n) for every even 2n in (X, X + H] from one convolution."""
    if window is None:
        window = build_window(1, X)
    s0, c = sum_convolution(X, H, window)
    first = X + 1 + (X + 1) % 2
    return {t: float(c[t - s0]) for t in range(first, X + H + 1, 2)}


def split_counts(X: int, H: int, window: SieveWindow) -> tuple[int, np.ndarray]:
    """(s0, c) with c[i] = #{primes p in I1, p' in I2 : p + p' = s0 + i} (exact integers)."""
    p1 = window.take("is_prime", X - H + 1, X).astype(np.float64)
    p2 = window.take("is_prime", 1, H).astype(np.float64)
    return X - H + 2, np.rint(_convolve(p1, p2)).astype(np.int64)


# ---------------------------------------------------------------------------
# singular series
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def _singular_tables(Qmax: int) -> np.ndarray:
    """P[d] = sum_{q <= Qmax, d | q} mu(q)/phi(q)^2, for d <= Qmax."""
    mu = mobius_table(Qmax).astype(np.float64)
    phi = totients(Qmax).astype(np.float64)
    t = np.zeros(Qmax + 1)
    t[1:] = mu[1:] / phi[1:] ** 2
    P = np.zeros(Qmax + 1)
    for d in range(1, Qmax + 1):
        if mu[d] != 0:
            P[d] = t[d::d].sum()
    return P


_TAIL_PRIMES = 10**6
_SIGMAS = np.linspace(0.05, 0.95, 19)


@lru_cache(maxsize=1)
def _tail_base() -> np.ndarray:
    """log prod_p (1 + p^s/(p-1)^2) over all primes, bounded above, for each s in _SIGMAS."""
    p = sieve_primes(_TAIL_PRIMES).primes.astype(np.float64)
    P = float(_TAIL_PRIMES)
    out = np.empty(_SIGMAS.shape[0])
    for i, s in enumerate(_SIGMAS):
        # primes above P are bounded through the sum over all integers n > P
        out[i] = np.sum(np.log1p(p**s / (p - 1) ** 2)) + (P / (P - 1)) ** 2 * P ** (s - 1) / (1 - s)
    return out


def singular_tail_bound(m: int, Qmax: int) -> float:
    """Rankin bound for sum_{q > Qmax} mu(q)^2 gcd(m, q)/phi(q)^2.

    For 0 < s < 1 the tail is at most Qmax^-s prod_p (1 + gcd(m, p) p^s/(p-1)^2).
    The best s on a grid is used.
    """
    log_prod = _tail_base().copy()
    for p in prime_divisors(abs(m)):
        ps = float(p) ** _SIGMAS / (p - 1) ** 2
        log_prod += np.log1p(p * ps) - np.log1p(ps)
    return float(np.min(np.exp(log_prod - _SIGMAS * math.log(Qmax))))


def singular_truncated(two_n: int, Qmax: int) -> tuple[float, float]:
    """(sum_{q <= Qmax} mu(q)^2/phi(q)^2 c_q(-m), tail bound) for m = two_n.

    Uses c_q(m) = sum_{d | (q, m)} mu(q/d) d, which turns the sum into
    sum_{d | m squarefree, d <= Qmax} mu(d) d P(d). Odd arguments are allowed.
    """
    if Qmax < 1:
        raise DomainError("Qmax must be >= 1")
    if Qmax > SINGULAR_QMAX_CAP:
        raise ResourceLimitError(f"Qmax {Qmax} exceeds {SINGULAR_QMAX_CAP}")
    if two_n == 0:
        raise DomainError("singular series needs a non-zero argument")
    m = abs(two_n)
    P = _singular_tables(Qmax)
    total = 0.0
    # squarefree divisors d of m with their Mobius sign
    divs = [(1, 1)]
    for p in prime_divisors(m):
        divs += [(d * p, -sgn) for d, sgn in divs]
    for d, sgn in divs:
        if d <= Qmax:
            total += sgn * d * P[d]
    return float(total), singular_tail_bound(m, Qmax)


@dataclass(frozen=True)
class TwinPrimeConstant:
    value: float
    partial_product: float
    tail_estimate: float  # log-correction applied for primes beyond the limit
    tail_bound: float  # |log C2 - log(partial product)| is at most this
    prime_limit: int


@lru_cache(maxsize=1)
def twin_prime_constant(limit: int = C2_PRIME_LIMIT) -> TwinPrimeConstant:
    """C2 = prod_{p > 2} (1 - 1/(p - 1)^2) with an integral correction for p > limit.

    The correction is -int_limit^inf dx/((x - 1)^2 log x); the bound on the
    neglected tail uses pi(x) <= 1.26 x/log x.
    """
    p = sieve_primes(limit).primes[1:].astype(np.float64)
    log_partial = float(np.sum(np.log1p(-1.0 / (p - 1) ** 2)))
    # x = limit/t maps the tail onto (0, 1] with a smooth integrand
    est, _ = integrate.quad(lambda t: limit / ((limit - t) ** 2 * math.log(limit / t)) if t > 0 else 0.0,
                            0.0, 1.0, epsabs=0.0, epsrel=1e-12)
    bound = 1.26 * 2 * est + 1.0 / limit**2
    value = math.exp(log_partial - est)
    return TwinPrimeConstant(value, math.exp(log_partial), est, bound, limit)


def singular_closed(two_n: int) -> float:
    """2 C2 prod_{p | n, p odd} (p - 1)/(p - 2)."""
    if two_n % 2 or two_n < 4:
        raise DomainError("singular_closed needs an even argument >= 4")
    out = 2.0 * twin_prime_constant().value
    for p in prime_divisors(two_n // 2):
        if p > 2:
            out *= (p - 1) / (p - 2)
    return out


# ---------------------------------------------------------------------------
# major / minor arcs
# ---------------------------------------------------------------------------

def _ramanujan_sum_table(Q: int, js: np.ndarray) -> np.ndarray:
    """sum_{q <= Q} c_q(j) for every j, exactly in integers."""
    out = np.zeros(js.shape[0], dtype=np.int64)
    mu = mobius_table(Q)
    for q in range(1, Q + 1):
        for d in range(1, q + 1):
            if q % d == 0 and mu[q // d] != 0:
                out += int(mu[q // d]) * d * (js % d == 0)
    return out


def major_windows_disjoint(params: CircleParams) -> bool:
    """Farey neighbours r/q, r'/q' of order Q sit 1/(q q') >= 1/(Q(Q-1)) apart."""
    Q, beta = params.Q, params.betadelta
    gap = 1.0 if Q == 1 else 1.0 / (Q * (Q - 1))
    return 2 * beta <= gap


def arc_split(two_n: int, params: CircleParams, window: SieveWindow, method: str = "exact",
              nodes_per_cycle: int = 8) -> tuple[float, float]:
    """(major, minor) parts of R*(2n) for the split into major windows and the rest.

    ``exact`` integrates every frequency of S1 S2 e(-2n alpha) termwise: over the
    union of windows [r/q - beta, r/q + beta] this gives
    sum_j c(2n + j) sin(2 pi j beta)/(pi j) sum_{q <= Q} c_q(j). ``quad`` uses
    Gauss-Legendre quadrature on each window and serves as a cross-check.
    minor is R*(2n) - major in both cases.
    """
    X, H = params.X, params.H
    if two_n % 2:
        raise DomainError("two_n must be even")
    if not major_windows_disjoint(params):
        raise DomainError("major windows overlap; the union integral would double count")
    total = r_star(two_n, X, H, window)
    beta = params.betadelta
    if method == "exact":
        s0, c = sum_convolution(X, H, window)
        s = s0 + np.arange(c.shape[0])
        j = s - two_n
        nz = c != 0
        j, cj = j[nz], c[nz]
        kern = np.where(j == 0, 2 * beta, np.sin(2 * np.pi * j * beta) / (np.pi * np.where(j == 0, 1, j)))
        major = float(np.sum(cj * kern * _ramanujan_sum_table(params.Q, np.abs(j))))
    elif method == "quad":
        major = _major_quad(two_n, params, window, nodes_per_cycle)
    else:
        raise DomainError(f"unknown method {method!r}")
    return major, total - major


def _major_quad(two_n: int, params: CircleParams, window: SieveWindow, nodes_per_cycle: int) -> float:
    X, H, Q, beta = params.X, params.H, params.Q, params.betadelta
    lam1, lam2 = _interval_lam(window, X, H)
    n1 = np.flatnonzero(lam1) + X - H + 1
    n2 = np.flatnonzero(lam2) + 1
    w1, w2 = lam1[n1 - (X - H + 1)], lam2[n2 - 1]
    # highest frequency in the integrand is about X + H
    m = max(32, int(nodes_per_cycle * 2 * beta * (X + H)) + 32)
    x, w = np.polynomial.legendre.leggauss(m)
    total = 0.0
    for q in range(1, Q + 1):
        for r in range(1, q + 1):
            if math.gcd(r, q) != 1:
                continue
            alphas = r / q + beta * x
            s1 = kernels.expsum(n1.astype(np.uint64), w1, alphas)
            s2 = kernels.expsum(n2.astype(np.uint64), w2, alphas)
            # e(-2n alpha) = e(-2n r/q) e(-2n beta x)
            base = complex(np.exp(-2j * np.pi * ((two_n * r) % q) / q))
            tw = np.exp(-2j * np.pi * two_n * beta * x)
            total += float(np.real(base * np.sum(w * s1 * s2 * tw) * beta))
    return total


# ---------------------------------------------------------------------------
# character double sum and the sinc kernel
# ---------------------------------------------------------------------------

def lemma17_double_sum(q: int, l: int, mprime: int, n: int) -> complex:
    """sum_{b mod q, l | b} sum_{a mod q, (a, q) = 1} e(a (m' b - n)/q), by brute force."""
    if q < 1 or l < 1 or q % l:
        raise DomainError("lemma17_double_sum needs l | q")
    if math.gcd(mprime, q) != 1:
        raise DomainError("lemma17_double_sum needs gcd(m', q) = 1")
    a = np.array([x for x in range(q) if math.gcd(x, q) == 1], dtype=np.int64)
    b = np.arange(0, q, l, dtype=np.int64)
    k = (a[:, None] * ((mprime * b[None, :] - n) % q)) % q
    return complex(np.sum(np.exp(2j * np.pi * k / q)))


@dataclass(frozen=True)
class Lemma17Grid:
    qmax: int
    nmax: int
    cases: int
    C: float  # max |value| / (d_2(q) gcd(n, q))
    worst: tuple[int, int, int, int]


def lemma17_grid(qmax: int = 60, nmax: int = 60) -> Lemma17Grid:
    """Measured constant over q <= qmax, l | q, m' <= nmax coprime to q, 1 <= n <= nmax."""
    best, worst, cases = 0.0, (1, 1, 1, 1), 0
    ns = np.arange(1, nmax + 1, dtype=np.int64)
    for q in range(1, qmax + 1):
        a = np.array([x for x in range(q) if math.gcd(x, q) == 1], dtype=np.int64)
        d2 = sum(1 for d in range(1, q + 1) if q % d == 0)
        g = np.gcd(ns, q)
        phase_n = np.exp(-2j * np.pi * np.outer(ns % q, a) / q)
        for l in (d for d in range(1, q + 1) if q % d == 0):
            b = np.arange(0, q, l, dtype=np.int64)
            for mp in range(1, nmax + 1):
                if math.gcd(mp, q) != 1:
                    continue
                inner = np.exp(2j * np.pi * ((np.outer(a, b) * mp) % q) / q).sum(axis=1)
                vals = np.abs(phase_n @ inner)
                ratio = vals / (d2 * g)
                i = int(np.argmax(ratio))
                cases += ns.shape[0]
                if ratio[i] > best:
                    best, worst = float(ratio[i]), (q, l, mp, int(ns[i]))
    return Lemma17Grid(qmax, nmax, cases, best, worst)


def k_kernel(Hv: int, mprime: int, l2: int, n: float, q: int, params: CircleParams,
             approx: ApproximantParams) -> float:
    """int_X^{X+Hv} P_{m' l2}(log u) sin(2 pi beta (u - n)) / (q (u - n)) du.

    sin(2 pi beta t)/t = 2 pi beta sinc(2 beta t) removes the singularity at u = n.
    """
    if q < 1 or Hv < 1:
        raise DomainError("k_kernel needs q >= 1 and Hv >= 1")
    m = mprime * l2
    if not 1 <= m <= approx.cutoff:
        raise DomainError("k_kernel needs 1 <= m' l2 <= cutoff")
    beta = params.betadelta
    if beta == 0:
        return 0.0
    c = pm_poly(m, approx.R4)
    X = params.X

    def f(u):
        t = math.log(u)
        return (c[0] + t * (c[1] + t * (c[2] + t * c[3]))) / q * 2 * math.pi * beta * np.sinc(2 * beta * (u - n))

    pieces = max(1, math.ceil(2 * Hv * beta))
    edges = np.linspace(X, X + Hv, pieces + 1)
    points = [n] if X < n < X + Hv else None
    total, tol = 0.0, 1e-10 * Hv
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts = [n] if points and lo < n < hi else None
        val, err = integrate.quad(f, lo, hi, epsabs=tol / pieces, epsrel=1e-12, limit=200, points=pts)
        if not np.isfinite(err) or err > 100 * tol / pieces:
            raise NumericError(f"k_kernel quadrature did not converge (err={err:.3g})")
        total += val
    return total


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

@dataclass
class GoldbachRecord:
    two_n: int
    r_star: float
    m_star: int
    sigma_trunc: float
    sigma_closed: float
    predicted: float
    ratio: float | None  # None when predicted == 0
    has_split_rep: bool
    has_any_rep: bool


FIELDS = [f for f in GoldbachRecord.__dataclass_fields__]


@dataclass
class ScanReport:
    params: dict
    records: list[GoldbachRecord]
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": __version__, "params": self.params,
                "records": [asdict(r) for r in self.records], "summary": self.summary}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in self.records:
            row = []
            for name in FIELDS:
                v = getattr(r, name)
                row.append("" if v is None else repr(v) if isinstance(v, float) else int(v) if isinstance(v, bool)
                           else v)
            w.writerow(row)
        return buf.getvalue()


def _any_rep(targets: np.ndarray, is_prime: np.ndarray, primes: np.ndarray) -> np.ndarray:
    """For each even target t, whether t = p + p' with p, p' prime (is_prime indexed from 1)."""
    found = np.zeros(targets.shape[0], dtype=bool)
    for p in primes:
        todo = ~found & (targets - p >= 2)
        if not todo.any():
            break
        found[todo] = is_prime[targets[todo] - p - 1].astype(bool)
    return found


def scan(system: DigitSystem, X: int, H: int, params: CircleParams, approx: ApproximantParams | None = None, *,
         window: SieveWindow | None = None, sigma_qmax: int | None = None) -> ScanReport:
    """Goldbach data for every even member of the restricted set in (X, X + H]."""
    if not 1 <= H <= X:
        raise DomainError("scan needs 1 <= H <= X")
    if window is None:
        window = build_window(1, X + H)
    window.require(1, X + H)
    rs = RestrictedSet.interval(system, X, H)
    mem = members_array(rs)
    even = mem[mem % 2 == 0]
    sigma_qmax = params.Q if sigma_qmax is None else sigma_qmax

    s0, conv = sum_convolution(X, H, window)
    _, split = split_counts(X, H, window)
    isp = window.take("is_prime", 1, X + H)
    any_rep = _any_rep(even.astype(np.int64), isp, sieve_primes(X + H).primes)

    records = []
    for i, t in enumerate(even.tolist()):
        rv = float(conv[t - s0])
        ms = m_star(t, X, H)
        st, _ = singular_truncated(t, sigma_qmax)
        sc = singular_closed(t)
        pred = ms * sc
        records.append(GoldbachRecord(t, rv, ms, st, sc, pred, rv / pred if pred else None,
                                      bool(split[t - s0] > 0), bool(any_rep[i])))

    d4 = window.take("d4", X + 1, X + H)[mem - X - 1].astype(np.float64)
    d2 = window.take("d2", X + 1, X + H)[mem - X - 1].astype(np.float64)
    size = int(mem.shape[0])
    ratios = [r.ratio for r in records if r.ratio is not None]
    n_even = len(records)
    no_split = sum(not r.has_split_rep for r in records)
    no_any = sum(not r.has_any_rep for r in records)
    summary = {
        "set_size": size,
        "even_members": n_even,
        "exceptional_split": no_split,
        "exceptional_any": no_any,
        "exceptional_split_fraction": no_split / n_even if n_even else 0.0,
        "ratio_min": min(ratios) if ratios else None,
        "ratio_median": float(np.median(ratios)) if ratios else None,
        "d4_sum": float(d4.sum()),
        "d4_density_ratio": float(d4.sum() / (math.log(X) ** 7 * size)) if size else None,
        "d4_density_comparator": "sum d4 / ((log X)^7 |set|)",
        "d2_squared_sum": float((d2**2).sum()),
        "sigma_qmax": sigma_qmax,
        "twin_prime_constant": twin_prime_constant().value,
    }
    cfg = {"X": X, "H": H, "base": system.base, "digit": system.forbidden, "circle": params.to_dict()}
    if approx is not None:
        cfg["R4"] = approx.R4
    return ScanReport(cfg, records, summary)


# ---------------------------------------------------------------------------
# minor arc suppression
# ---------------------------------------------------------------------------

@dataclass
class SuppressionReport:
    samples: int
    seed: int
    minor_max: dict
    major_peak: dict
    ratios: dict
    threshold: float = 0.1

    def passed(self) -> bool:
        return all(v <= self.threshold for v in self.ratios.values())

    def to_dict(self) -> dict:
        return asdict(self)


def sample_minor(params: CircleParams, n: int, seed: int) -> np.ndarray:
    """n points of [1/Q, 1 + 1/Q) on the minor arcs from a scrambled Sobol sequence."""
    sob = qmc.Sobol(d=1, scramble=True, seed=seed)
    lo = 1.0 / params.Q
    out: list[float] = []
    while len(out) < n:
        # powers of two keep the Sobol balance properties
        for x in sob.random_base2(max(6, math.ceil(math.log2(2 * n))))[:, 0]:
            a = lo + float(x)
            if classify(a, params) is MINOR:
                out.append(a)
                if len(out) == n:
                    break
    return np.array(out)


def minor_arc_suppression(params: CircleParams, approx: ApproximantParams, n_samples: int = 1000, seed: int = 0,
                          window: SieveWindow | None = None) -> SuppressionReport:
    """max over sampled minor-arc alpha of |S4sharp|/H, |S1|/H, |S2|/H against their peaks at major centres."""
    X, H = params.X, params.H
    if window is None:
        window = build_window(1, X)
    lam1, lam2 = _interval_lam(window, X, H)
    sums = {}
    n1 = np.flatnonzero(lam1)
    n2 = np.flatnonzero(lam2)
    sums["S1"] = ((n1 + X - H + 1).astype(np.uint64), np.asarray(lam1)[n1])
    sums["S2"] = ((n2 + 1).astype(np.uint64), np.asarray(lam2)[n2])
    sums["S4sharp"] = (np.arange(X, X + H + 1, dtype=np.uint64), d4sharp_window(X, H, approx))
    alphas = sample_minor(params, n_samples, seed)
    centers = np.array(sorted({r / q for q in range(1, params.Q + 1) for r in range(1, q + 1)
                               if math.gcd(r, q) == 1}))
    mmax, peak, ratio = {}, {}, {}
    for name, (ns, ws) in sums.items():
        mmax[name] = float(np.max(np.abs(kernels.expsum(ns, ws, alphas)))) / H
        peak[name] = float(np.max(np.abs(kernels.expsum(ns, ws, centers)))) / H
        ratio[name] = mmax[name] / peak[name]
    return SuppressionReport(n_samples, seed, mmax, peak, ratio)
