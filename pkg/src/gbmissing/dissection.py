"""Farey dissection of [1/Q, 1+1/Q], major/minor arc classification and
constructive Diophantine approximation.

Arcs are indexed by reduced fractions r/q in (0, 1] with q <= Q. The arc of
1/Q sticks out below the domain; its left part is taken modulo 1 and sits at
the top end, so the clipped pieces tile [1/Q, 1 + 1/Q] exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .errors import DomainError, LemmaCounterexample, ResourceLimitError

Q_CAP = 10**4
DEFAULT_LOG_EXPONENT = 3**6 + 1
SCAN_CAP = 10**7


def dist_to_int(x):
    """||x||, distance to the nearest integer (works on arrays)."""
    return np.abs(x - np.round(x))


@dataclass(frozen=True)
class CircleParams:
    """Scale parameters for the major/minor split.

    delta = X^-epsilon, Q = ceil(1/delta), D = (log X)^-log_exponent and
    beta = 1/(H delta D). ``beta_override`` replaces beta (used for degenerate
    kernels); the containment check beta q Q <= 1 for q <= Q always applies.
    """

    X: int
    H: int
    epsilon: float
    log_exponent: float = DEFAULT_LOG_EXPONENT
    beta_override: float | None = None

    def __post_init__(self):
        if self.X < 3 or self.H < 1:
            raise DomainError("CircleParams needs X >= 3 and H >= 1")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise DomainError("delta = X^-epsilon must lie in (0, 1)")
        if self.Q > Q_CAP:
            raise ResourceLimitError(f"Q = {self.Q} exceeds {Q_CAP}")
        if self.betadelta < 0 or self.betadelta * self.Q * self.Q > 1:
            raise DomainError(
                f"beta(delta) * Q^2 = {self.betadelta * self.Q**2:.4g} > 1; major windows would leave their arcs "
                "(lower log_exponent or raise epsilon)")

    @classmethod
    def auto(cls, X: int, H: int, epsilon: float, target: float = 0.5) -> "CircleParams":
        """Default exponent when admissible, otherwise the exponent giving beta Q^2 = target."""
        try:
            return cls(X, H, epsilon)
        except DomainError:
            pass
        delta = X ** (-epsilon)
        Q = math.ceil(1 / delta - 1e-12)
        le = math.log(target * H * delta / Q**2) / math.log(math.log(X))
        return cls(X, H, epsilon, log_exponent=le)

    @property
    def delta(self) -> float:
        return self.X ** (-self.epsilon)

    @property
    def Q(self) -> int:
        # the 1e-12 guard keeps exact reciprocals such as 1/0.01 from rounding up
        return math.ceil(1 / self.delta - 1e-12)

    @property
    def Ddelta(self) -> float:
        return math.log(self.X) ** (-self.log_exponent)

    @property
    def betadelta(self) -> float:
        if self.beta_override is not None:
            return float(self.beta_override)
        # in logs: D underflows to 0.0 for the default exponent at any desk-scale X
        lg = self.log_exponent * math.log(math.log(self.X)) - math.log(self.H * self.delta)
        return math.exp(lg) if lg < 700 else math.inf

    def to_dict(self) -> dict:
        return {"X": self.X, "H": self.H, "epsilon": self.epsilon, "log_exponent": self.log_exponent,
                "delta": self.delta, "Q": self.Q, "Ddelta": self.Ddelta, "betadelta": self.betadelta}

    def dissection(self) -> "FareyDissection":
        return farey_dissection(self.Q, self.betadelta)


@dataclass(frozen=True)
class FareyArc:
    q: int
    r: int
    left: float
    right: float
    major_left: float
    major_right: float

    @property
    def center(self) -> Fraction:
        return Fraction(self.r, self.q)

    @property
    def length(self) -> float:
        return self.right - self.left


class FareyDissection:
    """Array-backed list of FareyArc sorted by centre."""

    def __init__(self, Q: int, q: np.ndarray, r: np.ndarray, left: np.ndarray, right: np.ndarray, beta: float):
        self.Q, self.q, self.r, self.left, self.right, self.beta = Q, q, r, left, right, beta

    def __len__(self) -> int:
        return self.q.shape[0]

    def __getitem__(self, i: int) -> FareyArc:
        q, r = int(self.q[i]), int(self.r[i])
        c = r / q
        return FareyArc(q, r, float(self.left[i]), float(self.right[i]), c - self.beta, c + self.beta)

    def __iter__(self) -> Iterator[FareyArc]:
        for i in range(len(self)):
            yield self[i]

    def centers(self) -> np.ndarray:
        return self.r / self.q

    def domain_pieces(self) -> list[tuple[float, float, int]]:
        """Arcs clipped to [1/Q, 1 + 1/Q] as (lo, hi, arc index), in increasing order."""
        lo_dom = 1.0 / self.Q
        # index 0 is the arc of 1/Q: its right half opens the domain, the rest closes it
        pieces = [(lo_dom, float(self.right[0]), 0)]
        pieces += [(float(self.left[i]), float(self.right[i]), i) for i in range(1, len(self))]
        pieces.append((float(self.left[0]) + 1.0, 1.0 + lo_dom, 0))
        return pieces

    def tiling_error(self) -> float:
        """Largest gap or overlap along the chain of clipped pieces (0 for a perfect tiling)."""
        pieces = self.domain_pieces()
        err = abs(pieces[0][0] - 1.0 / self.Q) + 0.0
        err = max(err, abs(pieces[-1][1] - (1.0 + 1.0 / self.Q)))
        for (_, hi, _), (lo, _, _) in zip(pieces[:-1], pieces[1:]):
            err = max(err, abs(hi - lo))
        return err

    def containment_error(self) -> float:
        """max over arcs of how far the arc leaves [r/q - 1/(qQ), r/q + 1/(qQ)] (<= 0 means contained)."""
        c = self.centers()
        half = 1.0 / (self.q * self.Q)
        return float(max(np.max((c - half) - self.left), np.max(self.right - (c + half))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "r", "left", "right", "major_left", "major_right"])
        for arc in self:
            w.writerow([arc.q, arc.r, repr(arc.left), repr(arc.right), repr(arc.major_left), repr(arc.major_right)])
        return buf.getvalue()


def farey_dissection(Q: int, betadelta: float = 0.0) -> FareyDissection:
    """Farey arcs of order Q with mediant endpoints."""
    if not 1 <= Q <= Q_CAP:
        raise DomainError(f"farey_dissection needs 1 <= Q <= {Q_CAP}")
    num, den = kernels.farey_sequence(Q)  # 0/1 .. 1/1
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    # successor of 1/1 on the circle is 1 + 1/Q
    nxt_num = np.append(num[2:], Q + 1)
    nxt_den = np.append(den[2:], Q)
    q, r = den[1:], num[1:]
    left = (num[:-1] + r) / (den[:-1] + q)
    right = (r + nxt_num) / (q + nxt_den)
    return FareyDissection(Q, q, r, left, right, float(betadelta))


@dataclass(frozen=True)
class Major:
    q: int
    r: int


class _Minor:
    def __repr__(self):
        return "Minor"


MINOR = _Minor()


def reduce_to_domain(alpha: float, Q: int) -> float:
    """Representative of alpha mod 1 in [1/Q, 1 + 1/Q)."""
    x = alpha - math.floor(alpha)
    return x + 1.0 if x < 1.0 / Q else x


def classify(alpha: float, params: CircleParams):
    """Major(q, r) when |alpha - r/q| <= beta(delta) mod 1 for a reduced r/q, q <= Q; else MINOR.

    Smallest q wins, then the closer centre. r is normalised to 1 <= r <= q.
    """
    x = alpha - math.floor(alpha)
    beta = params.betadelta
    qs = np.arange(1, params.Q + 1)
    rs = np.round(x * qs)
    d = np.abs(x * qs - rs) / qs
    hit = (d <= beta) & (np.gcd(rs.astype(np.int64), qs) == 1)
    idx = np.flatnonzero(hit)
    if idx.size == 0:
        return MINOR
    q = int(qs[idx[0]])
    r = int(rs[idx[0]]) % q
    return Major(q, q if r == 0 else r)


def classify_bruteforce(alpha: float, params: CircleParams):
    """Reference classifier scanning every reduced fraction (for tests)."""
    x = alpha - math.floor(alpha)
    beta = params.betadelta
    best = None
    for q in range(1, params.Q + 1):
        for r in range(0, q + 1):
            if math.gcd(r, q) != 1:
                continue
            d = abs(x - r / q)
            if d <= beta and (best is None or (q, d) < best[:2]):
                best = (q, d, r)
    if best is None:
        return MINOR
    q, _, r = best
    r %= q
    return Major(q, q if r == 0 else r)


def convergent_denominators(alpha: float, qmax: int) -> list[int]:
    """Continued-fraction convergent denominators of alpha (exact binary value) up to qmax."""
    x = Fraction(alpha)
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    while True:
        a = math.floor(x)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > qmax:
            break
        out.append(q1)
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return out


def rational_approx(alpha: float, qmax: int) -> tuple[int, float]:
    """(q, ||q alpha||) for the convergent denominator q <= qmax minimising ||q alpha||."""
    if qmax < 1:
        raise DomainError("qmax must be >= 1")
    qs = convergent_denominators(alpha, qmax)
    best_q, best_d = 1, float(dist_to_int(alpha))
    for q in qs:
        y = Fraction(alpha) * q
        d = float(abs(y - round(y)))
        if d < best_d:
            best_q, best_d = q, d
    return best_q, best_d


@dataclass(frozen=True)
class Witness:
    q: int
    dist: float  # ||q alpha||
    bound: float  # q / (H delta D)
    source: str  # "difference" or "scan"


def vinogradov_find(alpha: float, A: int, params: CircleParams) -> Witness | None:
    """Constructive form of the Vinogradov-type approximation lemma.

    Returns None when the hypothesis fails: fewer than D*A values a in [A, 2A]
    satisfy ||a alpha|| <= (A/H)/delta, or D*A < 1. Otherwise returns q <= 1/D
    with ||q alpha|| <= q/(H delta D); differences of qualifying a are tried
    first, then every q <= 1/D. A hypothesis that holds without such a q
    raises LemmaCounterexample.
    """
    if A < 1:
        raise DomainError("A must be >= 1")
    if A > SCAN_CAP:
        raise ResourceLimitError(f"A = {A} exceeds {SCAN_CAP}")
    H, delta, D = params.H, params.delta, params.Ddelta
    need = D * A * (1 - 1e-9)  # slack for D computed through logs
    if need < 1:
        return None
    a = np.arange(A, 2 * A + 1, dtype=np.int64)
    ok = a[dist_to_int(kernels.phases(a.astype(np.uint64), alpha)) <= (A / H) / delta]
    if ok.size < need:
        return None
    qmax = math.floor(1.0 / D * (1 + 1e-9))  # D = 1/50 must allow q = 50
    coef = 1.0 / (H * delta * D)

    def good(q: int) -> float | None:
        d = float(dist_to_int(kernels.phases(np.array([q], dtype=np.uint64), alpha))[0])
        return d if d <= q * coef * (1 + 1e-12) else None

    diffs = np.unique(np.diff(ok))
    for q in diffs[diffs <= qmax]:
        d = good(int(q))
        if d is not None:
            return Witness(int(q), d, int(q) * coef, "difference")
    qs = np.arange(1, qmax + 1, dtype=np.int64)
    ds = dist_to_int(kernels.phases(qs.astype(np.uint64), alpha))
    hits = np.flatnonzero(ds <= qs * coef * (1 + 1e-12))
    if hits.size:
        q = int(qs[hits[0]])
        return Witness(q, float(ds[hits[0]]), q * coef, "scan")
    raise LemmaCounterexample(f"hypothesis holds for alpha={alpha!r}, A={A} but no q <= {qmax} works")


@dataclass(frozen=True)
class TypeIVerdict:
    branch: str  # "degenerate", "below-threshold", "witness" or "no-witness"
    value: float | None
    threshold: float
    q: int | None
    dist: float | None
    C1: float
    C2: float
    Ddelta: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def type1_values(alpha_coeffs: dict, beta_kind: str, X: int, H: int, log_power: int = 1) -> np.ndarray:
    """(alpha * beta)(n) for n = X..X+H, with beta = 1 or (log k / log X)^log_power."""
    out = np.zeros(H + 1)
    lx = math.log(X)
    for m, c in alpha_coeffs.items():
        first = -(-X // m) * m
        n = np.arange(first, X + H + 1, m, dtype=np.int64)
        if n.size == 0:
            continue
        k = n // m
        if beta_kind == "constant-1":
            b = np.ones(k.shape[0])
        elif beta_kind == "log-power":
            b = (np.log(k.astype(np.float64)) / lx) ** log_power
        else:
            raise DomainError(f"unknown beta kind {beta_kind!r}")
        np.add.at(out, n - X, c * b)
    return out


def typeI_audit(alpha_coeffs: dict, beta_kind: str, X: int, H: int, delta: float, alpha: float, *,
                Ddelta: float | None = None, log_power: int = 1, C1: float = 10.0, C2: float = 10.0,
                q_cap: int = SCAN_CAP) -> TypeIVerdict:
    """Audit the inverse theorem for one Type I sum at one frequency.

    The degenerate branch is taken when A > H / delta^3. Otherwise the sum is
    compared with delta H and, if large, q <= C1/D is sought with
    ||q alpha|| <= C2 q/(H delta D).
    """
    if not alpha_coeffs:
        raise DomainError("alpha coefficients must be non-empty")
    ms = np.array(sorted(alpha_coeffs), dtype=np.int64)
    if ms[0] < 1:
        raise DomainError("alpha coefficients must sit on positive integers")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    A = int(ms[-1])
    sq = np.cumsum([abs(alpha_coeffs[int(m)]) ** 2 for m in ms])
    if np.any(sq > ms / delta):
        raise DomainError("sum_{n<=N} |alpha(n)|^2 <= N/delta fails")
    D = Ddelta if Ddelta is not None else math.log(X) ** (-DEFAULT_LOG_EXPONENT)
    threshold = delta * H
    if A > H / delta**3:
        return TypeIVerdict("degenerate", None, threshold, None, None, C1, C2, D)
    f = type1_values({int(m): alpha_coeffs[int(m)] for m in ms}, beta_kind, X, H, log_power)
    ns = np.arange(X, X + H + 1, dtype=np.uint64)
    value = abs(complex(kernels.expsum(ns, f, [alpha])[0]))
    if value < threshold:
        return TypeIVerdict("below-threshold", value, threshold, None, None, C1, C2, D)
    qmax = min(math.floor(C1 / D), q_cap)
    qs = np.arange(1, qmax + 1, dtype=np.int64)
    ds = dist_to_int(kernels.phases(qs.astype(np.uint64), alpha))
    hits = np.flatnonzero(ds <= C2 * qs / (H * delta * D))
    if hits.size:
        i = hits[0]
        return TypeIVerdict("witness", value, threshold, int(qs[i]), float(ds[i]), C1, C2, D)
    return TypeIVerdict("no-witness", value, threshold, None, None, C1, C2, D)
