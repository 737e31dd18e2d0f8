"""Exact-identity self checks shared by the ``verify`` command and the tests."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .arith import build_window, characters_mod, euler_phi, gauss_sum, ramanujan_sum
from .dissection import farey_dissection
from .goldbach import r_star, sum_convolution


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    max_error: float
    tolerance: float

    def to_dict(self) -> dict:
        return asdict(self)


def check_ramanujan(qmax: int = 300, mmax: int = 300) -> CheckResult:
    """Closed form against the rounded exponential sum, exact integer equality."""
    worst, cases = 0.0, 0
    ms = np.arange(-mmax, mmax + 1, dtype=np.int64)
    for q in range(1, qmax + 1):
        a = np.array([x for x in range(1, q + 1) if math.gcd(x, q) == 1], dtype=np.int64)
        # the same unit sum as ramanujan_sum_direct, vectorised over m
        direct = np.cos(2 * np.pi * ((a[:, None] * ms[None, :]) % q) / q).sum(axis=0)
        closed = np.array([ramanujan_sum(q, int(m)) for m in ms])
        bad = np.rint(direct).astype(np.int64) != closed
        if bad.any():
            worst = max(worst, float(np.max(np.abs(direct - closed)[bad])))
        cases += ms.shape[0]
    return CheckResult("ramanujan", worst == 0.0, cases, worst, 0.0)


def check_gauss(qmax: int = 100, orth_qmax: int = 200, tol: float = 1e-9) -> CheckResult:
    """|tau(chi)| = sqrt(q) for primitive chi and row orthogonality of the character table."""
    worst, cases = 0.0, 0
    for q in range(1, max(qmax, orth_qmax) + 1):
        chars = characters_mod(q)
        if q <= qmax:
            for chi in chars:
                if chi.primitive:
                    worst = max(worst, abs(abs(gauss_sum(chi)) - math.sqrt(q)))
                    cases += 1
        if q <= orth_qmax:
            V = np.array([chi.values for chi in chars])
            G = V @ V.conj().T
            worst = max(worst, float(np.max(np.abs(G - euler_phi(q) * np.eye(len(chars))))))
            cases += len(chars) ** 2
    return CheckResult("gauss", bool(worst <= tol), cases, float(worst), tol)


def check_farey(Qmax: int = 200, tol: float = 1e-12) -> CheckResult:
    """Tiling of [1/Q, 1 + 1/Q] and containment in [r/q - 1/(qQ), r/q + 1/(qQ)]."""
    worst, cases = 0.0, 0
    for Q in range(1, Qmax + 1):
        d = farey_dissection(Q)
        worst = max(worst, d.tiling_error(), d.containment_error())
        cases += len(d)
    return CheckResult("farey", bool(worst <= tol), cases, float(worst), tol)


def check_convolution(X: int = 10**4, H: int = 10**3, tol: float = 1e-8) -> CheckResult:
    """FFT convolution against the direct R* and the total-mass identity."""
    w = build_window(1, X)
    s0, c = sum_convolution(X, H, w)
    worst, cases = 0.0, 0
    for t in range(X + 1 + (X + 1) % 2, X + H + 1, 2):
        d = r_star(t, X, H, w)
        v = c[t - s0]
        worst = max(worst, abs(v - d) / abs(d) if d else abs(v))
        cases += 1
    mass = float(np.sum(w.take("lam", X - H + 1, X))) * float(np.sum(w.take("lam", 1, H)))
    worst = max(worst, abs(float(c.sum()) - mass) / mass)
    return CheckResult("convolution", bool(worst <= tol), cases + 1, float(worst), tol)


SUITES = {
    "ramanujan": check_ramanujan,
    "gauss": check_gauss,
    "farey": check_farey,
    "convolution": check_convolution,
}


def run_all() -> list[CheckResult]:
    return [fn() for fn in SUITES.values()]
