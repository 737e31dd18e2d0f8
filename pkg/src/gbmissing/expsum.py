"""Circle-method exponential sums over I1 = (X-H, X] and I2 = (0, H]."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.fft

from . import kernels
from .arith import DirichletCharacter, SieveWindow, euler_phi, mobius
from .errors import DomainError
from .kernels import phases

SPECTRUM_CAP = 1 << 26


@dataclass(frozen=True)
class IntervalSpec:
    which: str  # "I1" or "I2"
    X: int
    H: int

    def __post_init__(self):
        if self.which not in ("I1", "I2"):
            raise DomainError("which must be 'I1' or 'I2'")
        if not 1 <= self.H <= self.X:
            raise DomainError("interval needs 1 <= H <= X")

    @property
    def lo(self) -> int:
        return self.X - self.H + 1 if self.which == "I1" else 1

    @property
    def hi(self) -> int:
        return self.X if self.which == "I1" else self.H


def _e_phase(ph: float) -> complex:
    return complex(math.cos(2 * math.pi * ph), math.sin(2 * math.pi * ph))


def _phase1(n: int, x: float) -> float:
    return float(phases(np.array([n], dtype=np.uint64), x)[0])


def t_sum(spec: IntervalSpec, eta: float) -> complex:
    """T(eta) = sum_{n in I} e(n eta) in closed form."""
    H, lo = spec.H, spec.lo
    eta = eta - round(eta)  # e(n eta) only depends on eta mod 1
    if eta < 0:
        # T(-eta) = conj T(eta); keeping eta >= 0 avoids reducing -tiny to 1 - tiny
        return t_sum(spec, -eta).conjugate()
    if eta < 1e-15:
        if eta == 0.0:
            return complex(H, 0.0)
        return H * _e_phase(_phase1(lo, eta) + _phase1(H - 1, eta / 2))
    # e(lo eta) e((H-1) eta / 2) sin(pi H eta) / sin(pi eta)
    ph = _phase1(lo, eta) + _phase1(H - 1, eta / 2)
    num = math.sin(2 * math.pi * _phase1(H, eta / 2))
    den = math.sin(math.pi * eta)
    return _e_phase(ph) * (num / den)


def t_sum_direct(spec: IntervalSpec, eta: float) -> complex:
    ns = np.arange(spec.lo, spec.hi + 1, dtype=np.uint64)
    return complex(kernels.expsum(ns, np.ones(ns.shape[0]), [eta])[0])


def _lambda_support(spec: IntervalSpec, window: SieveWindow):
    lam = window.take("lam", spec.lo, spec.hi)
    idx = np.flatnonzero(lam)
    return (idx + spec.lo).astype(np.uint64), lam[idx]


def s_sums(spec: IntervalSpec, alphas, window: SieveWindow) -> np.ndarray:
    """S(alpha) = sum_{n in I} Lambda(n) e(n alpha) for an array of alphas."""
    ns, ws = _lambda_support(spec, window)
    return kernels.expsum(ns, ws, alphas)


def s_sum(spec: IntervalSpec, alpha: float, window: SieveWindow) -> complex:
    return complex(s_sums(spec, [alpha], window)[0])


def r_term(spec: IntervalSpec, eta: float, q: int, a: int, window: SieveWindow) -> complex:
    """R(eta, q, a) = S(a/q + eta) - mu(q)/phi(q) T(eta)."""
    if q < 1 or not 1 <= a <= q or math.gcd(a, q) != 1:
        raise DomainError("r_term needs 1 <= a <= q with gcd(a, q) = 1")
    s = s_sum(spec, a / q + eta, window)
    mu = mobius(q)
    if mu == 0:
        return s
    return s - (mu / euler_phi(q)) * t_sum(spec, eta)


def w_term(spec: IntervalSpec, chi: DirichletCharacter, eta: float, window: SieveWindow) -> complex:
    """W(chi, eta) = sum_{n in I} Lambda(n) chi(n) e(n eta) - [chi principal] T(eta)."""
    ns, ws = _lambda_support(spec, window)
    cv = chi.at(ns.astype(np.int64))
    ph = 2.0 * np.pi * phases(ns, eta)
    val = complex(np.sum(ws * cv * np.exp(1j * ph)))
    if chi.principal:
        val -= t_sum(spec, eta)
    return val


@dataclass(frozen=True)
class SpectrumGrid:
    N: int
    values: np.ndarray
    weights: np.ndarray  # dense weights w(0..N-1), kept for Parseval checks

    def parseval_gap(self) -> float:
        lhs = float(np.sum(np.abs(self.values) ** 2) / self.N)
        rhs = float(np.sum(self.weights**2))
        return abs(lhs - rhs) / max(rhs, 1e-300)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "re", "im"])
        for j, v in enumerate(self.values):
            w.writerow([j, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def _dense_weights(weights, N: int | None = None) -> np.ndarray:
    if isinstance(weights, Mapping):
        if not weights:
            return np.zeros(1)
        keys = np.fromiter(weights.keys(), dtype=np.int64)
        if keys.min() < 0:
            raise DomainError("spectrum weights must sit on n >= 0")
        dense = np.zeros(int(keys.max()) + 1)
        dense[keys] = np.fromiter(weights.values(), dtype=np.float64)
        return dense
    return np.asarray(weights, dtype=np.float64)


def spectrum(weights, N: int) -> SpectrumGrid:
    """values[j] = sum_n w(n) e(n j / N), computed by FFT; refuses aliasing."""
    w = _dense_weights(weights)
    nz = np.flatnonzero(w)
    top = int(nz[-1]) if nz.size else 0
    if N <= top:
        raise DomainError(f"grid size N={N} aliases support point {top}")
    if N > SPECTRUM_CAP:
        raise DomainError(f"grid size N={N} exceeds {SPECTRUM_CAP}")
    dense = np.zeros(N)
    dense[:w.shape[0]] = w[:N]
    vals = scipy.fft.ifft(dense) * N
    return SpectrumGrid(N, vals, dense)


def fast_len(n: int) -> int:
    return scipy.fft.next_fast_len(n)


def s4_weights(X: int, H: int, window: SieveWindow, kind: str, d4sharp: np.ndarray | None = None):
    """Weights of S_4(alpha; H) on n = X..X+H for kind in {'d4', 'd4sharp'}."""
    if kind == "d4":
        window.require(X, X + H)
        return window.take("d4", X, X + H).astype(np.float64)
    if kind == "d4sharp":
        if d4sharp is None or d4sharp.shape[0] != H + 1:
            raise DomainError("d4sharp kind needs the approximant values on [X, X+H]")
        return np.asarray(d4sharp, dtype=np.float64)
    raise DomainError(f"unknown kind {kind!r}")


def s4_eval(alpha: float, X: int, H: int, window: SieveWindow | None, params=None, kind: str = "d4",
            d4sharp: np.ndarray | None = None) -> complex:
    """S_4(alpha; H) = sum_{n=X}^{X+H} w(n) e(n alpha), w = d_4 or its approximant."""
    if kind == "d4sharp" and d4sharp is None:
        if params is None:
            raise DomainError("d4sharp kind needs ApproximantParams")
        from .approximant import d4sharp_window

        d4sharp = d4sharp_window(X, H, params)
    w = s4_weights(X, H, window, kind, d4sharp)
    ns = np.arange(X, X + H + 1, dtype=np.uint64)
    return complex(kernels.expsum(ns, w, [alpha])[0])
