import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbmissing.approximant import ApproximantParams, d4sharp_window
from gbmissing.arith import build_window, characters_mod, euler_phi, mobius
from gbmissing.errors import DomainError
from gbmissing.expsum import (
    IntervalSpec, r_term, s4_eval, s_sum, spectrum, t_sum, t_sum_direct, w_term,
)

PSI10 = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)


@pytest.fixture(scope="module")
def w100():
    return build_window(1, 100)


def test_interval_spec():
    assert (IntervalSpec("I1", 20, 10).lo, IntervalSpec("I1", 20, 10).hi) == (11, 20)
    assert (IntervalSpec("I2", 20, 10).lo, IntervalSpec("I2", 20, 10).hi) == (1, 10)
    with pytest.raises(DomainError):
        IntervalSpec("I1", 5, 10)
    with pytest.raises(DomainError):
        IntervalSpec("I3", 20, 10)


def test_t_sum_examples():
    assert t_sum(IntervalSpec("I1", 100, 37), 0.0) == 37
    assert abs(t_sum(IntervalSpec("I2", 4, 4), 0.5)) < 1e-12
    assert t_sum(IntervalSpec("I2", 40, 40), 3.0) == 40


@given(st.integers(1, 10**4), st.integers(0, 10**6), st.floats(-2, 2, allow_nan=False), st.booleans())
@settings(max_examples=300, deadline=None)
def test_t_sum_closed_form(H, extra, eta, first):
    spec = IntervalSpec("I1" if first else "I2", H + extra, H)
    a, b = t_sum(spec, eta), t_sum_direct(spec, eta)
    assert abs(a - b) <= 1e-9 * max(1.0, abs(b)) + 1e-9 * H
    dist = abs(eta - round(eta))
    bound = H if dist == 0 else min(H, 1 / (2 * dist))
    assert abs(a) <= bound * (1 + 1e-9) + 1e-9


def test_s_sum_examples(w100):
    assert s_sum(IntervalSpec("I2", 20, 10), 0.0, w100).real == pytest.approx(PSI10)
    i1 = sum(math.log(p) for p in (11, 13, 2, 17, 19))
    assert s_sum(IntervalSpec("I1", 20, 10), 0.0, w100).real == pytest.approx(i1)
    spec = IntervalSpec("I1", 90, 40)
    assert s_sum(spec, 0.3, w100) == pytest.approx(s_sum(spec, 1.3, w100), abs=1e-12)
    with pytest.raises(DomainError):
        s_sum(IntervalSpec("I1", 200, 10), 0.0, w100)


def test_r_term(w100):
    spec = IntervalSpec("I2", 20, 10)
    assert r_term(spec, 0.0, 1, 1, w100).real == pytest.approx(PSI10 - 10)
    assert r_term(spec, 0.01, 4, 1, w100) == s_sum(spec, 0.25 + 0.01, w100)
    for q in (3, 5, 6, 7):
        for a in range(1, q + 1):
            if math.gcd(a, q) != 1:
                continue
            rebuilt = r_term(spec, 0.013, q, a, w100) + mobius(q) / euler_phi(q) * t_sum(spec, 0.013)
            assert abs(rebuilt - s_sum(spec, a / q + 0.013, w100)) < 1e-12
    with pytest.raises(DomainError):
        r_term(spec, 0.0, 4, 2, w100)


def test_w_term(w100):
    spec = IntervalSpec("I2", 20, 10)
    chi0 = characters_mod(1)[0]
    assert w_term(spec, chi0, 0.0, w100).real == pytest.approx(PSI10 - 10)
    chi = characters_mod(5)[2]
    direct = sum(w100.lam[n - 1] * chi(n) for n in range(1, 11))
    assert w_term(spec, chi, 0.0, w100) == pytest.approx(direct)
    for chi in characters_mod(12):
        for eta in (0.0, 0.1, 0.77):
            assert abs(w_term(IntervalSpec("I1", 100, 60), chi, eta, w100)) <= w100.lam[40:100].sum() + 60


def test_spectrum_examples(rng):
    s = spectrum({5: 1.0}, 8)
    j = np.arange(8)
    assert np.allclose(s.values, np.exp(2j * np.pi * 5 * j / 8))
    w = build_window(1, 10)
    s = spectrum(np.concatenate([[0.0], w.lam]), 32)
    assert s.values[0].real == pytest.approx(PSI10)
    weights = {int(n): float(v) for n, v in zip(rng.integers(0, 500, 60), rng.normal(size=60))}
    s = spectrum(weights, 512)
    assert s.parseval_gap() < 1e-6
    dense = np.zeros(512)
    for n, v in weights.items():
        dense[n] = v
    for jj in rng.integers(0, 512, 20):
        direct = np.sum(dense * np.exp(2j * np.pi * np.arange(512) * jj / 512))
        assert abs(s.values[jj] - direct) <= 1e-8 * max(1, abs(direct))
    with pytest.raises(DomainError):
        spectrum({600: 1.0}, 512)
    assert s.to_csv().startswith("j,re,im\n")


def test_discrete_circle_identity():
    """sum_j S1(j/N) S2(j/N) e(-2n j/N)/N equals the direct convolution."""
    X, H = 2000, 300
    w = build_window(1, X)
    N = 4096
    s1 = spectrum({n: float(w.lam[n - 1]) for n in range(X - H + 1, X + 1)}, N)
    s2 = spectrum({n: float(w.lam[n - 1]) for n in range(1, H + 1)}, N)
    j = np.arange(N)
    for two_n in range(X + 2, X + H + 1, 26):
        val = np.sum(s1.values * s2.values * np.exp(-2j * np.pi * ((two_n * j) % N) / N)).real / N
        direct = sum(w.lam[k - 1] * w.lam[two_n - k - 1] for k in range(1, H + 1) if X - H < two_n - k <= X)
        assert abs(val - direct) <= 1e-8 * max(1.0, direct)


def test_s4_eval():
    X, H = 10**5, 500
    w = build_window(X, H + 1)
    assert s4_eval(0.0, X, H, w).real == pytest.approx(float(w.d4.sum()))
    assert s4_eval(0.37, X, H, w) == pytest.approx(s4_eval(1.37, X, H, w), rel=1e-9)
    p = ApproximantParams.build(X, 0.25, r4_override=4)
    sharp = s4_eval(0.0, X, H, w, params=p, kind="d4sharp")
    assert sharp.real == pytest.approx(float(d4sharp_window(X, H, p).sum()), rel=1e-9)
    with pytest.raises(DomainError):
        s4_eval(0.0, X + 10, H, w)
