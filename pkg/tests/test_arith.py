import cmath
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gbmissing.arith import (
    build_window, characters_mod, chebyshev_psi, divisor_k_table, e, euler_phi, gauss_sum, pointwise, psi_chi,
    ramanujan_sum, ramanujan_sum_direct, read_window, sieve_primes, write_window,
)
from gbmissing.errors import DomainError, FormatError, ResourceLimitError


def test_sieve_primes_examples():
    assert sieve_primes(1).tolist() == []
    assert sieve_primes(2).tolist() == [2]
    assert sieve_primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert sieve_primes(10**5).tolist() == list(sympy.primerange(2, 10**5 + 1))
    with pytest.raises(ResourceLimitError):
        sieve_primes(10**10)


def test_window_examples():
    w = build_window(1, 16)
    assert w.take("lam", 8, 8)[0] == pytest.approx(math.log(2))
    assert w.take("lam", 6, 6)[0] == 0
    assert w.take("mobius", 12, 12)[0] == 0
    assert w.take("d4", 6, 6)[0] == 16
    with pytest.raises(DomainError):
        w.take("lam", 10, 20)


def _oracle(n):
    f = sympy.factorint(n)
    lam = math.log(next(iter(f))) if len(f) == 1 else 0.0
    mu = 0 if any(e > 1 for e in f.values()) else (-1) ** len(f)
    d2 = math.prod(e + 1 for e in f.values())
    d4 = math.prod(math.comb(e + 3, 3) for e in f.values())
    return lam, mu, d2, d4, int(sympy.isprime(n))


@pytest.mark.parametrize("start", [1, 999_983, 10**9 + 7, 10**12 - 5000])
def test_window_against_factorisation(start, rng):
    w = build_window(start, 4000)
    for off in rng.integers(0, 4000, 250):
        n = start + int(off)
        if n == 1:
            continue
        lam, mu, d2, d4, isp = _oracle(n)
        assert w.lam[off] == pytest.approx(lam, abs=1e-12)
        assert (w.mobius[off], w.d2[off], w.d4[off], w.is_prime[off]) == (mu, d2, d4, isp)
        assert pointwise("Λ", n) == pytest.approx(w.lam[off], abs=1e-12)
        assert pointwise("mu", n) == w.mobius[off]
        assert pointwise("d_4", n) == w.d4[off]


def test_window_d2_squared_le_d4(small_window):
    assert np.all(small_window.d2.astype(np.int64) ** 2 <= small_window.d4)


def test_window_limits():
    with pytest.raises(DomainError):
        build_window(0, 10)
    with pytest.raises(ResourceLimitError):
        build_window(10**13, 10)


def test_pointwise_examples():
    assert pointwise("lambda", 1) == 0
    assert pointwise("phi", 10) == 4
    assert pointwise("d", 2, 4) == 4
    with pytest.raises(DomainError):
        pointwise("phi", 0)
    with pytest.raises(DomainError):
        pointwise("d", 6, 9)


def test_divisor_k_table():
    t = divisor_k_table(3000, 3)
    assert [int(t[n]) for n in (1, 2, 4, 12, 360)] == [1, 3, 6, 18, 180]
    for n in range(1, 3001, 37):
        assert t[n] == pointwise("d", n, 3)


def test_ramanujan_examples():
    assert ramanujan_sum(1, 5) == 1
    assert ramanujan_sum(6, 0) == 2
    assert ramanujan_sum(6, 4) == -1
    assert ramanujan_sum(4, 2) == -2


@given(st.integers(1, 120), st.integers(-500, 500))
@settings(max_examples=300, deadline=None)
def test_ramanujan_closed_form_matches_sum(q, m):
    assert abs(ramanujan_sum_direct(q, m) - ramanujan_sum(q, m)) < 1e-6


@given(st.integers(1, 17), st.integers(1, 17), st.integers(-300, 300))
def test_ramanujan_multiplicative(q1, q2, m):
    if math.gcd(q1, q2) == 1:
        assert ramanujan_sum(q1 * q2, m) == ramanujan_sum(q1, m) * ramanujan_sum(q2, m)


@pytest.mark.parametrize("q,count,conductors", [
    (1, 1, [1]), (3, 2, [1, 3]), (4, 2, [1, 4]), (5, 4, [1, 5, 5, 5]), (8, 4, [1, 4, 8, 8]),
    (12, 4, [1, 3, 4, 12]),
])
def test_characters_small(q, count, conductors):
    chars = characters_mod(q)
    assert len(chars) == count == euler_phi(q)
    assert chars[0].principal and not any(c.principal for c in chars[1:])
    assert sorted(c.conductor for c in chars) == conductors


def test_character_mod8_is_klein_group():
    chars = characters_mod(8)
    assert all(c.order <= 2 for c in chars)


@pytest.mark.parametrize("q", [7, 9, 15, 16, 20, 24, 45, 64, 77, 100])
def test_character_properties(q):
    chars = characters_mod(q)
    units = [a for a in range(q) if math.gcd(a, q) == 1]
    for chi in chars:
        assert chi(1) == pytest.approx(1)
        for a in units[:12]:
            for b in units[:12]:
                assert chi(a * b) == pytest.approx(chi(a) * chi(b), abs=1e-12)
        for a in range(q):
            if math.gcd(a, q) > 1:
                assert chi(a) == 0
        # induced-character test: chi is primitive iff no proper divisor d of q
        # makes chi trivial on units congruent to 1 mod d
        trivial_on = [d for d in sympy.divisors(q) if all(
            abs(chi(a) - 1) < 1e-9 for a in units if (a - 1) % d == 0)]
        assert min(trivial_on) == chi.conductor
        assert chi.primitive == (chi.conductor == q)


def test_gauss_examples():
    assert gauss_sum(characters_mod(1)[0]) == pytest.approx(1)
    assert gauss_sum(characters_mod(3)[1]) == pytest.approx(1j * math.sqrt(3))
    assert gauss_sum(characters_mod(4)[1]) == pytest.approx(2j)


def test_psi_chi_examples():
    chi0 = characters_mod(1)[0]
    assert psi_chi(1, chi0) == 0
    psi10 = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)
    assert psi_chi(10, chi0).real == pytest.approx(psi10)
    assert chebyshev_psi(10) == pytest.approx(psi10)
    v = psi_chi(10, characters_mod(3)[1])
    expected = sum(pointwise("Λ", n) * characters_mod(3)[1](n) for n in range(1, 11))
    assert v == pytest.approx(expected)
    assert abs(v) <= psi10


def test_e_convention():
    assert e(0.25) == pytest.approx(1j)
    assert e(np.array([0.5]))[0] == pytest.approx(cmath.exp(1j * math.pi))


def test_window_cache_roundtrip(tmp_path):
    w = build_window(10**6, 5000)
    p = tmp_path / "w.gbsv"
    write_window(w, p)
    assert read_window(p) == w
    raw = p.read_bytes()
    (tmp_path / "trunc").write_bytes(raw[:-3])
    with pytest.raises(FormatError):
        read_window(tmp_path / "trunc")
    (tmp_path / "magic").write_bytes(b"XXXXX" + raw[5:])
    with pytest.raises(FormatError):
        read_window(tmp_path / "magic")
