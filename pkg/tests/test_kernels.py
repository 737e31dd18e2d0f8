from fractions import Fraction

import numpy as np
import pytest

from gbmissing import _purepy, kernels
from gbmissing.arith import sieve_primes
from gbmissing.approximant import ApproximantParams

needs_both = pytest.mark.skipif(len(kernels.available_backends()) < 2, reason="compiled extension not built")


def test_backend_selection():
    assert kernels.BACKEND in kernels.available_backends()
    assert kernels.backend_module("python") is _purepy
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


@needs_both
@pytest.mark.parametrize("start,length", [(1, 100), (1, 70_000), (10**9, 5000), (2**40 - 100, 300)])
def test_sieve_parity(start, length):
    primes = sieve_primes(int(np.sqrt(start + length)) + 1).primes
    a = kernels.sieve_window(start, length, primes, backend="python")
    b = kernels.sieve_window(start, length, primes, backend="cython")
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_both
def test_expsum_parity(rng):
    ns = rng.integers(0, 10**9, 5000).astype(np.uint64)
    ws = rng.normal(size=5000)
    alphas = rng.random(20)
    a = kernels.expsum(ns, ws, alphas, backend="python")
    b = kernels.expsum(ns, ws, alphas, backend="cython")
    assert np.max(np.abs(a - b)) < 1e-9


@needs_both
def test_d4sharp_and_farey_parity():
    p = ApproximantParams.build(10**5, 0.25, r4_override=4)
    a = kernels.d4sharp_accumulate(10**5, 500, p.pm_table, backend="python")
    b = kernels.d4sharp_accumulate(10**5, 500, p.pm_table, backend="cython")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    for Q in (1, 2, 7, 50):
        fa = kernels.farey_sequence(Q, backend="python")
        fb = kernels.farey_sequence(Q, backend="cython")
        assert np.array_equal(fa[0], fb[0]) and np.array_equal(fa[1], fb[1])


def test_phases_match_exact_rationals(rng):
    alphas = list(rng.random(10)) + [1 / 3, 0.1, 1e-9]
    ns = rng.integers(0, 2**39, 200).astype(np.uint64)
    for alpha in alphas:
        ph = kernels.phases(ns, alpha)
        fa = Fraction(alpha)
        exact = np.array([float((int(n) * fa) % 1) for n in ns])
        d = np.abs(ph - exact)
        assert np.all(np.minimum(d, 1 - d) < 1e-12)


def test_farey_sequence_counts():
    num, den = kernels.farey_sequence(5)
    fr = [Fraction(int(a), int(b)) for a, b in zip(num, den)]
    assert fr == sorted({Fraction(a, b) for b in range(1, 6) for a in range(0, b + 1)})
