from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arborp.errors import NoSquareRoot
from arborp.padic import (
    PadicNumber,
    QuadExtElement,
    canonical_sqrt_in_ext,
    hensel_sqrt,
    is_square,
    padic_valuation,
    vp,
)

PRIMES = st.sampled_from([2, 3, 5, 7, 11])
nonzero = st.integers(-10**6, 10**6).filter(bool)


def test_valuations():
    assert vp(5, 5) == 1
    assert vp(1, 5) == 0
    assert vp(75, 5) == 2
    assert vp(Fraction(3, 50), 5) == -2
    assert padic_valuation(0, 3) == float("inf")


def test_sqrt_of_two_mod_seven_cubed():
    r = hensel_sqrt(PadicNumber.from_rational(7, 2, 1, 3))
    n = int(r.lift())
    assert (n * n - 2) % 343 == 0
    assert n % 7 in (3, 4)


def test_sqrt_minus_seven_two_adic():
    a = PadicNumber.from_rational(2, -7, 1, 10)
    assert is_square(a)
    brute = any((x * x + 7) % 2**8 == 0 for x in range(2**8))
    assert brute
    r = hensel_sqrt(a)
    assert r * r == a


def test_no_sqrt_odd_valuation():
    with pytest.raises(NoSquareRoot):
        hensel_sqrt(PadicNumber.from_rational(3, 3, 1, 8))


def test_quadratic_extension_basics():
    w = QuadExtElement.omega(7)
    assert w.conj() * w == QuadExtElement(7, -w.omega_square, 0)
    assert QuadExtElement(7, 1, 0).norm() == PadicNumber.from_rational(7, 1)
    a = QuadExtElement(7, 3, 5)
    assert a.trace() == PadicNumber.from_rational(7, 6)


@pytest.mark.parametrize("p,d", [(3, -1), (5, 2), (2, -3), (2, 5), (7, -1)])
def test_canonical_sqrt_squares_to_d(p, d):
    s = canonical_sqrt_in_ext(d, p, 16)
    assert s * s == QuadExtElement(p, d, 0)


def test_canonical_sqrt_rejects_squares():
    with pytest.raises(NoSquareRoot):
        canonical_sqrt_in_ext(2, 7, 8)


@given(PRIMES, nonzero, nonzero)
def test_ring_laws(p, a, b):
    x = PadicNumber.from_rational(p, a, 1, 20)
    y = PadicNumber.from_rational(p, b, 1, 20)
    assert x + y == PadicNumber.from_rational(p, a + b, 1, 20)
    assert x * y == PadicNumber.from_rational(p, a * b, 1, 20)
    assert (x * y) / y == x


@given(PRIMES, nonzero, st.integers(1, 10**4))
def test_rational_roundtrip(p, num, den):
    x = PadicNumber.from_rational(p, num, den, 24)
    assert x.valuation == vp(Fraction(num, den), p)
    assert x == PadicNumber.from_rational(p, Fraction(num, den), 1, 24)


@given(PRIMES, nonzero)
def test_sqrt_of_square(p, a):
    sq = PadicNumber.from_rational(p, a * a, 1, 24)
    r = hensel_sqrt(sq)
    assert r * r == sq


@given(st.sampled_from([3, 5, 7]), nonzero, nonzero, nonzero, nonzero)
def test_extension_norm_multiplicative(p, a, b, c, d):
    u, v = QuadExtElement(p, a, b, 20), QuadExtElement(p, c, d, 20)
    assert (u * v).norm() == u.norm() * v.norm()
    assert (u * v).conj() == u.conj() * v.conj()
