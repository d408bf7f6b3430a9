import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from arborp.errors import BadDiscriminant, NotSplitOrInert
from arborp.quadforms import (
    QuadForm,
    class_group,
    class_number,
    cm_point,
    compose,
    form_power,
    is_fundamental,
    kronecker,
    pic_of_s_order,
    prime_form,
    principal_form,
    splitting_type,
)

KNOWN_H = {-3: 1, -4: 1, -7: 1, -8: 1, -15: 2, -20: 2, -23: 3, -47: 5, -56: 4,
           -71: 7, -84: 4, -119: 10, -163: 1, -199: 9, -719: 31}

discs = st.integers(3, 4000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1))


def brute_forms(d):
    """Reduced forms by scanning A, C directly; independent of the kernel."""
    out = set()
    amax = math.isqrt(-d // 3)
    for a in range(1, amax + 1):
        for c in range(a, (a * a - d) // (4 * a) + 2):
            b2 = d + 4 * a * c
            if b2 < 0:
                continue
            b = math.isqrt(b2)
            if b * b != b2 or b > a:
                continue
            for bb in {b, -b}:
                if -a < bb <= a and not (bb < 0 and a == c) and math.gcd(math.gcd(a, b), c) == 1:
                    out.add((a, bb, c))
    return out


def form_min(f, n=30):
    return min(f.value(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1) if x or y)


def test_known_class_numbers():
    for d, h in KNOWN_H.items():
        assert class_number(d) == h, d
    assert [f.as_tuple() for f in class_group(-4).reduced_forms] == [(1, 0, 1)]


def test_bad_discriminant():
    with pytest.raises(BadDiscriminant):
        class_group(-5)


def test_splitting_examples():
    assert splitting_type(-47, 2) == "split"
    assert splitting_type(-4, 3) == "inert"
    assert splitting_type(-4, 2) == "ramified"


def test_prime_forms():
    assert prime_form(-47, 2) == QuadForm(2, 1, 6)
    assert prime_form(-15, 2) == QuadForm(2, 1, 2)
    for d in (-47, -15, -119, -23):
        pf = prime_form(d, 2)
        assert compose(pf, pf.inverse()) == principal_form(d)


def test_pic_examples():
    pic = pic_of_s_order(-47, 2)
    assert (pic.k, pic.h_prime) == (5, 1)
    x, y = pic.u_norm_certificate
    assert x * x + x * y + 12 * y * y == 2 ** 5
    pic = pic_of_s_order(-15, 2)
    assert (pic.k, pic.h_prime) == (2, 1)
    x, y = pic.u_norm_certificate
    assert x * x + x * y + 4 * y * y == 2 ** 2
    assert pic_of_s_order(-91, 3).h_prime == class_number(-91) == 2
    with pytest.raises(NotSplitOrInert):
        pic_of_s_order(-4, 2)


def test_cm_points():
    z = cm_point(QuadForm(1, 0, 1))
    assert (z.re, z.im_sq) == (0, 1)
    z = cm_point(QuadForm(1, 1, 1))
    assert (z.re, z.im_sq) == (Fraction(-1, 2), Fraction(3, 4))


def test_fundamental():
    assert is_fundamental(-4) and is_fundamental(-47) and is_fundamental(-8)
    assert not is_fundamental(-16) and not is_fundamental(-63) and not is_fundamental(-12)


@given(discs)
def test_reduced_forms_match_brute_scan(d):
    assert {f.as_tuple() for f in class_group(d).reduced_forms} == brute_forms(d)


@given(discs, st.data())
def test_group_laws(d, data):
    cg = class_group(d)
    pick = st.sampled_from(cg.reduced_forms)
    f, g, h = data.draw(pick), data.draw(pick), data.draw(pick)
    e = cg.identity
    assert compose(f, e) == f
    assert compose(f, g) == compose(g, f)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(f, f.inverse()) == e
    assert compose(f, g).disc == d
    assert form_power(f, cg.order(f)) == e


@given(discs, st.data())
def test_reduction_preserves_minimum(d, data):
    f = data.draw(st.sampled_from(class_group(d).reduced_forms))
    t = data.draw(st.integers(-5, 5))
    moved = QuadForm(f.A, f.B + 2 * f.A * t, f.A * t * t + f.B * t + f.C)
    assert moved.reduce() == f
    assert form_min(moved, 12) == f.A


@given(discs, st.sampled_from([2, 3, 5, 7]))
def test_kronecker_is_split_criterion(d, p):
    assume(d % p)
    roots = sum(1 for b in range(4 * p) if (b * b - d) % (4 * p) == 0)
    assert (kronecker(d, p) == 1) == (roots > 0)


@given(discs.filter(lambda d: d not in (-3, -4) and d % 8 == 1))
def test_rim_length_is_prime_form_order(d):
    pic = pic_of_s_order(d, 2)
    cg = class_group(d)
    assert pic.k == cg.order(prime_form(d, 2))
    assert sum(len(c) for c in pic.cosets) == cg.h
    x, y = pic.u_norm_certificate
    assert x * x + x * y + (1 - d) // 4 * y * y == 2 ** pic.k
