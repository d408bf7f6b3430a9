import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arborp import kernels
from arborp.errors import BadGcd
from arborp.lattice import det
from arborp.quadforms import class_number
from arborp.quatdef import (
    construct_algebra_and_maximal_order,
    enumerate_optimal_embeddings,
    hilbert_symbol,
    orientation_at_q,
    orientation_of,
)

QS = [2, 3, 5, 7, 11, 13, 17, 29, 37, 41, 73, 89, 97]
nz = st.integers(-200, 200).filter(bool)


def places(a, b):
    out = {2}
    for n in (a, b):
        n = abs(n)
        f = 2
        while f * f <= n:
            while n % f == 0:
                out.add(f)
                n //= f
            f += 1
        if n > 1:
            out.add(n)
    return sorted(out)


def box_search(gram, bound):
    """Every integer vector with x^T G x <= bound, by a bounding box."""
    n = len(gram)
    G = [[Fraction(x) for x in row] for row in gram]
    # (G^-1)_ii via cofactors
    D = det(G)
    radius = []
    for i in range(n):
        minor = [[G[r][c] for c in range(n) if c != i] for r in range(n) if r != i]
        radius.append(math.isqrt(int(bound * det(minor) / D)) + 1)
    pairs = [(i, j, int(G[i][j])) for i in range(n) for j in range(n) if G[i][j]]
    out = set()
    for c in itertools.product(*[range(-r, r + 1) for r in radius]):
        if sum(c[i] * g * c[j] for i, j, g in pairs) <= bound and any(c):
            out.add(c)
    return out


@pytest.mark.parametrize("q", QS)
def test_maximal_order_discriminant(q):
    alg, R = construct_algebra_and_maximal_order(q)
    assert R.is_closed() and R.is_integral() and R.contains_one()
    assert R.reduced_discriminant() == q
    assert alg.is_definite()
    assert alg.ramified_places() == [q, "inf"]


def test_hurwitz_and_small_unit_groups():
    counts = {q: len(construct_algebra_and_maximal_order(q)[1].units()) for q in (2, 3, 5, 7, 11)}
    assert counts == {2: 24, 3: 12, 5: 6, 7: 4, 11: 4}


def test_hilbert_examples():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, "inf") == -1
    assert hilbert_symbol(-1, -1, 3) == 1


def test_hilbert_two_adic_brute_force():
    # (-1,-1)_2 = -1 : z^2 = -x^2 - y^2 has no primitive solution mod 2^8
    sols = [(x, y, z) for x in range(16) for y in range(16) for z in range(16)
            if (x % 2 or y % 2 or z % 2) and (z * z + x * x + y * y) % 256 == 0]
    assert not sols


@given(nz, nz)
def test_hilbert_product_formula(a, b):
    prod = hilbert_symbol(a, b, "inf")
    for ell in places(a, b):
        prod *= hilbert_symbol(a, b, ell)
    assert prod == 1


@given(nz, nz, st.sampled_from([2, 3, 5, 7]))
def test_hilbert_symmetric_and_square_trivial(a, b, ell):
    assert hilbert_symbol(a, b, ell) == hilbert_symbol(b, a, ell)
    assert hilbert_symbol(a, b * 4, ell) == hilbert_symbol(a, b, ell)
    assert hilbert_symbol(a, -a, ell) == 1


@pytest.mark.parametrize("q", [2, 3, 11, 13])
def test_fincke_pohst_complete_for_small_norms(q):
    _, R = construct_algebra_and_maximal_order(q)
    G = [[int(x) for x in row] for row in R.lll().gram()]
    found = {c for c, _ in kernels.short_vectors(G, 100)}
    assert found == box_search(G, 100)
    for n in range(1, 51):
        els = R.elements_of_norm(n)
        assert len(els) == len(set(els))
        assert all(R.algebra.nrd(x) == n for x in els)
    theta = kernels.theta_counts(G, 100)
    assert sum(theta[1:]) == len(found)


@given(st.sampled_from([2, 3, 5, 11, 13]), st.data())
def test_quaternion_norm_multiplicative(q, data):
    alg, R = construct_algebra_and_maximal_order(q)
    coeffs = st.lists(st.integers(-5, 5), min_size=4, max_size=4)
    x = R.element(data.draw(coeffs))
    y = R.element(data.draw(coeffs))
    assert alg.nrd(alg.mul(x, y)) == alg.nrd(x) * alg.nrd(y)
    assert R.contains(alg.mul(x, y))
    assert alg.trd(x) == x[0] * 2


@given(st.sampled_from([2, 3, 5, 7, 11, 13]), st.data())
def test_orientation_is_ring_map(q, data):
    o = orientation_at_q(q)
    alg, R = o.R.algebra, o.R
    F = o.field
    coeffs = st.lists(st.integers(-6, 6), min_size=4, max_size=4)
    x, y = R.element(data.draw(coeffs)), R.element(data.draw(coeffs))
    n = data.draw(st.integers(-50, 50))
    assert orientation_of(alg.one(), o) == (1, 0)
    assert orientation_of((Fraction(n), 0, 0, 0), o) == (n % q, 0)
    assert orientation_of(alg.mul(x, y), o) == F.mul(orientation_of(x, o), orientation_of(y, o))
    s = tuple(a + b for a, b in zip(x, y))
    assert orientation_of(s, o) == F.add(orientation_of(x, o), orientation_of(y, o))


@pytest.mark.parametrize("d,q,p", [(-19, 2, 3), (-43, 2, 3), (-91, 2, 3), (-31, 11, 3),
                                   (-67, 11, 3), (-103, 11, 3), (-115, 11, 3), (-199, 11, 3),
                                   (-223, 11, 3), (-235, 11, 3), (-148, 11, 3)])
def test_embedding_classes_count_class_number(d, q, p):
    classes = enumerate_optimal_embeddings(d, q, p)
    assert len(classes) == class_number(d)
    assert len({c.x for c in classes}) == len(classes)


def test_embedding_preconditions():
    with pytest.raises(BadGcd):
        enumerate_optimal_embeddings(-3, 2, 3)
    assert enumerate_optimal_embeddings(-7, 11, 3) == []
