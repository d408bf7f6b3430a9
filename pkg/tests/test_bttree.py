import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arborp.bttree import (
    BoundaryPoint,
    VertexNF,
    act,
    antidiag,
    ball,
    base_vertex,
    diag,
    dist_to_geodesic,
    distance,
    e_infinity,
    geodesic_segment,
    lattice_vertex,
    mat_det,
    mat_inv,
    mat_mul,
    neighbors,
    path_between,
    v_n,
    vertex_from_matrix,
)
from arborp.padic import padic_valuation

PRIMES = st.sampled_from([2, 3, 5])
SEEDS = st.integers(0, 2**32)


def elementary_distance(v, w):
    """Distance from the elementary divisors of h^-1 g."""
    p = v.p
    m = mat_mul(mat_inv(w.matrix()), v.matrix())
    low = min(padic_valuation(x, p) for row in m for x in row)
    return padic_valuation(mat_det(m), p) - 2 * low


def sublattice_neighbors(v):
    """Index-p sublattices p L + Z_p (a e1 + b e2) over P^1(F_p)."""
    p = v.p
    g = v.matrix()
    e1, e2 = (g[0][0], g[1][0]), (g[0][1], g[1][1])
    out = set()
    for a, b in [(1, t) for t in range(p)] + [(0, 1)]:
        gen = (a * e1[0] + b * e2[0], a * e1[1] + b * e2[1])
        pl = [(p * e1[0], p * e1[1]), (p * e2[0], p * e2[1])]
        out.add(lattice_vertex([gen, *pl], p))
    return out


def random_matrix(rng, p, size=6):
    while True:
        g = tuple(tuple(Fraction(rng.randint(-p**size, p**size), p ** rng.randint(0, 2))
                        for _ in range(2)) for _ in range(2))
        if mat_det(g) != 0:
            return g


def test_normal_form_examples():
    assert vertex_from_matrix(((1, 0), (0, 1)), 3) == VertexNF(3, 0, 0)
    assert vertex_from_matrix(diag(3, 1), 3) == VertexNF(3, 1, 0)
    assert lattice_vertex([(1, 1), (1, 1 + 3)], 3) == VertexNF(3, 1, 1)


def test_distance_examples():
    for n in range(6):
        assert distance(base_vertex(2), v_n(2, -n)) == n
    assert distance(VertexNF(2, 1, 1), base_vertex(2)) == 1


def test_neighbors_of_base_vertex_at_two():
    assert set(neighbors(base_vertex(2))) == {VertexNF(2, 1, 0), VertexNF(2, 1, 1), VertexNF(2, -1, 0)}


def test_action_examples():
    v = VertexNF(5, 3, 17)
    assert act(((1, 0), (0, 1)), v) == v
    assert act(diag(3, 1), base_vertex(3)) == v_n(3, 1)
    e = e_infinity(2)
    assert act(antidiag(1, 2), e) == e.reversed()


def test_geodesic_examples():
    zero, inf = BoundaryPoint(2, 0), BoundaryPoint.infinity(2)
    seg = list(geodesic_segment(zero, inf, -2, 2))
    assert seg == [v_n(2, n) for n in range(-2, 3)]
    back = list(geodesic_segment(inf, zero, -2, 2))
    assert set(back) == set(seg)
    assert dist_to_geodesic(base_vertex(2), zero, inf) == 0
    assert dist_to_geodesic(VertexNF(2, 1, 1), zero, inf) == 1


def test_geodesic_distance_matches_window_search():
    zero, inf = BoundaryPoint(2, 0), BoundaryPoint.infinity(2)
    for v in ball(base_vertex(2), 3):
        window = min(distance(v, v_n(2, n)) for n in range(-8, 9))
        assert dist_to_geodesic(v, zero, inf) == window


@pytest.mark.parametrize("p", [2, 3, 5])
def test_neighbors_match_sublattice_oracle(p):
    rng = random.Random(p)
    for _ in range(20):
        v = vertex_from_matrix(random_matrix(rng, p), p)
        assert set(neighbors(v)) == sublattice_neighbors(v)


@pytest.mark.parametrize("p", [2, 3])
def test_ball_sizes(p):
    for r in range(4):
        expected = 1 + (p + 1) * (p**r - 1) // (p - 1)
        assert len(set(ball(base_vertex(p), r))) == expected


@given(PRIMES, SEEDS)
def test_distance_agrees_with_elementary_divisors(p, seed):
    rng = random.Random(seed)
    v = vertex_from_matrix(random_matrix(rng, p), p)
    w = vertex_from_matrix(random_matrix(rng, p), p)
    assert distance(v, w) == elementary_distance(v, w)


@given(PRIMES, SEEDS)
def test_action_is_isometry_and_path_unique(p, seed):
    rng = random.Random(seed)
    v = vertex_from_matrix(random_matrix(rng, p), p)
    w = vertex_from_matrix(random_matrix(rng, p), p)
    g = random_matrix(rng, p)
    assert distance(act(g, v), act(g, w)) == distance(v, w)
    path = list(path_between(v, w))
    assert len(path) == distance(v, w) + 1
    assert all(distance(a, b) == 1 for a, b in zip(path, path[1:]))
    assert len(set(path)) == len(path)


@given(PRIMES, SEEDS)
def test_normal_form_idempotent(p, seed):
    rng = random.Random(seed)
    v = vertex_from_matrix(random_matrix(rng, p), p)
    assert vertex_from_matrix(v.matrix(), p) == v
    g = random_matrix(rng, p)
    assert act(mat_inv(g), act(g, v)) == v
