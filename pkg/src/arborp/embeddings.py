"""Embeddings of quadratic orders into M_2 and the dynamics of their tori on the tree.

An embedding is pinned down by the single matrix ``M = psi(sqrt d)``; the
image of ``x + y sqrt d`` is ``x I + y M``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .bttree import (
    BoundaryPoint,
    IDENTITY,
    VertexNF,
    act,
    dist_to_geodesic,
    distance,
    lattice_vertex,
    mat_apply,
    mat_inv,
    mat_mul,
)
from .errors import RamifiedUnsupported
from .padic import DEFAULT_PRECISION, PadicNumber, hensel_sqrt, padic_valuation
from .quadforms import QuadForm, check_discriminant

Matrix = tuple


def _frac_matrix(m) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in m)


def _lin(x, y, M) -> Matrix:
    """x I + y M."""
    return ((x + y * M[0][0], y * M[0][1]), (y * M[1][0], x + y * M[1][1]))


@dataclass(frozen=True)
class Embedding:
    d: int
    p: int
    M: Matrix
    form: QuadForm | None = None

    def __post_init__(self):
        M = _frac_matrix(self.M)
        object.__setattr__(self, "M", M)
        sq = mat_mul(M, M)
        if sq != ((self.d, 0), (0, self.d)):
            raise ValueError("M must square to d times the identity")

    def psi(self, x, y=0) -> Matrix:
        """Image of x + y sqrt(d)."""
        return _lin(Fraction(x), Fraction(y), self.M)

    def psi_order(self, a, b=0) -> Matrix:
        """Image of a + b (delta + sqrt d)/2 in the order of discriminant d."""
        delta = self.d % 2
        return self.psi(Fraction(a) + Fraction(b * delta, 2), Fraction(b, 2))

    def conjugate(self, g: Matrix) -> Embedding:
        gi = mat_inv(g)
        return Embedding(self.d, self.p, mat_mul(mat_mul(g, self.M), gi), None)

    def eigenvector_holds(self, tau: PadicNumber, root: PadicNumber) -> bool:
        v = mat_apply(self.M, (tau, 1))
        return v[0] == root * tau and v[1] == root


def psi_from_form(f: QuadForm, p: int) -> Embedding:
    A, B, C = f.A, f.B, f.C
    return Embedding(f.disc, p, ((-B, -2 * C), (2 * A, B)), f)


# local structure of Q_p(sqrt d)


def local_data(d: int, p: int) -> tuple[int, int, str]:
    """``(n, d0, kind)`` with d = p^(2n) d0, d0 fundamental at p, kind the splitting type of K_p."""
    check_discriminant(d)
    n, d0 = 0, d
    while d0 % (p * p) == 0 and (d0 // (p * p)) % 4 in (0, 1):
        d0 //= p * p
        n += 1
    if d0 % p == 0:
        return n, d0, "ramified"
    if p == 2:
        kind = "split" if d0 % 8 == 1 else "inert"
    else:
        kind = "split" if pow(d0 % p, (p - 1) // 2, p) == 1 else "inert"
    return n, d0, kind


def maximal_generator(e: Embedding) -> Matrix:
    """psi((d0 + sqrt d0)/2), a generator of the maximal order of K_p."""
    n, d0, _ = local_data(e.d, e.p)
    s = Fraction(1, e.p ** n)
    return _lin(Fraction(d0, 2), s / 2, e.M)


def uniformizer_shift(d0: int, p: int) -> int:
    """t with (d0 + sqrt d0)/2 - t of norm valuation one (ramified K_p)."""
    tr, nm = d0, (d0 * d0 - d0) // 4
    for t in range(p):
        if padic_valuation(t * t - t * tr + nm, p) == 1:
            return t
    raise ArithmeticError("no uniformizer found; K_p is not ramified")


@dataclass(frozen=True)
class Split:
    x: BoundaryPoint
    y: BoundaryPoint
    root: PadicNumber
    kind: str = "split"


@dataclass(frozen=True)
class Inert:
    v: VertexNF
    kind: str = "inert"


@dataclass(frozen=True)
class Ramified:
    edge: tuple
    kind: str = "ramified"

    def vertices(self) -> frozenset:
        return frozenset(self.edge)


TorusFixedData = Split | Inert | Ramified


def eigen_point(e: Embedding, root) -> BoundaryPoint:
    """Boundary point of the eigenline of M for eigenvalue ``root``."""
    (a, b), (c, d) = e.M
    if c != 0:
        return BoundaryPoint(e.p, root - d, c)
    if b != 0:
        return BoundaryPoint(e.p, b, root - a)
    raise ValueError("M is scalar")


def torus_fixed_data(e: Embedding, precision: int = DEFAULT_PRECISION) -> TorusFixedData:
    n, d0, kind = local_data(e.d, e.p)
    if kind == "split":
        r = hensel_sqrt(PadicNumber.from_rational(e.p, e.d, 1, precision))
        return Split(eigen_point(e, r), eigen_point(e, -r), r)
    w = maximal_generator(e)
    e1 = (Fraction(1), Fraction(0))
    base = [e1, mat_apply(w, e1)]
    v = lattice_vertex(base, e.p)
    if kind == "inert":
        return Inert(v)
    t = uniformizer_shift(d0, e.p)
    pi = ((w[0][0] - t, w[0][1]), (w[1][0], w[1][1] - t))
    v2 = act(pi, v)
    return Ramified(tuple(sorted((v, v2))))


def is_fixed(g: Matrix, data: TorusFixedData) -> bool:
    if isinstance(data, Split):
        return act(g, data.x) == data.x and act(g, data.y) == data.y
    if isinstance(data, Inert):
        return act(g, data.v) == data.v
    return frozenset(act(g, v) for v in data.edge) == data.vertices()


def act_on_fixed_data(g: Matrix, data: TorusFixedData) -> TorusFixedData:
    if isinstance(data, Split):
        return Split(act(g, data.x), act(g, data.y), data.root)
    if isinstance(data, Inert):
        return Inert(act(g, data.v))
    return Ramified(tuple(sorted(act(g, v) for v in data.edge)))


def stabilizer_conductor(e: Embedding, v: VertexNF, data: TorusFixedData | None = None) -> int:
    """Exponent n such that the stabilizer of v in the torus is the order of conductor p^n."""
    data = data or torus_fixed_data(e)
    if isinstance(data, Split):
        return dist_to_geodesic(v, data.x, data.y)
    if isinstance(data, Inert):
        return distance(v, data.v)
    raise RamifiedUnsupported("ramified tori fix an edge; use edge distances instead")


def sample_conductor_units(e: Embedding, n: int, count: int, rng: random.Random,
                           spread: int = 50) -> list[Matrix]:
    """Images of random units a + b p^n w of the order of conductor p^n of K_p."""
    w = maximal_generator(e)
    _, d0, _ = local_data(e.d, e.p)
    tr, nm = d0, (d0 * d0 - d0) // 4
    out = []
    while len(out) < count:
        a = rng.randint(-spread, spread)
        b = rng.randint(-spread, spread) * e.p ** n
        norm = a * a + a * b * tr + b * b * nm
        if norm % e.p == 0:
            continue
        out.append(_lin(Fraction(a), Fraction(b), w))
    return out


def optimal_at(e: Embedding, ell: int) -> bool:
    """No r in Z with (psi(w_d) - r)/ell integral at ell; only meaningful for forms."""
    m = e.psi_order(0, 1)
    for r in range(ell):
        entries = (m[0][0] - r, m[0][1], m[1][0], m[1][1] - r)
        if all(padic_valuation(x, ell) >= 1 for x in entries):
            return False
    return True


__all__ = [
    "Embedding", "Split", "Inert", "Ramified", "TorusFixedData", "psi_from_form",
    "torus_fixed_data", "stabilizer_conductor", "sample_conductor_units", "local_data",
    "maximal_generator", "is_fixed", "act_on_fixed_data", "optimal_at", "eigen_point",
    "IDENTITY",
]
