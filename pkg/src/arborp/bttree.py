"""The Bruhat-Tits tree of PGL_2(Q_p).

A vertex is the homothety class of the lattice spanned by the columns
``(p**a, 0)`` and ``(b, 1)``; ``b`` is kept as an exact element of ``Z[1/p]``
reduced into ``[0, p**a)``, so vertices compare exactly and hash.  Matrices are
2x2 tuples whose entries may be ints, Fractions or :class:`PadicNumber`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import EqualBoundaryPoints, SingularMatrix
from .padic import PadicNumber, padic_valuation

Matrix = tuple  # ((a, b), (c, d))


def _is_zero(x) -> bool:
    if isinstance(x, PadicNumber):
        return x.is_zero()
    return x == 0


def residue(x, p: int, a: int) -> Fraction:
    """Representative of ``x mod p**a Z_p`` in ``Z[1/p]`` lying in ``[0, p**a)``."""
    if isinstance(x, PadicNumber):
        return x.residue(a)
    x = Fraction(x)
    v = padic_valuation(x, p)
    if v >= a:
        return Fraction(0)
    return PadicNumber.from_rational(p, x, 1, a - v).residue(a)


# 2x2 matrix helpers


def mat_mul(g: Matrix, h: Matrix) -> Matrix:
    return ((g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]),
            (g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]))


def mat_det(g: Matrix):
    return g[0][0] * g[1][1] - g[0][1] * g[1][0]


def mat_inv(g: Matrix) -> Matrix:
    det = mat_det(g)
    if _is_zero(det):
        raise SingularMatrix("matrix is not invertible")
    if isinstance(det, int):
        det = Fraction(det)
    inv = 1 / det
    return ((g[1][1] * inv, -g[0][1] * inv), (-g[1][0] * inv, g[0][0] * inv))


def mat_apply(g: Matrix, v: Sequence) -> tuple:
    return (g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1])


def mat_scale(g: Matrix, s) -> Matrix:
    return ((g[0][0] * s, g[0][1] * s), (g[1][0] * s, g[1][1] * s))


IDENTITY: Matrix = ((1, 0), (0, 1))


def diag(x, y) -> Matrix:
    return ((x, 0), (0, y))


def antidiag(b, c) -> Matrix:
    return ((0, b), (c, 0))


# tree objects


@dataclass(frozen=True, order=True)
class VertexNF:
    p: int
    a: int
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "b", residue(self.b, self.p, self.a))

    def matrix(self) -> Matrix:
        """A matrix whose column lattice lies in this class."""
        return ((Fraction(self.p) ** self.a, self.b), (Fraction(0), Fraction(1)))

    def label(self) -> str:
        return f"({self.a},{self.b})"


@dataclass(frozen=True)
class OrientedEdge:
    source: VertexNF
    target: VertexNF

    def __post_init__(self):
        if distance(self.source, self.target) != 1:
            raise ValueError("edge endpoints must be adjacent")

    def reversed(self) -> OrientedEdge:
        return OrientedEdge(self.target, self.source)

    def unoriented(self) -> frozenset:
        return frozenset((self.source, self.target))


class BoundaryPoint:
    """A point of P^1(Q_p) as a column ``(x : y)``; one coordinate is exactly 1."""

    __slots__ = ("p", "x", "y")

    def __init__(self, p: int, x, y=1):
        if _is_zero(x) and _is_zero(y):
            raise ValueError("(0 : 0) is not a point of P^1")
        vx, vy = padic_valuation(x, p), padic_valuation(y, p)
        if vy <= vx:
            x, y = _exactify(x / y if not isinstance(y, int) else _div(x, y)), 1
        else:
            x, y = 1, _exactify(_div(y, x))
        self.p, self.x, self.y = p, x, y

    @classmethod
    def infinity(cls, p: int) -> BoundaryPoint:
        return cls(p, 1, 0)

    def is_infinity(self) -> bool:
        return self.x == 1 and _is_zero(self.y)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if (self.y == 1 and not isinstance(self.y, PadicNumber)) != \
                (other.y == 1 and not isinstance(other.y, PadicNumber)):
            # the normalised coordinate differs, unless both are (1 : 1)
            return self.x == other.x and self.y == other.y
        return self.x == other.x and self.y == other.y

    __hash__ = None

    def __repr__(self):
        return f"BoundaryPoint({self.x!r} : {self.y!r})"

    def column(self) -> tuple:
        return (self.x, self.y)


def _div(x, y):
    if isinstance(x, int) and isinstance(y, int):
        return Fraction(x, y)
    return x / y


def _exactify(x):
    return Fraction(x) if isinstance(x, int) else x


@dataclass(frozen=True)
class TreePath:
    vertices: tuple

    def __len__(self):
        return max(len(self.vertices) - 1, 0)

    def __iter__(self) -> Iterator[VertexNF]:
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]


# operations


def vertex_from_matrix(g: Matrix, p: int) -> VertexNF:
    """Vertex of the lattice spanned by the columns of ``g``.

    Column reduction: the column whose bottom entry has the least valuation is
    the pivot ``(beta, delta)``; then the class is ``(v(det) - 2 v(delta),
    beta / delta)``.
    """
    (alpha, beta), (gamma, delta) = g
    if _is_zero(gamma) and _is_zero(delta):
        raise SingularMatrix("bottom row vanishes")
    det = mat_det(g)
    if _is_zero(det):
        raise SingularMatrix("matrix is not invertible")
    if padic_valuation(gamma, p) < padic_valuation(delta, p):
        beta, delta = alpha, gamma
    vd = padic_valuation(delta, p)
    a = padic_valuation(det, p) - 2 * vd
    return VertexNF(p, a, residue(_div(beta, delta), p, a))


def v_n(p: int, n: int) -> VertexNF:
    return VertexNF(p, n, Fraction(0))


def base_vertex(p: int) -> VertexNF:
    return v_n(p, 0)


def relative_position(v: VertexNF, w: VertexNF) -> VertexNF:
    """The vertex ``h_v^{-1} w`` where ``h_v`` is the normal-form matrix of ``v``."""
    p = v.p
    b = (w.b - v.b) / Fraction(p) ** v.a
    return VertexNF(p, w.a - v.a, b)


def distance(v: VertexNF, w: VertexNF) -> int:
    p = v.p
    dv = padic_valuation(w.b - v.b, p)
    return (w.a - v.a) - 2 * min(w.a - v.a, dv - v.a, 0)


def neighbors(v: VertexNF) -> list[VertexNF]:
    p, a, b = v.p, v.a, v.b
    step = Fraction(p) ** a
    out = [VertexNF(p, a + 1, b + step * t) for t in range(p)]
    out.append(VertexNF(p, a - 1, b))
    return out


def act(g: Matrix, x):
    """Action of an invertible matrix on a vertex, oriented edge or boundary point."""
    if isinstance(x, VertexNF):
        return vertex_from_matrix(mat_mul(g, x.matrix()), x.p)
    if isinstance(x, OrientedEdge):
        return OrientedEdge(act(g, x.source), act(g, x.target))
    if isinstance(x, BoundaryPoint):
        if _is_zero(mat_det(g)):
            raise SingularMatrix("matrix is not invertible")
        return BoundaryPoint(x.p, *mat_apply(g, x.column()))
    raise TypeError(f"cannot act on {type(x).__name__}")


def path_between(v: VertexNF, w: VertexNF) -> TreePath:
    """The unique non-backtracking path from ``v`` to ``w``."""
    p = v.p
    rel = relative_position(v, w)
    m = rel.a if rel.b == 0 else min(rel.a, padic_valuation(rel.b, p))
    step = 1 if m >= 0 else -1
    rel_path = [v_n(p, j) for j in range(0, m + step, step)] if m != 0 else [v_n(p, 0)]
    rel_path += [VertexNF(p, j, rel.b) for j in range(m + 1, rel.a + 1)]
    h = v.matrix()
    return TreePath(tuple(act(h, u) for u in rel_path))


def ball(center: VertexNF, radius: int) -> list[VertexNF]:
    """All vertices within ``radius`` of ``center`` in BFS order."""
    seen = {center}
    order = [center]
    frontier = [center]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in neighbors(u):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return order


def ball_to_dot(center: VertexNF, radius: int, highlight: Iterable[VertexNF] = ()) -> str:
    verts = ball(center, radius)
    index = {v: i for i, v in enumerate(verts)}
    hl = set(highlight)
    lines = [f"graph tree_p{center.p} {{"]
    for v, i in index.items():
        extra = ", color=red" if v in hl else ""
        lines.append(f'  n{i} [label="{v.label()}"{extra}];')
    for v, i in index.items():
        for w in neighbors(v):
            j = index.get(w)
            if j is not None and i < j:
                lines.append(f"  n{i} -- n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# geodesics


def _frame(x: BoundaryPoint, y: BoundaryPoint) -> Matrix:
    """A matrix sending 0 to ``x`` and infinity to ``y``."""
    if x == y:
        raise EqualBoundaryPoints("a geodesic needs two distinct boundary points")
    g = ((y.x, x.x), (y.y, x.y))
    det = mat_det(g)
    if _is_zero(det):
        raise EqualBoundaryPoints("boundary points coincide to working precision")
    return g


def geodesic_segment(x: BoundaryPoint, y: BoundaryPoint, lo: int, hi: int) -> TreePath:
    """Window ``[lo, hi]`` of the geodesic between ``x`` and ``y``.

    Index ``n`` is ``g v_n`` for the frame ``g`` sending 0 to ``x`` and
    infinity to ``y``; for ``(0, inf)`` it is ``v_n`` itself.  Increasing the
    index moves toward ``x``.
    """
    if hi < lo:
        raise ValueError("hi must be >= lo")
    g = _frame(x, y)
    p = x.p
    return TreePath(tuple(vertex_from_matrix(mat_mul(g, diag(Fraction(p) ** n, 1)), p)
                          for n in range(lo, hi + 1)))


def geodesic_projection(v: VertexNF, x: BoundaryPoint, y: BoundaryPoint) -> tuple[int, int]:
    """``(index, distance)`` of the nearest geodesic vertex to ``v``."""
    g = _frame(x, y)
    rel = vertex_from_matrix(mat_mul(mat_inv(g), v.matrix()), v.p)
    if rel.b == 0:
        return rel.a, 0
    vb = padic_valuation(rel.b, v.p)
    return vb, rel.a - vb


def dist_to_geodesic(v: VertexNF, x: BoundaryPoint, y: BoundaryPoint) -> int:
    return geodesic_projection(v, x, y)[1]


def dist_to_path(v: VertexNF, path: Iterable[VertexNF]) -> int:
    return min(distance(v, w) for w in path)


def dist_edge_to_path(e: OrientedEdge, path: Iterable[VertexNF]) -> int:
    path = list(path)
    return max(dist_to_path(e.source, path), dist_to_path(e.target, path))


def dist_edge_to_geodesic(e: OrientedEdge, x: BoundaryPoint, y: BoundaryPoint) -> int:
    return max(dist_to_geodesic(e.source, x, y), dist_to_geodesic(e.target, x, y))


def e_infinity(p: int) -> OrientedEdge:
    return OrientedEdge(v_n(p, 0), v_n(p, -1))


def lattice_vertex(vectors: Sequence[tuple], p: int) -> VertexNF:
    """Vertex of the Z_p-lattice spanned by a finite set of column vectors."""
    cols = [c for c in vectors if not (_is_zero(c[0]) and _is_zero(c[1]))]
    if not cols:
        raise SingularMatrix("no nonzero generators")
    # pivot: least valuation in the bottom coordinate
    piv = min(range(len(cols)), key=lambda i: padic_valuation(cols[i][1], p))
    beta, delta = cols[piv]
    if _is_zero(delta):
        raise SingularMatrix("generators span a line")
    ratio = _div(beta, delta)
    # clear bottoms: c - (c_y/delta) * pivot leaves (c_x - c_y * ratio, 0)
    tops = [c[0] - c[1] * ratio for i, c in enumerate(cols) if i != piv]
    tops = [t for t in tops if not _is_zero(t)]
    if not tops:
        raise SingularMatrix("generators span a line")
    vt = min(padic_valuation(t, p) for t in tops)
    a = vt - padic_valuation(delta, p)
    return VertexNF(p, a, residue(ratio, p, a))
