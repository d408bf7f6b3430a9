"""Heegner points on the p-adically uniformized Shimura curve, through the
tree: a fixed splitting B_p = M_2(Q_p), the quotient graph of the tree by
Gamma = R_0[1/p]^x, and the equidistribution harness.

Vertex equivalence is decided exactly.  If gamma carries the lattice of v1 onto
p^e times the lattice of v2, then v_p(nrd gamma) = 2e + a2 - a1.  Scaling by p
makes that valuation 0 or 1, so a witness is an element of reduced norm 1 or p
in an explicit Z-lattice I(v1, v2), found by Fincke-Pohst.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import kernels
from .bttree import (
    VertexNF,
    act,
    base_vertex,
    lattice_vertex,
    mat_inv,
    mat_mul,
    neighbors,
)
from .errors import EnumerationBoundExceeded, InvariantBreach, SplitAtP
from .lattice import apply_rows, lll_gram, padic_congruence
from .padic import (
    DEFAULT_PRECISION,
    PadicNumber,
    QuadExtElement,
    canonical_sqrt_in_ext,
    hensel_sqrt,
    is_square,
    padic_valuation,
)
from .quadforms import is_fundamental, kronecker
from .quatdef import (
    OrientationAtQ,
    Q4,
    QuatOrder,
    QuaternionAlgebra,
    check_embedding_inputs,
    construct_algebra_and_maximal_order,
    embeddings_in_order,
    gross_gram,
    orientation_at_q,
)

Matrix = tuple


def rat(x) -> str:
    """Exact rational as "num/den"."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _pad(p, x, prec):
    return PadicNumber.from_rational(p, Fraction(x), 1, prec)


def _mat_scale(m, s):
    return tuple(tuple(e * s for e in row) for row in m)


def _mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(a, b))


def _min_val(m, p):
    return min(padic_valuation(e, p) for row in m for e in row)


@dataclass(frozen=True)
class Splitting:
    """Images of 1, i, j, ij in M_2(Q_p), integral on the maximal order."""

    p: int
    images: tuple

    def __call__(self, x: Q4) -> Matrix:
        out = None
        for c, m in zip(x, self.images):
            if c == 0:
                continue
            term = _mat_scale(m, Fraction(c))
            out = term if out is None else _mat_add(out, term)
        if out is None:
            z = PadicNumber.zero(self.p)
            return ((z, z), (z, z))
        return out


def _raw_splitting(alg: QuaternionAlgebra, p: int, prec: int):
    a, b = alg.a, alg.b
    one = ((_pad(p, 1, prec), _pad(p, 0, prec)), (_pad(p, 0, prec), _pad(p, 1, prec)))
    A = _pad(p, a, prec)
    if is_square(A):
        r = hensel_sqrt(A)
        I = ((r, _pad(p, 0, prec)), (_pad(p, 0, prec), -r))
        J = ((_pad(p, 0, prec), _pad(p, b, prec)), (_pad(p, 1, prec), _pad(p, 0, prec)))
    else:
        # least y >= 0 with b + a y^2 a nonzero square
        for y in range(0, 10 * p + 50):
            val = b + a * y * y
            if val != 0 and is_square(_pad(p, val, prec)):
                break
        else:
            raise ArithmeticError("no splitting witness found")
        x = hensel_sqrt(_pad(p, val, prec))
        I = ((_pad(p, 0, prec), A), (_pad(p, 1, prec), _pad(p, 0, prec)))
        Y = _pad(p, y, prec)
        J = ((x, -(A * Y)), (Y, -x))
    K = mat_mul(I, J)
    return (one, I, J, K)


@dataclass
class ShimuraContext:
    q: int
    p: int
    precision: int
    algebra: QuaternionAlgebra
    R0: QuatOrder
    iota: Splitting
    orientation: OrientationAtQ

    def nrd_bil(self, u: Q4, v: Q4):
        return self.algebra.bil(u, v)


@lru_cache(maxsize=None)
def shimura_context(q: int, p: int, precision: int = DEFAULT_PRECISION) -> ShimuraContext:
    if q == p:
        raise ValueError("p must differ from q")
    alg, R0 = construct_algebra_and_maximal_order(q)
    raw = Splitting(p, _raw_splitting(alg, p, precision))
    cols = []
    for e in R0.basis:
        m = raw(e)
        cols.append((m[0][0], m[1][0]))
        cols.append((m[0][1], m[1][1]))
    h = lattice_vertex(cols, p).matrix()
    hi = mat_inv(h)
    images = tuple(mat_mul(mat_mul(hi, m), h) for m in raw.images)
    iota = Splitting(p, images)
    for e in R0.basis:
        if _min_val(iota(e), p) < 0:
            raise InvariantBreach("splitting is not integral on the maximal order")
    return ShimuraContext(q, p, precision, alg, R0, iota, orientation_at_q(q))


# lattices I(v1, v2)


def hom_lattice(ctx: ShimuraContext, v1: VertexNF, v2: VertexNF, e: int
                ) -> tuple[list[Q4], int]:
    """Z-basis of {x in R0[1/p] : iota(x) L1 in p^e L2}, with the scale s such that
    the basis is p^-s times integral R0-combinations.  Returns (basis, s)."""
    p = ctx.p
    h1, h2 = v1.matrix(), v2.matrix()
    h2i, h1i = mat_inv(h2), mat_inv(h1)
    s = max(0, -(e + _min_val(h2, p) + _min_val(h1i, p)))
    scale = Fraction(p) ** (-s - e)
    A = [_mat_scale(mat_mul(mat_mul(h2i, ctx.iota(b)), h1), scale) for b in ctx.R0.basis]

    def functional(r, c):
        def f(cv):
            tot = None
            for ci, Ai in zip(cv, A):
                if ci:
                    term = Ai[r][c] * ci
                    tot = term if tot is None else tot + term
            return Fraction(0) if tot is None else tot
        return f

    funcs = [functional(r, c) for r in range(2) for c in range(2)]
    ident = [[int(i == j) for j in range(4)] for i in range(4)]
    basis_c = padic_congruence(ident, funcs, p)
    return [ctx.R0.element(c) for c in basis_c], s


def _integral_gram(ctx, elems):
    return [[int(ctx.algebra.bil(u, v)) for v in elems] for u in elems]


def elements_of_norm_in(ctx: ShimuraContext, elems: Sequence[Q4], s: int, n: int) -> list[Q4]:
    """Elements p^-s * (Z-combination of elems) with reduced norm exactly n."""
    G = _integral_gram(ctx, elems)
    U = lll_gram(G)
    red = apply_rows(U, elems)
    G = _integral_gram(ctx, red)
    target = 2 * n * ctx.p ** (2 * s)
    scale = Fraction(1, ctx.p ** s)
    out = []
    for c, val in kernels.short_vectors(G, target):
        if val == target:
            out.append(tuple(scale * sum(Fraction(c[i]) * red[i][k] for i in range(4))
                             for k in range(4)))
    return out


def vertex_equivalent(v1: VertexNF, v2: VertexNF, ctx: ShimuraContext,
                      bound: int | None = None) -> tuple[bool, Q4 | None]:
    """Decide whether some gamma in Gamma carries v1 to v2; return a witness."""
    from .bttree import distance

    p = ctx.p
    if v1 == v2:
        return True, ctx.algebra.one()
    e0 = -((v2.a - v1.a) // 2)  # ceil((a1 - a2)/2)
    par = v2.a - v1.a + 2 * e0
    if bound is None:
        bound = p ** (distance(v1, v2) + 4)
    if p ** par > bound:
        raise EnumerationBoundExceeded(f"witness norm {p ** par} exceeds bound", bound)
    elems, s = hom_lattice(ctx, v1, v2, e0)
    cands = elements_of_norm_in(ctx, elems, s, p ** par)
    for x in sorted(cands):
        if act(ctx.iota(x), v1) == v2:
            return True, x
    if cands:
        raise InvariantBreach("norm-matched element failed to map the lattice")
    return False, None


def local_order(ctx: ShimuraContext, v: VertexNF) -> QuatOrder:
    elems, s = hom_lattice(ctx, v, v, 0)
    scale = Fraction(1, ctx.p ** s)
    basis = tuple(tuple(scale * c for c in x) for x in elems)
    return QuatOrder(ctx.algebra, basis).lll()


def stabilizer_units(ctx: ShimuraContext, v: VertexNF) -> list[Q4]:
    elems, s = hom_lattice(ctx, v, v, 0)
    return sorted(elements_of_norm_in(ctx, elems, s, 1))


# the quotient graph


@dataclass
class VertexClass:
    id: int
    rep: VertexNF
    units: list
    order: QuatOrder

    @property
    def stab(self) -> int:
        return len(self.units)

    @property
    def mass(self) -> Fraction:
        return Fraction(1, self.stab)


@dataclass
class EdgeClass:
    id: int
    source: int
    target: int
    orbit: tuple  # neighbours of the source representative in this orbit
    reverse: int = -1


@dataclass
class QuotientGraph:
    q: int
    p: int
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    brandt: list = field(default_factory=list)

    @property
    def total_mass(self) -> Fraction:
        return sum((v.mass for v in self.vertices), Fraction(0))

    def classify(self, v: VertexNF, ctx: ShimuraContext | None = None) -> tuple[int, Q4]:
        ctx = ctx or shimura_context(self.q, self.p)
        for vc in self.vertices:
            ok, w = vertex_equivalent(v, vc.rep, ctx)
            if ok:
                return vc.id, w
        raise InvariantBreach("vertex does not classify into any known class")

    def is_connected(self) -> bool:
        seen, todo = {0}, [0]
        while todo:
            i = todo.pop()
            for j, n in enumerate(self.brandt[i]):
                if n and j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == len(self.vertices)

    def to_json(self) -> dict:
        return {
            "q": self.q, "p": self.p,
            "vertices": [{"id": v.id, "rep": v.rep.label(), "stab": v.stab,
                          "mass": rat(v.mass)} for v in self.vertices],
            "edges": [{"id": e.id, "source": e.source, "target": e.target,
                       "orbit_size": len(e.orbit), "reverse": e.reverse} for e in self.edges],
            "brandt": self.brandt,
            "total_mass": rat(self.total_mass),
        }


def eichler_mass(q: int) -> Fraction:
    """Mass of the maximal order of the definite algebra of prime discriminant q."""
    return Fraction(q - 1, 24)


@lru_cache(maxsize=None)
def quotient_graph(q: int, p: int) -> QuotientGraph:
    ctx = shimura_context(q, p)
    qg = QuotientGraph(q, p)
    v0 = base_vertex(p)

    def new_class(v):
        vc = VertexClass(len(qg.vertices), v, stabilizer_units(ctx, v), local_order(ctx, v))
        qg.vertices.append(vc)
        return vc

    new_class(v0)
    todo = [0]
    witnesses = {}
    while todo:
        i = todo.pop(0)
        vc = qg.vertices[i]
        for w in neighbors(vc.rep):
            for other in qg.vertices:
                ok, wit = vertex_equivalent(w, other.rep, ctx)
                if ok:
                    witnesses[(i, w)] = (other.id, wit)
                    break
            else:
                nc = new_class(w)
                witnesses[(i, w)] = (nc.id, ctx.algebra.one())
                todo.append(nc.id)
    n = len(qg.vertices)
    qg.brandt = [[0] * n for _ in range(n)]
    for vc in qg.vertices:
        mats = [ctx.iota(u) for u in vc.units]
        remaining = list(neighbors(vc.rep))
        while remaining:
            w = remaining[0]
            orbit = sorted({act(m, w) for m in mats})
            remaining = [x for x in remaining if x not in orbit]
            tgt = witnesses[(vc.id, w)][0]
            qg.edges.append(EdgeClass(len(qg.edges), vc.id, tgt, tuple(orbit)))
            qg.brandt[vc.id][tgt] += len(orbit)
    # reverse edges: move (w -> rep) to the target representative
    for ec in qg.edges:
        w = ec.orbit[0]
        j, wit = witnesses[(ec.source, w)]
        back = act(ctx.iota(wit), qg.vertices[ec.source].rep)
        for other in qg.edges:
            if other.source == j and back in other.orbit:
                ec.reverse = other.id
                break
    return qg


# Heegner points


@dataclass(frozen=True)
class HeegnerPoint:
    d: int
    tau: QuadExtElement
    x: Q4
    embedding_class: int
    reduced_vertex: VertexNF
    quotient_class: int
    residue_point: tuple | None = None


def fixed_point(M: Matrix, d: int, p: int, precision: int = DEFAULT_PRECISION) -> QuadExtElement:
    """tau with M (tau, 1)^t = sqrt(d) (tau, 1)^t for the canonical sqrt(d) in Q_{p^2}."""
    dd = PadicNumber.from_rational(p, Fraction(d), 1, precision)
    if is_square(dd):
        raise SplitAtP(f"d = {d} is a square in Q_{p}; the fixed points lie on the boundary")
    lam = canonical_sqrt_in_ext(d, p, precision)
    (a, b), (c, e) = M
    c = PadicNumber.coerce(p, c, precision) if not isinstance(c, PadicNumber) else c
    if c.is_zero():
        raise SplitAtP("matrix has a rational eigenvector")
    tau = (lam - e) * QuadExtElement(p, c.inverse(), 0)
    return tau


def mobius(g: Matrix, tau: QuadExtElement) -> QuadExtElement:
    (a, b), (c, d) = g
    return (tau * a + b) / (tau * c + d)


def reduce_to_vertex(W: Matrix, p: int) -> VertexNF:
    """Fixed vertex of the inert torus generated by W = iota((d + sqrt d)/2)."""
    e1 = (Fraction(1), Fraction(0))
    We1 = (W[0][0], W[1][0])
    return lattice_vertex([e1, We1], p)


def residue_in_tube(tau: QuadExtElement, v: VertexNF) -> tuple:
    """Reduction of h_v^-1 tau in F_{p^2} minus F_p."""
    p = v.p
    t = mobius(mat_inv(v.matrix()), tau)
    x, y = t.x, t.y
    if padic_valuation(x, p) < 0 or padic_valuation(y, p) != 0:
        raise InvariantBreach("fixed point does not reduce into the tube of its vertex")
    return (int(x.residue(1)) % p, int(y.residue(1)) % p)


def heegner_set(d: int, q: int, p: int, precision: int = DEFAULT_PRECISION) -> list[HeegnerPoint]:
    if not check_embedding_inputs(d, q, p):
        return []
    ctx = shimura_context(q, p, precision)
    qg = quotient_graph(q, p)
    out = []
    for vc in qg.vertices:
        # points reducing to the same vertex are Gamma-equivalent only through its
        # stabilizer, so distinctness means disjoint conjugation orbits
        claimed = set()
        for x, _ in embeddings_in_order(d, vc.order, ctx.orientation, vc.units):
            orbit = {ctx.algebra.conjugate_by(u, x) for u in vc.units}
            if orbit & claimed:
                raise InvariantBreach("two Heegner points are Gamma-equivalent")
            claimed |= orbit
            W = ctx.iota(x)
            sqrt_d = ctx.iota(tuple(2 * c - (d if k == 0 else 0) for k, c in enumerate(x)))
            tau = fixed_point(sqrt_d, d, p, precision)
            v = reduce_to_vertex(W, p)
            if v != vc.rep:
                raise InvariantBreach("embedding in a local order must fix its vertex")
            out.append(HeegnerPoint(d, tau, x, len(out), v, vc.id, residue_in_tube(tau, v)))
    return out


def residue_orbits(ctx: ShimuraContext, vc: VertexClass) -> list[tuple]:
    """Orbits of the stabilizer on F_{p^2} minus F_p (points of the tube at rep)."""
    from .quatdef import Fq2

    p = ctx.p
    F = Fq2(p)
    h, hi = vc.rep.matrix(), mat_inv(vc.rep.matrix())
    mats = []
    for u in vc.units:
        m = mat_mul(mat_mul(hi, ctx.iota(u)), h)
        mats.append(tuple(tuple(int(PadicNumber.coerce(p, e).residue(1)) % p
                                if not isinstance(e, PadicNumber) else int(e.residue(1)) % p
                                for e in row) for row in m))
    pts = [z for z in F.elements() if z[1] != 0]
    remaining = set(pts)
    orbits = []
    for z in pts:
        if z not in remaining:
            continue
        orb = {_mobius_ff(F, m, z) for m in mats}
        remaining -= orb
        orbits.append(tuple(sorted(orb)))
    return orbits


def _mobius_ff(F, m, z):
    (a, b), (c, d) = m
    num = F.add(F.scal(a, z), (b % F.q, 0))
    den = F.add(F.scal(c, z), (d % F.q, 0))
    return F.mul(num, _ff_inv(F, den))


def _ff_inv(F, z):
    for w in F.elements():
        if F.mul(z, w) == (1, 0):
            return w
    raise ZeroDivisionError("zero in F_{q^2}")


# equidistribution


@lru_cache(maxsize=None)
def gross_theta(q: int, p: int, bound: int) -> tuple:
    """Per vertex class: r_i(n) = #{s in S_i : nrd s = n} for n <= bound."""
    qg = quotient_graph(q, p)
    out = []
    for vc in qg.vertices:
        _, G = gross_gram(vc.order)
        r2 = kernels.theta_counts(G, 2 * bound)
        out.append(tuple(r2[2 * n] for n in range(bound + 1)))
    return tuple(out)


def heegner_class_counts(d: int, q: int, p: int, theta: Sequence[Sequence[int]] | None = None
                         ) -> list[int]:
    """Number of Heegner points of discriminant d in each quotient vertex class.

    For fundamental d other than -3, -4 every embedding is optimal and the
    conjugation action of R_i^x is free modulo +-1; s and -s carry opposite
    orientations, so the count is r_i(|d|) / |R_i^x|.
    """
    if not check_embedding_inputs(d, q, p):
        return []
    qg = quotient_graph(q, p)
    if not is_fundamental(d) or d in (-3, -4):
        # non-maximal orders need the optimality filter: enumerate directly
        pts = heegner_set(d, q, p)
        return [sum(1 for h in pts if h.quotient_class == vc.id) for vc in qg.vertices]
    theta = theta or gross_theta(q, p, -d)
    out = []
    for vc, r in zip(qg.vertices, theta):
        n, rem = divmod(r[-d], vc.stab)
        if rem:
            raise InvariantBreach("representation count not divisible by the unit group")
        out.append(n)
    return out


def total_variation(counts: Sequence[int], masses: Sequence[Fraction]) -> float:
    tot = sum(counts)
    mt = sum(masses)
    if tot == 0:
        return 0.0
    return 0.5 * sum(abs(c / tot - float(m / mt)) for c, m in zip(counts, masses))


def eligible_discriminants(q: int, p: int, dmin: int, dmax: int) -> list[int]:
    """Fundamental d in [dmin, dmax] with gcd(d, pq) = 1, inert at p and at q."""
    out = []
    for d in range(dmax, dmin - 1, -1):
        if d % 4 not in (0, 1) or d in (-3, -4) or math.gcd(d, p * q) != 1:
            continue
        if kronecker(d, p) != -1 or kronecker(d, q) != -1:
            continue
        if is_fundamental(d):
            out.append(d)
    return out


def equidist_report(ds: Sequence[int], q: int, p: int,
                    buckets: Sequence[tuple[int, int]] | None = None) -> dict:
    """Per-d class frequencies against mass proportions, TV per bucket, and trend."""
    if not ds:
        return {"q": q, "p": p, "discriminants": [], "buckets": [], "trend": None}
    qg = quotient_graph(q, p)
    masses = [vc.mass for vc in qg.vertices]
    mt = sum(masses)
    bound = max(-d for d in ds)
    theta = gross_theta(q, p, bound)
    rows = []
    for d in ds:
        counts = heegner_class_counts(d, q, p, theta)
        rows.append({"d": d, "count": sum(counts), "classes": counts,
                     "tv": total_variation(counts, masses)})
    if buckets is None:
        buckets = [(min(-d for d in ds), max(-d for d in ds))]
    brows = []
    for lo, hi in buckets:
        sel = [r for r in rows if lo <= -r["d"] <= hi and r["count"]]
        pooled = [sum(r["classes"][i] for r in sel) for i in range(len(masses))]
        brows.append({
            "abs_d_range": [lo, hi], "n": len(sel),
            "tv": (sum(r["tv"] for r in sel) / len(sel)) if sel else None,
            "pooled_tv": total_variation(pooled, masses) if sel else None,
            "pooled_frequencies": [c / sum(pooled) for c in pooled] if sel and sum(pooled) else None,
        })
    tvs = [b["tv"] for b in brows if b["tv"] is not None]
    trend = None
    if len(tvs) >= 2:
        trend = {"decreasing": all(a > b for a, b in zip(tvs, tvs[1:])), "tv": tvs}
    report = {"q": q, "p": p, "masses": [rat(m) for m in masses],
              "predicted": [float(m / mt) for m in masses],
              "discriminants": rows, "buckets": brows, "trend": trend}
    if len(qg.vertices) == 1:
        report["refinement"] = residue_refinement(ds, q, p)
    return report


def residue_refinement(ds: Sequence[int], q: int, p: int, max_abs_d: int = 2000) -> dict:
    """Distribution of Heegner points over stabilizer orbits in the tube of the
    (single) vertex class, against the orbit-size prediction."""
    ctx = shimura_context(q, p)
    qg = quotient_graph(q, p)
    vc = qg.vertices[0]
    orbits = residue_orbits(ctx, vc)
    index = {z: i for i, orb in enumerate(orbits) for z in orb}
    counts = [0] * len(orbits)
    used = [d for d in ds if -d <= max_abs_d]
    for d in used:
        for hp in heegner_set(d, q, p):
            counts[index[hp.residue_point]] += 1
    sizes = [len(o) for o in orbits]
    tot = sum(sizes)
    return {"orbits": [list(map(list, o)) for o in orbits],
            "predicted": [s / tot for s in sizes],
            "counts": counts,
            "tv": total_variation(counts, [Fraction(s) for s in sizes]),
            "discriminants_used": len(used)}
