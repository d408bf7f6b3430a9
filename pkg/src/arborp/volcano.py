"""Volcanoes from split tori, Ihara-Shintani cycles, and the CM-point statistic.

For p split in the order of discriminant d, the stabilizer of tau in
PGL_2^+(Z[1/p]) is generated by psi(u) where (u) = p-part^k.  Its quotient of
the tree is a (p+1)-volcano whose rim has length k.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from .bttree import (
    VertexNF,
    act,
    distance,
    geodesic_projection,
    geodesic_segment,
    neighbors,
)
from .embeddings import Split, psi_from_form, torus_fixed_data
from .errors import ConductorDivisibleByP, NotSplit, UnsupportedUnits
from .quadforms import (
    CMPoint,
    QuadForm,
    check_discriminant,
    compose,
    conductor,
    pic_of_s_order,
    principal_form,
    cm_point,
    splitting_type,
)

Node = tuple  # (rim index, descent word)


def _check_volcano_input(d: int, p: int) -> None:
    check_discriminant(d)
    if d in (-3, -4):
        raise UnsupportedUnits(f"d = {d} has extra roots of unity; the volcano quotient needs units +-1")
    if conductor(d) % p == 0:
        raise ConductorDivisibleByP(f"p = {p} divides the conductor of d = {d}")
    if splitting_type(d, p) != "split":
        raise NotSplit(f"p = {p} must split in the order of discriminant {d}")


@dataclass
class VolcanoGraph:
    d: int
    p: int
    k: int
    m: int
    nodes: list = field(default_factory=list)
    depth: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)  # multigraph edge list, loops allowed

    def conductor_of(self, node) -> int:
        return self.p ** self.depth[node]

    def cm_discriminant(self, node) -> int:
        return self.d * self.p ** (2 * self.depth[node])

    def degree(self, node) -> int:
        return sum((a == node) + (b == node) for a, b in self.edges)

    def rim(self) -> list:
        return [n for n in self.nodes if self.depth[n] == 0]

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        for n in self.nodes:
            g.add_node(n, depth=self.depth[n])
        g.add_edges_from(self.edges)
        return g

    def to_dot(self) -> str:
        index = {n: i for i, n in enumerate(self.nodes)}
        lines = [f"graph volcano_d{-self.d}_p{self.p} {{"]
        for n, i in index.items():
            dep = self.depth[n]
            style = ", color=red, penwidth=2" if dep == 0 else ""
            lines.append(f'  n{i} [label="{_node_label(n)}", depth={dep}{style}];')
        for a, b in self.edges:
            rim = self.depth[a] == 0 and self.depth[b] == 0
            lines.append(f"  n{index[a]} -- n{index[b]}{' [color=red]' if rim else ''};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _node_label(n) -> str:
    if isinstance(n, VertexNF):
        return n.label()
    i, word = n
    return f"{i}:" + "".join(map(str, word))


def build_volcano(d: int, p: int, m: int) -> VolcanoGraph:
    """The volcano assembled from regularity rules: rim of length k, p-1 then p children."""
    _check_volcano_input(d, p)
    if m < 0:
        raise ValueError("depth must be >= 0")
    k = pic_of_s_order(d, p).k
    g = VolcanoGraph(d, p, k, m)
    level = [(i, ()) for i in range(k)]
    for n in level:
        g.nodes.append(n)
        g.depth[n] = 0
    for i in range(k):
        g.edges.append(((i, ()), ((i + 1) % k, ())))
    for depth in range(1, m + 1):
        nxt = []
        width = p - 1 if depth == 1 else p
        for parent in level:
            for c in range(width):
                child = (parent[0], parent[1] + (c,))
                g.nodes.append(child)
                g.depth[child] = depth
                g.edges.append((parent, child))
                nxt.append(child)
        level = nxt
    return g


@dataclass(frozen=True)
class TorusQuotient:
    """The geodesic of psi_tau and the translation generating the stabilizer."""

    d: int
    p: int
    k: int
    form: QuadForm
    translation: tuple
    fixed: Split
    step: int  # index shift of the translation along the geodesic


def translation_length(g, data: Split, index: int = 0) -> int:
    v = geodesic_segment(data.x, data.y, index, index)[0]
    return distance(v, act(g, v))


def torus_quotient(d: int, p: int, form: QuadForm | None = None) -> TorusQuotient:
    _check_volcano_input(d, p)
    pic = pic_of_s_order(d, p)
    form = form or principal_form(d)
    e = psi_from_form(form, p)
    data = torus_fixed_data(e)
    x, y = pic.u_norm_certificate
    u = e.psi_order(x, y)
    v0 = geodesic_segment(data.x, data.y, 0, 0)[0]
    step = geodesic_projection(act(u, v0), data.x, data.y)[0]
    return TorusQuotient(d, p, pic.k, form, u, data, step)


def unit_quotient_translation(d: int, p: int) -> tuple:
    """psi(u/u') = psi(u)^2 / p^k, the element the quotient is sometimes phrased with."""
    tq = torus_quotient(d, p)
    u = tq.translation
    uu = tuple(tuple(sum(u[i][l] * u[l][j] for l in range(2)) for j in range(2)) for i in range(2))
    s = Fraction(1, p ** tq.k)
    return tuple(tuple(x * s for x in row) for row in uu), tq


def build_volcano_from_tree(d: int, p: int, m: int) -> VolcanoGraph:
    """Quotient of the radius-m neighbourhood of the geodesic by the translation psi(u)."""
    if m < 0:
        raise ValueError("depth must be >= 0")
    tq = torus_quotient(d, p)
    data, k, T = tq.fixed, tq.k, tq.translation
    if abs(tq.step) != k:
        raise ArithmeticError(f"translation moves the geodesic by {tq.step}, expected {k}")
    sign = 1 if tq.step > 0 else -1
    T_inv = _inverse_integral(T)

    def canon(v: VertexNF) -> tuple[VertexNF, int]:
        idx, dist = geodesic_projection(v, data.x, data.y)
        shifts = -(idx // k)  # bring idx into [0, k)
        g = T if shifts * sign > 0 else T_inv
        for _ in range(abs(shifts)):
            v = act(g, v)
        return v, dist

    window = list(geodesic_segment(data.x, data.y, 0, k - 1))
    out = VolcanoGraph(d, p, k, m)
    seen = {}
    frontier = []
    for v in window:
        seen[v] = 0
        frontier.append(v)
    order = list(window)
    while frontier:
        nxt = []
        for v in frontier:
            for w in neighbors(v):
                c, dist = canon(w)
                if dist > m or c in seen:
                    continue
                seen[c] = dist
                order.append(c)
                nxt.append(c)
        frontier = nxt
    oriented = Counter()
    for v in order:
        for w in neighbors(v):
            c, dist = canon(w)
            if dist <= m:
                oriented[(v, c)] += 1
    for v in order:
        out.nodes.append(v)
        out.depth[v] = seen[v]
    for (a, b), cnt in sorted(oriented.items()):
        if a == b:
            out.edges.extend([(a, a)] * (cnt // 2))
        elif a < b:
            if oriented[(b, a)] != cnt:
                raise ArithmeticError("oriented edge counts do not pair up")
            out.edges.extend([(a, b)] * cnt)
    return out


def _inverse_integral(g):
    (a, b), (c, d) = g
    det = Fraction(a * d - b * c)
    return ((d / det, -b / det), (-c / det, a / det))


def volcanoes_isomorphic(g1: VolcanoGraph, g2: VolcanoGraph) -> bool:
    return nx.is_isomorphic(g1.to_networkx(), g2.to_networkx(),
                            node_match=lambda x, y: x["depth"] == y["depth"])


# Ihara-Shintani cycles


@dataclass(frozen=True)
class ISCycle:
    d: int
    p: int
    coset: tuple
    cm_points: tuple

    @property
    def rim(self) -> tuple:
        """Closed walk along the coset by composition with the prime form."""
        return self.coset + self.coset[:1]


def is_cycles(d: int, p: int) -> list[ISCycle]:
    _check_volcano_input(d, p)
    pic = pic_of_s_order(d, p)
    return [ISCycle(d, p, c, tuple(cm_point(f) for f in c)) for c in pic.cosets]


def act_on_cycles(cycles: Sequence[ISCycle], cls: QuadForm) -> list[int]:
    """Permutation of cycle indices induced by composing with ``cls``."""
    where = {f: i for i, c in enumerate(cycles) for f in c.coset}
    return [where[compose(c.coset[0], cls)] for c in cycles]


# CM-point statistics

INF = math.inf
AREA = math.pi / 3


@dataclass(frozen=True)
class Box:
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: float | Fraction = INF

    @classmethod
    def parse(cls, spec: str) -> Box:
        """``x0,x1,y0,y1`` with ``inf`` allowed for y1."""
        parts = [s.strip() for s in spec.split(",")]
        if len(parts) != 4:
            raise ValueError(f"box spec needs four numbers: {spec!r}")
        y1 = INF if parts[3] in ("inf", "oo") else Fraction(parts[3])
        return cls(Fraction(parts[0]), Fraction(parts[1]), Fraction(parts[2]), y1)

    def spec(self) -> str:
        y1 = "inf" if self.y1 == INF else str(self.y1)
        return f"{self.x0},{self.x1},{self.y0},{y1}"

    def contains(self, z: CMPoint) -> bool:
        if not (self.x0 <= z.re <= self.x1):
            return False
        if not z.im_at_least(self.y0):
            return False
        return self.y1 == INF or z.im_sq <= Fraction(self.y1) ** 2

    def hyperbolic_area(self) -> float:
        return box_area(self)

    def probability(self) -> float:
        return box_area(self) / AREA


def box_area(b: Box) -> float:
    """Hyperbolic area of the box intersected with the standard fundamental domain."""
    x0, x1 = max(float(b.x0), -0.5), min(float(b.x1), 0.5)
    y0, y1 = float(b.y0), float(b.y1)
    if x1 <= x0 or y1 <= y0:
        return 0.0
    inv1 = 0.0 if y1 == INF else 1.0 / y1
    cuts = {x0, x1}
    for y in (y0, y1):
        if 0 < y < 1:
            c = math.sqrt(1 - y * y)
            cuts.update(t for t in (-c, c) if x0 < t < x1)
    pts = sorted(cuts)
    total = 0.0
    for a, c in zip(pts, pts[1:]):
        mid = (a + c) / 2
        floor_y = max(y0, math.sqrt(1 - mid * mid))
        if floor_y >= y1:
            continue
        if y0 >= math.sqrt(1 - mid * mid):
            total += (c - a) * (1.0 / y0 - inv1)
        else:
            # integral of 1/sqrt(1-x^2) - 1/y1
            total += (math.asin(c) - math.asin(a)) - (c - a) * inv1
    return total


def height_prediction(Y) -> float:
    """Probability that a uniformly distributed point of the domain has Im >= Y."""
    return box_area(Box(Fraction(-1, 2), Fraction(1, 2), Fraction(Y), INF)) / AREA


DEFAULT_BOXES = (
    Box(Fraction(-1, 2), Fraction(0), Fraction(1), INF),
    Box(Fraction(-1, 2), Fraction(1, 2), Fraction(1), Fraction(2)),
    Box(Fraction(0), Fraction(1, 2), Fraction(5, 4), INF),
)


def duke_counts(d: int, p: int, Y, boxes: Iterable[Box] = DEFAULT_BOXES) -> dict:
    """Counts of projected cycle CM points in the height region and each box."""
    cycles = is_cycles(d, p)
    boxes = list(boxes)
    height = Box(Fraction(-1, 2), Fraction(1, 2), Fraction(Y), INF)
    points = [z for c in cycles for z in c.cm_points]
    h = len(points)
    rows = []
    for b in [height, *boxes]:
        count = sum(1 for z in points if b.contains(z))
        rows.append({"spec": b.spec(), "predicted": b.probability(),
                     "observed": count / h, "count": count})
    per_cycle = [sum(1 for z in c.cm_points if height.contains(z)) for c in cycles]
    return {"d": d, "h": h, "k": cycles[0].coset.__len__(), "cycles": len(cycles),
            "boxes": rows, "per_cycle_height_counts": per_cycle}


def duke_statistic(ds: Sequence[int], p: int, Y, boxes: Iterable[Box] = DEFAULT_BOXES,
                   mapper=map) -> dict:
    boxes = list(boxes)
    rows = list(mapper(_duke_job, [(d, p, Y, boxes) for d in ds]))
    nbox = 1 + len(boxes)
    summary = []
    for j in range(nbox):
        obs = [r["boxes"][j]["observed"] for r in rows]
        pred = rows[0]["boxes"][j]["predicted"] if rows else None
        if not rows:
            break
        mean = sum(obs) / len(obs)
        pooled = sum(r["boxes"][j]["count"] for r in rows) / sum(r["h"] for r in rows)
        half = len(rows) // 2
        trend = None
        if half:
            small = sum(abs(o - pred) for o in obs[:half]) / half
            large = sum(abs(o - pred) for o in obs[half:]) / (len(obs) - half)
            trend = {"mean_abs_dev_first_half": small, "mean_abs_dev_second_half": large}
        summary.append({"spec": rows[0]["boxes"][j]["spec"], "predicted": pred,
                        "mean_observed": mean, "pooled_observed": pooled,
                        "deviation": mean - pred, "trend": trend})
    return {"p": p, "Y": str(Fraction(Y)), "discriminants": rows, "summary": summary}


def _duke_job(args):
    d, p, Y, boxes = args
    return duke_counts(d, p, Y, boxes)
