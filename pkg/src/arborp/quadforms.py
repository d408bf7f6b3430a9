"""Binary quadratic forms of negative discriminant and the groups built from them.

Forms ``(A, B, C)`` stand for ``A x^2 + B xy + C y^2``; the class of
``(A, B, C)`` corresponds to the ideal ``(A, (-B + sqrt d)/2)`` of the order
of discriminant ``d``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from . import kernels
from .errors import BadDiscriminant, NotSplit, NotSplitOrInert
from .padic import PadicNumber, hensel_sqrt


def check_discriminant(d: int) -> None:
    if d >= 0 or d % 4 not in (0, 1):
        raise BadDiscriminant(f"d = {d} is not a negative discriminant (need d < 0, d = 0,1 mod 4)")


@dataclass(frozen=True, order=True)
class QuadForm:
    A: int
    B: int
    C: int

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("leading coefficient must be positive")
        if self.disc >= 0:
            raise BadDiscriminant("form must be positive definite")

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def is_primitive(self) -> bool:
        return gcd(gcd(self.A, abs(self.B)), self.C) == 1

    def is_reduced(self) -> bool:
        A, B, C = self.A, self.B, self.C
        if not (abs(B) <= A <= C):
            return False
        if (abs(B) == A or A == C) and B < 0:
            return False
        return True

    def reduce(self) -> QuadForm:
        return self.reduce_with_matrix()[0]

    def reduce_with_matrix(self):
        """Reduced equivalent form and the SL_2(Z) matrix ``g`` with f o g = reduced."""
        A, B, C = self.A, self.B, self.C
        g = [[1, 0], [0, 1]]
        while True:
            if not (-A < B <= A):
                # translate x -> x + t y to bring B into (-A, A]
                t = (A - B) // (2 * A)
                C = A * t * t + B * t + C
                B = B + 2 * A * t
                g = [[g[0][0], g[0][0] * t + g[0][1]], [g[1][0], g[1][0] * t + g[1][1]]]
                continue
            if A > C:
                A, B, C = C, -B, A
                g = [[g[0][1], -g[0][0]], [g[1][1], -g[1][0]]]
                continue
            if A == C and B < 0:
                B = -B
                g = [[g[0][1], -g[0][0]], [g[1][1], -g[1][0]]]
            break
        return QuadForm(A, B, C), ((g[0][0], g[0][1]), (g[1][0], g[1][1]))

    def inverse(self) -> QuadForm:
        return QuadForm(self.A, -self.B, self.C).reduce()

    def value(self, x: int, y: int) -> int:
        return self.A * x * x + self.B * x * y + self.C * y * y

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.A, self.B, self.C)

    def __str__(self):
        return f"({self.A},{self.B},{self.C})"


def principal_form(d: int) -> QuadForm:
    check_discriminant(d)
    delta = d % 2
    return QuadForm(1, delta, (delta - d) // 4)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss composition (Dirichlet/Shanks formulation), reduced."""
    d = f.disc
    if g.disc != d:
        raise BadDiscriminant("composition needs equal discriminants")
    a1, b1, _ = f.A, f.B, f.C
    a2, b2, _ = g.A, g.B, g.C
    s = (b1 + b2) // 2
    e1, u1, v1 = _xgcd(a1, a2)
    e, w1, w = _xgcd(e1, s)
    # u a1 + v a2 + w s = e
    u, v = w1 * u1, w1 * v1
    a3 = a1 * a2 // (e * e)
    b3 = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + d) // 2) // e
    b3 %= 2 * a3
    c3 = (b3 * b3 - d) // (4 * a3)
    return QuadForm(a3, b3, c3).reduce()


def form_power(f: QuadForm, n: int) -> QuadForm:
    result = principal_form(f.disc)
    base = f if n >= 0 else f.inverse()
    n = abs(n)
    while n:
        if n & 1:
            result = compose(result, base)
        base = compose(base, base)
        n >>= 1
    return result


@dataclass(frozen=True)
class ClassGroupData:
    d: int
    reduced_forms: tuple[QuadForm, ...]

    @property
    def h(self) -> int:
        return len(self.reduced_forms)

    @property
    def identity(self) -> QuadForm:
        return principal_form(self.d)

    def compose(self, f: QuadForm, g: QuadForm) -> QuadForm:
        return compose(f, g)

    def order(self, f: QuadForm) -> int:
        e = self.identity
        g, n = f.reduce(), 1
        while g != e:
            g = compose(g, f)
            n += 1
            if n > self.h:
                raise ArithmeticError("element order exceeds class number")
        return n


@lru_cache(maxsize=4096)
def _reduced(d: int) -> tuple[QuadForm, ...]:
    return tuple(QuadForm(*t) for t in kernels.reduced_forms(d))


def class_group(d: int) -> ClassGroupData:
    check_discriminant(d)
    return ClassGroupData(d, _reduced(d))


def class_number(d: int) -> int:
    return class_group(d).h


def kronecker(d: int, p: int) -> int:
    """Kronecker symbol (d | p) for a prime p."""
    if d % p == 0:
        return 0
    if p == 2:
        return 1 if d % 8 in (1, 7) else -1
    return 1 if pow(d % p, (p - 1) // 2, p) == 1 else -1


def splitting_type(d: int, p: int) -> str:
    k = kronecker(d, p)
    return {1: "split", -1: "inert", 0: "ramified"}[k]


def canonical_root(d: int, p: int, precision: int = 8) -> PadicNumber:
    """The fixed Hensel branch of sqrt(d) in Q_p (split case)."""
    return hensel_sqrt(PadicNumber.from_rational(p, d, 1, precision))


def prime_form(d: int, p: int) -> QuadForm:
    """Reduced form of the prime above p on which sqrt(d) acts by the Hensel root."""
    check_discriminant(d)
    if splitting_type(d, p) != "split":
        raise NotSplit(f"p = {p} must split in the order of discriminant {d}")
    r = int(canonical_root(d, p).residue(4 if p == 2 else 1))
    mod = 2 * p
    for b in range(mod):
        if (b - r) % (4 if p == 2 else p) == 0 and (b - d) % 2 == 0:
            break
    c = (b * b - d) // (4 * p)
    return QuadForm(p, b, c).reduce()


@dataclass(frozen=True)
class PicData:
    d: int
    p: int
    split: bool
    h: int
    k: int
    cosets: tuple[tuple[QuadForm, ...], ...]
    u_norm_certificate: tuple[int, int] | None = None

    @property
    def h_prime(self) -> int:
        return self.h // self.k


def _unit_generator(d: int, p: int, k: int) -> tuple[int, int]:
    """(x, y) with u = x + y (delta + sqrt d)/2 generating p-part^k, sqrt d -> Hensel root.

    The ideal is the lattice {x + y s = 0 mod p^k}; its shortest vector under
    the norm form generates it because the ideal is principal.
    """
    delta = d % 2
    cc = (delta - d) // 4
    n = p ** k
    r = int(canonical_root(d, p, k + 2).residue(k + 1 if p == 2 else k))
    s = ((delta + r) * pow(2, -1, n) if p != 2 else (delta + r) // 2) % n
    # basis vectors in (x, y) coordinates
    b1, b2 = (n, 0), (-s, 1)

    def q(v):
        return v[0] * v[0] + delta * v[0] * v[1] + cc * v[1] * v[1]

    def bil(v, w):
        return 2 * v[0] * w[0] + delta * (v[0] * w[1] + v[1] * w[0]) + 2 * cc * v[1] * w[1]

    # Lagrange-Gauss reduction, exact
    if q(b1) > q(b2):
        b1, b2 = b2, b1
    while True:
        m = Fraction(bil(b1, b2), 2 * q(b1))
        t = math.floor(m + Fraction(1, 2))
        b2 = (b2[0] - t * b1[0], b2[1] - t * b1[1])
        if q(b2) >= q(b1):
            break
        b1, b2 = b2, b1
    x, y = b1
    if q(b1) != n:
        raise ArithmeticError("power of the prime is not principal")
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    return x, y


def pic_of_s_order(d: int, p: int) -> PicData:
    check_discriminant(d)
    kind = splitting_type(d, p)
    cg = class_group(d)
    if kind == "ramified":
        raise NotSplitOrInert(f"p = {p} divides d = {d}; p must be split or inert in the order")
    if kind == "inert":
        cosets = tuple((f,) for f in cg.reduced_forms)
        return PicData(d, p, False, cg.h, 1, cosets, None)
    pf = prime_form(d, p)
    k = cg.order(pf)
    seen: set[QuadForm] = set()
    cosets = []
    for f in cg.reduced_forms:
        if f in seen:
            continue
        orbit = [f]
        g = compose(f, pf)
        while g != f:
            orbit.append(g)
            g = compose(g, pf)
        seen.update(orbit)
        cosets.append(tuple(orbit))
    return PicData(d, p, True, cg.h, k, tuple(cosets), _unit_generator(d, p, k))


@dataclass(frozen=True)
class CMPoint:
    """tau = re + i sqrt(im_sq), exact."""

    re: Fraction
    im_sq: Fraction

    @property
    def im(self) -> float:
        return math.sqrt(self.im_sq)

    def as_complex(self) -> complex:
        return complex(float(self.re), self.im)

    def im_at_least(self, y) -> bool:
        y = Fraction(y)
        return y <= 0 or self.im_sq >= y * y


def cm_point(f: QuadForm) -> CMPoint:
    """tau = (-B + sqrt d)/(2A)."""
    return CMPoint(Fraction(-f.B, 2 * f.A), Fraction(-f.disc, 4 * f.A * f.A))


def reduce_point(f: QuadForm) -> CMPoint:
    """CM point moved into the standard fundamental domain."""
    return cm_point(f.reduce())


def forms_to_csv(forms, extra_cols: dict | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    extra_cols = extra_cols or {}
    w.writerow(["A", "B", "C", *extra_cols.keys()])
    for i, f in enumerate(forms):
        w.writerow([f.A, f.B, f.C, *(v[i] for v in extra_cols.values())])
    return buf.getvalue()


def is_fundamental(d: int) -> bool:
    if d % 4 == 1:
        return _squarefree(-d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(-m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    i = 2
    while i * i <= n:
        if n % (i * i) == 0:
            return False
        if n % i == 0:
            n //= i
        i += 1
    return True


def conductor(d: int) -> int:
    """Largest f with d/f^2 a discriminant."""
    best = 1
    for f in range(1, isqrt(-d) + 1):
        if d % (f * f) == 0 and (d // (f * f)) % 4 in (0, 1):
            best = f
    return best
