"""Definite quaternion algebras ramified at {q, oo}, their maximal orders,
unit groups, the orientation at q, and oriented optimal embeddings.

Elements are coordinate 4-tuples (t, x, y, z) of Fractions on the basis
(1, i, j, ij) with i^2 = a, j^2 = b, ij = -ji.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Sequence

from . import kernels
from .errors import BadGcd, NotInert
from .lattice import det, lll_gram, apply_rows, row_basis, kernel_of_functional, solve
from .padic import padic_valuation
from .quadforms import check_discriminant, kronecker, splitting_type

Q4 = tuple  # (t, x, y, z)


def _F(v) -> Q4:
    return tuple(Fraction(c) for c in v)


@dataclass(frozen=True)
class QuaternionAlgebra:
    a: int
    b: int

    def mul(self, u: Q4, v: Q4) -> Q4:
        a, b = self.a, self.b
        t1, x1, y1, z1 = u
        t2, x2, y2, z2 = v
        return (
            t1 * t2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
            t1 * x2 + x1 * t2 - b * y1 * z2 + b * z1 * y2,
            t1 * y2 + y1 * t2 + a * x1 * z2 - a * z1 * x2,
            t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
        )

    @staticmethod
    def conj(u: Q4) -> Q4:
        return (u[0], -u[1], -u[2], -u[3])

    @staticmethod
    def trd(u: Q4):
        return 2 * u[0]

    def nrd(self, u: Q4):
        t, x, y, z = u
        a, b = self.a, self.b
        return t * t - a * x * x - b * y * y + a * b * z * z

    def bil(self, u: Q4, v: Q4):
        """trd(u conj(v)) = nrd(u+v) - nrd(u) - nrd(v)."""
        a, b = self.a, self.b
        return 2 * (u[0] * v[0] - a * u[1] * v[1] - b * u[2] * v[2] + a * b * u[3] * v[3])

    def inverse(self, u: Q4) -> Q4:
        n = Fraction(self.nrd(u))
        if n == 0:
            raise ZeroDivisionError("zero quaternion")
        return tuple(c / n for c in self.conj(u))

    def conjugate_by(self, g: Q4, x: Q4) -> Q4:
        """g x g^-1."""
        return self.mul(self.mul(g, x), self.inverse(g))

    def is_definite(self) -> bool:
        return self.a < 0 and self.b < 0

    def ramified_places(self, bound: int | None = None) -> list:
        """Places where the Hilbert symbol (a, b) is -1."""
        primes = set(_prime_factors(2 * abs(self.a) * abs(self.b)))
        out = [ell for ell in sorted(primes) if hilbert_symbol(self.a, self.b, ell) == -1]
        if hilbert_symbol(self.a, self.b, "inf") == -1:
            out.append("inf")
        return out

    def one(self) -> Q4:
        return _F((1, 0, 0, 0))


def _prime_factors(n: int) -> list[int]:
    n = abs(n)
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def _squarefree_part(x: Fraction) -> int:
    """Integer in the same square class as the nonzero rational x."""
    x = Fraction(x)
    n = x.numerator * x.denominator
    sign = -1 if n < 0 else 1
    n = abs(n)
    out, f = 1, 2
    while f * f <= n:
        while n % (f * f) == 0:
            n //= f * f
        if n % f == 0:
            out *= f
            n //= f
        f += 1
    return sign * out * n


def hilbert_symbol(a, b, ell) -> int:
    """Local Hilbert symbol (a, b)_ell; ``ell`` a prime or ``"inf"``."""
    a, b = _squarefree_part(a), _squarefree_part(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    if ell in ("inf", "oo", 0):
        return -1 if a < 0 and b < 0 else 1
    p = ell
    al, bl = padic_valuation(a, p), padic_valuation(b, p)
    u, v = a // p ** al, b // p ** bl
    if p != 2:
        eps = (p - 1) // 2
        s = (-1) ** (al * bl * eps)
        s *= _legendre(u, p) ** bl * _legendre(v, p) ** al
        return s

    def e(x):
        return ((x - 1) // 2) % 2

    def w(x):
        return ((x * x - 1) // 8) % 2

    return (-1) ** ((e(u) * e(v) + al * w(v) + bl * w(u)) % 2)


def _legendre(u: int, p: int) -> int:
    r = pow(u % p, (p - 1) // 2, p)
    return 1 if r == 1 else -1


# orders


@dataclass(frozen=True)
class QuatOrder:
    """A Z-lattice with basis ``basis`` (rows are coordinates on 1, i, j, ij)."""

    algebra: QuaternionAlgebra
    basis: tuple

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(_F(b) for b in self.basis))

    def coords(self, x: Q4) -> list[Fraction]:
        return solve(self.basis, x)

    def contains(self, x: Q4) -> bool:
        return all(c.denominator == 1 for c in self.coords(x))

    def element(self, c: Sequence[int]) -> Q4:
        return tuple(sum(Fraction(c[i]) * self.basis[i][k] for i in range(4)) for k in range(4))

    def gram(self) -> list[list[Fraction]]:
        """trd(e_i conj(e_j)), twice the norm form."""
        B = self.basis
        return [[self.algebra.bil(B[i], B[j]) for j in range(4)] for i in range(4)]

    def reduced_discriminant(self) -> Fraction:
        d = abs(det(self.gram()))
        num, den = d.numerator, d.denominator
        rn, rd = _isqrt_exact(num), _isqrt_exact(den)
        return Fraction(rn, rd)

    def is_closed(self) -> bool:
        B = self.basis
        alg = self.algebra
        return all(self.contains(alg.mul(B[i], B[j])) for i in range(4) for j in range(4))

    def is_integral(self) -> bool:
        alg = self.algebra
        return all(Fraction(alg.trd(b)).denominator == 1 and Fraction(alg.nrd(b)).denominator == 1
                   for b in self.basis)

    def contains_one(self) -> bool:
        return self.contains(self.algebra.one())

    def lll(self) -> QuatOrder:
        U = lll_gram(self.gram())
        return QuatOrder(self.algebra, tuple(tuple(r) for r in apply_rows(U, self.basis)))

    def elements_of_norm(self, n: int) -> list[Q4]:
        """All elements of reduced norm exactly n (n > 0)."""
        G = self.gram()
        den = 1
        for row in G:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        Gi = [[int(x * den) for x in row] for row in G]
        target = 2 * n * den
        return [self.element(c) for c, val in kernels.short_vectors(Gi, target) if val == target]

    def units(self) -> list[Q4]:
        return sorted(self.elements_of_norm(1))


def _isqrt_exact(n: int) -> int:
    from math import isqrt
    r = isqrt(n)
    if r * r != n:
        raise ArithmeticError(f"{n} is not a perfect square")
    return r


def unit_group(R: QuatOrder) -> list[Q4]:
    return R.units()


def _pizer_prime(q: int) -> tuple[int, int]:
    """Prime r = 3 mod 4 with (q|r) = -1, and c with r | c^2 q + 1."""
    r = 3
    while True:
        if all(r % f for f in range(2, int(r ** 0.5) + 1)) and r % 4 == 3 and _legendre(q, r) == -1:
            for c in range(r):
                if (c * c * q + 1) % r == 0:
                    return r, c
        r += 1


@lru_cache(maxsize=None)
def construct_algebra_and_maximal_order(q: int) -> tuple[QuaternionAlgebra, QuatOrder]:
    """Standard maximal orders in the definite algebra of discriminant q."""
    h = Fraction(1, 2)
    if q == 2:
        alg = QuaternionAlgebra(-1, -1)
        basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (h, h, h, h)]
    elif q % 4 == 3:
        alg = QuaternionAlgebra(-1, -q)
        basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, h, h, 0), (h, 0, 0, h)]
    elif q % 8 == 5:
        alg = QuaternionAlgebra(-2, -q)
        f = Fraction(1, 4)
        basis = [(h, 0, h, h), (0, f, h, f), (0, 0, 1, 0), (0, 0, 0, 1)]
    else:
        r, c = _pizer_prime(q)
        alg = QuaternionAlgebra(-q, -r)
        basis = [(h, 0, h, 0), (0, h, 0, h), (0, 0, Fraction(1, r), Fraction(c, r)), (0, 0, 0, 1)]
    R = QuatOrder(alg, tuple(basis))
    if not (R.contains_one() and R.is_closed() and R.is_integral()):
        raise ArithmeticError(f"recipe for q = {q} does not give an order")
    if R.reduced_discriminant() != q:
        raise ArithmeticError(f"order for q = {q} has discriminant {R.reduced_discriminant()}")
    return alg, R


# orientation at q


@dataclass(frozen=True)
class Fq2:
    """F_{q^2} = F_q[t]/(t^2 - n) for odd q (n the least non-residue), F_2[t]/(t^2+t+1)."""

    q: int

    @cached_property
    def n(self) -> int:
        if self.q == 2:
            return 0
        return next(x for x in range(2, self.q) if _legendre(x, self.q) == -1)

    def mul(self, u, v):
        q = self.q
        a, b = u
        c, d = v
        if q == 2:
            # t^2 = t + 1
            return ((a * c + b * d) % 2, (a * d + b * c + b * d) % 2)
        return ((a * c + self.n * b * d) % q, (a * d + b * c) % q)

    def add(self, u, v):
        return ((u[0] + v[0]) % self.q, (u[1] + v[1]) % self.q)

    def scal(self, s, u):
        return ((s * u[0]) % self.q, (s * u[1]) % self.q)

    def elements(self):
        return [(a, b) for a in range(self.q) for b in range(self.q)]

    def roots(self, tr: int, nm: int) -> list:
        """Roots of X^2 - tr X + nm, sorted lexicographically."""
        q = self.q
        out = []
        for z in self.elements():
            val = self.add(self.mul(z, z), self.add(self.scal(-tr, z), (nm % q, 0)))
            if val == (0, 0):
                out.append(z)
        return sorted(out)

    def frobenius(self, u):
        out = (1, 0)
        for _ in range(self.q):
            out = self.mul(out, u)
        return out


@dataclass(frozen=True)
class OrientationAtQ:
    R: QuatOrder
    q: int
    field: Fq2
    eps: Q4
    eps_image: tuple
    radical: tuple  # two coordinate vectors mod q spanning P / qR

    def __call__(self, x: Q4):
        return orientation_of(x, self)

    def conjugate(self) -> OrientationAtQ:
        """The other identification (composed with Frobenius)."""
        return OrientationAtQ(self.R, self.q, self.field, self.eps,
                              self.field.frobenius(self.eps_image), self.radical)


def _nullspace_mod(M, q):
    """Left null space of an integer matrix mod a prime q (rows of the result)."""
    n, m = len(M), len(M[0])
    A = [[M[i][j] % q for j in range(m)] + [int(i == k) for k in range(n)] for i in range(n)]
    row = 0
    for c in range(m):
        piv = next((r for r in range(row, n) if A[r][c]), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = pow(A[row][c], -1, q)
        A[row] = [(x * inv) % q for x in A[row]]
        for r in range(n):
            if r != row and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % q for x, y in zip(A[r], A[row])]
        row += 1
    return [A[r][m:] for r in range(row, n)]


@lru_cache(maxsize=None)
def orientation_at_q(q: int) -> OrientationAtQ:
    alg, R = construct_algebra_and_maximal_order(q)
    G = R.gram()
    Gi = [[int(x) for x in row] for row in G]
    rad = _nullspace_mod(Gi, q)
    if q == 2:
        # trd form is alternating mod 2; use nrd-values instead: P/2R = {x : nrd x even}
        rad = [c for c in _all_vectors(2) if any(c) and Fraction(alg.nrd(R.element(c))) % 2 == 0]
        rad = _span_basis_mod(rad, 2)
    if len(rad) != 2:
        raise ArithmeticError("radical of the trace form mod q is not 2-dimensional")
    Fq = Fq2(q)
    for c in _all_vectors(q):
        x = R.element(c)
        tr, nm = int(alg.trd(x)), int(alg.nrd(x))
        if Fq.roots(tr, nm) and not _poly_splits_mod(tr, nm, q):
            eps = x
            image = Fq.roots(tr, nm)[0]
            return OrientationAtQ(R, q, Fq, eps, image, tuple(tuple(r) for r in rad))
    raise ArithmeticError("no generator of R/P found")


def _all_vectors(q):
    import itertools
    return [c for c in itertools.product(range(q), repeat=4)]


def _span_basis_mod(vecs, q):
    basis = []
    for v in vecs:
        cand = basis + [list(v)]
        if _rank_mod(cand, q) == len(cand):
            basis = cand
    return basis


def _rank_mod(M, q):
    return len(M) - len(_nullspace_mod(M, q))


def _poly_splits_mod(tr, nm, q) -> bool:
    return any((x * x - tr * x + nm) % q == 0 for x in range(q))


def orientation_of(x: Q4, o: OrientationAtQ):
    """Image of x in R/P = F_{q^2}; x must be q-integral in the order."""
    q = o.q
    c = o.R.coords(x)
    cm = []
    for v in c:
        if v.denominator % q == 0:
            raise ValueError("element is not integral at q")
        cm.append(v.numerator * pow(v.denominator, -1, q) % q)
    one = [int(v) % q for v in o.R.coords(o.R.algebra.one())]
    ec = [v.numerator * pow(v.denominator, -1, q) % q for v in o.R.coords(o.eps)]
    # x = alpha + beta eps + gamma r1 + delta r2 (mod q)
    M = [one, ec, list(o.radical[0]), list(o.radical[1])]
    sol = _solve_mod(M, cm, q)
    alpha, beta = sol[0], sol[1]
    F = o.field
    return F.add((alpha % q, 0), F.scal(beta, o.eps_image))


def _solve_mod(M, b, q):
    """Solve x M = b over F_q (M square invertible)."""
    n = len(M)
    A = [[M[j][i] % q for j in range(n)] + [b[i] % q] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            raise ArithmeticError("singular system mod q")
        A[c], A[piv] = A[piv], A[c]
        inv = pow(A[c][c], -1, q)
        A[c] = [(x * inv) % q for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % q for x, y in zip(A[r], A[c])]
    return [A[i][n] for i in range(n)]


def order_orientation_value(d: int, q: int):
    """The fixed orientation of O_d at q: image of (d + sqrt d)/2 in F_{q^2}."""
    F = Fq2(q)
    roots = F.roots(d, (d * d - d) // 4)
    if len(roots) != 2 or roots[0] == roots[1]:
        raise NotInert(f"q = {q} must be inert in Q(sqrt {d})")
    return roots[0]


# optimal embeddings


@dataclass(frozen=True)
class EmbeddingClass:
    class_id: int
    x: Q4  # psi((d + sqrt d)/2)
    orientation: tuple
    vertex_class: int = 0
    orbit_size: int = 1


def gross_lattice(R: QuatOrder) -> list[list[Fraction]]:
    """Basis (ambient coordinates) of {y in Z + 2R : trd y = 0}."""
    one = R.algebra.one()
    gens_amb = [one] + [tuple(2 * c for c in b) for b in R.basis]
    # work in R-coordinates (integers)
    coords = [[int(c) for c in R.coords(g)] for g in gens_amb]
    basis = row_basis(coords)
    tr = [int(R.algebra.trd(R.element(b))) for b in basis]
    kern = kernel_of_functional(basis, tr, 0)
    return [list(R.element(c)) for c in kern]


def gross_gram(R: QuatOrder) -> tuple[list, list[list[int]]]:
    """LLL-reduced basis of the Gross lattice and the integral Gram of 2 nrd."""
    S = gross_lattice(R)
    alg = R.algebra
    G = [[alg.bil(u, v) for v in S] for u in S]
    U = lll_gram(G)
    S = apply_rows(U, S)
    G = [[int(alg.bil(u, v)) for v in S] for u in S]
    return S, G


def _is_optimal(x: Q4, R: QuatOrder, d: int) -> bool:
    for ell in _prime_factors(d):
        if d % (ell * ell) or (d // (ell * ell)) % 4 not in (0, 1):
            continue
        for b in range(ell):
            y = tuple((x[k] - (b if k == 0 else 0)) / ell for k in range(4))
            if R.contains(y):
                return False
    return True


def embeddings_in_order(d: int, R: QuatOrder, o: OrientationAtQ, units: Sequence[Q4] | None = None
                        ) -> list[tuple[Q4, int]]:
    """Oriented optimal embeddings of O_d into R modulo conjugation by R^x.

    Returns canonical representatives x = psi((d + sqrt d)/2) with orbit sizes.
    """
    alg = R.algebra
    target = order_orientation_value(d, o.q)
    S, G = gross_gram(R)
    units = units if units is not None else R.units()
    found = set()
    for c, val in kernels.short_vectors(G, 2 * abs(d)):
        if val != 2 * abs(d):
            continue
        s = tuple(sum(Fraction(c[i]) * S[i][k] for i in range(3)) for k in range(4))
        x = tuple(Fraction(d if k == 0 else 0, 2) + s[k] / 2 for k in range(4))
        if not R.contains(x) or not _is_optimal(x, R, d):
            continue
        if orientation_of(x, o) != target:
            continue
        found.add(x)
    classes = []
    seen = set()
    for x in sorted(found):
        if x in seen:
            continue
        orbit = {alg.conjugate_by(u, x) for u in units}
        seen |= orbit
        classes.append((min(orbit), len(orbit)))
    return sorted(classes)


def check_embedding_inputs(d: int, q: int, p: int) -> bool:
    """Validate; returns False when K does not embed (q not inert in K)."""
    check_discriminant(d)
    if gcd(d, q * p) != 1:
        raise BadGcd(f"gcd(d, p q) = 1 required; got d = {d}, q = {q}, p = {p}")
    if splitting_type(d, p) != "inert":
        raise NotInert(f"p = {p} must be inert in the order of discriminant {d}")
    return kronecker(d, q) == -1


def enumerate_optimal_embeddings(d: int, q: int, p: int) -> list[EmbeddingClass]:
    """Oriented optimal embedding classes of O_d[1/p] into R_0[1/p] modulo Gamma.

    Classes are enumerated at each vertex class of the quotient graph, in the
    local maximal order of that vertex; see :mod:`arborp.shimura`.
    """
    if not check_embedding_inputs(d, q, p):
        return []
    from .shimura import quotient_graph

    qg = quotient_graph(q, p)
    o = orientation_at_q(q)
    out = []
    for vc in qg.vertices:
        for x, size in embeddings_in_order(d, vc.order, o, vc.units):
            out.append(EmbeddingClass(len(out), x, orientation_of(x, o), vc.id, size))
    return out


__all__ = [
    "QuaternionAlgebra", "QuatOrder", "OrientationAtQ", "Fq2", "EmbeddingClass",
    "hilbert_symbol", "construct_algebra_and_maximal_order", "unit_group",
    "orientation_at_q", "orientation_of", "enumerate_optimal_embeddings",
    "embeddings_in_order", "gross_lattice", "gross_gram", "order_orientation_value",
]
