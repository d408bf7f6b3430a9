"""Integer lattice utilities: HNF row bases, kernels of functionals, congruence
sublattices and exact LLL on a Gram matrix.  Dimensions here are tiny (<= 5),
so everything is exact with ints and Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import PrecisionExhausted
from .padic import PadicNumber, padic_valuation

Vec = tuple


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def row_basis(gens: Sequence[Sequence[int]]) -> list[list[int]]:
    """Hermite-style echelon basis of the Z-span of integer row vectors."""
    rows = [list(map(int, g)) for g in gens if any(g)]
    if not rows:
        return []
    n = len(rows[0])
    basis = []
    col = 0
    while rows and col < n:
        piv = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not piv:
            col += 1
            continue
        # gcd-combine the pivot column
        while len(piv) > 1:
            piv.sort(key=lambda r: abs(r[col]))
            a = piv[0]
            nxt = [a]
            for r in piv[1:]:
                q = r[col] // a[col]
                r = [x - q * y for x, y in zip(r, a)]
                (nxt if r[col] != 0 else rest).append(r)
            piv = nxt
        top = piv[0]
        if top[col] < 0:
            top = [-x for x in top]
        basis.append(top)
        rows = [r for r in rest if any(r)]
        col += 1
    return basis


def kernel_of_functional(basis: Sequence[Sequence[int]], values: Sequence[int],
                         modulus: int = 0) -> list[list[int]]:
    """Basis of {sum c_i b_i : sum c_i values_i = 0 (mod modulus)}.

    ``modulus = 0`` means exact vanishing.  Works by extended-gcd column
    operations so that at most one basis vector carries a nonzero value.
    """
    basis = [list(b) for b in basis]
    vals = [int(v) % modulus if modulus else int(v) for v in values]
    n = len(basis)
    # find gcd position
    idx = [i for i in range(n) if vals[i]]
    if not idx:
        return basis
    i0 = idx[0]
    for i in idx[1:]:
        g, s, t = _xgcd(vals[i0], vals[i])
        a, b = vals[i0] // g, vals[i] // g
        bi0, bi = basis[i0], basis[i]
        basis[i0] = [s * x + t * y for x, y in zip(bi0, bi)]
        basis[i] = [-b * x + a * y for x, y in zip(bi0, bi)]
        vals[i0], vals[i] = g, 0
    g = vals[i0]
    if modulus:
        from math import gcd
        mult = modulus // gcd(g, modulus)
        basis[i0] = [mult * x for x in basis[i0]]
        return basis
    del basis[i0]
    return basis


def _frac_residue(x: Fraction, p: int) -> Fraction:
    """Fractional part of x in Z[1/p]/Z (x p-adically)."""
    v = padic_valuation(x, p)
    if v >= 0:
        return Fraction(0)
    return PadicNumber.from_rational(p, x, 1, -v).residue(0)


def padic_congruence(gens_coords: Sequence[Sequence[int]], funcs, p: int
                             ) -> list[list[int]]:
    """Sublattice of the span of ``gens_coords`` on which every functional is p-integral.

    Each functional maps a coordinate vector to an element of Q_p.  One power
    of p is peeled per pass, so only a residue mod p is ever needed.
    """
    basis = [list(b) for b in gens_coords]
    for f in funcs:
        while True:
            col = [f(b) for b in basis]
            vals = [padic_valuation(a, p) for a in col]
            t = -min(vals)
            if t <= 0:
                break
            # peel one power of p at a time: keeps the residues well defined
            m = p
            residues = []
            for a in col:
                scaled = a * Fraction(p) ** (t - 1)
                r = scaled.residue(0) if isinstance(scaled, PadicNumber) else _frac_residue(Fraction(scaled), p)
                residues.append(int(r * m) % m)
            basis = kernel_of_functional(basis, residues, m)
    return basis


def gram_matrix(basis, bilinear) -> list[list]:
    n = len(basis)
    return [[bilinear(basis[i], basis[j]) for j in range(n)] for i in range(n)]


def lll_gram(G: Sequence[Sequence], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Unimodular U with U G U^T LLL-reduced; exact rational arithmetic."""
    n = len(G)
    G = [[Fraction(x) for x in row] for row in G]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def gram_of(U):
        return [[sum(U[i][a] * G[a][b] * U[j][b] for a in range(n) for b in range(n))
                 for j in range(n)] for i in range(n)]

    def gso(B):
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = B[i][j] - sum(mu[j][l] * mu[i][l] * bstar[l] for l in range(j))
                mu[i][j] = s / bstar[j]
            bstar[i] = B[i][i] - sum(mu[i][l] ** 2 * bstar[l] for l in range(i))
            if bstar[i] <= 0:
                raise ValueError("Gram matrix is not positive definite")
        return mu, bstar

    k = 1
    while k < n:
        B = gram_of(U)
        mu, bstar = gso(B)
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                U[k] = [x - q * y for x, y in zip(U[k], U[j])]
                B = gram_of(U)
                mu, bstar = gso(B)
        if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            U[k], U[k - 1] = U[k - 1], U[k]
            k = max(k - 1, 1)
    return U


def apply_rows(U, basis) -> list[list]:
    m = len(basis[0])
    return [[sum(U[i][l] * basis[l][c] for l in range(len(basis))) for c in range(m)]
            for i in range(len(U))]


def det(M) -> Fraction:
    M = [[Fraction(x) for x in row] for row in M]
    n = len(M)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            out = -out
        out *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return out


def solve(M, b) -> list[Fraction]:
    """Solve x M = b for a square rational matrix (row-vector convention)."""
    n = len(M)
    # transpose: M^T x^T = b^T
    A = [[Fraction(M[j][i]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[i][n] for i in range(n)]


__all__ = [
    "row_basis", "kernel_of_functional", "padic_congruence",
    "gram_matrix", "lll_gram", "apply_rows", "det", "solve", "PrecisionExhausted",
]
