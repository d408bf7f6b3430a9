"""Pure-Python reference kernels; the compiled module mirrors these signatures."""

from __future__ import annotations

import math
from math import gcd, isqrt


def reduced_forms(d: int) -> list[tuple[int, int, int]]:
    """Primitive reduced forms (A, B, C) of discriminant d < 0, sorted."""
    out = []
    amax = isqrt(-d // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - d) & 1:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (b < 0 and c == a):
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            out.append((a, b, c))
    return out


def _cholesky(gram):
    n = len(gram)
    q = [[0.0] * n for _ in range(n)]
    g = [[float(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(i, n):
            q[i][j] = g[i][j]
    # Fincke-Pohst form: Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _enumerate(gram, bound, visit):
    """Call ``visit(x)`` for every nonzero integer x with x^T G x <= bound."""
    n = len(gram)
    q = _cholesky(gram)
    if any(q[i][i] <= 0 for i in range(n)):
        raise ValueError("Gram matrix is not positive definite")
    eps = 1e-6 * (1.0 + bound)
    x = [0] * n

    def recurse(i, remaining):
        centre = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        span = math.sqrt(max(remaining + eps, 0.0) / q[i][i])
        lo = math.ceil(centre - span)
        hi = math.floor(centre + span)
        for xi in range(lo, hi + 1):
            x[i] = xi
            rem = remaining - q[i][i] * (xi - centre) ** 2
            if rem < -eps:
                continue
            if i == 0:
                visit(x)
            else:
                recurse(i - 1, rem)
        x[i] = 0

    recurse(n - 1, float(bound))


def _qform(gram, x):
    n = len(x)
    return sum(gram[i][j] * x[i] * x[j] for i in range(n) for j in range(n))


def short_vectors(gram, bound: int) -> list[tuple[tuple[int, ...], int]]:
    """All nonzero x with x^T G x <= bound, paired with their exact value."""
    out = []

    def visit(x):
        if any(x):
            val = _qform(gram, x)
            if val <= bound:
                out.append((tuple(x), val))

    _enumerate(gram, bound, visit)
    return out


def theta_counts(gram, bound: int) -> list[int]:
    """``r[n]`` = number of x with x^T G x = n, for 0 <= n <= bound."""
    r = [0] * (bound + 1)
    r[0] = 1

    def visit(x):
        if any(x):
            val = _qform(gram, x)
            if val <= bound:
                r[val] += 1

    _enumerate(gram, bound, visit)
    return r
