import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from arborp import _kernels_py as pure
from arborp import kernels
from arborp.lattice import kernel_of_functional, lll_gram, padic_congruence, row_basis

try:
    from arborp import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


@st.composite
def gram_matrices(draw, n=3):
    rows = [[draw(st.integers(-4, 4)) for _ in range(n)] for _ in range(n)]
    # B^T B + I is positive definite
    g = [[sum(rows[k][i] * rows[k][j] for k in range(n)) + (i == j) for j in range(n)]
         for i in range(n)]
    return g


@needs_compiled
@given(st.integers(3, 20000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1)))
def test_reduced_forms_backends_agree(d):
    assert list(compiled.reduced_forms(d)) == list(pure.reduced_forms(d))


@needs_compiled
@given(gram_matrices(), st.integers(0, 60))
def test_short_vectors_backends_agree(g, bound):
    assert sorted(compiled.short_vectors(g, bound)) == sorted(pure.short_vectors(g, bound))
    assert list(compiled.theta_counts(g, bound)) == list(pure.theta_counts(g, bound))


@given(gram_matrices(), st.integers(0, 40))
def test_theta_counts_match_short_vectors(g, bound):
    sv = kernels.short_vectors(g, bound)
    theta = kernels.theta_counts(g, bound)
    assert theta[0] == 1
    assert sum(theta) - 1 == len(sv)
    assert all(v == sum(c[i] * g[i][j] * c[j] for i in range(3) for j in range(3)) for c, v in sv)


def test_pure_fallback_selected_by_environment():
    code = "import arborp.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, ARBORP_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@given(gram_matrices(4))
def test_lll_is_unimodular_and_reduces(g):
    U = lll_gram(g)
    det = _det(U)
    assert abs(det) == 1
    red = [[sum(U[i][a] * g[a][b] * U[j][b] for a in range(4) for b in range(4))
            for j in range(4)] for i in range(4)]
    assert red[0][0] <= min(g[i][i] for i in range(4))


def _det(M):
    from arborp.lattice import det
    return det(M)


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=5),
       st.lists(st.integers(-20, 20), min_size=3, max_size=3), st.integers(2, 12))
def test_kernel_of_functional(vecs, f, m):
    basis = row_basis(vecs)
    if not basis:
        return
    vals = [sum(a * b for a, b in zip(v, f)) for v in basis]
    ker = kernel_of_functional(basis, vals, m)
    for v in ker:
        assert sum(a * b for a, b in zip(v, f)) % m == 0
    # index of the kernel divides m
    assert len(ker) == len(basis)


def test_padic_congruence_simple():
    from fractions import Fraction
    basis = padic_congruence([[1, 0], [0, 1]], [lambda c: Fraction(c[0] + 2 * c[1], 9)], 3)
    for v in basis:
        assert (v[0] + 2 * v[1]) % 9 == 0
    assert abs(_det(basis)) == 9
