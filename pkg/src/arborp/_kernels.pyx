# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and outputs as ``_kernels_py``."""

from libc.math cimport sqrt, ceil, floor
from libc.stdlib cimport malloc, free

DEF MAXDIM = 8


cdef long long _gcd(long long a, long long b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


def reduced_forms(long long d):
    cdef long long a, b, c, num, amax
    out = []
    amax = <long long>sqrt(<double>(-d // 3)) + 1
    while amax * amax > -d // 3:
        amax -= 1
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
            if _gcd(_gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
    return out


cdef struct Ctx:
    int n
    double q[MAXDIM][MAXDIM]
    long long g[MAXDIM][MAXDIM]
    long long x[MAXDIM]
    double eps
    long long bound


cdef int _prepare(Ctx* ctx, gram, long long bound) except -1:
    cdef int n = len(gram)
    cdef int i, j, k, l
    if n > MAXDIM:
        raise ValueError("dimension too large for compiled kernel")
    ctx.n = n
    ctx.bound = bound
    ctx.eps = 1e-6 * (1.0 + bound)
    for i in range(n):
        ctx.x[i] = 0
        for j in range(n):
            ctx.g[i][j] = gram[i][j]
            ctx.q[i][j] = <double>gram[i][j] if j >= i else 0.0
    for i in range(n):
        if ctx.q[i][i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
        for j in range(i + 1, n):
            ctx.q[j][i] = ctx.q[i][j]
            ctx.q[i][j] = ctx.q[i][j] / ctx.q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                ctx.q[k][l] -= ctx.q[k][i] * ctx.q[i][l]
    for i in range(n):
        if ctx.q[i][i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
    return 0


cdef long long _qval(Ctx* ctx) nogil:
    cdef long long s = 0
    cdef int i, j
    for i in range(ctx.n):
        for j in range(ctx.n):
            s += ctx.g[i][j] * ctx.x[i] * ctx.x[j]
    return s


cdef bint _nonzero(Ctx* ctx) nogil:
    cdef int i
    for i in range(ctx.n):
        if ctx.x[i] != 0:
            return True
    return False


cdef void _walk(Ctx* ctx, int i, double remaining, long long* hist, list out):
    cdef double centre = 0.0, span, rem
    cdef long long lo, hi, xi, val
    cdef int j
    for j in range(i + 1, ctx.n):
        centre -= ctx.q[i][j] * ctx.x[j]
    span = remaining + ctx.eps
    if span < 0:
        span = 0
    span = sqrt(span / ctx.q[i][i])
    lo = <long long>ceil(centre - span)
    hi = <long long>floor(centre + span)
    xi = lo
    while xi <= hi:
        ctx.x[i] = xi
        rem = remaining - ctx.q[i][i] * (xi - centre) * (xi - centre)
        if rem >= -ctx.eps:
            if i == 0:
                if _nonzero(ctx):
                    val = _qval(ctx)
                    if val <= ctx.bound:
                        if hist != NULL:
                            hist[val] += 1
                        else:
                            out.append((tuple([ctx.x[j] for j in range(ctx.n)]), val))
            else:
                _walk(ctx, i - 1, rem, hist, out)
        xi += 1
    ctx.x[i] = 0


def short_vectors(gram, long long bound):
    cdef Ctx ctx
    _prepare(&ctx, gram, bound)
    out = []
    _walk(&ctx, ctx.n - 1, <double>bound, NULL, out)
    return out


def theta_counts(gram, long long bound):
    cdef Ctx ctx
    cdef long long i
    _prepare(&ctx, gram, bound)
    cdef long long* hist = <long long*>malloc((bound + 1) * sizeof(long long))
    if hist == NULL:
        raise MemoryError()
    try:
        for i in range(bound + 1):
            hist[i] = 0
        hist[0] = 1
        _walk(&ctx, ctx.n - 1, <double>bound, hist, None)
        return [hist[i] for i in range(bound + 1)]
    finally:
        free(hist)
