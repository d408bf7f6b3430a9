"""Fixed-precision arithmetic in Q_p and in the unramified quadratic extension.

A nonzero :class:`PadicNumber` is ``p**valuation * unit`` where ``unit`` is an
integer coprime to ``p`` known modulo ``p**precision``.  Zero is exact and
carries an infinite valuation.  Operations never round silently: whenever a
result would keep fewer than one significant digit, :class:`PrecisionExhausted`
is raised.

Q_{p^2} is represented as ``Q_p(w)`` with ``w**2 = u`` for odd ``p`` (``u`` the
smallest positive quadratic non-residue) and ``w**2 + w + 1 = 0`` for ``p = 2``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import DivisionByZero, NoSquareRoot, PrecisionExhausted

INF = math.inf
DEFAULT_PRECISION = 32

Rational = Union[int, Fraction]


def vp(n: Rational, p: int):
    """Valuation of an exact rational; ``INF`` for zero."""
    if isinstance(n, Fraction):
        if n == 0:
            return INF
        return vp(n.numerator, p) - vp(n.denominator, p)
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@lru_cache(maxsize=None)
def nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue modulo an odd prime."""
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise ValueError(f"no non-residue modulo {p}")


class PadicNumber:
    """Element of Q_p to a fixed number of significant digits."""

    __slots__ = ("prime", "valuation", "unit", "precision")

    def __init__(self, prime: int, valuation, unit: int, precision: int):
        if valuation == INF:
            unit, precision = 0, 0
        else:
            if precision < 1:
                raise PrecisionExhausted("fewer than one significant p-adic digit")
            unit %= prime**precision
            if unit % prime == 0:
                raise ValueError("unit part must be coprime to p")
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    # construction

    @classmethod
    def zero(cls, p: int) -> PadicNumber:
        return cls(p, INF, 0, 0)

    @classmethod
    def from_rational(cls, p: int, num: Rational, den: int = 1,
                      precision: int = DEFAULT_PRECISION) -> PadicNumber:
        x = Fraction(num, den) if not isinstance(num, Fraction) else num / den
        if x == 0:
            return cls.zero(p)
        v = vp(x, p)
        a = x.numerator // p ** max(vp(x.numerator, p), 0)
        b = x.denominator // p ** max(vp(x.denominator, p), 0)
        mod = p**precision
        return cls(p, v, a * pow(b, -1, mod) % mod, precision)

    @classmethod
    def coerce(cls, p: int, x, precision: int = DEFAULT_PRECISION) -> PadicNumber:
        if isinstance(x, PadicNumber):
            return x
        return cls.from_rational(p, x, 1, precision)

    # inspection

    def is_zero(self) -> bool:
        return self.valuation == INF

    @property
    def absolute_precision(self):
        return INF if self.is_zero() else self.valuation + self.precision

    def lift(self) -> Fraction:
        """The exact rational ``p**v * unit`` (an approximation of self)."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def residue(self, a: int) -> Fraction:
        """Representative of ``self mod p**a`` in ``Z[1/p]`` lying in ``[0, p**a)``."""
        p = self.prime
        if self.is_zero() or self.valuation >= a:
            return Fraction(0)
        need = a - self.valuation
        if need > self.precision:
            raise PrecisionExhausted(
                f"need {need} digits to reduce modulo {p}^{a}, have {self.precision}")
        u = self.unit % p**need
        if self.valuation >= 0:
            return Fraction(u * p**self.valuation)
        return Fraction(u, p ** (-self.valuation))

    def digits(self) -> list[int]:
        p, u, out = self.prime, self.unit, []
        for _ in range(self.precision):
            out.append(u % p)
            u //= p
        return out

    def __repr__(self):
        if self.is_zero():
            return f"PadicNumber({self.prime}, 0)"
        return (f"PadicNumber(p={self.prime}, v={self.valuation}, "
                f"unit={self.unit}, N={self.precision})")

    # arithmetic

    def _other(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            if other.prime != self.prime:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, (int, Fraction)):
            x = Fraction(other)
            if x == 0:
                return PadicNumber.zero(self.prime)
            v = vp(x, self.prime)
            if self.is_zero():
                return PadicNumber.from_rational(self.prime, x, 1, DEFAULT_PRECISION)
            # exact operands never limit the precision of the result
            prec = self.precision + abs(self.valuation) + abs(v) + 2
            return PadicNumber.from_rational(self.prime, x, 1, prec)
        return NotImplemented

    def __neg__(self):
        if self.is_zero():
            return self
        return PadicNumber(self.prime, self.valuation, -self.unit, self.precision)

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        p = self.prime
        v = min(self.valuation, other.valuation)
        absprec = min(self.absolute_precision, other.absolute_precision)
        n = absprec - v
        total = (self.unit * p ** (self.valuation - v)
                 + other.unit * p ** (other.valuation - v)) % p**n
        if total == 0:
            return PadicNumber.zero(p)
        w = vp(total, p)
        return PadicNumber(p, v + w, total // p**w, n - w)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PadicNumber.zero(self.prime)
        n = min(self.precision, other.precision)
        return PadicNumber(self.prime, self.valuation + other.valuation,
                           self.unit * other.unit, n)

    __rmul__ = __mul__

    def inverse(self) -> PadicNumber:
        if self.is_zero():
            raise DivisionByZero("inverse of p-adic zero")
        mod = self.prime**self.precision
        return PadicNumber(self.prime, -self.valuation, pow(self.unit, -1, mod),
                           self.precision)

    def __truediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = PadicNumber.from_rational(self.prime, 1, 1, max(self.precision, 1))
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._other(other)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.valuation != other.valuation:
            return False
        n = min(self.precision, other.precision)
        return (self.unit - other.unit) % self.prime**n == 0

    __hash__ = None


def valuation(a) -> int | float:
    """Valuation of a p-adic number (``INF`` for zero)."""
    return a.valuation


def padic_valuation(x, p: int):
    """Valuation of an exact rational, a :class:`PadicNumber` or a Q_{p^2} element."""
    if isinstance(x, PadicNumber):
        return x.valuation
    if isinstance(x, QuadExtElement):
        return x.valuation()
    return vp(Fraction(x), p)


def is_square(a: PadicNumber) -> bool:
    """Whether a nonzero p-adic number is a square in Q_p."""
    if a.is_zero():
        return True
    if a.valuation % 2:
        return False
    p = a.prime
    if p == 2:
        if a.precision < 3:
            raise PrecisionExhausted("need three 2-adic digits to test squareness")
        return a.unit % 8 == 1
    return pow(a.unit % p, (p - 1) // 2, p) == 1


def hensel_sqrt(a: PadicNumber) -> PadicNumber:
    """Square root on the canonical branch.

    For odd ``p`` the branch is the root whose leading unit digit is the
    smaller of the two; for ``p = 2`` it is the root whose unit part is
    ``1 mod 4``.  Both choices are independent of the working precision.
    """
    if a.is_zero():
        raise DivisionByZero("square root of zero has no canonical unit part")
    if not is_square(a):
        raise NoSquareRoot(f"{a!r} is not a square in Q_{a.prime}")
    p, u, n = a.prime, a.unit, a.precision
    if p == 2:
        n_out = n - 1
        if n_out < 1:
            raise PrecisionExhausted("square roots lose one 2-adic digit")
        r = 1
        for k in range(3, n):
            if (r * r - u) % 2 ** (k + 1):
                r += 2 ** (k - 1)
        r %= 2**n_out
        if r % 4 != 1:
            r = (-r) % 2**n_out
        return PadicNumber(2, a.valuation // 2, r, n_out)
    r = next(x for x in range(1, p) if (x * x - u) % p == 0)
    k = 1
    while k < n:
        k = min(2 * k, n)
        mod = p**k
        r = (r - (r * r - u) * pow(2 * r, -1, mod)) % mod
    return PadicNumber(p, a.valuation // 2, r, n)


class QuadExtElement:
    """``x + y*w`` in the unramified quadratic extension of Q_p."""

    __slots__ = ("prime", "x", "y")

    def __init__(self, prime: int, x, y=0, precision: int = DEFAULT_PRECISION):
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "x", PadicNumber.coerce(prime, x, precision))
        object.__setattr__(self, "y", PadicNumber.coerce(prime, y, precision))

    def __setattr__(self, name, value):
        raise AttributeError("QuadExtElement is immutable")

    @property
    def omega_square(self) -> int | None:
        """``u`` with ``w**2 = u``; ``None`` for p = 2 where ``w**2 + w + 1 = 0``."""
        return None if self.prime == 2 else nonresidue(self.prime)

    @classmethod
    def omega(cls, p: int, precision: int = DEFAULT_PRECISION) -> QuadExtElement:
        return cls(p, 0, 1, precision)

    def in_base_field(self) -> bool:
        return self.y.is_zero()

    def _other(self, other):
        if isinstance(other, QuadExtElement):
            return other
        if isinstance(other, PadicNumber):
            return QuadExtElement(self.prime, other, PadicNumber.zero(self.prime))
        if isinstance(other, (int, Fraction)):
            prec = max(self.x.precision, self.y.precision, 1)
            x = Fraction(other)
            prec += abs(vp(x, self.prime)) if x else 0
            return QuadExtElement(self.prime, PadicNumber.from_rational(self.prime, x, 1, prec + 2),
                                  PadicNumber.zero(self.prime))
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExtElement(self.prime, self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtElement(self.prime, -self.x, -self.y)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.x, self.y, other.x, other.y
        bd = b * d
        if self.prime == 2:
            return QuadExtElement(2, a * c - bd, a * d + b * c - bd)
        return QuadExtElement(self.prime, a * c + bd * self.omega_square, a * d + b * c)

    __rmul__ = __mul__

    def conj(self) -> QuadExtElement:
        """Galois conjugate (the Frobenius of the unramified extension)."""
        if self.prime == 2:
            return QuadExtElement(2, self.x - self.y, -self.y)
        return QuadExtElement(self.prime, self.x, -self.y)

    frobenius = conj

    def norm(self) -> PadicNumber:
        a, b = self.x, self.y
        if self.prime == 2:
            return a * a - a * b + b * b
        return a * a - b * b * self.omega_square

    def trace(self) -> PadicNumber:
        if self.prime == 2:
            return self.x * 2 - self.y
        return self.x * 2

    def inverse(self) -> QuadExtElement:
        n = self.norm()
        if n.is_zero():
            raise DivisionByZero("inverse of zero in Q_{p^2}")
        c = self.conj()
        ninv = n.inverse()
        return QuadExtElement(self.prime, c.x * ninv, c.y * ninv)

    def __truediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def valuation(self):
        # unramified: v(x + yw) = min(v(x), v(y))
        return min(self.x.valuation, self.y.valuation)

    def __eq__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self.x == other.x and self.y == other.y

    __hash__ = None

    def __repr__(self):
        return f"QuadExtElement(p={self.prime}, x={self.x!r}, y={self.y!r})"


def canonical_sqrt_in_ext(d: Rational, p: int,
                          precision: int = DEFAULT_PRECISION) -> QuadExtElement:
    """Canonical square root in Q_{p^2} of a rational that is not a square in Q_p.

    Odd p: ``sqrt(d) = sqrt(d/u) * w``.  p = 2: ``sqrt(d) = sqrt(d/-3) * (1 + 2w)``.
    """
    a = PadicNumber.from_rational(p, Fraction(d), 1, precision)
    if is_square(a):
        raise NoSquareRoot(f"{d} is a square in Q_{p}; its root is not in Q_p^2 minus Q_p")
    if p == 2:
        c = hensel_sqrt(a / -3)
        return QuadExtElement(2, c, c * 2)
    c = hensel_sqrt(a / nonresidue(p))
    return QuadExtElement(p, PadicNumber.zero(p), c)
