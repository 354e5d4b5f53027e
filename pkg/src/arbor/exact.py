"""Exact rational and 2x2 matrix arithmetic, plus p-adic valuations.

Rationals are :class:`fractions.Fraction`; they are always stored reduced,
so structural equality is value equality.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union


class ArborError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(ArborError, ValueError):
    """Input violates a documented contract (non-prime p, det != 1, ...)."""


@functools.total_ordering
class _Infinity:
    """Valuation of zero. Compares greater than every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinity"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("arbor.Infinity")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("cannot negate an infinite valuation")


Infinity = _Infinity()

Valuation = Union[int, _Infinity]
RationalLike = Union[int, Fraction, str]


@functools.lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if not isinstance(p, int) or isinstance(p, bool) or p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


def require_prime(p) -> int:
    if not is_prime(p):
        raise ValidationError(f"p must be a prime, got {p!r}")
    return p


def vp_int(n: int, p: int) -> Valuation:
    """Exponent of p in the integer n (Infinity for n == 0)."""
    if n == 0:
        return Infinity
    if n < 0:
        n = -n
    v = 0
    # strip p^8 at a time first; the loop below finishes the remainder
    big = p ** 8
    while n % big == 0:
        n //= big
        v += 8
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(x: RationalLike, p: int) -> Valuation:
    """p-adic valuation: r such that x = p^r * a/b with p dividing neither a nor b."""
    require_prime(p)
    x = to_rational(x)
    if x == 0:
        return Infinity
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def to_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {x!r}") from exc
    raise ValidationError(f"not a rational: {x!r}")


def format_rational(x: Fraction) -> str:
    """'num/den', or just 'num' when the denominator is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix over the rationals, immutable, exact."""

    a11: Fraction
    a12: Fraction
    a21: Fraction
    a22: Fraction

    @classmethod
    def of(cls, a11: RationalLike, a12: RationalLike, a21: RationalLike, a22: RationalLike) -> "Mat2":
        return cls(to_rational(a11), to_rational(a12), to_rational(a21), to_rational(a22))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RationalLike]]) -> "Mat2":
        rows = [list(r) for r in rows]
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValidationError(f"expected a 2x2 matrix, got {rows!r}")
        return cls.of(rows[0][0], rows[0][1], rows[1][0], rows[1][1])

    @classmethod
    def identity(cls) -> "Mat2":
        return IDENTITY

    def rows(self):
        return ((self.a11, self.a12), (self.a21, self.a22))

    def to_json(self):
        return [[format_rational(x) for x in row] for row in self.rows()]

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def __repr__(self):
        return "Mat2(%s)" % self.to_json()


ONE = Fraction(1)
ZERO = Fraction(0)
IDENTITY = Mat2(ONE, ZERO, ZERO, ONE)


def mat_mul(A: Mat2, B: Mat2) -> Mat2:
    return Mat2(
        A.a11 * B.a11 + A.a12 * B.a21,
        A.a11 * B.a12 + A.a12 * B.a22,
        A.a21 * B.a11 + A.a22 * B.a21,
        A.a21 * B.a12 + A.a22 * B.a22,
    )


def det(A: Mat2) -> Fraction:
    return A.a11 * A.a22 - A.a12 * A.a21


def trace(A: Mat2) -> Fraction:
    return A.a11 + A.a22


def mat_inv(A: Mat2) -> Mat2:
    """Inverse of a determinant-1 matrix (its adjugate)."""
    if det(A) != 1:
        raise ValidationError(f"mat_inv requires det 1, got det {format_rational(det(A))}")
    return adjugate(A)


def adjugate(A: Mat2) -> Mat2:
    return Mat2(A.a22, -A.a12, -A.a21, A.a11)


def mat_pow(A: Mat2, k: int) -> Mat2:
    """A^k for det-1 A; negative k uses the adjugate."""
    if k < 0:
        A, k = mat_inv(A), -k
    result = IDENTITY
    base = A
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def mat_scale(A: Mat2, c: Fraction) -> Mat2:
    return Mat2(A.a11 * c, A.a12 * c, A.a21 * c, A.a22 * c)
