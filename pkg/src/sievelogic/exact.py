"""Exact Gaussian-rational scalars and dense matrix helpers.

All arithmetic in the operator layer runs over complex numbers whose real
and imaginary parts are `fractions.Fraction` values. Vectors and square
matrices are nested tuples of those scalars, equality is literal, and
nothing anywhere in this module rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

RationalLike = Union[int, Fraction]


def as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction, got {type(value).__name__}")


@dataclass(frozen=True, slots=True)
class QC:
    """A Gaussian rational ``re + im*i``."""

    re: Fraction
    im: Fraction

    @staticmethod
    def of(value: "QC | RationalLike") -> "QC":
        if isinstance(value, QC):
            return value
        return QC(as_fraction(value), Fraction(0))

    def conj(self) -> "QC":
        return QC(self.re, -self.im)

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __add__(self, other: "QC | RationalLike") -> "QC":
        o = QC.of(other)
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: "QC | RationalLike") -> "QC":
        o = QC.of(other)
        return QC(self.re - o.re, self.im - o.im)

    def __mul__(self, other: "QC | RationalLike") -> "QC":
        o = QC.of(other)
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, divisor: RationalLike) -> "QC":
        # Only rational divisors arise here (norms are real); keeps the
        # implementation honest about staying inside the Gaussian rationals.
        d = as_fraction(divisor)
        return QC(self.re / d, self.im / d)

    def __neg__(self) -> "QC":
        return QC(-self.re, -self.im)


QC_ZERO = QC(Fraction(0), Fraction(0))
QC_ONE = QC(Fraction(1), Fraction(0))

Vector = tuple[QC, ...]
Matrix = tuple[tuple[QC, ...], ...]


def vector(entries: Iterable[QC | RationalLike]) -> Vector:
    return tuple(QC.of(e) for e in entries)


def matrix(rows: Iterable[Iterable[QC | RationalLike]]) -> Matrix:
    return tuple(tuple(QC.of(e) for e in row) for row in rows)


def identity_matrix(n: int) -> Matrix:
    return tuple(
        tuple(QC_ONE if i == j else QC_ZERO for j in range(n)) for i in range(n)
    )


def zero_matrix(n: int) -> Matrix:
    return tuple(tuple(QC_ZERO for _ in range(n)) for _ in range(n))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(
        tuple(_dot(row, col) for col in bt) for row in a
    )


def _dot(row: Iterable[QC], col: Iterable[QC]) -> QC:
    acc = QC_ZERO
    for x, y in zip(row, col):
        acc = acc + x * y
    return acc


def mat_vec(m: Matrix, v: Vector) -> Vector:
    return tuple(_dot(row, v) for row in m)


def conj_transpose(m: Matrix) -> Matrix:
    return tuple(tuple(m[j][i].conj() for j in range(len(m))) for i in range(len(m[0])))


def outer_self(v: Vector) -> Matrix:
    """The rank-one matrix ``v v†`` (unnormalized)."""
    return tuple(tuple(vi * vj.conj() for vj in v) for vi in v)


def inner(u: Vector, v: Vector) -> QC:
    """Physics-convention inner product, conjugate-linear in the first slot."""
    acc = QC_ZERO
    for x, y in zip(u, v):
        acc = acc + x.conj() * y
    return acc


def norm_sq(v: Vector) -> Fraction:
    value = inner(v, v)
    # <v, v> is real by construction; the imaginary part cancels exactly.
    assert not value.im
    return value.re


def is_zero_vector(v: Vector) -> bool:
    return all(e.is_zero() for e in v)


def is_zero_matrix(m: Matrix) -> bool:
    return all(e.is_zero() for row in m for e in row)


def is_hermitian(m: Matrix) -> bool:
    return m == conj_transpose(m)


def is_idempotent(m: Matrix) -> bool:
    return mat_mul(m, m) == m


def projector_leq(p: Matrix, q: Matrix) -> bool:
    """Exact subspace containment ``ran p <= ran q`` for projectors p, q."""
    return mat_mul(q, p) == p
