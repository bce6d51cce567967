"""Coefficient fields for jets: double-precision complex and exact Gaussian rationals.

The exact field is sympy's ``QQ_I`` (rationals with the imaginary unit
adjoined). Both fields expose the same small interface so that the jet
algebra is written once.
"""

from __future__ import annotations

import numbers
from fractions import Fraction

from sympy.polys.domains import QQ, QQ_I

__all__ = ["Field", "FLOAT", "RATIONAL", "get_field", "to_exact", "to_complex"]


def _to_qq(x) -> object:
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        return QQ(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, float):
        f = Fraction(x)
        return QQ(f.numerator, f.denominator)
    # gmpy2 mpq / mpz and sympy rationals
    try:
        return QQ.convert(x)
    except Exception as exc:  # pragma: no cover - defensive
        raise TypeError(f"cannot convert {x!r} to an exact rational") from exc


def to_exact(c):
    """Exact Gaussian rational for ``c`` (floats are taken at their binary value)."""
    if type(c).__name__ == "GaussianRational":
        return c
    if isinstance(c, complex):
        return QQ_I(_to_qq(c.real), _to_qq(c.imag))
    if isinstance(c, tuple) and len(c) == 2:
        return QQ_I(_to_qq(c[0]), _to_qq(c[1]))
    return QQ_I(_to_qq(c), QQ(0))


def to_complex(c) -> complex:
    if type(c).__name__ == "GaussianRational":
        return complex(float(c.x), float(c.y))
    if isinstance(c, numbers.Complex):
        return complex(c)
    return complex(float(c))


class Field:
    """Interface shared by the two coefficient fields."""

    name: str
    exact: bool

    def convert(self, c):
        raise NotImplementedError

    def conj(self, c):
        raise NotImplementedError

    def is_zero(self, c) -> bool:
        return not c

    @property
    def zero(self):
        return self.convert(0)

    @property
    def one(self):
        return self.convert(1)

    @property
    def imag_unit(self):
        return self.convert(1j)

    def to_complex(self, c) -> complex:
        return to_complex(c)

    def __repr__(self) -> str:
        return f"<field {self.name}>"


class _ComplexField(Field):
    name = "float"
    exact = False

    def convert(self, c):
        return to_complex(c)

    def conj(self, c):
        return c.conjugate()


class _GaussianRationalField(Field):
    name = "rational"
    exact = True

    def convert(self, c):
        return to_exact(c)

    def conj(self, c):
        return QQ_I(c.x, -c.y)


FLOAT: Field = _ComplexField()
RATIONAL: Field = _GaussianRationalField()


def get_field(name: str | Field) -> Field:
    if isinstance(name, Field):
        return name
    if name in ("float", "complex"):
        return FLOAT
    if name in ("rational", "exact"):
        return RATIONAL
    raise ValueError(f"unknown coefficient field {name!r}")
