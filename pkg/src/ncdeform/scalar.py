"""Exact Gaussian rationals ``p + q*i`` over arbitrary-precision rationals."""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

__all__ = ["ExactScalar", "Q", "as_rational", "I", "ZERO", "ONE"]


def as_rational(value) -> mpq:
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to ``mpq``.

    Floats are rejected: the exact engine never sees rounded input.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, type(mpq())):
        return value
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL.fullmatch(text):
            raise ValueError(f"not a rational literal: {value!r}")
        try:
            return mpq(text.lstrip("+"))
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


Q = as_rational

_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")


class ExactScalar:
    """Gaussian rational ``re + im*i``; immutable and hashable."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", as_rational(re))
        object.__setattr__(self, "im", as_rational(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "ExactScalar":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @classmethod
    def coerce(cls, value) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls._raw(as_rational(value), _Z)

    # --- text form -------------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "ExactScalar":
        """Parse ``"p/q"``, ``"p/q+r/t*i"``, ``"r/t*i"`` or ``"i"``."""
        s = text.replace(" ", "")
        if not s.endswith("i"):
            return cls._raw(as_rational(s), _Z)
        body = s[:-1].rstrip("*") if s.endswith("*i") else s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut > 0:
            re_text, im_text = body[:cut], body[cut:]
        else:
            re_text, im_text = "0", body
        if im_text in ("", "+", "-"):
            im_text += "1"
        try:
            return cls._raw(as_rational(re_text), as_rational(im_text))
        except ValueError:
            raise ValueError(f"not a Gaussian rational literal: {text!r}") from None

    def __str__(self) -> str:
        if self.im == 0:
            return _fmt(self.re)
        sign = "-" if self.im < 0 else "+"
        return f"{_fmt(self.re)}{sign}{_fmt(abs(self.im))}*i"

    def __repr__(self) -> str:
        return f"ExactScalar({str(self)!r})"

    # --- arithmetic ------------------------------------------------------
    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return ExactScalar._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._raw(-self.re, -self.im)

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return ExactScalar._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        return ExactScalar._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactScalar":
        return ExactScalar._raw(self.re, -self.im)

    def norm2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "ExactScalar":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("ExactScalar division by zero")
        return ExactScalar._raw(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        out = ONE
        for _ in range(abs(k)):
            out = out * base
        return out

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0


def _fmt(q: mpq) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coerce_or_none(value):
    if isinstance(value, ExactScalar):
        return value
    try:
        return ExactScalar._raw(as_rational(value), _Z)
    except (TypeError, ValueError):
        return None


_Z = mpq(0)
ZERO = ExactScalar._raw(_Z, _Z)
ONE = ExactScalar._raw(mpq(1), _Z)
I = ExactScalar._raw(_Z, mpq(1))
