"""Outward-rounded real intervals on top of MPFR (gmpy2).

Every operation evaluates the lower endpoint under round-toward-minus-infinity
and the upper endpoint under round-toward-plus-infinity, so the true value is
always enclosed. Precision is explicit per call; there is no global state.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr, mpq

_DOWN = gmpy2.RoundDown
_UP = gmpy2.RoundUp


def _ctx(prec: int, rnd):
    # Wide exponent range: values like 128^-10000 must not underflow here.
    return gmpy2.context(precision=prec, round=rnd, emin=-(2**40), emax=2**40)


@dataclass(frozen=True)
class Interval:
    lo: object  # mpfr
    hi: object  # mpfr
    prec: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, x, prec: int = 128) -> "Interval":
        """Tightest enclosure of an int/Fraction/mpq at ``prec`` bits."""
        q = mpq(x.numerator, x.denominator) if isinstance(x, Fraction) else mpq(x)
        with _ctx(prec, _DOWN):
            lo = mpfr(q)
        with _ctx(prec, _UP):
            hi = mpfr(q)
        return cls(lo, hi, prec)

    @classmethod
    def hull(cls, *items: "Interval") -> "Interval":
        return cls(min(i.lo for i in items), max(i.hi for i in items), min(i.prec for i in items))

    def __add__(self, other: "Interval") -> "Interval":
        other = _coerce(other, self.prec)
        p = min(self.prec, other.prec)
        with _ctx(p, _DOWN):
            lo = self.lo + other.lo
        with _ctx(p, _UP):
            hi = self.hi + other.hi
        return Interval(lo, hi, p)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        # Exact: the target precision covers both endpoints.
        with _ctx(max(self.prec, self.lo.precision, self.hi.precision), _DOWN):
            return Interval(-self.hi, -self.lo, self.prec)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-_coerce(other, self.prec))

    def __rsub__(self, other) -> "Interval":
        return _coerce(other, self.prec) - self

    def __mul__(self, other: "Interval") -> "Interval":
        other = _coerce(other, self.prec)
        p = min(self.prec, other.prec)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        with _ctx(p, _DOWN):
            lo = min(a * b for a, b in pairs)
        with _ctx(p, _UP):
            hi = max(a * b for a, b in pairs)
        return Interval(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval") -> "Interval":
        other = _coerce(other, self.prec)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        p = min(self.prec, other.prec)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        with _ctx(p, _DOWN):
            lo = min(a / b for a, b in pairs)
        with _ctx(p, _UP):
            hi = max(a / b for a, b in pairs)
        return Interval(lo, hi, p)

    def exp(self) -> "Interval":
        with _ctx(self.prec, _DOWN):
            lo = gmpy2.exp(self.lo)
        with _ctx(self.prec, _UP):
            hi = gmpy2.exp(self.hi)
        return Interval(lo, hi, self.prec)

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise ValueError("log of a non-positive interval")
        with _ctx(self.prec, _DOWN):
            lo = gmpy2.log(self.lo)
        with _ctx(self.prec, _UP):
            hi = gmpy2.log(self.hi)
        return Interval(lo, hi, self.prec)

    @property
    def width(self):
        with _ctx(self.prec, _UP):
            return self.hi - self.lo

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    def sign(self) -> int | None:
        """+1/-1 when the interval excludes zero, else None."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return None

    def contains(self, x) -> bool:
        q = mpq(x.numerator, x.denominator) if isinstance(x, Fraction) else x
        return self.lo <= q <= self.hi

    def separation_lower(self, other: "Interval") -> float:
        """Lower bound on ``|x - y|`` over ``x`` in self and ``y`` in other (0 if they meet)."""
        p = max(self.prec, other.prec)
        with _ctx(p, _DOWN):
            d = max(other.lo - self.hi, self.lo - other.hi)
        if d <= 0:
            return 0.0
        with _ctx(53, _DOWN):
            return float(gmpy2.mpfr(d))

    def distance_upper(self, other: "Interval") -> float:
        """Upper bound on ``|x - y|`` over ``x`` in self and ``y`` in other."""
        p = max(self.prec, other.prec)
        with _ctx(p, _UP):
            d = max(abs(self.hi - other.lo), abs(other.hi - self.lo))
        with _ctx(53, _UP):
            return float(gmpy2.mpfr(d))

    def certainly_lt(self, other: "Interval") -> bool:
        return self.hi < other.lo

    def overlaps(self, other: "Interval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def as_decimal_strings(self, digits: int = 25) -> dict:
        return {"lo": _fmt(self.lo, digits, _DOWN), "hi": _fmt(self.hi, digits, _UP)}


def _fmt(x, digits: int, rnd) -> str:
    # Directed decimal rounding keeps the printed pair an enclosure.
    num, den = x.as_integer_ratio()
    mode = decimal.ROUND_FLOOR if rnd is _DOWN else decimal.ROUND_CEILING
    with decimal.localcontext(decimal.Context(prec=digits, rounding=mode, Emin=-(10**9), Emax=10**9)):
        return str(decimal.Decimal(int(num)) / decimal.Decimal(int(den)))


def _coerce(x, prec: int) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.exact(x, prec)


@lru_cache(maxsize=4096)
def log_int(n: int, prec: int) -> Interval:
    """Enclosure of ``log n`` for an integer ``n >= 1``."""
    if n < 1:
        raise ValueError("log of non-positive integer")
    with _ctx(prec, _DOWN):
        lo = gmpy2.log(mpfr(n))
    with _ctx(prec, _UP):
        hi = gmpy2.log(mpfr(n))
    return Interval(lo, hi, prec)
