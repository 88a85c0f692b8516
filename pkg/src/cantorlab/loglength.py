"""Exact positive reals of the form prod p**e_p with rational exponents.

Values are stored through their prime exponent vector, so two values are
equal as reals exactly when their vectors coincide. Order is decided by the
sign of sum(e_p * log p), first with a cheap float filter and then by
outward-rounded interval evaluation at doubling precision. The loop always
terminates because logs of distinct primes are linearly independent over Q.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import gmpy2
from sympy import factorint

from cantorlab.enclosure import Interval, _ctx, log_int

START_BITS = 128
MAX_BITS = 1 << 20  # unreachable for any nonzero combination seen in practice

# Relative error budget of the float filter: each term is one log, one
# multiply and one add away from exact, far below this.
_FILTER_REL = 1e-12


class Ordering(enum.IntEnum):
    Less = -1
    Equal = 0
    Greater = 1


@lru_cache(maxsize=None)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    if n < 1:
        raise ValueError(f"only positive integers can be factored, got {n}")
    return tuple(sorted(factorint(n).items()))


def _as_fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class LogLength:
    """A positive real ``prod p**e`` over ``(p, e)`` in ``terms``.

    ``terms`` is sorted by prime and holds only nonzero exponents, which makes
    the dataclass equality and hash coincide with equality of reals.
    """

    terms: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def from_map(cls, exps: Mapping[int, object]) -> "LogLength":
        acc: dict[int, Fraction] = {}
        for base, e in exps.items():
            e = _as_fraction(e)
            if e == 0:
                continue
            for p, k in _factor(int(base)):
                acc[p] = acc.get(p, Fraction(0)) + k * e
        return cls(tuple(sorted((p, e) for p, e in acc.items() if e != 0)))

    @classmethod
    def one(cls) -> "LogLength":
        return cls()

    @classmethod
    def of_int(cls, n: int, exponent=1) -> "LogLength":
        """``n ** exponent`` for an integer ``n >= 1``."""
        return cls.from_map({n: exponent}) if n != 1 else cls()

    @classmethod
    def of_rational(cls, x) -> "LogLength":
        x = _as_fraction(x)
        if x <= 0:
            raise ValueError("LogLength values are positive")
        return cls.of_int(x.numerator) / cls.of_int(x.denominator)

    @classmethod
    def pow2(cls, e) -> "LogLength":
        return cls.from_map({2: e})

    @property
    def exponents(self) -> dict[int, Fraction]:
        return dict(self.terms)

    def exponent(self, p: int) -> Fraction:
        return self.exponents.get(p, Fraction(0))

    def __mul__(self, other: "LogLength") -> "LogLength":
        acc = dict(self.terms)
        for p, e in other.terms:
            acc[p] = acc.get(p, Fraction(0)) + e
        return LogLength(tuple(sorted((p, e) for p, e in acc.items() if e != 0)))

    def __truediv__(self, other: "LogLength") -> "LogLength":
        return self * other.inverse()

    def __pow__(self, k) -> "LogLength":
        k = _as_fraction(k)
        if k == 0:
            return LogLength()
        return LogLength(tuple((p, e * k) for p, e in self.terms))

    def inverse(self) -> "LogLength":
        return LogLength(tuple((p, -e) for p, e in self.terms))

    def is_one(self) -> bool:
        return not self.terms

    def is_pure_power_of_two(self) -> bool:
        return all(p == 2 for p, _ in self.terms)

    def rational_value(self) -> Fraction | None:
        """The exact rational value when every exponent is an integer."""
        if any(e.denominator != 1 for _, e in self.terms):
            return None
        num, den = 1, 1
        for p, e in self.terms:
            if e > 0:
                num *= p ** int(e)
            else:
                den *= p ** int(-e)
        return Fraction(num, den)

    def log_approx(self) -> float:
        """Float approximation of the natural log of the value."""
        return math.fsum(float(e) * math.log(p) for p, e in self.terms)

    def log2_approx(self) -> float:
        return self.log_approx() / math.log(2)

    def log_enclosure(self, prec: int = START_BITS) -> Interval:
        acc = Interval.exact(0, prec)
        for p, e in self.terms:
            acc = acc + Interval.exact(e, prec) * log_int(p, prec)
        return acc

    def value_enclosure(self, prec: int = START_BITS) -> Interval:
        """Enclosure of the value itself (not of its log)."""
        if self.is_pure_power_of_two() and all(e.denominator == 1 for _, e in self.terms):
            # Exact dyadic power, representable at any precision.
            return Interval.exact(self.rational_value(), prec)
        # Extra guard bits absorb the error amplification of exp.
        guard = prec + 32 + max(0, int(abs(self.log_approx())).bit_length())
        enc = self.log_enclosure(guard).exp()
        with _ctx(prec, gmpy2.RoundDown):
            lo = gmpy2.mpfr(enc.lo)
        with _ctx(prec, gmpy2.RoundUp):
            hi = gmpy2.mpfr(enc.hi)
        return Interval(lo, hi, prec)

    def to_json(self) -> dict[str, str]:
        return {str(p): f"{e.numerator}/{e.denominator}" for p, e in self.terms}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "LogLength":
        return cls.from_map({int(p): Fraction(e) for p, e in data.items()})

    def __str__(self) -> str:
        if not self.terms:
            return "1"
        return "*".join(f"{p}^({e})" for p, e in self.terms)

    def __lt__(self, other: "LogLength") -> bool:
        return ll_cmp(self, other) is Ordering.Less

    def __le__(self, other: "LogLength") -> bool:
        return ll_cmp(self, other) is not Ordering.Greater

    def __gt__(self, other: "LogLength") -> bool:
        return ll_cmp(self, other) is Ordering.Greater

    def __ge__(self, other: "LogLength") -> bool:
        return ll_cmp(self, other) is not Ordering.Less


def ll_mul(x: LogLength, y: LogLength) -> LogLength:
    return x * y


def log_sign(x: LogLength) -> int:
    """Sign of ``log x`` (i.e. compare ``x`` with 1), decided exactly."""
    terms = x.terms
    if not terms:
        return 0
    if len(terms) == 1:
        return 1 if terms[0][1] > 0 else -1
    parts = [float(e) * math.log(p) for p, e in terms]
    s = math.fsum(parts)
    if abs(s) > _FILTER_REL * sum(abs(t) for t in parts) + 1e-300:
        return 1 if s > 0 else -1
    prec = START_BITS
    while prec <= MAX_BITS:
        sg = x.log_enclosure(prec).sign()
        if sg is not None:
            return sg
        prec *= 2
    raise ArithmeticError("log comparison did not resolve")  # pragma: no cover


def ll_cmp(x: LogLength, y: LogLength) -> Ordering:
    if x == y:
        return Ordering.Equal
    return Ordering(log_sign(x / y))


@dataclass(frozen=True)
class FloatEnclosure:
    lo: float
    hi: float
    underflow: bool = False


def ll_to_float(x: LogLength, bits: int = 64) -> FloatEnclosure:
    """Enclosure ``lo <= value <= hi`` with endpoints rounded outward to ``bits`` bits.

    The exponent range is that of IEEE binary64 for ``bits <= 53`` (endpoints
    are Python floats) and of binary128 otherwise (endpoints are ``mpfr``).
    """
    if bits < 32:
        raise ValueError("bits must be at least 32")
    emin, emax = (-1074, 1024) if bits <= 53 else (-16494, 16384)
    enc = x.value_enclosure(max(bits, 53) if bits <= 53 else bits)
    if enc.hi < _pow2(emin):
        tiny = _pow2(emin)
        return FloatEnclosure(0.0, float(tiny) if bits <= 53 else tiny, True)
    if enc.lo >= _pow2(emax):
        raise OverflowError("LogLength value exceeds the exponent range")
    if bits <= 53:
        with _ctx(bits, gmpy2.RoundDown):
            lo = float(gmpy2.mpfr(enc.lo))
        with _ctx(bits, gmpy2.RoundUp):
            hi = float(gmpy2.mpfr(enc.hi))
        # float() rounds to nearest; push back outward if it moved inward.
        if gmpy2.mpfr(lo) > enc.lo:
            lo = math.nextafter(lo, 0.0)
        if gmpy2.mpfr(hi) < enc.hi:
            hi = math.nextafter(hi, math.inf)
        return FloatEnclosure(lo, hi, False)
    return FloatEnclosure(enc.lo, enc.hi, False)


def _pow2(e: int):
    with _ctx(64, gmpy2.RoundToNearest):
        return gmpy2.exp2(gmpy2.mpfr(e))


def floor_log2(x: LogLength, scale: int = 1) -> int:
    """Exact ``floor(scale * log2(x))`` for a positive integer ``scale``."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    if x.is_pure_power_of_two():
        return math.floor(scale * x.exponent(2))
    # scale*log2(x) is irrational here, so the floor is eventually certain.
    prec = START_BITS
    while prec <= MAX_BITS:
        enc = x.log_enclosure(prec) * Interval.exact(scale, prec) / log_int(2, prec)
        lo, hi = math.floor(enc.lo), math.floor(enc.hi)
        if lo == hi:
            return int(lo)
        prec *= 2
    raise ArithmeticError("floor_log2 did not resolve")  # pragma: no cover
