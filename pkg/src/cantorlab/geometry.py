"""Generating intervals, the two contractions and the expanding map.

Endpoints of generating intervals are finite signed sums of lengths. Such a
sum is kept exactly as ``ExactSum``: each length is split into a rational
factor and a unit ``prod p**f_p`` with every ``f_p`` in ``[0, 1)``, and
coefficients of equal units are merged. Distinct units are linearly
independent over Q, so a nonzero ``ExactSum`` has a nonzero value and its
sign can always be certified by interval evaluation at high enough precision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from gmpy2 import mpq

from cantorlab.enclosure import Interval
from cantorlab.errors import DeltaTooLarge, DepthExceeded, DomainError, InvariantViolation, ModelInvalid
from cantorlab.loglength import LogLength
from cantorlab.models import McMullenModel, StarModel, SymmetricModel, sym_point
from cantorlab.symbolic import Word

_SIGN_START = 128
_SIGN_MAX = 1 << 16


UnitKey = tuple  # ((p, num, den), ...) with 0 < num/den < 1, sorted by p


@lru_cache(maxsize=1 << 16)
def _split_terms(terms: tuple) -> tuple[object, UnitKey]:
    num, den = 1, 1
    unit = []
    for p, e in terms:
        whole = math.floor(e)
        if whole > 0:
            num *= p**whole
        elif whole < 0:
            den *= p ** (-whole)
        frac = e - whole
        if frac:
            unit.append((p, frac.numerator, frac.denominator))
    return mpq(num, den), tuple(unit)


def _split(x: LogLength) -> tuple[object, UnitKey]:
    """``x = r * unit`` with ``r`` rational and unit exponents in ``[0, 1)``."""
    return _split_terms(x.terms)


@lru_cache(maxsize=1 << 16)
def _unit_mul(u1: UnitKey, u2: UnitKey) -> tuple[object, UnitKey]:
    return _split(_unit_ll(u1) * _unit_ll(u2))


@lru_cache(maxsize=1 << 16)
def _unit_ll(u: UnitKey) -> LogLength:
    return LogLength(tuple((p, Fraction(n, d)) for p, n, d in u))


@lru_cache(maxsize=1 << 16)
def _unit_float(u: UnitKey) -> float:
    return math.exp(_unit_ll(u).log_approx()) if u else 1.0


@lru_cache(maxsize=1 << 16)
def _unit_enclosure(u: UnitKey, prec: int) -> Interval:
    return _unit_ll(u).value_enclosure(prec)


def _mpq(x) -> object:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


@dataclass(frozen=True)
class ExactSum:
    """``sum coef * unit`` over ``parts``; canonical (sorted, no zero coefficients).

    Coefficients are gmpy2 ``mpq`` for speed; units are keys ``((p, num, den), ...)``.
    """

    parts: tuple = ()

    @staticmethod
    def _make(acc: dict) -> "ExactSum":
        return ExactSum(tuple(sorted((u, c) for u, c in acc.items() if c)))

    @classmethod
    def of(cls, x) -> "ExactSum":
        if isinstance(x, ExactSum):
            return x
        if isinstance(x, LogLength):
            r, u = _split(x)
            return cls(((u, r),))
        x = _mpq(x)
        return cls((((), x),)) if x else cls()

    def __add__(self, other) -> "ExactSum":
        other = ExactSum.of(other)
        if not other.parts:
            return self
        acc = dict(self.parts)
        for u, c in other.parts:
            acc[u] = acc.get(u, 0) + c
        return ExactSum._make(acc)

    __radd__ = __add__

    def __neg__(self) -> "ExactSum":
        return ExactSum(tuple((u, -c) for u, c in self.parts))

    def __sub__(self, other) -> "ExactSum":
        return self + (-ExactSum.of(other))

    def __rsub__(self, other) -> "ExactSum":
        return ExactSum.of(other) - self

    def __mul__(self, other) -> "ExactSum":
        other = ExactSum.of(other)
        acc: dict = {}
        for u1, c1 in self.parts:
            for u2, c2 in other.parts:
                if not u1:
                    r, u = 1, u2
                elif not u2:
                    r, u = 1, u1
                else:
                    r, u = _unit_mul(u1, u2)
                acc[u] = acc.get(u, 0) + c1 * c2 * r
        return ExactSum._make(acc)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.parts

    def to_fraction(self) -> Fraction | None:
        if not self.parts:
            return Fraction(0)
        if len(self.parts) == 1 and not self.parts[0][0]:
            c = self.parts[0][1]
            return Fraction(int(c.numerator), int(c.denominator))
        return None

    def float_estimate(self) -> tuple[float, float]:
        """``(value, abs error bound)`` in double precision; error is inf if unreliable."""
        terms = [float(c) * _unit_float(u) for u, c in self.parts]
        if not all(math.isfinite(t) and t != 0.0 for t in terms):
            return 0.0, math.inf
        return math.fsum(terms), 1e-13 * sum(abs(t) for t in terms)

    def enclosure(self, prec: int = _SIGN_START) -> Interval:
        acc = Interval.exact(0, prec)
        for u, c in self.parts:
            term = Interval.exact(Fraction(int(c.numerator), int(c.denominator)), prec)
            if u:
                term = term * _unit_enclosure(u, prec)
            acc = acc + term
        return acc

    def sign(self) -> int:
        if not self.parts:
            return 0
        if len(self.parts) == 1:
            return 1 if self.parts[0][1] > 0 else -1
        s, err = self.float_estimate()
        if abs(s) > err:
            return 1 if s > 0 else -1
        prec = _SIGN_START
        while prec <= _SIGN_MAX:
            sg = self.enclosure(prec).sign()
            if sg is not None:
                return sg
            prec *= 2
        raise InvariantViolation("sign of a nonzero exact sum did not resolve")

    def cmp(self, other) -> int:
        return (self - ExactSum.of(other)).sign()

    def __lt__(self, other) -> bool:
        return self.cmp(other) < 0

    def __le__(self, other) -> bool:
        return self.cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self.cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self.cmp(other) >= 0

    def __str__(self) -> str:
        if not self.parts:
            return "0"
        return " + ".join(f"({c})" + (f"*{_unit_ll(u)}" if u else "") for u, c in self.parts)


Point = Union[ExactSum, Fraction, int]


def _enclose_to(x: ExactSum, tol: float) -> Interval:
    prec = _SIGN_START
    while True:
        enc = x.enclosure(prec)
        if enc.width <= tol or prec >= _SIGN_MAX:
            return enc
        prec *= 2


# --------------------------------------------------------------------------
# The interval tree


@dataclass(frozen=True)
class IntervalNode:
    word: Word
    left: ExactSum
    length: LogLength
    child_lengths: tuple[LogLength, LogLength]

    @property
    def right(self) -> ExactSum:
        return self.left + self.length

    @property
    def gap(self) -> tuple[ExactSum, ExactSum]:
        return self.left + self.child_lengths[0], self.right - self.child_lengths[1]

    @property
    def gap_length(self) -> ExactSum:
        return ExactSum.of(self.length) - self.child_lengths[0] - self.child_lengths[1]

    def enclosure(self, prec: int = _SIGN_START) -> Interval:
        lo = self.left.enclosure(prec)
        hi = self.right.enclosure(prec)
        return Interval(lo.lo, hi.hi, prec)


class CantorTree:
    """Memoised generating intervals of one model.

    The cache is a plain dict; concurrent fills compute identical nodes, so
    racing inserts are harmless.
    """

    def __init__(self, model):
        self.model = model
        self._nodes: dict[tuple[int, ...], IntervalNode] = {}

    def length(self, w: Word) -> LogLength:
        return self.model.length(w)

    def node(self, w: Word) -> IntervalNode:
        hit = self._nodes.get(w.bits)
        if hit is not None:
            return hit
        if len(w) == 0:
            left = ExactSum.of(0)
        else:
            parent = self.node(Word(w.bits[:-1]))
            left = parent.left if w.bits[-1] == 0 else parent.right - parent.child_lengths[1]
        length = self.length(w)
        kids = (self.length(w.child(0)), self.length(w.child(1)))
        nd = IntervalNode(w, left, length, kids)
        if nd.gap_length.sign() <= 0:
            raise ModelInvalid(f"children of I_{w or 'root'} do not leave a gap: |I_w0| + |I_w1| >= |I_w|")
        self._nodes[w.bits] = nd
        return nd


def build_interval(model, w: Word) -> IntervalNode:
    return CantorTree(model).node(w)


def pi_point(model, bits: Word, depth: int, prec: int = _SIGN_START) -> Interval:
    """Enclosure of the coding point: the generating interval of ``bits[:depth]``."""
    if depth > len(bits):
        raise ValueError("depth exceeds the available symbols")
    return CantorTree(model).node(bits.prefix(depth)).enclosure(prec)


# --------------------------------------------------------------------------
# The contractions and their inverse branches


def _as_point(x) -> ExactSum:
    if isinstance(x, ExactSum):
        return x
    if isinstance(x, float):
        x = Fraction(x)  # exact binary value of the float
    return ExactSum.of(Fraction(x))


def _transport(tree: CantorTree, x: ExactSum, src: Word, dst: Word, tol: float, max_depth: int):
    """Image of ``x in I_src`` under the map sending ``I_{src w}`` to ``I_{dst w}``.

    Returns ``(ExactSum, None)`` for an exactly known image or ``(None, Interval)``.
    """
    w = Word()
    log_tol = math.log(tol)
    # An endpoint can only start matching x after it moves: the left one on a
    # step right, the right one on a step left.
    check_left = check_right = True
    for _ in range(max_depth + 1):
        s_node = tree.node(src + w)
        d_node = tree.node(dst + w)
        if check_left and x.cmp(s_node.left) == 0:
            return d_node.left, None
        if check_right and x.cmp(s_node.right) == 0:
            return d_node.right, None
        gl, gr = s_node.gap
        below, above = x.cmp(gl), x.cmp(gr)
        if below >= 0 and above <= 0:
            # affine on the closed gap
            dgl, _ = d_node.gap
            if below == 0:
                return dgl, None
            num, den = d_node.gap_length, s_node.gap_length
            prec = _SIGN_START
            while True:
                enc = dgl.enclosure(prec) + (x - gl).enclosure(prec) * num.enclosure(prec) / den.enclosure(prec)
                if enc.width <= tol / 4 or prec >= _SIGN_MAX:
                    return None, enc
                prec *= 2
        step = 0 if below < 0 else 1
        check_left, check_right = step == 1, step == 0
        w = w.child(step)
        d_child = tree.node(dst + w)
        if d_child.length.log_approx() <= log_tol + 1:
            enc = d_child.enclosure()
            if enc.width <= tol:
                return None, enc
    raise DepthExceeded(f"tolerance {tol} not reached within depth {max_depth}")


def _branch_endpoints(tree: CantorTree, i: int) -> tuple[ExactSum, ExactSum]:
    nd = tree.node(Word((i,)))
    return nd.left, nd.right


def _point_result(x: ExactSum | None, enc: Interval | None, tol: float) -> Interval:
    return enc if x is None else _enclose_to(x, min(tol, 1e-30))


def phi_exact(tree: CantorTree, i: int, x: Point, tol: float = 1e-30, max_depth: int = 64):
    """``phi_i(x)`` as ``(exact, enclosure)``; exactly one of the two is set."""
    x = _as_point(x)
    lo_i, hi_i = _branch_endpoints(tree, i)
    if x.sign() < 0:
        return lo_i + x * Fraction(1, 2), None
    if x.cmp(1) > 0:
        return hi_i + (x - 1) * Fraction(1, 2), None
    return _transport(tree, x, Word(), Word((i,)), tol, max_depth)


def phi_inverse_exact(tree: CantorTree, i: int, x: Point, tol: float = 1e-30, max_depth: int = 64):
    x = _as_point(x)
    lo_i, hi_i = _branch_endpoints(tree, i)
    if x.cmp(lo_i) < 0 or x.cmp(hi_i) > 0:
        raise DomainError(f"point outside the image of branch {i}")
    return _transport(tree, x, Word((i,)), Word(), tol, max_depth)


def phi_eval(model, i: int, x, tol: float = 1e-12, max_depth: int = 64, tree: CantorTree | None = None) -> Interval:
    """Enclosure of ``phi_i(x)`` of width at most ``tol``.

    ``x`` may be exact (int, Fraction, ExactSum) or an ``Interval``; for an
    interval the hull of the endpoint images is returned (``phi_i`` is increasing).
    """
    if i not in (0, 1):
        raise ValueError("symbol must be 0 or 1")
    tree = tree or CantorTree(model)
    if isinstance(x, Interval):
        a = phi_eval(model, i, Fraction(*x.lo.as_integer_ratio()), tol, max_depth, tree)
        b = phi_eval(model, i, Fraction(*x.hi.as_integer_ratio()), tol, max_depth, tree)
        return Interval.hull(a, b)
    ex, enc = phi_exact(tree, i, x, tol, max_depth)
    return _point_result(ex, enc, tol)


def phi_inverse_eval(model, i: int, x, tol: float = 1e-12, max_depth: int = 64, tree: CantorTree | None = None) -> Interval:
    tree = tree or CantorTree(model)
    ex, enc = phi_inverse_exact(tree, i, x, tol, max_depth)
    return _point_result(ex, enc, tol)


# --------------------------------------------------------------------------
# Bi-Lipschitz verification


@dataclass(frozen=True)
class Witness:
    word: str  # the word i+omega
    kind: str  # "interval" or "gap"
    ratio: str  # exact ratio, rendered
    value: float


@dataclass(frozen=True)
class BiLipReport:
    status: str  # PASS / FAIL
    theta_star: float
    theta_upper: float
    depth: int
    words_checked: int
    min_witness: Witness
    max_witness: Witness
    interval_bounds: tuple[str, str] | None
    gap_bounds: tuple[str, str] | None
    interval_violations: int
    gap_violations: int
    certificate: str  # "closed-form" or "depth-bounded"
    certificate_detail: str

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_json(self) -> dict:
        def wit(w: Witness) -> dict:
            return {"word": w.word, "kind": w.kind, "ratio": w.ratio, "value": repr(w.value)}

        return {
            "status": self.status,
            "theta_star": repr(self.theta_star),
            "theta_upper": repr(self.theta_upper),
            "depth": self.depth,
            "words_checked": self.words_checked,
            "min_witness": wit(self.min_witness),
            "max_witness": wit(self.max_witness),
            "interval_bounds": list(self.interval_bounds) if self.interval_bounds else None,
            "gap_bounds": list(self.gap_bounds) if self.gap_bounds else None,
            "interval_violations": self.interval_violations,
            "gap_violations": self.gap_violations,
            "certificate": self.certificate,
            "certificate_detail": self.certificate_detail,
        }


class _Ratio:
    """``num / den`` with exact cross-multiplied comparison behind a float filter."""

    __slots__ = ("num", "den", "kind", "word", "approx", "rel_err")

    def __init__(self, num: ExactSum, den: ExactSum, kind: str, word: Word):
        self.num, self.den, self.kind, self.word = num, den, kind, word
        a, ea = num.float_estimate()
        b, eb = den.float_estimate()
        if a > 0 and b > 0 and math.isfinite(ea) and math.isfinite(eb):
            self.approx = a / b
            self.rel_err = ea / a + eb / b + 1e-15
        else:
            self.approx, self.rel_err = math.nan, math.inf

    def _filtered(self, other_val: float, other_err: float) -> int | None:
        gap = self.approx - other_val
        bound = self.rel_err * abs(self.approx) + other_err * abs(other_val)
        if math.isfinite(bound) and abs(gap) > 2 * bound:
            return 1 if gap > 0 else -1
        return None

    def cmp(self, other: "_Ratio") -> int:
        quick = self._filtered(other.approx, other.rel_err)
        if quick is not None:
            return quick
        return (self.num * other.den - other.num * self.den).sign()

    def cmp_const(self, q: Fraction) -> int:
        quick = self._filtered(float(q), 1e-16)
        if quick is not None:
            return quick
        return (self.num - self.den * q).sign()

    def value(self) -> float:
        return self.num.enclosure().mid / self.den.enclosure().mid

    def witness(self) -> Witness:
        q_num, q_den = self.num.to_fraction(), self.den.to_fraction()
        if q_num is not None and q_den is not None:
            text = str(q_num / q_den)
        else:
            text = f"[{self.num}] / [{self.den}]"
        return Witness(str(self.word), self.kind, text, self.value())


def _closed_form(model) -> tuple[tuple | None, tuple | None, str, bool]:
    """Family bounds ``(interval, gap, detail, certified_ok)``."""
    if isinstance(model, (McMullenModel, StarModel)):
        ib, gb = model.ratio_bounds(), model.gap_ratio_bounds()
        ok = ib[0] > 0 and gb[0] > 0 and ib[1] < 1 and gb[1] < 1
        return ib, gb, f"{model.family} family ratio bounds hold at every depth", ok
    if isinstance(model, SymmetricModel):
        ib = model.c.interval_ratio_bounds()
        gb = model.c.criterion_bounds()
        ok = ib[0] > 0 and gb[0] > 0 and ib[1] < 1 and gb[1] < 1
        detail = f"inf/sup of c_n(1-2c_(n+1))/(1-2c_n) over all n: {gb[0]} / {gb[1]}; c_n in [{ib[0]}, {ib[1]}]"
        return ib, gb, detail, ok
    return None, None, "no closed form for this length function", True


def bilip_check(model, depth: int) -> BiLipReport:
    """Extreme ratios ``|I_iw|/|I_w|`` and ``|G_iw|/|G_w|`` over ``|iw| <= depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    tree = CantorTree(model)
    ib, gb, detail, certified_ok = _closed_form(model)
    lo_r = hi_r = None
    i_viol = g_viol = 0
    checked = 0
    for m in range(depth):
        for x in range(2**m):
            w = Word(tuple((x >> (m - 1 - j)) & 1 for j in range(m)))
            parent = tree.node(w)
            for i in (0, 1):
                child = tree.node(Word((i,)) + w)
                checked += 1
                r_int = _Ratio(ExactSum.of(child.length), ExactSum.of(parent.length), "interval", child.word)
                r_gap = _Ratio(child.gap_length, parent.gap_length, "gap", child.word)
                if ib is not None and (r_int.cmp_const(ib[0]) < 0 or r_int.cmp_const(ib[1]) > 0):
                    i_viol += 1
                if gb is not None and (r_gap.cmp_const(gb[0]) < 0 or r_gap.cmp_const(gb[1]) > 0):
                    g_viol += 1
                for r in (r_int, r_gap):
                    if lo_r is None or r.cmp(lo_r) < 0:
                        lo_r = r
                    if hi_r is None or r.cmp(hi_r) > 0:
                        hi_r = r
    probed_ok = lo_r.cmp_const(Fraction(0)) > 0 and hi_r.cmp_const(Fraction(1)) < 0
    passed = probed_ok and certified_ok and i_viol == 0 and g_viol == 0
    if ib is None:
        certificate = "depth-bounded"
    else:
        certificate = "closed-form"
    return BiLipReport(
        status="PASS" if passed else "FAIL",
        theta_star=lo_r.value(),
        theta_upper=hi_r.value(),
        depth=depth,
        words_checked=checked,
        min_witness=lo_r.witness(),
        max_witness=hi_r.witness(),
        interval_bounds=(str(ib[0]), str(ib[1])) if ib else None,
        gap_bounds=(str(gb[0]), str(gb[1])) if gb else None,
        interval_violations=i_viol,
        gap_violations=g_viol,
        certificate=certificate,
        certificate_detail=detail if certified_ok else f"FAILS: {detail}",
    )


# --------------------------------------------------------------------------
# Difference quotients of the contractions on symmetric sets


def quotient_terms(model: SymmetricModel, n_max: int) -> list[Fraction]:
    """``c_n (1 - c_{n+1}) / (1 - c_n)`` for ``n = 1..n_max``."""
    c = [None] + [model.c_at(j) for j in range(1, n_max + 2)]
    return [c[n] * (1 - c[n + 1]) / (1 - c[n]) for n in range(1, n_max + 1)]


def diff_quotients(model: SymmetricModel, x_bits: Word, n_max: int, verify_upto: int = 12) -> list[Fraction]:
    """Quotient sequence, with the defining difference quotient re-derived at two codings.

    For ``n <= verify_upto`` the quotient ``(phi_i(x) - phi_i(y_n)) / (x - y_n)``,
    where ``y_n`` flips the n-th symbol of ``x``, is evaluated exactly from the
    additive coding at ``x_bits`` and at its complement, for both branches.
    """
    if not isinstance(model, SymmetricModel):
        raise TypeError("difference quotients are defined for symmetric models")
    seq = quotient_terms(model, n_max)
    k = min(verify_upto, n_max)
    if k >= 1:
        base = Word.periodic(str(x_bits) or "0", k + 1)
        other = Word(tuple(1 - b for b in base.bits))
        for bits in (base, other):
            depth = len(bits)
            x = sym_point(model, bits, depth)
            for n in range(1, k + 1):
                flipped = Word(bits.bits[: n - 1] + (1 - bits[n - 1],) + bits.bits[n:])
                y = sym_point(model, flipped, depth)
                for i in (0, 1):
                    fx = sym_point(model, Word((i,)) + bits, depth + 1)
                    fy = sym_point(model, Word((i,)) + flipped, depth + 1)
                    if (fx - fy) / (x - y) != seq[n - 1]:
                        raise InvariantViolation(f"difference quotient mismatch at n={n}")
    return seq


# --------------------------------------------------------------------------
# The expanding map


def _largest_pow2_at_most(x: ExactSum) -> Fraction:
    k = math.floor(math.log2(x.enclosure().mid))
    while ExactSum.of(Fraction(2) ** k).cmp(x) > 0:
        k -= 1
    while ExactSum.of(Fraction(2) ** (k + 1)).cmp(x) <= 0:
        k += 1
    return Fraction(2) ** k


@dataclass
class ExpandingMap:
    """Piecewise map equal to the inverse contractions on the two first-level intervals.

    Pieces, left to right: slope 2 on ``(-inf, 0]``; inverse of ``phi_0`` on
    ``[0, a]``; slope 2 on ``[a, a+2d]``; a decreasing affine bridge on
    ``[a+2d, b-2d]``; slope 2 on ``[b-2d, b]``; inverse of ``phi_1`` on
    ``[b, 1]``; slope 2 on ``[1, inf)``. Here ``a = phi_0(1)``, ``b = phi_1(0)``.
    """

    model: object
    delta: Fraction
    a: ExactSum
    b: ExactSum
    tree: CantorTree = field(repr=False)

    @property
    def breakpoints(self) -> tuple[ExactSum, ...]:
        d2 = 2 * self.delta
        return (ExactSum.of(0), self.a, self.a + d2, self.b - d2, self.b, ExactSum.of(1))

    @property
    def pieces(self) -> tuple[str, ...]:
        return ("affine slope 2", "inverse branch 0", "affine slope 2", "affine bridge", "affine slope 2", "inverse branch 1", "affine slope 2")

    @property
    def U(self) -> tuple[tuple[ExactSum, ExactSum], tuple[ExactSum, ExactSum]]:
        d = self.delta
        return ((ExactSum.of(-d), self.a + d), (self.b - d, ExactSum.of(1 + d)))

    def bridge_slope(self, prec: int = 256) -> Interval:
        d = self.delta
        run = (self.b - self.a - 4 * d).enclosure(prec)
        return Interval.exact(-(1 + 8 * d), prec) / run

    def piece_index(self, x: ExactSum) -> int:
        bps = self.breakpoints
        for j, bp in enumerate(bps):
            if x.cmp(bp) <= 0:
                return j
        return len(bps)

    def eval_piece(self, j: int, x: Point, tol: float = 1e-30) -> Interval:
        """Formula of piece ``j`` applied to ``x`` (also outside its domain, for continuity checks)."""
        x = _as_point(x)
        d = self.delta
        if j == 0:
            return _enclose_to(2 * x, tol)
        if j == 1:
            ex, enc = _transport(self.tree, x, Word((0,)), Word(), tol, 64)
            return _point_result(ex, enc, tol)
        if j == 2:
            return _enclose_to(1 + 2 * (x - self.a), tol)
        if j == 3:
            start = self.a + 2 * d
            prec = 256
            while True:
                enc = Interval.exact(1 + 4 * d, prec) + (x - start).enclosure(prec) * self.bridge_slope(prec)
                if enc.width <= tol or prec >= _SIGN_MAX:
                    return enc
                prec *= 2
        if j == 4:
            return _enclose_to(2 * (x - self.b), tol)
        if j == 5:
            ex, enc = _transport(self.tree, x, Word((1,)), Word(), tol, 64)
            return _point_result(ex, enc, tol)
        if j == 6:
            return _enclose_to(1 + 2 * (x - 1), tol)
        raise IndexError(j)

    def __call__(self, x: Point, tol: float = 1e-30) -> Interval:
        x = _as_point(x)
        return self.eval_piece(self.piece_index(x), x, tol)

    def continuity_defects(self, tol: float = 1e-30) -> list[float]:
        """``|left formula - right formula|`` upper bounds at each breakpoint."""
        out = []
        for j, bp in enumerate(self.breakpoints):
            left = self.eval_piece(j, bp, tol)
            right = self.eval_piece(j + 1, bp, tol)
            out.append(left.distance_upper(right))
        return out

    def in_U(self, x: ExactSum) -> bool:
        return any(x.cmp(lo) > 0 and x.cmp(hi) < 0 for lo, hi in self.U)

    def sample_expansion(self, n_samples: int = 200, seed: int = 0, tol: float = 1e-40) -> float:
        """Smallest certified ``|f(x)-f(y)|/|x-y|`` over random ``x in U``, ``|x-y| < delta``."""
        rng = random.Random(seed)
        (u0_lo, u0_hi), (u1_lo, u1_hi) = self.U
        lows = [u0_lo.enclosure().mid, u1_lo.enclosure().mid]
        highs = [u0_hi.enclosure().mid, u1_hi.enclosure().mid]
        worst = math.inf
        taken = 0
        while taken < n_samples:
            k = rng.randrange(2)
            x = Fraction(rng.uniform(lows[k], highs[k])).limit_denominator(2**60)
            h = Fraction(rng.uniform(0.001, 0.999)) * self.delta
            h = h.limit_denominator(2**60) * (1 if rng.random() < 0.5 else -1)
            xs = ExactSum.of(x)
            if not self.in_U(xs):
                continue
            y = x + h
            fx, fy = self(x, tol), self(y, tol)
            diff_lo = fx.separation_lower(fy)
            if diff_lo <= 0:
                continue  # enclosures not separated; skip rather than guess
            worst = min(worst, diff_lo / abs(float(h)))
            taken += 1
        return worst


def default_delta(model) -> Fraction:
    tree = CantorTree(model)
    a = tree.node(Word((0,))).right
    b = tree.node(Word((1,))).left
    return _largest_pow2_at_most((b - a) * Fraction(1, 8))


def build_dynamics(model, delta: Fraction | None = None) -> ExpandingMap:
    tree = CantorTree(model)
    a = tree.node(Word((0,))).right
    b = tree.node(Word((1,))).left
    if delta is None:
        delta = _largest_pow2_at_most((b - a) * Fraction(1, 8))
    delta = Fraction(delta)
    if delta <= 0:
        raise DeltaTooLarge("delta must be positive")
    if (a + 2 * delta).cmp(b - 2 * delta) >= 0:
        raise DeltaTooLarge(f"delta = {delta} violates phi_0(1) + 2 delta < phi_1(0) - 2 delta")
    return ExpandingMap(model, delta, a, b, tree)


def random_words(rng: random.Random, n: int, count: int) -> Iterable[Word]:
    for _ in range(count):
        yield Word(tuple(rng.getrandbits(1) for _ in range(n)))


@dataclass(frozen=True)
class DynamicsReport:
    status: str
    delta: Fraction
    codings: int
    depth: int
    max_endpoint_error: float
    max_continuity_defect: float
    expansion: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "delta": str(self.delta),
            "codings": self.codings,
            "depth": self.depth,
            "max_endpoint_error": repr(self.max_endpoint_error),
            "max_continuity_defect": repr(self.max_continuity_defect),
            "expansion": repr(self.expansion),
            "seed": self.seed,
        }


def check_dynamics(
    model,
    codings: int = 1000,
    depth: int = 20,
    seed: int = 0,
    tol: float = 1e-9,
    continuity_tol: float = 1e-12,
    expansion_samples: int = 200,
    delta: Fraction | None = None,
) -> DynamicsReport:
    """Check ``f(pi(i w)) = pi(w)`` on random codings, continuity and expansion.

    For each random word ``i w`` of length ``depth`` both endpoints of
    ``I_{iw}`` are pushed through ``f`` and compared with the endpoints of
    ``I_w``; ``f`` maps the one interval onto the other, so this pins down the
    coding identity at resolution ``|I_w|``.
    """
    f = build_dynamics(model, delta)
    rng = random.Random(seed)
    worst = 0.0
    for word in random_words(rng, depth, codings):
        src = f.tree.node(word)
        dst = f.tree.node(Word(word.bits[1:]))
        for x, y in ((src.left, dst.left), (src.right, dst.right)):
            fx = f(x, tol * 1e-3)
            ty = _enclose_to(y, tol * 1e-3)
            err = fx.distance_upper(ty)
            worst = max(worst, err)
    defects = f.continuity_defects()
    expansion = f.sample_expansion(expansion_samples, seed)
    ok = worst <= tol and max(defects) <= continuity_tol and expansion > 1
    return DynamicsReport("PASS" if ok else "FAIL", f.delta, codings, depth, worst, max(defects), expansion, seed)
