"""Exact sizes of the stopping-time covers ``{w : l(w) <= rho < l(w^-)}``.

Two independent routes:

* ``lambda_oracle`` walks the word tree and compares every word's length
  with ``rho`` directly.
* ``lambda_classes`` groups words by ``(n, N1, N2)`` (length, ones before
  and after the window boundary). Every member of a class has the same
  length, and the length of ``w^-`` is fixed once the last symbol and, when
  the boundary moves, the boundary symbol are fixed too. Class sizes are
  products of binomials.

The fast class route turns each comparison into an integer inequality:
with ``beta = p/q`` the exponent ``q * log2(length / base)`` is an integer,
so ``length <= rho`` iff that integer is at most
``floor(q * log2(rho / base))``, which ``floor_log2`` computes exactly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from cantorlab.errors import DomainError, InvariantViolation, TooLarge, UnsupportedModel, UnsupportedPrefix
from cantorlab.loglength import LogLength, Ordering, floor_log2, ll_cmp
from cantorlab.models import McMullenModel, StarModel, SymmetricModel
from cantorlab.symbolic import Word, floor_boundary, ones_split

DEFAULT_MAX_LEAVES = 2**26


def max_leaves() -> int:
    raw = os.environ.get("CANTORLAB_MAX_LEAVES")
    return int(raw) if raw else DEFAULT_MAX_LEAVES


def parse_rho(text: str) -> LogLength:
    """Parse ``"2^-K"`` (also ``"2^(-K)"`` and ``"p/q"`` rationals); decimals are refused."""
    t = text.strip().replace(" ", "")
    if t.startswith("2^"):
        e = t[2:].strip("()")
        try:
            return LogLength.pow2(Fraction(e))
        except ValueError as exc:
            raise DomainError(f"cannot parse exponent in rho = {text!r}") from exc
    if "." in t or "e" in t.lower():
        raise DomainError(f"decimal rho {text!r} is not exact; write it as a power of two, e.g. 2^-20")
    try:
        return LogLength.of_rational(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse rho = {text!r}") from exc


@dataclass(frozen=True)
class LambdaSpec:
    model: object
    rho: LogLength
    prefix: Word | None = None

    def __post_init__(self):
        if not (ll_cmp(self.rho, LogLength.one()) is Ordering.Less):
            raise DomainError("rho must satisfy 0 < rho < 1")

    @property
    def k(self) -> int:
        return len(self.prefix) if self.prefix is not None else 0


@dataclass
class CoverReport:
    count: int
    rho: LogLength
    method: str
    depth_bounds: tuple[int, int]
    classes: list[tuple] | None = None
    words: list[str] | None = None
    completeness: Fraction | None = None
    prefix: str | None = None

    @property
    def log2_inv_rho(self) -> float:
        return -self.rho.log2_approx()

    @property
    def slope(self) -> float:
        return math.log2(self.count) / self.log2_inv_rho if self.count > 0 else 0.0

    def histogram(self) -> dict:
        return {c[:-1]: c[-1] for c in (self.classes or [])}

    def to_json(self) -> dict:
        e2 = self.rho.exponent(2)
        out = {
            "rho": self.rho.to_json(),
            "rho_log2": str(e2) if self.rho.is_pure_power_of_two() else repr(self.rho.log2_approx()),
            "count_decimal": str(self.count),
            "count_bits": self.count.bit_length(),
            "slope": repr(self.slope),
            "method": self.method,
            "depth_bounds": list(self.depth_bounds),
            "prefix": self.prefix,
        }
        if self.classes is not None:
            out["classes"] = [[*(x if x is not None else None for x in c[:-1]), str(c[-1])] for c in self.classes]
        if self.completeness is not None:
            out["completeness"] = str(self.completeness)
        return out


# --------------------------------------------------------------------------
# helpers shared by both routes


def _ratio_range(model) -> tuple[float, float]:
    if isinstance(model, (McMullenModel, StarModel)):
        lo, hi = model.ratio_bounds()
        return float(lo), float(hi)
    if isinstance(model, SymmetricModel):
        lo, hi = model.c.interval_ratio_bounds()
        return float(lo), float(hi)
    raise UnsupportedModel(f"no ratio bounds for {type(model).__name__}")


def depth_window(model, rho: LogLength) -> tuple[int, int]:
    """Word lengths that can occur in the cover, from the one-step ratio bounds (widened by 1)."""
    r_min, r_max = _ratio_range(model)
    L = -rho.log_approx()
    n_min = math.floor(L / -math.log(r_min)) if r_min > 0 else 0
    n_max = math.floor(L / -math.log(r_max)) + 1
    return max(1, n_min - 1), n_max + 1


def _relative_length(model, u: Word | None, w: Word) -> LogLength:
    # Oracle route: plain division of two direct evaluations.
    if u is None or len(u) == 0:
        return model.length(w)
    return model.length(u + w) / model.length(u)


def _leaf_guard(model, rho: LogLength) -> float:
    r_min, r_max = _ratio_range(model)
    n_max = depth_window(model, rho)[1]
    by_depth = 2.0**n_max
    by_mass = math.inf if r_min <= 0 else math.exp(-rho.log_approx()) / r_min
    return min(by_depth, by_mass)


def class_key(model, w: Word) -> tuple:
    if isinstance(model, SymmetricModel):
        return (len(w),)
    n1, n2 = ones_split(w, model.beta)
    return (len(w), n1, n2)


def _relative_class_key(model, u: Word | None, w: Word) -> tuple:
    """Class of ``w`` relative to prefix ``u`` (window boundary shifted by ``|u|``)."""
    if isinstance(model, SymmetricModel):
        return (len(w),)
    k = len(u) if u is not None else 0
    b = _window_in_w(model.beta, k, len(w))
    n1 = w.ones_upto(b)
    return (len(w), n1, w.ones - n1)


def _window_in_w(beta: Fraction, k: int, n: int) -> int:
    """Number of leading symbols of ``w`` inside the window of ``u w``."""
    return min(max(floor_boundary(n + k, beta) - k, 0), n)


# --------------------------------------------------------------------------
# oracle


def lambda_oracle(spec: LambdaSpec, keep_words: bool = False) -> CoverReport:
    model, rho, u = spec.model, spec.rho, spec.prefix
    guard = _leaf_guard(model, rho)
    limit = max_leaves()
    if guard > limit:
        raise TooLarge(f"oracle would visit up to ~{guard:.3g} leaves (limit {limit}; set CANTORLAB_MAX_LEAVES)")
    members: list[Word] = []
    stack = [Word()]
    while stack:
        w = stack.pop()
        if len(w) > 0 and ll_cmp(_relative_length(model, u, w), rho) is not Ordering.Greater:
            members.append(w)
            continue
        stack.append(w.child(1))
        stack.append(w.child(0))
    members.sort(key=lambda w: (len(w), w.bits))
    total = sum((Fraction(1, 2 ** len(w)) for w in members), Fraction(0))
    hist: dict[tuple, int] = {}
    for w in members:
        key = _relative_class_key(model, u, w)
        hist[key] = hist.get(key, 0) + 1
    lens = [len(w) for w in members]
    return CoverReport(
        count=len(members),
        rho=rho,
        method="oracle",
        depth_bounds=(min(lens), max(lens)),
        classes=[(*key, cnt) for key, cnt in sorted(hist.items())],
        words=[str(w) for w in members] if keep_words else None,
        completeness=total,
        prefix=str(u) if u is not None else None,
    )


# --------------------------------------------------------------------------
# class counter


@dataclass(frozen=True)
class _Setup:
    """Everything the per-n kernel needs, as plain integers."""

    p: int
    q: int
    k: int
    u_bits: tuple[int, ...]
    bk: int  # floor(beta k)

    def boundary(self, n: int) -> int:
        return min(max(((self.p * (n + self.k)) // self.q) - self.k, 0), n)

    def offset(self, n: int) -> int:
        """Ones of the prefix tail that fall inside the window of ``u w``."""
        span = (self.p * (n + self.k)) // self.q - self.bk
        tail = self.k - self.bk
        return sum(self.u_bits[self.bk : self.bk + min(span, tail)])


def _check_class_model(model, u: Word | None):
    if isinstance(model, SymmetricModel):
        return
    if not isinstance(model, (McMullenModel, StarModel)):
        raise UnsupportedModel(f"class counting needs a McMullen, star or symmetric model, got {type(model).__name__}")
    if u is not None and len(u) > 0 and not u.is_homogeneous():
        raise UnsupportedPrefix("class counting supports only prefixes 0^k or 1^k; use the oracle")


def _thresholds(model, rho: LogLength, setup: _Setup, ns: Iterable[int]) -> dict[int, int]:
    """``thr(n) = floor(q * log2(rho / base(n)))`` exactly."""
    return {n: floor_log2(rho / model.base_length(setup.k, n), setup.q) for n in ns}


def _binom_row(m: int) -> list[int]:
    row = [1] * (m + 1)
    for j in range(1, m + 1):
        row[j] = row[j - 1] * (m - j + 1) // j
    return row


def _prefix_sums(row: list[int]) -> list[int]:
    out = [0]
    for v in row:
        out.append(out[-1] + v)
    return out


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _count_level(setup: _Setup, n: int, thr_n: int, thr_prev: int | None, want_classes: bool):
    """Members of length ``n``: (count, classes or None)."""
    p, q = setup.p, setup.q
    b = setup.boundary(n)
    m = n - b - 1
    c_n = setup.offset(n)
    shift = 0
    c_prev = 0
    if n > 1:
        shift = b - setup.boundary(n - 1)
        c_prev = setup.offset(n - 1)
    row_m = _binom_row(m)
    pre_m = _prefix_sums(row_m)
    row_b = _binom_row(b)
    row_b1 = _binom_row(b - 1) if b >= 1 else []
    total = 0
    classes: dict[tuple, int] | None = {} if want_classes else None
    for n1 in range(b + 1):
        # length(w) <= rho  <=>  q*c + (q-p)*N1 - p*N2 <= thr(n)
        lo2 = _ceil_div(q * c_n + (q - p) * n1 - thr_n, p)
        for s in (0, 1):
            if shift == 0:
                subcases = [(row_b[n1], 0)]
            else:
                subcases = [(row_b1[n1 - r], r) for r in (0, 1) if 0 <= n1 - r <= b - 1]
            for weight, r in subcases:
                if n == 1:
                    hi2 = s + m
                else:
                    # w^- has N1' = N1 - r and N2' = N2 - s + r; need q*c' + (q-p)N1' - p N2' > thr(n-1)
                    x = q * c_prev + (q - p) * (n1 - r) - thr_prev
                    hi2 = s - r + _ceil_div(x, p) - 1
                j_lo = max(lo2, s) - s
                j_hi = min(hi2, s + m) - s
                if j_lo > j_hi:
                    continue
                total += weight * (pre_m[j_hi + 1] - pre_m[j_lo])
                if classes is not None:
                    for j in range(j_lo, j_hi + 1):
                        key = (n, n1, j + s)
                        classes[key] = classes.get(key, 0) + weight * row_m[j]
    return total, classes


def _count_chunk(args):
    setup, jobs, want_classes = args
    total = 0
    classes: dict = {} if want_classes else None
    for n, thr_n, thr_prev in jobs:
        cnt, cls = _count_level(setup, n, thr_n, thr_prev, want_classes)
        total += cnt
        if classes is not None:
            classes.update(cls)
    return total, classes


def _symmetric_classes(spec: LambdaSpec) -> CoverReport:
    model, rho, u = spec.model, spec.rho, spec.prefix
    k = spec.k
    base = model.level_length(k)
    n = 1
    while ll_cmp(model.level_length(k + n) / base, rho) is Ordering.Greater:
        n += 1
    count = 2**n
    return CoverReport(count, rho, "classes", (n, n), [(n, count)], prefix=str(u) if u is not None else None)


def lambda_classes(spec: LambdaSpec, histogram: bool = False, with_classes: bool = False, workers: int = 1) -> CoverReport:
    """Exact ``#Lambda(rho)`` by length classes.

    ``histogram=True`` uses the literal route: every class length is built as
    a ``LogLength`` and compared with ``ll_cmp``. The default route uses the
    integer thresholds described in the module docstring.
    """
    model, rho, u = spec.model, spec.rho, spec.prefix
    _check_class_model(model, u)
    if isinstance(model, SymmetricModel):
        return _symmetric_classes(spec)
    if histogram:
        return _literal_classes(spec)
    beta = model.beta
    setup = _Setup(beta.numerator, beta.denominator, spec.k, tuple(u.bits) if u is not None else (), floor_boundary(spec.k, beta))
    n_lo, n_hi = depth_window(model, rho)
    ns = list(range(n_lo, n_hi + 1))
    thr = _thresholds(model, rho, setup, set(ns) | {n - 1 for n in ns if n > 1})
    jobs = [(n, thr[n], thr.get(n - 1)) for n in ns]
    if workers > 1 and len(jobs) > 1:
        chunks = [jobs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_count_chunk, [(setup, c, with_classes) for c in chunks]))
    else:
        parts = [_count_chunk((setup, jobs, with_classes))]
    total = sum(t for t, _ in parts)
    classes = None
    if with_classes:
        merged: dict = {}
        for _, cls in parts:
            merged.update(cls)
        classes = [(*key, cnt) for key, cnt in sorted(merged.items())]
    return CoverReport(total, rho, "classes", (n_lo, n_hi), classes, prefix=str(u) if u is not None else None)


def relative_class_length(model, k: int, u_bits: tuple, n: int, n1: int, n2: int) -> LogLength:
    """Length of ``u w`` over length of ``u`` for ``w`` in class ``(n, N1, N2)``."""
    beta = model.beta
    setup = _Setup(beta.numerator, beta.denominator, k, u_bits, floor_boundary(k, beta))
    e2 = setup.offset(n) + (1 - beta) * n1 - beta * n2
    return LogLength.pow2(e2) * model.base_length(k, n)


def _literal_classes(spec: LambdaSpec) -> CoverReport:
    model, rho, u = spec.model, spec.rho, spec.prefix
    k = spec.k
    u_bits = tuple(u.bits) if u is not None else ()
    beta = model.beta
    n_lo, n_hi = depth_window(model, rho)
    hist: dict[tuple, int] = {}
    for n in range(n_lo, n_hi + 1):
        b = _window_in_w(beta, k, n)
        bp = _window_in_w(beta, k, n - 1) if n > 1 else 0
        m = n - b - 1
        for n1 in range(b + 1):
            for n2 in range(m + 2):
                ell = relative_class_length(model, k, u_bits, n, n1, n2)
                if ll_cmp(ell, rho) is Ordering.Greater:
                    continue
                size = 0
                for s in (0, 1):
                    if not 0 <= n2 - s <= m:
                        continue
                    refinements = [(0, math.comb(b, n1))] if b == bp else [(r, math.comb(b - 1, n1 - r)) for r in (0, 1) if 0 <= n1 - r <= b - 1]
                    for r, weight in refinements:
                        if n > 1:
                            parent = relative_class_length(model, k, u_bits, n - 1, n1 - r, n2 - s + r)
                            if ll_cmp(rho, parent) is not Ordering.Less:
                                continue
                        size += weight * math.comb(m, n2 - s)
                if size:
                    hist[(n, n1, n2)] = size
    total = sum(hist.values())
    return CoverReport(
        total,
        rho,
        "classes-literal",
        (n_lo, n_hi),
        [(*key, cnt) for key, cnt in sorted(hist.items())],
        prefix=str(u) if u is not None else None,
    )


# --------------------------------------------------------------------------
# front doors


def count(spec: LambdaSpec, method: str = "auto", workers: int = 1, with_classes: bool = False) -> CoverReport:
    if method == "oracle":
        return lambda_oracle(spec)
    if method == "classes":
        return lambda_classes(spec, with_classes=with_classes, workers=workers)
    if method == "literal":
        return lambda_classes(spec, histogram=True)
    if method != "auto":
        raise DomainError(f"unknown counting method {method!r}")
    try:
        return lambda_classes(spec, with_classes=with_classes, workers=workers)
    except (UnsupportedModel, UnsupportedPrefix):
        return lambda_oracle(spec)


def lambda_sandwich(star: StarModel, rho: LogLength, workers: int = 1) -> tuple[int, int, int]:
    """Counts for constant base ``M+1``, the star model and constant base ``M``."""
    c_m1 = lambda_classes(LambdaSpec(star.with_constant_base(star.M + 1), rho), workers=workers).count
    c_star = lambda_classes(LambdaSpec(star, rho), workers=workers).count
    c_m = lambda_classes(LambdaSpec(star.with_constant_base(star.M), rho), workers=workers).count
    if not c_m1 <= c_star <= c_m:
        raise InvariantViolation(f"sandwich violated: {c_m1} <= {c_star} <= {c_m} fails")
    return c_m1, c_star, c_m
