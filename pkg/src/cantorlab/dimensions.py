"""Dimension values: closed forms, entropy-ratio maximisation and covering slopes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from cantorlab.covering import LambdaSpec, depth_window, lambda_classes
from cantorlab.errors import DomainError, PrecondFailed
from cantorlab.loglength import LogLength
from cantorlab.models import BlockC, McMullenModel, StarModel, SymmetricModel

LOG2 = math.log(2.0)
_ENTROPY_BITS = 96


def entropy(p) -> mpmath.mpf:
    """``-p log p - (1-p) log(1-p)`` with ``0 log 0 = 0``, at 96 bits."""
    with mpmath.workprec(_ENTROPY_BITS):
        if isinstance(p, Fraction):
            x = mpmath.mpf(p.numerator) / p.denominator
        else:
            x = mpmath.mpf(p)
        if x < 0 or x > 1:
            raise DomainError(f"entropy needs 0 <= p <= 1, got {p}")
        if x == 0 or x == 1:
            return mpmath.mpf(0)
        return -x * mpmath.log(x) - (1 - x) * mpmath.log(1 - x)


def _H(x):
    """Vectorised float entropy for grids."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log(x) - (1 - x) * np.log1p(-x)
    return np.where((x <= 0) | (x >= 1), 0.0, out)


def _Hs(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log1p(-x)


# --------------------------------------------------------------------------
# 2D maximisation


@dataclass(frozen=True)
class DResult:
    D: float
    argmax: tuple[float, float]
    grid: int
    starts: int


def d_objective(lam: float, beta: float) -> Callable[[float, float], float]:
    b = float(beta)

    def f(p: float, q: float) -> float:
        return (b * _Hs(p) + (1 - b) * _Hs(q)) / (lam + b * (1 - b) * (q - p) * LOG2)

    return f


def compute_D(lam: float, beta=Fraction(1, 2), tol: float = 1e-8, grid: int = 512, starts: int = 8, order: Sequence[int] | None = None) -> DResult:
    """Global maximum over ``[0,1]^2`` of the entropy ratio defining ``D(lam)``.

    Dense grid, then coordinate ascent (bounded Brent per coordinate) from the
    best ``starts`` grid cells. ``order`` permutes the restarts; the result is
    invariant under it up to ``tol``.
    """
    if lam <= LOG2:
        raise DomainError(f"D(lambda) needs lambda > log 2, got {lam}")
    b = float(beta)
    f = d_objective(lam, b)
    xs = np.linspace(0.0, 1.0, grid + 1)
    P, Q = np.meshgrid(xs, xs, indexing="ij")
    vals = (b * _H(P) + (1 - b) * _H(Q)) / (lam + b * (1 - b) * (Q - P) * LOG2)
    flat = np.argsort(vals, axis=None)[::-1][:starts]
    seeds = [(xs[i // (grid + 1)], xs[i % (grid + 1)]) for i in flat]
    if order is not None:
        seeds = [seeds[i] for i in order]
    best = (-math.inf, (0.5, 0.5))
    xtol = min(1e-12, tol * 1e-3)
    for p, q in seeds:
        cur = f(p, q)
        for _ in range(500):
            rp = minimize_scalar(lambda t: -f(t, q), bounds=(0.0, 1.0), method="bounded", options={"xatol": xtol})
            if -rp.fun > f(p, q):
                p = float(rp.x)
            rq = minimize_scalar(lambda t: -f(p, t), bounds=(0.0, 1.0), method="bounded", options={"xatol": xtol})
            if -rq.fun > f(p, q):
                q = float(rq.x)
            new = f(p, q)
            if new - cur <= tol * 1e-4:
                cur = max(cur, new)
                break
            cur = new
        if cur > best[0]:
            best = (cur, (p, q))
    return DResult(best[0], best[1], grid, starts)


def maximize_1d(fn: Callable[[float], float], lo: float = 0.0, hi: float = 1.0, grid: int = 2048, tol: float = 1e-12) -> tuple[float, float]:
    """Maximise ``fn`` on ``[lo, hi]``; the grid must show a single interior hump."""
    xs = np.linspace(lo, hi, grid + 1)
    ys = np.array([fn(float(x)) for x in xs])
    d = np.sign(np.diff(ys))
    d = d[d != 0]
    turns = int(np.sum(d[1:] != d[:-1]))
    if turns > 1:
        raise PrecondFailed("objective is not unimodal on the grid")
    j = int(np.argmax(ys))
    a, b = xs[max(j - 1, 0)], xs[min(j + 1, grid)]
    r = minimize_scalar(lambda t: -fn(t), bounds=(float(a), float(b)), method="bounded", options={"xatol": tol})
    x = float(r.x) if -r.fun >= ys[j] else float(xs[j])
    return x, fn(x)


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DimValue:
    value: float
    method: str  # formula | optimizer | empirical
    error: float = 0.0
    argmax: tuple | None = None

    def to_json(self) -> dict:
        out = {"value": repr(self.value), "method": self.method, "error": repr(self.error)}
        if self.argmax is not None:
            out["argmax"] = [repr(a) for a in self.argmax]
        return out


_ORDER = ("ldim", "hdim", "lbdim", "ubdim", "adim")


@dataclass(frozen=True)
class DimensionReport:
    ldim: DimValue | None
    hdim: DimValue | None
    lbdim: DimValue | None
    ubdim: DimValue | None
    adim: DimValue | None
    notes: tuple[str, ...] = ()

    def values(self) -> list[tuple[str, DimValue]]:
        return [(k, getattr(self, k)) for k in _ORDER if getattr(self, k) is not None]

    def chain_holds(self) -> bool:
        """``ldim <= hdim <= lbdim <= ubdim <= adim <= 1`` within the error bars."""
        vs = self.values()
        ok = all(a.value <= b.value + a.error + b.error for (_, a), (_, b) in zip(vs, vs[1:]))
        return ok and all(v.value <= 1 + v.error for _, v in vs)

    def gaps(self) -> list[tuple[str, str, float]]:
        vs = self.values()
        return [(ka, kb, b.value - a.value) for (ka, a), (kb, b) in zip(vs, vs[1:])]

    def to_json(self) -> dict:
        out = {k: (v.to_json() if v is not None else None) for k in _ORDER for v in [getattr(self, k)]}
        out["notes"] = list(self.notes)
        return out


def mcmullen_dimensions(model: McMullenModel, tol: float = 1e-8, grid: int = 512) -> DimensionReport:
    lam = math.log(model.M)
    h = LOG2 / lam
    d = compute_D(lam, model.beta, tol, grid)
    if not d.D > h:
        raise PrecondFailed("box dimension does not exceed the Hausdorff dimension")
    box = DimValue(d.D, "optimizer", tol, d.argmax)
    return DimensionReport(
        ldim=None,
        hdim=DimValue(h, "formula"),
        lbdim=box,
        ubdim=box,
        adim=None,
        notes=(f"hdim = log 2 / log {model.M} exactly",),
    )


def assouad_value(M: int, beta, tol: float = 1e-12) -> tuple[float, float]:
    b = float(beta)
    lm = math.log(M)
    return maximize_1d(lambda p: _Hs(p) / (lm - b * (1 - p) * LOG2), tol=tol)


def lower_value(M: int, beta, tol: float = 1e-12) -> tuple[float, float]:
    b = float(beta)
    lm1 = math.log(M + 1)
    return maximize_1d(lambda p: _Hs(p) / (lm1 + b * p * LOG2), tol=tol)


def star_dimensions(model: StarModel, tol: float = 1e-8, grid: int = 512) -> DimensionReport:
    M = model.M
    lb = compute_D(math.log(M + 1), model.beta, tol, grid)
    ub = compute_D(math.log(M), model.beta, tol, grid)
    pa, a = assouad_value(M, model.beta)
    pl, low = lower_value(M, model.beta)
    return DimensionReport(
        ldim=DimValue(low, "optimizer", tol, (pl,)),
        hdim=DimValue(LOG2 / math.log(M + 1), "formula"),
        lbdim=DimValue(lb.D, "optimizer", tol, lb.argmax),
        ubdim=DimValue(ub.D, "optimizer", tol, ub.argmax),
        adim=DimValue(a, "optimizer", tol, (pa,)),
    )


# --------------------------------------------------------------------------
# symmetric sets


def quotient_sequence(model: SymmetricModel, n_max: int) -> list[float]:
    """``q_n = n log 2 / -log(c_1 ... c_n)`` for ``n = 1..n_max`` (index 0 unused)."""
    logs = model.log_products(n_max)
    return [math.nan] + [n * LOG2 / -logs[n] for n in range(1, n_max + 1)]


def tail_indices(model: SymmetricModel, n_max: int, first_block: int = 5) -> list[int]:
    """Scales used for tail estimates: block ends from block ``first_block`` on
    (for block models), otherwise every ``n`` in the final half."""
    if isinstance(model.c, BlockC):
        ends = [e for e in model.c.block_ends(n_max) if e <= n_max]
        picked = ends[first_block - 1 :]
        if picked:
            return picked
    return list(range(max(1, n_max // 2), n_max + 1))


@dataclass(frozen=True)
class SymmetricDimensions:
    report: DimensionReport
    q: list[float] = field(repr=False)
    tail: list[int] = field(repr=False)


def symmetric_dimensions(model: SymmetricModel, n_max: int = 10_000, c_floor: float = 1e-6) -> SymmetricDimensions:
    inf_c, _ = model.c.interval_ratio_bounds()
    if inf_c <= 0:
        raise PrecondFailed("inf c_n = 0: the dimension formula needs inf c_n > 0")
    sampled = min(float(model.c_at(n)) for n in range(1, min(n_max, 4096) + 1))
    if sampled < c_floor:
        raise PrecondFailed(f"sampled c_n drops to {sampled:.3g} < {c_floor}")
    q = quotient_sequence(model, n_max)
    tail = tail_indices(model, n_max)
    vals = [q[n] for n in tail]
    half = vals[len(vals) // 2 :] or vals
    lo, hi = min(vals), max(vals)
    lo_err, hi_err = abs(lo - min(half)), abs(hi - max(half))
    rep = DimensionReport(
        ldim=None,
        hdim=DimValue(lo, "empirical", lo_err),
        lbdim=DimValue(lo, "empirical", lo_err),
        ubdim=DimValue(hi, "empirical", hi_err),
        adim=None,
        notes=(f"tail window of {len(tail)} scales in [{tail[0]}, {tail[-1]}]; asymptotic values are not certified",),
    )
    return SymmetricDimensions(rep, q, tail)


@dataclass(frozen=True)
class LocalDimSample:
    point: str
    scales: list[int]  # levels n with delta_n = |I_{x|n}|
    deltas_log: list[float]
    ratios: list[float]
    liminf_est: float
    limsup_est: float


def local_dimension(model: SymmetricModel, x_bits: str = "0", n_max: int = 10_000) -> LocalDimSample:
    """Local dimension ratios of the uniform Bernoulli measure at a coding point.

    Every level-``n`` cylinder has mass ``2**-n`` and length ``c_1...c_n``, so
    ``log mu / log delta`` at ``delta = c_1...c_n`` is read off exactly from the
    level length; the upper estimate is a limsup.
    """
    tail = tail_indices(model, n_max)
    logs, ratios = [], []
    for n in tail:
        lg = model.level_length(n).log_approx()
        logs.append(lg)
        ratios.append(n * -LOG2 / lg)
    return LocalDimSample(x_bits, tail, logs, ratios, min(ratios), max(ratios))


@dataclass(frozen=True)
class LebesgueEnclosure:
    lower: Fraction
    upper: Fraction
    n_max: int

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, x, slack: float = 0.0) -> bool:
        x = Fraction(x)
        return self.lower - Fraction(slack) <= x <= self.upper + Fraction(slack)


def lebesgue_measure(model: SymmetricModel, n_max: int = 64) -> LebesgueEnclosure:
    """Total length at level ``n_max`` (upper) and a tail-product lower bound."""
    upper = Fraction(1)
    for j in range(1, n_max + 1):
        upper *= 2 * model.c_at(j)
    tail = model.c.tail_gap_sum(n_max)
    lower = upper * (1 - tail) if tail is not None and tail < 1 else Fraction(0)
    return LebesgueEnclosure(lower, upper, n_max)


# --------------------------------------------------------------------------
# empirical slopes


@dataclass(frozen=True)
class EmpiricalBox:
    lb_est: float
    ub_est: float
    slopes: list[tuple[int, float]]


def covering_slope(model, K: int, workers: int = 1) -> float:
    return lambda_classes(LambdaSpec(model, LogLength.pow2(-K)), workers=workers).slope


def empirical_box(model, schedule: Sequence[int], workers: int = 1) -> EmpiricalBox:
    """``log2 #cover(2^-K) / K`` per ``K``; estimates over the final third of the schedule."""
    ks = list(schedule)
    if not ks:
        raise DomainError("empty schedule")
    slopes = [(K, covering_slope(model, K, workers)) for K in ks]
    tail = [s for _, s in slopes[len(slopes) - max(1, len(slopes) // 3) :]]
    return EmpiricalBox(min(tail), max(tail), slopes)


def block_interior_scales(model: StarModel, per_block: int = 5, blocks: Sequence[int] = (4, 5)) -> list[tuple[int, int]]:
    """``(K, block)`` pairs whose whole depth window sits inside one base block."""
    starts = model.base.starts
    out = []
    for k in blocks:
        lo_n, hi_n = starts[k - 1], starts[k] - 1
        ks = [K for K in range(1, 20 * hi_n) if _window_inside(model, K, lo_n, hi_n)]
        if not ks:
            continue
        pick = np.linspace(ks[0], ks[-1], per_block)
        out.extend((int(round(K)), k) for K in pick)
    return out


def _window_inside(model, K: int, lo_n: int, hi_n: int) -> bool:
    a, b = depth_window(model, LogLength.pow2(-K))
    return lo_n <= a and b <= hi_n
