"""Length functions for the three Cantor-set families.

Every length is an exact ``LogLength``. The binary weights are fixed to
``a_0 = 1`` and ``a_1 = 2``, so the weight of a word is ``2**ones``.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Protocol

from cantorlab.errors import ConfigError, ModelInvalid
from cantorlab.loglength import LogLength
from cantorlab.symbolic import Word, floor_boundary

HALF = Fraction(1, 2)


def _parse_fraction(x, what: str) -> Fraction:
    try:
        if isinstance(x, float):
            raise ConfigError(f"{what} must be an exact rational string like '1/2', got float {x!r}")
        return Fraction(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"cannot parse {what} = {x!r} as a rational") from exc


def _check_beta(beta: Fraction) -> Fraction:
    beta = Fraction(beta)
    if not 0 < beta < 1:
        raise ModelInvalid(f"beta must lie in (0,1), got {beta}")
    return beta


def _weight_exponent(n: int, ones_head: int, ones_total: int, beta: Fraction) -> Fraction:
    # log2 of a_{w|head} / a_w^beta
    return ones_head - beta * ones_total


# --------------------------------------------------------------------------
# McMullen-type model


@dataclass(frozen=True)
class McMullenModel:
    beta: Fraction = HALF
    M: int = 128
    family: str = field(default="mcmullen", init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_beta(self.beta))
        if int(self.M) != self.M or self.M < 100:
            raise ModelInvalid(f"M must be an integer >= 100, got {self.M}")

    def m_at(self, i: int) -> int:
        return self.M

    def count_M(self, n: int) -> int:
        return n

    def base_length(self, k: int, n: int) -> LogLength:
        """``prod_{i=k+1}^{k+n} M_i^{-1}``."""
        return LogLength.of_int(self.M, -n)

    def class_length(self, n: int, n1: int, n2: int) -> LogLength:
        """Length shared by every word of length ``n`` with split ``(n1, n2)``."""
        return LogLength.pow2((1 - self.beta) * n1 - self.beta * n2) * self.base_length(0, n)

    def length(self, w: Word) -> LogLength:
        return mc_length(self, w)

    def ratio_bounds(self) -> tuple[Fraction, Fraction]:
        return Fraction(1, 2 * self.M), Fraction(2, self.M)

    def gap_ratio_bounds(self) -> tuple[Fraction, Fraction]:
        M = self.M
        return Fraction(1, 2 * M) * Fraction(M - 4, M - 1), Fraction(2, M) * Fraction(M - 1, M - 4)

    def to_config(self) -> dict:
        return {"family": "mcmullen", "beta": str(self.beta), "M": self.M}


def mc_length(m: McMullenModel, w: Word) -> LogLength:
    n = len(w)
    head = floor_boundary(n, m.beta)
    e2 = _weight_exponent(n, w.ones_upto(head), w.ones, m.beta)
    return LogLength.pow2(e2) * LogLength.of_int(m.M, -n)


# --------------------------------------------------------------------------
# Star model: the base alternates between M and M+1 on blocks [N_k, N_{k+1})


@dataclass(frozen=True)
class BaseSequence:
    """Block starts ``N_1 = 1 < N_2 < ...``; ``M_i = M`` on odd blocks, ``M+1`` on even.

    ``kind="factorial"`` uses ``N_k = k!``. ``kind="explicit"`` takes the
    starts from ``values``; the last listed block then extends forever.
    """

    M: int = 128
    kind: str = "factorial"
    values: tuple[int, ...] | None = None
    _starts: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 100:
            raise ModelInvalid(f"M must be an integer >= 100, got {self.M}")
        if self.kind == "factorial":
            if self.values is not None:
                raise ConfigError("factorial sequence takes no values")
            # N_1 = 1! = 1 and N_2 = 2! = 2; 25! is far beyond any probed index.
            object.__setattr__(self, "_starts", [math.factorial(k) for k in range(1, 26)])
            object.__setattr__(self, "_open_ended", False)
        elif self.kind == "explicit":
            vals = tuple(int(v) for v in (self.values or ()))
            if not vals or vals[0] != 1:
                raise ModelInvalid("explicit block starts must begin with N_1 = 1")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ModelInvalid("block starts must be strictly increasing")
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "_starts", list(vals))
            object.__setattr__(self, "_open_ended", True)
        else:
            raise ConfigError(f"unknown sequence kind {self.kind!r}")
        # cum[j] = number of indices i < starts[j] (i >= 1) with M_i = M
        cum = [0]
        for j in range(1, len(self._starts)):
            length = self._starts[j] - self._starts[j - 1]
            cum.append(cum[-1] + (length if j % 2 == 1 else 0))
        object.__setattr__(self, "_cum", cum)

    @property
    def starts(self) -> tuple[int, ...]:
        return tuple(self._starts)

    def block_of(self, i: int) -> int:
        """1-based block index k with ``N_k <= i < N_{k+1}``."""
        if i < 1:
            raise ValueError("sequence indices start at 1")
        k = bisect.bisect_right(self._starts, i)
        if k == len(self._starts) and not self._open_ended:
            raise OverflowError(f"index {i} beyond the tabulated factorial blocks")
        return k

    def m_at(self, i: int) -> int:
        return self.M if self.block_of(i) % 2 == 1 else self.M + 1

    def count_M(self, n: int) -> int:
        """``#{1 <= i <= n : M_i = M}``."""
        if n <= 0:
            return 0
        k = self.block_of(n)
        base = self._cum[k - 1]
        return base + (n - self._starts[k - 1] + 1 if k % 2 == 1 else 0)


@dataclass(frozen=True)
class StarModel:
    beta: Fraction = HALF
    base: BaseSequence = field(default_factory=BaseSequence)
    family: str = field(default="star", init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_beta(self.beta))

    @property
    def M(self) -> int:
        return self.base.M

    def m_at(self, i: int) -> int:
        return self.base.m_at(i)

    def count_M(self, n: int) -> int:
        return self.base.count_M(n)

    def base_length(self, k: int, n: int) -> LogLength:
        cm = self.base.count_M(k + n) - self.base.count_M(k)
        return LogLength.from_map({self.M: -cm, self.M + 1: -(n - cm)})

    def class_length(self, n: int, n1: int, n2: int) -> LogLength:
        return LogLength.pow2((1 - self.beta) * n1 - self.beta * n2) * self.base_length(0, n)

    def length(self, w: Word) -> LogLength:
        return star_length(self, w)

    def ratio_bounds(self) -> tuple[Fraction, Fraction]:
        return Fraction(1, 2 * self.M + 2), Fraction(2, self.M)

    def gap_ratio_bounds(self) -> tuple[Fraction, Fraction]:
        M = self.M
        return Fraction(1, 2 * M + 2) * Fraction(M - 4, M), Fraction(2, M - 4)

    def with_constant_base(self, M: int) -> McMullenModel:
        return McMullenModel(self.beta, M)

    def to_config(self) -> dict:
        seq = {"kind": self.base.kind}
        if self.base.kind == "explicit":
            seq["values"] = list(self.base.values)
        return {"family": "star", "beta": str(self.beta), "M": self.M, "sequence": seq}


def star_length(m: StarModel, w: Word) -> LogLength:
    n = len(w)
    head = floor_boundary(n, m.beta)
    e2 = _weight_exponent(n, w.ones_upto(head), w.ones, m.beta)
    return LogLength.pow2(e2) * m.base_length(0, n)


def star_relative_length(m: StarModel | McMullenModel, u: Word, w: Word) -> LogLength:
    """``l(uw) / l(u)`` from the prefix-relative closed form.

    The window of ``uw`` ends at ``floor(beta(n+k))``; the part of it past
    ``floor(beta k)`` is read from ``v = u[floor(beta k):] + w``.
    """
    k, n = len(u), len(w)
    bk = floor_boundary(k, m.beta)
    span = floor_boundary(n + k, m.beta) - bk
    v = Word(u.bits[bk:]) + w
    e2 = v.ones_upto(span) - m.beta * w.ones
    return LogLength.pow2(e2) * m.base_length(k, n)


# --------------------------------------------------------------------------
# Symmetric Cantor sets


class CSequence(Protocol):
    kind: str

    def value(self, n: int) -> Fraction: ...

    def interval_ratio_bounds(self) -> tuple[Fraction, Fraction]: ...

    def criterion_bounds(self) -> tuple[Fraction, Fraction]: ...

    def tail_gap_sum(self, n: int) -> Fraction | None: ...


def _criterion(c: Fraction, c_next: Fraction) -> Fraction:
    return c * (1 - 2 * c_next) / (1 - 2 * c)


@dataclass(frozen=True)
class ConstantC:
    c: Fraction
    kind: str = field(default="constant", init=False)

    def value(self, n: int) -> Fraction:
        return self.c

    def interval_ratio_bounds(self):
        return self.c, self.c

    def criterion_bounds(self):
        return self.c, self.c

    def tail_gap_sum(self, n: int):
        return None  # diverges


@dataclass(frozen=True)
class HalfMinusGeometricC:
    """``c_n = 1/2 - a * r**n`` with ``a > 0`` and ``0 < r < 1``."""

    a: Fraction
    r: Fraction
    kind: str = field(default="half_minus_geometric", init=False)

    def __post_init__(self):
        if not (self.a > 0 and 0 < self.r < 1):
            raise ModelInvalid("half_minus_geometric needs a > 0 and 0 < r < 1")

    def value(self, n: int) -> Fraction:
        return HALF - self.a * self.r**n

    def interval_ratio_bounds(self):
        return self.value(1), HALF

    def criterion_bounds(self):
        # 1 - 2c_n = 2a r^n, so the criterion term is exactly r * c_n (increasing).
        return self.r * self.value(1), self.r * HALF

    def tail_gap_sum(self, n: int):
        """``sum_{j>n} (1 - 2c_j)``."""
        return 2 * self.a * self.r ** (n + 1) / (1 - self.r)


@dataclass(frozen=True)
class HarmonicC:
    """``c_n = 1/(n + shift)``; tends to 0, so the criterion infimum is 0."""

    shift: int = 2
    kind: str = field(default="harmonic", init=False)

    def __post_init__(self):
        if self.shift < 2:
            raise ModelInvalid("harmonic c needs shift >= 2 so that c_1 < 1/2")

    def value(self, n: int) -> Fraction:
        return Fraction(1, n + self.shift)

    def interval_ratio_bounds(self):
        return Fraction(0), self.value(1)

    def criterion_bounds(self):
        # With m = n + shift the term is (m-1)/((m+1)(m-2)), decreasing to 0.
        return Fraction(0), _criterion(self.value(1), self.value(2))

    def tail_gap_sum(self, n: int):
        return None


@dataclass(frozen=True)
class BlockSchedule:
    """Block lengths ``L_1, L_2, ...``.

    ``factorial``: ``L_k = k!``; ``double_exponential``: ``L_k = 2**(2**k)``;
    ``constant``: ``L_k = length``; ``geometric``: ``L_k = length * ratio**(k-1)``;
    ``explicit``: ``lengths`` as given, the last one repeating.
    """

    kind: str = "factorial"
    length: int = 1
    ratio: int = 2
    lengths: tuple[int, ...] = ()

    def block_length(self, k: int) -> int:
        if self.kind == "factorial":
            return math.factorial(k)
        if self.kind == "double_exponential":
            return 2 ** (2**k)
        if self.kind == "constant":
            return self.length
        if self.kind == "geometric":
            return self.length * self.ratio ** (k - 1)
        if self.kind == "explicit":
            return self.lengths[min(k, len(self.lengths)) - 1]
        raise ConfigError(f"unknown block schedule {self.kind!r}")

    def has_unbounded_ratio(self) -> bool:
        if self.kind in ("factorial", "double_exponential"):
            return True
        if self.kind == "explicit":
            ls = self.lengths
            ratios = [Fraction(b, a) for a, b in zip(ls, ls[1:])]
            # A finite list can only show growth; the repeated tail is ratio 1.
            return False if len(ls) < 3 else all(r2 > r1 > 1 for r1, r2 in zip(ratios, ratios[1:]))
        return False


@dataclass(frozen=True)
class BlockC:
    """``c_n`` constant on consecutive blocks, cycling through ``values``."""

    values: tuple[Fraction, ...]
    schedule: BlockSchedule = field(default_factory=BlockSchedule)
    kind: str = field(default="blocks", init=False)
    _ends: list = field(default_factory=list, init=False, repr=False, compare=False)
    _lock: Any = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if not self.values:
            raise ModelInvalid("block model needs at least one value")

    def block_ends(self, upto: int) -> list[int]:
        """Cumulative block ends ``E_1 < E_2 < ...`` until one reaches ``upto``."""
        with self._lock:
            ends = self._ends
            while not ends or ends[-1] < upto:
                k = len(ends) + 1
                ends.append((ends[-1] if ends else 0) + self.schedule.block_length(k))
            cut = bisect.bisect_left(ends, upto)
            return list(ends[: cut + 1])

    def block_index(self, n: int) -> int:
        ends = self.block_ends(n)
        return bisect.bisect_left(ends, n) + 1

    def value(self, n: int) -> Fraction:
        return self.values[(self.block_index(n) - 1) % len(self.values)]

    def interval_ratio_bounds(self):
        return min(self.values), max(self.values)

    def criterion_bounds(self):
        vs = self.values
        pairs = {(v, v) for v in vs}
        pairs |= {(vs[j], vs[(j + 1) % len(vs)]) for j in range(len(vs))}
        terms = [_criterion(a, b) for a, b in pairs]
        return min(terms), max(terms)

    def tail_gap_sum(self, n: int):
        return None


@dataclass(frozen=True)
class ExplicitC:
    """Listed ``c_1, ..., c_m``; the last value repeats forever."""

    values: tuple[Fraction, ...]
    kind: str = field(default="explicit", init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if not self.values:
            raise ModelInvalid("explicit c needs at least one value")

    def value(self, n: int) -> Fraction:
        return self.values[min(n, len(self.values)) - 1]

    def interval_ratio_bounds(self):
        return min(self.values), max(self.values)

    def criterion_bounds(self):
        vs = self.values + (self.values[-1],)
        terms = [_criterion(a, b) for a, b in zip(vs, vs[1:])]
        return min(terms), max(terms)

    def tail_gap_sum(self, n: int):
        return None


@dataclass(frozen=True)
class SymmetricModel:
    c: Any  # a CSequence
    family: str = field(default="symmetric", init=False)
    _levels: list = field(default_factory=lambda: [LogLength.one()], init=False, repr=False, compare=False)
    _lock: Any = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def c_at(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("c is indexed from 1")
        v = self.c.value(n)
        if not 0 < v < HALF:
            raise ModelInvalid(f"c_{n} = {v} is outside (0, 1/2)")
        return v

    def length(self, w: Word) -> LogLength:
        return sym_length(self, w)

    def level_length(self, n: int) -> LogLength:
        """``c_1 * ... * c_n`` (memoised prefix products)."""
        with self._lock:
            levels = self._levels
            while len(levels) <= n:
                j = len(levels)
                levels.append(levels[-1] * LogLength.of_rational(self.c_at(j)))
            return levels[n]

    def level_length_fraction(self, n: int) -> Fraction:
        out = Fraction(1)
        for j in range(1, n + 1):
            out *= self.c_at(j)
        return out

    def log_products(self, n_max: int) -> list[float]:
        """``[log(c_1...c_n) for n = 0..n_max]`` by compensated summation."""
        out = [0.0]
        acc, comp = 0.0, 0.0
        cache: dict[Fraction, float] = {}
        for j in range(1, n_max + 1):
            cj = self.c_at(j)
            lv = cache.get(cj)
            if lv is None:
                lv = cache[cj] = math.log(cj.numerator) - math.log(cj.denominator)
            y = lv - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
            out.append(acc)
        return out

    def to_config(self) -> dict:
        return {"family": "symmetric", "c": c_to_config(self.c)}


def sym_length(m: SymmetricModel, w: Word) -> LogLength:
    return m.level_length(len(w))


def sym_point(m: SymmetricModel, w: Word, depth: int) -> Fraction:
    """Partial sum of the additive coding; the tail is at most ``c_1...c_depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > len(w):
        raise ValueError(f"need at least {depth} symbols, got {len(w)}")
    total = Fraction(0)
    prod = Fraction(1)
    for n in range(1, depth + 1):
        cn = m.c_at(n)
        if w[n - 1]:
            total += prod * (1 - cn)
        prod *= cn
    return total


def box_nonexist_sequence(schedule: BlockSchedule | None = None) -> SymmetricModel:
    """Blocks alternating ``c = 1/3`` (odd blocks) and ``c = 1/4`` (even blocks)."""
    schedule = schedule or BlockSchedule()
    if schedule.kind in ("constant", "geometric") or not schedule.has_unbounded_ratio():
        raise ModelInvalid(
            f"block schedule {schedule.kind!r} has bounded length ratios; "
            "the averages of log c_n would converge"
        )
    return SymmetricModel(BlockC((Fraction(1, 3), Fraction(1, 4)), schedule))


def fat_cantor_model() -> SymmetricModel:
    """``c_n = 1/2 - 2**-(n+1)``: positive Lebesgue measure, empty interior."""
    return SymmetricModel(HalfMinusGeometricC(HALF, HALF))


# --------------------------------------------------------------------------
# JSON configs

_TOP_KEYS = {
    "mcmullen": {"family", "beta", "M"},
    "star": {"family", "beta", "M", "sequence"},
    "symmetric": {"family", "c"},
}


def _reject_unknown(d: Mapping, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) {sorted(extra)} in {where}")


def c_to_config(c) -> dict:
    if isinstance(c, ConstantC):
        return {"kind": "constant", "params": {"value": str(c.c)}}
    if isinstance(c, HalfMinusGeometricC):
        return {"kind": "half_minus_geometric", "params": {"a": str(c.a), "r": str(c.r)}}
    if isinstance(c, HarmonicC):
        return {"kind": "harmonic", "params": {"shift": c.shift}}
    if isinstance(c, BlockC):
        s = c.schedule
        sched = {"kind": s.kind}
        if s.kind in ("constant", "geometric"):
            sched["length"] = s.length
        if s.kind == "geometric":
            sched["ratio"] = s.ratio
        if s.kind == "explicit":
            sched["lengths"] = list(s.lengths)
        return {"kind": "blocks", "params": {"values": [str(v) for v in c.values], "schedule": sched}}
    if isinstance(c, ExplicitC):
        return {"kind": "explicit", "params": {"values": [str(v) for v in c.values]}}
    raise ConfigError(f"cannot serialise c of type {type(c).__name__}")


def _c_from_config(d: Mapping) -> Any:
    if not isinstance(d, Mapping):
        raise ConfigError("'c' must be an object")
    _reject_unknown(d, {"kind", "params"}, "c")
    kind = d.get("kind")
    p = d.get("params", {}) or {}
    allowed = {
        "constant": {"value"},
        "half_minus_geometric": {"a", "r"},
        "harmonic": {"shift"},
        "blocks": {"values", "schedule"},
        "box_nonexist": {"schedule"},
        "explicit": {"values"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown c kind {kind!r}")
    _reject_unknown(p, allowed[kind], f"c.params ({kind})")
    if kind == "constant":
        return ConstantC(_parse_fraction(p.get("value"), "c.value"))
    if kind == "half_minus_geometric":
        return HalfMinusGeometricC(_parse_fraction(p.get("a", "1/2"), "a"), _parse_fraction(p.get("r", "1/2"), "r"))
    if kind == "harmonic":
        return HarmonicC(int(p.get("shift", 2)))
    if kind == "explicit":
        return ExplicitC(tuple(_parse_fraction(v, "c value") for v in p.get("values", [])))
    sched = _schedule_from_config(p.get("schedule", {"kind": "factorial"}))
    if kind == "box_nonexist":
        return box_nonexist_sequence(sched).c
    return BlockC(tuple(_parse_fraction(v, "c value") for v in p.get("values", [])), sched)


def _schedule_from_config(d: Mapping) -> BlockSchedule:
    _reject_unknown(d, {"kind", "length", "ratio", "lengths"}, "schedule")
    return BlockSchedule(
        kind=d.get("kind", "factorial"),
        length=int(d.get("length", 1)),
        ratio=int(d.get("ratio", 2)),
        lengths=tuple(int(x) for x in d.get("lengths", ())),
    )


def model_from_config(cfg: Mapping):
    """Build a model from a parsed JSON document."""
    if not isinstance(cfg, Mapping):
        raise ConfigError("model config must be a JSON object")
    family = cfg.get("family")
    if family not in _TOP_KEYS:
        raise ConfigError(f"unknown model family {family!r}")
    _reject_unknown(cfg, _TOP_KEYS[family], "model")
    if family == "symmetric":
        if "c" not in cfg:
            raise ConfigError("symmetric model needs 'c'")
        return SymmetricModel(_c_from_config(cfg["c"]))
    beta = _parse_fraction(cfg.get("beta", "1/2"), "beta")
    M = cfg.get("M", 128)
    if not isinstance(M, int):
        raise ConfigError(f"M must be an integer, got {M!r}")
    if family == "mcmullen":
        return McMullenModel(beta, M)
    seq = cfg.get("sequence", {"kind": "factorial"})
    _reject_unknown(seq, {"kind", "values"}, "sequence")
    values = seq.get("values")
    return StarModel(beta, BaseSequence(M, seq.get("kind", "factorial"), tuple(values) if values else None))
