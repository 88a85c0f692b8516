"""Finite binary words and their one-count statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Iterable, Sequence


def floor_boundary(n: int, beta: Fraction) -> int:
    """Exact ``floor(beta * n)`` for rational ``beta``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    beta = Fraction(beta)
    return (beta.numerator * n) // beta.denominator


@dataclass(frozen=True)
class OnesProfile:
    """``cumulative[j]`` is the number of 1s among the first ``j`` symbols."""

    cumulative: tuple[int, ...]

    def __post_init__(self):
        c = self.cumulative
        if not c or c[0] != 0:
            raise ValueError("cumulative[0] must be 0")
        if any(b - a not in (0, 1) for a, b in zip(c, c[1:])):
            raise ValueError("cumulative profile must step by 0 or 1")

    def between(self, i: int, j: int) -> int:
        """Ones among symbols ``i+1 .. j`` (1-based, half-open in prefix terms)."""
        return self.cumulative[j] - self.cumulative[i]


@dataclass(frozen=True)
class Word:
    bits: tuple[int, ...] = ()
    profile: OnesProfile = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"word symbols must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "profile", OnesProfile((0, *accumulate(bits))))

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse ``"0110"``; the empty string and ``"-"`` denote the empty word.

        Also accepts the shorthand ``"1^k"`` / ``"0^k"``.
        """
        text = text.strip()
        if text in ("", "-", "e"):
            return cls()
        if "^" in text:
            sym, _, k = text.partition("^")
            if sym not in ("0", "1") or not k.isdigit():
                raise ValueError(f"bad word shorthand {text!r}")
            return cls((int(sym),) * int(k))
        if set(text) - {"0", "1"}:
            raise ValueError(f"words are strings over '0'/'1', got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def periodic(cls, pattern: str | Sequence[int], n: int) -> "Word":
        """First ``n`` symbols of ``pattern`` repeated forever."""
        pat = [int(ch) for ch in pattern]
        return cls(tuple(pat[i % len(pat)] for i in range(n)))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __getitem__(self, i):
        return self.bits[i]

    def __iter__(self):
        return iter(self.bits)

    def __add__(self, other: "Word | Iterable[int]") -> "Word":
        other_bits = other.bits if isinstance(other, Word) else tuple(other)
        return Word(self.bits + other_bits)

    def child(self, i: int) -> "Word":
        return Word(self.bits + (i,))

    def prefix(self, k: int) -> "Word":
        if not 0 <= k <= len(self):
            raise ValueError(f"prefix length {k} out of range for word of length {len(self)}")
        if k == len(self):
            return self
        return Word(self.bits[:k])

    @property
    def ones(self) -> int:
        """Total number of 1s."""
        return self.profile.cumulative[-1]

    def ones_upto(self, j: int) -> int:
        return self.profile.cumulative[j]

    def is_homogeneous(self) -> bool:
        return len(set(self.bits)) <= 1


def ones_split(w: Word, beta: Fraction) -> tuple[int, int]:
    """Ones before and after the window boundary ``floor(beta*n)``."""
    b = floor_boundary(len(w), beta)
    n1 = w.ones_upto(b)
    return n1, w.ones - n1


def remove_last(w: Word) -> Word:
    if len(w) == 0:
        raise ValueError("cannot remove the last symbol of the empty word")
    return Word(w.bits[:-1])


def all_words(n: int) -> Iterable[Word]:
    """All words of length ``n`` in lexicographic order."""
    for x in range(2**n):
        yield Word(tuple((x >> (n - 1 - j)) & 1 for j in range(n)))
