"""Finite unions of open intervals on the circle R/Z with exact rational endpoints.

Internally a set is stored over a single common denominator ``den``: the
interval ``(lo/den, hi/den)`` is the pair ``(lo, hi)`` of integers with
``0 <= lo < hi <= den``. This keeps the merge sweeps in plain integer
arithmetic. Touching intervals are merged (a measure-zero change), so the
canonical form has strictly separated pieces and supports ``==``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class CircleIntervalSet:
    den: int
    bounds: tuple[tuple[int, int], ...]

    @classmethod
    def empty(cls) -> "CircleIntervalSet":
        return cls(1, ())

    @classmethod
    def full(cls) -> "CircleIntervalSet":
        return cls(1, ((0, 1),))

    @classmethod
    def _from_scaled(cls, den: int, bounds: list[tuple[int, int]]) -> "CircleIntervalSet":
        """Build from sorted, merged integer bounds; reduces ``den`` to lowest terms."""
        if not bounds:
            return cls.empty()
        g = den
        for lo, hi in bounds:
            g = math.gcd(g, lo, hi)
            if g == 1:
                break
        if g > 1:
            den //= g
            bounds = [(lo // g, hi // g) for lo, hi in bounds]
        return cls(den, tuple(bounds))

    @property
    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        d = self.den
        return [(Fraction(lo, d), Fraction(hi, d)) for lo, hi in self.bounds]

    def __len__(self) -> int:
        return len(self.bounds)

    def __bool__(self) -> bool:
        return bool(self.bounds)

    def measure(self) -> Fraction:
        return Fraction(sum(hi - lo for lo, hi in self.bounds), self.den)

    def rescaled(self, den: int) -> list[tuple[int, int]]:
        """Bounds expressed over ``den``, which must be a multiple of ``self.den``."""
        k, r = divmod(den, self.den)
        if r:
            raise ValueError("target denominator must be a multiple of den")
        return [(lo * k, hi * k) for lo, hi in self.bounds]

    def union(self, other: "CircleIntervalSet") -> "CircleIntervalSet":
        return union(self, other)

    def intersect(self, other: "CircleIntervalSet") -> "CircleIntervalSet":
        return intersect(self, other)

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def contains_set(self, other: "CircleIntervalSet") -> bool:
        """True when every interval of ``other`` lies inside one of ours."""
        if not other:
            return True
        den = math.lcm(self.den, other.den)
        mine = self.rescaled(den)
        i = 0
        for lo, hi in other.rescaled(den):
            while i < len(mine) and mine[i][1] < hi:
                i += 1
            if i == len(mine) or mine[i][0] > lo:
                return False
        return True

    def dump(self) -> str:
        """One line per interval: ``p/q p/q``."""
        return "".join(f"{_fmt(lo)} {_fmt(hi)}\n" for lo, hi in self.intervals)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _merge_sorted(pieces: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for lo, hi in pieces:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def normalize_scaled(den: int, raw: Iterable[tuple[int, int]]) -> CircleIntervalSet:
    """Normalize integer pairs over ``den`` (arbitrary integers, ``lo < hi``)."""
    pieces = []
    for lo, hi in raw:
        if lo >= hi:
            raise ValueError(f"empty or reversed interval ({lo}/{den}, {hi}/{den})")
        if hi - lo >= den:
            return CircleIntervalSet.full()
        shift = (lo // den) * den
        lo -= shift
        hi -= shift
        if hi <= den:
            pieces.append((lo, hi))
        else:
            pieces.append((lo, den))
            pieces.append((0, hi - den))
    pieces.sort()
    return CircleIntervalSet._from_scaled(den, _merge_sorted(pieces))


def normalize(raw: Sequence[tuple]) -> CircleIntervalSet:
    """Reduce endpoints mod 1, split at 0, sort and merge overlapping or touching pieces.

    A raw interval longer than 1 covers the whole circle, returned as (0, 1).
    """
    pairs = [(_frac(lo), _frac(hi)) for lo, hi in raw]
    for lo, hi in pairs:
        if lo >= hi:
            raise ValueError(f"empty or reversed interval ({lo}, {hi})")
    if not pairs:
        return CircleIntervalSet.empty()
    den = math.lcm(*(x.denominator for p in pairs for x in p))
    return normalize_scaled(
        den,
        ((lo.numerator * (den // lo.denominator), hi.numerator * (den // hi.denominator)) for lo, hi in pairs),
    )


def union(a: CircleIntervalSet, b: CircleIntervalSet) -> CircleIntervalSet:
    if not a:
        return b
    if not b:
        return a
    den = math.lcm(a.den, b.den)
    xs, ys = a.rescaled(den), b.rescaled(den)
    merged = []
    i = j = 0
    while i < len(xs) or j < len(ys):
        if j == len(ys) or (i < len(xs) and xs[i] <= ys[j]):
            merged.append(xs[i])
            i += 1
        else:
            merged.append(ys[j])
            j += 1
    return CircleIntervalSet._from_scaled(den, _merge_sorted(merged))


def intersect(a: CircleIntervalSet, b: CircleIntervalSet) -> CircleIntervalSet:
    if not a or not b:
        return CircleIntervalSet.empty()
    den = math.lcm(a.den, b.den)
    xs, ys = a.rescaled(den), b.rescaled(den)
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        lo = max(xs[i][0], ys[j][0])
        hi = min(xs[i][1], ys[j][1])
        if lo < hi:
            out.append((lo, hi))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return CircleIntervalSet._from_scaled(den, _merge_sorted(out))
