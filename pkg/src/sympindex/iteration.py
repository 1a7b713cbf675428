"""Iterated Maslov-type indices of a symplectic path germ.

A germ is the initial index i(gamma, 1) together with the normal form of the
end matrix; the iteration formula needs nothing else.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, lcm
from typing import Iterable, Sequence

from .errors import HypothesisViolation, InconsistentData
from .normal_form import ONE, NormalForm, elliptic_count, splitting_pair
from .rotation import LinearForm


@dataclass(frozen=True)
class PathGerm:
    initial_index: int
    end_form: NormalForm
    label: str = ""
    relations: tuple[LinearForm, ...] = field(default=(), compare=False)

    @cached_property
    def s_plus(self) -> int:
        return splitting_pair(self.end_form, 1)[0]

    @cached_property
    def c(self) -> int:
        return elliptic_count(self.end_form)

    @cached_property
    def elliptic_points(self) -> tuple[tuple[LinearForm, int], ...]:
        """(theta/2pi, S^-) for circle points other than 1 with S^- > 0."""
        return tuple((p.where, p.s_minus) for p in self.end_form.points if p.where != ONE and p.s_minus)

    @cached_property
    def slope(self) -> int:
        return self.initial_index + self.s_plus - self.c

    @property
    def n(self) -> int:
        return self.end_form.n


@dataclass(frozen=True)
class MeanIndex:
    value: LinearForm
    sign: int

    def approx(self) -> float:
        return self.value.approx()

    def __str__(self) -> str:
        return str(self.value)


def index_at(germ: PathGerm, m: int) -> int:
    if m < 1:
        raise ValueError("iterate number must be positive")
    total = m * germ.slope - (germ.s_plus + germ.c)
    for f, s in germ.elliptic_points:
        total += 2 * f.ceil_times(m) * s
    return total


def nullity_at(germ: PathGerm, m: int) -> int:
    if m < 1:
        raise ValueError("iterate number must be positive")
    total = 0
    for p in germ.end_form.points:
        if p.where.is_exact and (m * p.where.const).denominator == 1:
            total += p.nullity
    return total


def mean_value(germ: PathGerm) -> LinearForm:
    v = LinearForm.of(germ.slope)
    for f, s in germ.elliptic_points:
        v = v + f * (2 * s)
    return v


def mean_index(germ: PathGerm, relations: Iterable[LinearForm] = ()) -> MeanIndex:
    """Exact mean index; raises UndecidableSign when the sign is not certified."""
    v = mean_value(germ)
    rels = tuple(germ.relations) + tuple(relations)
    return MeanIndex(v, v.sign(rels))


def viterbo_index(germ: PathGerm, m: int, n: int) -> int:
    if germ.n != n:
        raise InconsistentData(f"germ {germ.label or ''} has half-dimension {germ.n}, expected {n}")
    return index_at(germ, m) - n


def deviation_bound(germ: PathGerm) -> tuple[int, int]:
    """(low, high) with -low <= i(m) - m*mean < high + 1 for every m."""
    return germ.s_plus + germ.c, max(0, germ.c - germ.s_plus)


def period(germ: PathGerm) -> int | None:
    """Common period of index and nullity, or None if some rotation is irrational."""
    p = 1
    for pt in germ.end_form.points:
        if pt.where == ONE:
            continue
        if not pt.where.is_exact:
            return None
        p = lcm(p, pt.where.const.denominator)
    return p


def _certified_horizon(germ: PathGerm, n: int, mean: MeanIndex) -> int:
    low, high = deviation_bound(germ)
    lo, hi = mean.value.interval
    size = lo if mean.sign > 0 else -hi
    return max(1, ceil(Fraction(n + 2 + low + high) / size))


def _tightened(germ: PathGerm, n: int, sign: int, bound: int, cap: int = 1000) -> int:
    per = period(germ)
    if per is None or per > cap:
        return bound
    ok_from = bound
    for m in range(bound - 1, 0, -1):
        good = True
        for l in range(1, per + 1):
            d = index_at(germ, m + l) - index_at(germ, l)
            if (sign > 0 and d < n + 1) or (sign < 0 and d > -n - 1):
                good = False
                break
        if not good:
            break
        ok_from = m
    return ok_from


def stable_jump_horizon(germs: Sequence[PathGerm], n: int, tighten: bool = False,
                        relations: Iterable[LinearForm] = ()) -> int:
    """Smallest certified m-bar with |i(m+l) - i(l)| >= n+1 for all l >= 1, m >= m-bar.

    The bound comes from the deviation bound alone.  With ``tighten`` it is
    lowered by exhaustive search for germs with periodic (rational) data.
    """
    relations = tuple(relations)
    out = 1
    for g in germs:
        mean = mean_index(g, relations)
        if mean.sign == 0:
            raise HypothesisViolation(f"germ {g.label or g} has zero mean index")
        h = _certified_horizon(g, n, mean)
        if tighten:
            h = _tightened(g, n, mean.sign, h)
        out = max(out, h)
    return out
