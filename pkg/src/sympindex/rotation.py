"""Rotation numbers and exact linear forms over them.

An irrational rotation number is a decimal string declared correct to
``digits`` places.  Its value is only ever used through the closed interval
``decimal +- 10**-digits`` with exact rational endpoints, and every floor,
fractional part or sign computed from it is certified against that interval.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation, localcontext
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Union

from .errors import InconsistentData, ParseError, PrecisionError, UndecidableSign

DEFAULT_DIGITS = 50
MIN_DIGITS = 12

Interval = tuple[Fraction, Fraction]


def working_digits() -> int:
    """Precision for generated irrationals; SIL_PRECISION_DIGITS overrides."""
    raw = os.environ.get("SIL_PRECISION_DIGITS", "").strip()
    if not raw:
        return DEFAULT_DIGITS
    try:
        d = int(raw)
    except ValueError as exc:
        raise ParseError(f"SIL_PRECISION_DIGITS must be an integer, got {raw!r}") from exc
    if d < MIN_DIGITS:
        raise ParseError(f"SIL_PRECISION_DIGITS must be >= {MIN_DIGITS}")
    return d


@dataclass(frozen=True)
class RotationNumber:
    """A value theta/2pi in (0, 1).

    Rational values keep ``p/q`` in lowest terms; irrational ones keep the
    decimal string and its declared number of correct digits.
    """

    p: int = 0
    q: int = 1
    decimal: str = ""
    digits: int = 0

    def __post_init__(self) -> None:
        if self.decimal:
            if self.digits < MIN_DIGITS:
                raise ParseError(f"irrational rotation needs >= {MIN_DIGITS} digits, got {self.digits}")
            lo, hi = self.interval
            if lo <= 0 or hi >= 1:
                raise PrecisionError(f"rotation {self.decimal} is not certified inside (0, 1)")
        else:
            if self.q <= 0 or not 0 < self.p < self.q or gcd(self.p, self.q) != 1:
                raise ParseError(f"rational rotation needs 0 < p < q in lowest terms, got {self.p}/{self.q}")

    @classmethod
    def rational(cls, p: int, q: int) -> "RotationNumber":
        if q < 0:
            p, q = -p, -q
        g = gcd(p, q) or 1
        return cls(p=p // g, q=q // g)

    @classmethod
    def irrational(cls, decimal: str | Decimal, digits: int | None = None) -> "RotationNumber":
        if digits is None:
            digits = working_digits()
        try:
            value = Decimal(str(decimal).strip())
        except InvalidOperation as exc:
            raise ParseError(f"not a decimal number: {decimal!r}") from exc
        if not value.is_finite():
            raise ParseError(f"not a finite decimal: {decimal!r}")
        return cls(decimal=format(value, "f"), digits=int(digits))

    @property
    def is_rational(self) -> bool:
        return not self.decimal

    @cached_property
    def interval(self) -> Interval:
        if not self.decimal:
            v = Fraction(self.p, self.q)
            return v, v
        centre = Fraction(Decimal(self.decimal))
        radius = Fraction(1, 10**self.digits)
        return centre - radius, centre + radius

    def exact(self) -> Fraction:
        if self.decimal:
            raise PrecisionError(f"rotation {self.decimal} has no exact value")
        return Fraction(self.p, self.q)

    def excludes_half(self) -> bool:
        lo, hi = self.interval
        return hi < Fraction(1, 2) or lo > Fraction(1, 2)

    def approx(self) -> float:
        return float(Decimal(self.decimal)) if self.decimal else self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}" if not self.decimal else f"{self.decimal[:14]}~"


def round_to_digits(value: Decimal, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = digits + 40
        q = value.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)
    return format(q, "f")


def golden_rotation(digits: int | None = None) -> RotationNumber:
    """(sqrt 5 - 1)/2, the fractional part of the golden ratio."""
    d = working_digits() if digits is None else digits
    with localcontext() as ctx:
        ctx.prec = d + 20
        v = (Decimal(5).sqrt() - 1) / 2
    return RotationNumber.irrational(round_to_digits(v, d), d)


def silver_rotation(digits: int | None = None) -> RotationNumber:
    """sqrt 2 - 1."""
    d = working_digits() if digits is None else digits
    with localcontext() as ctx:
        ctx.prec = d + 20
        v = Decimal(2).sqrt() - 1
    return RotationNumber.irrational(round_to_digits(v, d), d)


Scalar = Union[int, Fraction]


def _key(r: RotationNumber) -> tuple[str, int]:
    return (r.decimal, r.digits)


@dataclass(frozen=True)
class LinearForm:
    """``const + sum(coeff * rho)`` over irrational rotation numbers, exact."""

    const: Fraction = Fraction(0)
    terms: tuple[tuple[RotationNumber, Fraction], ...] = ()

    @classmethod
    def of(cls, x: "LinearForm | RotationNumber | Scalar") -> "LinearForm":
        if isinstance(x, LinearForm):
            return x
        if isinstance(x, RotationNumber):
            if x.is_rational:
                return cls(Fraction(x.p, x.q))
            return cls(Fraction(0), ((x, Fraction(1)),))
        return cls(Fraction(x))

    @classmethod
    def build(cls, const: Scalar, terms: Iterable[tuple[RotationNumber, Scalar]]) -> "LinearForm":
        acc: dict[tuple[str, int], list] = {}
        c = Fraction(const)
        for rho, coeff in terms:
            coeff = Fraction(coeff)
            if rho.is_rational:
                c += coeff * rho.exact()
                continue
            slot = acc.setdefault(_key(rho), [rho, Fraction(0)])
            slot[1] += coeff
        items = tuple((rho, k) for _, (rho, k) in sorted(acc.items()) if k != 0)
        return cls(c, items)

    def __add__(self, other) -> "LinearForm":
        o = LinearForm.of(other)
        return LinearForm.build(self.const + o.const, self.terms + o.terms)

    __radd__ = __add__

    def __neg__(self) -> "LinearForm":
        return LinearForm(-self.const, tuple((r, -k) for r, k in self.terms))

    def __sub__(self, other) -> "LinearForm":
        return self + (-LinearForm.of(other))

    def __rsub__(self, other) -> "LinearForm":
        return LinearForm.of(other) - self

    def __mul__(self, k: Scalar) -> "LinearForm":
        k = Fraction(k)
        if k == 0:
            return LinearForm()
        return LinearForm(self.const * k, tuple((r, c * k) for r, c in self.terms))

    __rmul__ = __mul__

    @property
    def is_exact(self) -> bool:
        return not self.terms

    def exact(self) -> Fraction:
        if self.terms:
            raise PrecisionError("value depends on irrational rotation numbers")
        return self.const

    @property
    def symbols(self) -> tuple[RotationNumber, ...]:
        return tuple(r for r, _ in self.terms)

    @cached_property
    def interval(self) -> Interval:
        lo = hi = self.const
        for rho, k in self.terms:
            a, b = rho.interval
            if k > 0:
                lo += k * a
                hi += k * b
            else:
                lo += k * b
                hi += k * a
        return lo, hi

    @cached_property
    def _bounds(self) -> tuple[int, int, int, int]:
        lo, hi = self.interval
        return lo.numerator, lo.denominator, hi.numerator, hi.denominator

    def approx(self) -> float:
        lo, hi = self.interval
        return float((lo + hi) / 2)

    def floor_times(self, m: int) -> int:
        """Certified floor of m*x."""
        ln, ld, hn, hd = self._bounds
        a = (m * ln) // ld
        if self.terms and (m * hn) // hd != a:
            raise PrecisionError(f"floor of {m}*x undecidable at stored precision")
        return a

    def ceil_times(self, m: int) -> int:
        """Certified E(m*x), the least integer >= m*x."""
        ln, ld, hn, hd = self._bounds
        if not self.terms:
            return -((-m * ln) // ld)
        a = (m * ln) // ld
        if (m * hn) // hd != a or a * ld == m * ln:
            raise PrecisionError(f"E({m}*x) undecidable at stored precision")
        return a + 1

    def frac_times(self, m: int) -> Interval:
        """Certified enclosure of the fractional part {m*x}."""
        k = self.floor_times(m)
        lo, hi = self.interval
        return m * lo - k, m * hi - k

    def sign(self, relations: Iterable["LinearForm"] = ()) -> int:
        relations = tuple(relations)
        if not self.terms:
            return (self.const > 0) - (self.const < 0)
        if relations and structurally_zero(self, relations):
            return 0
        lo, hi = self.interval
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        raise UndecidableSign("sign undecidable at stored precision and not forced by a declared relation")

    def __str__(self) -> str:
        parts = [str(self.const)] if self.const or not self.terms else []
        parts += [f"{k}*[{r}]" for r, k in self.terms]
        return " + ".join(parts)


def relation(terms: Iterable[tuple[Scalar, RotationNumber]], const: Scalar) -> LinearForm:
    """The form ``sum(c*rho) - const``, declared to vanish."""
    form = LinearForm.build(-Fraction(const), ((r, c) for c, r in terms))
    lo, hi = form.interval
    if lo > 0 or hi < 0:
        raise InconsistentData(f"declared relation {form} = 0 contradicts the stored decimals")
    return form


def structurally_zero(form: LinearForm, relations: Iterable[LinearForm]) -> bool:
    """True when ``form`` lies in the rational span of the declared relations."""
    import sympy

    relations = [LinearForm.of(r) for r in relations]
    keys = sorted({_key(r) for f in [form, *relations] for r in f.symbols})
    index = {k: i + 1 for i, k in enumerate(keys)}

    def row(f: LinearForm) -> list:
        v = [sympy.Rational(f.const.numerator, f.const.denominator)] + [0] * len(keys)
        for r, k in f.terms:
            v[index[_key(r)]] = sympy.Rational(k.numerator, k.denominator)
        return v

    if not relations:
        return form.is_exact and form.const == 0
    base = sympy.Matrix([row(r) for r in relations])
    both = sympy.Matrix([row(r) for r in relations] + [row(form)])
    return base.rank() == both.rank()


def reduce_form(form: LinearForm, relations: Iterable[LinearForm]) -> LinearForm:
    """Rewrite ``form`` modulo the declared relations, eliminating pivot symbols.

    The result only uses symbols that are free in the relation system, so two
    forms that agree modulo the relations reduce to the same value.
    """
    rows = [LinearForm.of(r) for r in relations if LinearForm.of(r).terms]
    if not rows:
        return form
    keys = sorted({_key(r) for f in rows for r in f.symbols})
    lookup = {_key(r): r for f in rows for r in f.symbols}
    col = {k: i for i, k in enumerate(keys)}
    mat = []
    for f in rows:
        v = [Fraction(0)] * (len(keys) + 1)
        for r, c in f.terms:
            v[col[_key(r)]] = c
        v[-1] = f.const
        mat.append(v)
    pivots: list[int] = []
    r = 0
    for c in range(len(keys)):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        mat[r] = [x / piv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                k = mat[i][c]
                mat[i] = [a - k * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    out = form
    for row, c in zip(mat, pivots):
        sym = lookup[keys[c]]
        coeff = dict((_key(s), k) for s, k in out.terms).get(keys[c], Fraction(0))
        if coeff:
            # sym = -(sum of other entries) since row says sym + rest = 0
            rest = LinearForm.build(row[-1], ((lookup[keys[i]], row[i]) for i in range(len(keys)) if i != c and row[i]))
            out = out - LinearForm.of(sym) * coeff - rest * coeff
    return out


def ratio(a: LinearForm, b: LinearForm) -> Fraction | None:
    """a/b when the two forms are rationally proportional, else None."""
    if not b.terms:
        return a.const / b.const if not a.terms else None
    if not a.terms:
        return Fraction(0) if a.const == 0 else None
    r0, k0 = b.terms[0]
    ka = dict((_key(s), k) for s, k in a.terms).get(_key(r0))
    if ka is None:
        return None
    t = ka / k0
    return t if a == b * t else None
