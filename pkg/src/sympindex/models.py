"""Fixture generators: ellipsoid characteristics and synthetic surface models."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import sympy

from .errors import CheckFailed, HypothesisViolation, ParseError
from .iteration import PathGerm, index_at
from .ledger import SurfaceModel, is_perfect, resonance_residuals
from .normal_form import D, N1, NormalForm, R
from .rotation import (LinearForm, RotationNumber, golden_rotation, relation, round_to_digits,
                       silver_rotation, working_digits)


@dataclass(frozen=True)
class EllipsoidSpec:
    axes: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(str(a) for a in self.axes))
        vals = self.values()
        if len(vals) < 1:
            raise ParseError("an ellipsoid needs at least one axis")
        for v in vals:
            if not v.is_positive:
                raise ParseError(f"axis {v} is not a positive real")
        for a, b in zip(vals, vals[1:]):
            if not (b - a).is_positive:
                raise ParseError("axes must be strictly increasing")
        for a, b in combinations(vals, 2):
            if sympy.simplify(b / a).is_rational:
                raise HypothesisViolation(f"axes {a} and {b} have a rational ratio; the ellipsoid is degenerate")

    def values(self) -> list[sympy.Expr]:
        try:
            return [sympy.nsimplify(sympy.sympify(a, rational=True)) for a in self.axes]
        except (sympy.SympifyError, TypeError) as exc:
            raise ParseError(f"cannot parse axes {self.axes}") from exc

    @property
    def n(self) -> int:
        return len(self.axes)


def _decimal(expr: sympy.Expr, digits: int) -> str:
    text = sympy.N(expr, digits + 25)
    return round_to_digits(Decimal(str(text)), digits)


def _frac_table(vals, digits):
    """Fractional parts of a_j/a_k, one RotationNumber per distinct value, plus relations."""
    exprs: list[sympy.Expr] = []
    rot: list[RotationNumber] = []
    table: dict[tuple[int, int], RotationNumber] = {}
    for j, a in enumerate(vals):
        for k, b in enumerate(vals):
            if j == k:
                continue
            r = sympy.nsimplify(a / b)
            f = sympy.simplify(r - sympy.floor(r))
            hit = next((i for i, e in enumerate(exprs) if sympy.simplify(e - f) == 0), None)
            if hit is None:
                exprs.append(f)
                rot.append(RotationNumber.irrational(_decimal(f, digits), digits))
                hit = len(exprs) - 1
            table[(j, k)] = rot[hit]
    rels = []
    parts = [_field_parts(e) for e in exprs]
    for k in range(1, len(exprs)):
        for i in range(k):
            a1, b1 = parts[i]
            a2, b2 = parts[k]
            if b1 is None or b2 is None or set(b1) != set(b2) or len(b1) != 1:
                continue
            key = next(iter(b1))
            c = b2[key] / b1[key]
            const = a2 - c * a1
            rels.append(relation([(1, rot[k]), (-c, rot[i])], Fraction(int(const.p), int(const.q))))
            break
    return table, tuple(rels)


def _field_parts(expr: sympy.Expr):
    """(rational part, {surd: rational coefficient}) or (None, None) when not of that shape."""
    e = sympy.expand(sympy.radsimp(expr))
    const = sympy.Integer(0)
    surds = {}
    for term, coeff in e.as_coefficients_dict().items():
        if not coeff.is_rational:
            return None, None
        if term == 1:
            const += coeff
        else:
            surds[term] = coeff
    return const, surds


def ellipsoid_initial_index(vals, j: int) -> int:
    n = len(vals)
    return n + 2 * sum(int(sympy.floor(vals[j] / vals[k])) for k in range(n) if k != j)


def _rotation_count(vals, j: int, m: int) -> int:
    """Index of the m-th iterate from the rotation planes: 2m-1 in the orbit plane, 1 + 2 floor(m a_j/a_k) elsewhere."""
    total = 2 * m - 1
    for k in range(len(vals)):
        if k != j:
            total += 1 + 2 * int(sympy.floor(m * vals[j] / vals[k]))
    return total


def ellipsoid(spec: EllipsoidSpec | Sequence, digits: int | None = None, self_check: int = 12) -> SurfaceModel:
    """Closed characteristics y_1..y_n of the ellipsoid with the given axes.

    Every germ is checked against the rotation-plane count for the first
    ``self_check`` iterates before the model is returned.
    """
    if not isinstance(spec, EllipsoidSpec):
        spec = EllipsoidSpec(tuple(spec))
    d = working_digits() if digits is None else digits
    vals = spec.values()
    n = len(vals)
    table, rels = _frac_table(vals, d)
    germs = []
    for j in range(n):
        blocks = [N1(1, 1)] + [R(table[(j, k)]) for k in range(n) if k != j]
        g = PathGerm(ellipsoid_initial_index(vals, j), NormalForm(blocks), f"y{j + 1}")
        for m in range(1, self_check + 1):
            if index_at(g, m) != _rotation_count(vals, j, m):
                raise CheckFailed(f"ellipsoid germ y{j + 1} disagrees with the rotation count at m = {m}")
        germs.append(g)
    model = SurfaceModel.from_germs(n, germs, rels, name=f"ellipsoid({', '.join(spec.axes)})")
    model.annotations["axes"] = list(spec.axes)
    return model


def ellipsoid_means(spec: EllipsoidSpec | Sequence) -> list[sympy.Expr]:
    """Exact mean indices 2 a_j sum_k 1/a_k."""
    if not isinstance(spec, EllipsoidSpec):
        spec = EllipsoidSpec(tuple(spec))
    vals = spec.values()
    s = sum(1 / v for v in vals)
    return [sympy.simplify(2 * v * s) for v in vals]


def annotate(model: SurfaceModel, tol: float = 1e-9) -> SurfaceModel:
    """Attach resonance, perfectness, nondegeneracy and sign-split flags."""
    notes = model.annotations
    means = model.means()
    notes["nondegenerate"] = all(c.nondegenerate for c in model.characteristics)
    notes["q0"] = sum(1 for m in means if m.sign > 0)
    notes["zero_mean"] = [c.label for c, m in zip(model.characteristics, means) if m.sign == 0]
    if notes["zero_mean"] or not notes["nondegenerate"]:
        notes["resonance"] = None
        notes["admissible"] = False
    else:
        res = resonance_residuals(model, tol)
        notes["resonance"] = {"r_plus": res.r_plus, "r_minus": res.r_minus}
        notes["admissible"] = res.admissible
    try:
        perf = is_perfect(model)
        notes["perfect"] = perf.perfect
        notes["perfect_violations"] = [list(v) for v in perf.violations]
    except HypothesisViolation as exc:
        notes["perfect"] = None
        notes["perfect_violations"] = [str(exc)]
    return model


def synthetic(config: dict | str) -> SurfaceModel:
    """Model from a model-file dict (or JSON text), with admissibility annotations."""
    from .modelfile import parse_model

    return annotate(parse_model(config))


# fixtures -------------------------------------------------------------------

GOLDEN_AXES = ("1", "(1+sqrt(5))/2")
GOLDEN_AXES_3 = ("1", "(1+sqrt(5))/2", "(3+sqrt(5))/2")
SILVER_AXES = ("1", "sqrt(2)")


def _n1(i: int, *rest, label: str = "") -> PathGerm:
    return PathGerm(i, NormalForm((N1(1, 1),) + tuple(rest)), label)


def single_loop_model(n_label: str = "y1") -> SurfaceModel:
    """n = 1, one germ with indices 2m - 1."""
    return SurfaceModel.from_germs(1, [_n1(1, label=n_label)], name="single-loop")


def complement_rotation(rho: RotationNumber) -> RotationNumber:
    """1 - rho with the same stored digits."""
    with localcontext() as ctx:
        ctx.prec = len(rho.decimal) + 10
        value = 1 - Decimal(rho.decimal)
    return RotationNumber.irrational(format(value, "f"), rho.digits)


def zero_mean_germ(r: int, digits: int | None = None) -> tuple[PathGerm, tuple[LinearForm, ...]]:
    """n = 3 germ with Maslov-type index -1 and zero mean; r = 0 or 2 rotation blocks."""
    if r == 0:
        return _n1(-1, D(1), D(-1), label="z0"), ()
    if r == 2:
        rho = golden_rotation(digits)
        other = complement_rotation(rho)
        rel = relation([(1, rho), (1, other)], 1)
        return PathGerm(-1, NormalForm((N1(1, 1), R(rho), R(other))), "z2", (rel,)), (rel,)
    if r == 1:
        rho = golden_rotation(digits)
        return _n1(-1, R(rho), D(1), label="z1"), ()
    raise ParseError("r must be 0, 1 or 2")


def zero_mean_mixed_model(r: int = 2) -> SurfaceModel:
    """A zero-mean germ alongside a positive-mean one, n = 3."""
    z, rels = zero_mean_germ(r)
    return annotate(SurfaceModel.from_germs(3, [z, _n1(3, D(1), D(1), label="y1")], rels, name=f"zero-mean-r{r}"))


def _hyperbolic(n: int, i: int, label: str) -> PathGerm:
    return _n1(i, *([D(1)] * (n - 1)), label=label)


def mixed_models() -> dict[str, SurfaceModel]:
    """Perfect, resonance-admissible models with both mean-index signs."""
    out = {}
    out["n1-a"] = SurfaceModel.from_germs(1, [_n1(1, label="y1"), _n1(-4, label="y2"), _n1(-7, label="y3")])
    out["n1-b"] = SurfaceModel.from_germs(1, [_n1(1, label="y1"), _n1(-6, label="y2"), _n1(-11, label="y3")])
    out["n1-c"] = SurfaceModel.from_germs(1, [_n1(3, label="y1"), _n1(5, label="y2"), _n1(11, label="y3"),
                                              _n1(-6, label="y4"), _n1(-11, label="y5")])
    for tag, axes in (("golden", GOLDEN_AXES), ("silver", SILVER_AXES)):
        e = ellipsoid(axes)
        germs = list(e.germs) + [_hyperbolic(2, -7, "y3"), _hyperbolic(2, -4, "y4")]
        out[f"n2-{tag}"] = SurfaceModel.from_germs(2, germs, e.relations)
    e3 = ellipsoid(GOLDEN_AXES_3)
    out["n3-golden"] = SurfaceModel.from_germs(3, list(e3.germs) + [_hyperbolic(3, -7, "y4"), _hyperbolic(3, -4, "y5")],
                                               e3.relations)
    for k, m in out.items():
        m.name = f"mixed-{k}"
        annotate(m)
    return out


def cij_corpus(digits: int | None = None) -> list[tuple[str, int, tuple[PathGerm, ...], tuple[LinearForm, ...]]]:
    """Mixed-sign jump instances over one quadratic field each, q <= 4."""
    g = golden_rotation(digits)
    s = silver_rotation(digits)
    g2 = complement_rotation(g)
    gr = (relation([(1, g), (1, g2)], 1),)
    out = [
        ("golden-pair", 2, (_n1(2, R(g)), _n1(-3, R(g))), ()),
        ("silver-pair", 2, (_n1(2, R(s)), _n1(-3, R(s))), ()),
        ("golden-hyperbolic", 2, (_n1(4, R(g)), _n1(-2, D(1))), ()),
        ("golden-complement", 2, (_n1(2, R(g)), _n1(-5, R(g2))), gr),
        ("golden-triple", 2, (_n1(0, R(g)), _n1(-4, R(g)), _n1(-7, D(1))), ()),
        ("golden-n3", 3, (_n1(3, R(g), R(g)), _n1(-5, R(g), D(1))), ()),
        ("silver-quad", 2, (_n1(2, R(s)), _n1(3, D(1)), _n1(-3, R(s)), _n1(-6, D(1))), ()),
        ("silver-n3", 3, (_n1(4, R(s), R(s)), _n1(-6, R(s), D(-1))), ()),
        ("golden-quad", 2, (_n1(1, R(g)), _n1(5, R(g)), _n1(-2, R(g)), _n1(-4, D(1))), ()),
        ("silver-triple", 2, (_n1(1, R(s)), _n1(-4, R(s)), _n1(-3, D(-1))), ()),
    ]
    labelled = []
    for name, n, germs, rels in out:
        germs = tuple(PathGerm(x.initial_index, x.end_form, f"y{k + 1}", x.relations) for k, x in enumerate(germs))
        labelled.append((name, n, germs, rels))
    return labelled
