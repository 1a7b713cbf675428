"""Morse-type bookkeeping for finitely many prime closed characteristics.

All thresholds are stated in Viterbo indices, i(y^m) = i(y, m) - n.  Good
iterates are those whose Maslov-type index has the parity of the prime one;
bad iterates are invisible to every count here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import floor
from typing import Iterable, Sequence

from .cij import (DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_SCAN_LIMIT, CheckResult, JumpCertificate,
                  JumpInstance, dual_certificate, irrational_count, iter_certificates)
from .errors import (CheckFailed, HypothesisViolation, InconsistentData, InfiniteMorseNumber,
                     ParseError, PrecisionError, ScanExhausted)
from .iteration import (MeanIndex, PathGerm, deviation_bound, index_at, mean_index, nullity_at,
                        period, stable_jump_horizon)
from .normal_form import ONE, D, N1, N2, R
from .rotation import LinearForm


@dataclass(frozen=True)
class PrimeCharacteristic:
    germ: PathGerm
    n: int

    @property
    def label(self) -> str:
        return self.germ.label

    @cached_property
    def nondegenerate(self) -> bool:
        """Nullity 1 at every iterate: a single N1(1,1) and no rational circle points."""
        pts = self.germ.end_form.points
        ones = [b for b in self.germ.end_form.blocks if isinstance(b, N1)]
        if len(ones) != 1 or ones[0] != N1(1, 1):
            return False
        return all(not (p.where.is_exact and p.nullity) for p in pts if p.where != ONE)

    def viterbo(self, m: int) -> int:
        return index_at(self.germ, m) - self.n


@dataclass
class SurfaceModel:
    n: int
    characteristics: tuple[PrimeCharacteristic, ...]
    relations: tuple[LinearForm, ...] = ()
    name: str = ""
    annotations: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.characteristics = tuple(self.characteristics)
        self.relations = tuple(self.relations)
        for c in self.characteristics:
            if c.n != self.n or c.germ.n != self.n:
                raise ParseError(f"characteristic {c.label} does not have half-dimension {self.n}")

    @classmethod
    def from_germs(cls, n: int, germs: Iterable[PathGerm], relations: Iterable[LinearForm] = (),
                   name: str = "") -> "SurfaceModel":
        return cls(n, tuple(PrimeCharacteristic(g, n) for g in germs), tuple(relations), name)

    @property
    def germs(self) -> tuple[PathGerm, ...]:
        return tuple(c.germ for c in self.characteristics)

    def all_relations(self) -> tuple[LinearForm, ...]:
        return self.relations + tuple(r for g in self.germs for r in g.relations)

    def means(self) -> list[MeanIndex]:
        return [mean_index(g, self.all_relations()) for g in self.germs]

    def mmi_order(self) -> "SurfaceModel":
        """Positive mean indices first, then zero, then negative."""
        signs = [m.sign for m in self.means()]
        order = sorted(range(len(signs)), key=lambda i: (-signs[i], i))
        return SurfaceModel(self.n, tuple(self.characteristics[i] for i in order), self.relations,
                            self.name, dict(self.annotations))

    @property
    def q0(self) -> int:
        return sum(1 for m in self.means() if m.sign > 0)


# single characteristic -----------------------------------------------------

def is_good_iterate(c: PrimeCharacteristic, m: int) -> bool:
    return (index_at(c.germ, m) - c.germ.initial_index) % 2 == 0


def average_euler_char(c: PrimeCharacteristic) -> Fraction:
    if not c.nondegenerate:
        raise HypothesisViolation(f"{c.label}: average Euler characteristic needs a nondegenerate characteristic")
    v1, v2 = c.viterbo(1), c.viterbo(2)
    sign = 1 if v1 % 2 == 0 else -1
    return Fraction(sign) if (v2 - v1) % 2 == 0 else Fraction(sign, 2)


def period_euler_sum(c: PrimeCharacteristic, mk: int) -> int:
    """Sum of (-1)^i(y^m) over good iterates 1 <= m <= 2*mk."""
    total = 0
    for m in range(1, 2 * mk + 1):
        if is_good_iterate(c, m):
            total += 1 if c.viterbo(m) % 2 == 0 else -1
    return total


# zero mean ---------------------------------------------------------------------

ZERO_MEAN_CHECK = 10**4


def zero_mean_profile(germ: PathGerm, n: int = 3, relations: Iterable[LinearForm] = (),
                      horizon: int = ZERO_MEAN_CHECK) -> int:
    """Constant Viterbo index of a zero-mean characteristic in dimension six."""
    if n != 3 or germ.n != 3:
        raise HypothesisViolation("the zero-mean profile is stated for n = 3")
    blocks = germ.end_form.blocks
    ones = [b for b in blocks if isinstance(b, N1)]
    rest = [b for b in blocks if not isinstance(b, N1)]
    if ones != [N1(1, 1)]:
        raise HypothesisViolation("end form must contain exactly one N1(1,1) factor")
    if any(isinstance(b, N2) for b in rest):
        raise HypothesisViolation("N2 blocks are not covered by the zero-mean profile")
    if not all(isinstance(b, (R, D)) for b in rest):
        raise HypothesisViolation("unexpected block in the zero-mean end form")
    r = sum(1 for b in rest if isinstance(b, R))
    if any(isinstance(b, R) and b.rho.is_rational for b in rest):
        raise HypothesisViolation("rotation numbers must be irrational")
    if r not in (0, 2):
        raise InconsistentData(f"a zero mean index with r = {r} irrational rotations is impossible; r must be 0 or 2")
    mean = mean_index(germ, relations)
    if mean.sign != 0:
        raise HypothesisViolation("mean index is not structurally zero")
    first = index_at(germ, 1) - n
    for m in range(1, horizon + 1):
        v = index_at(germ, m) - n
        if v != -4:
            raise CheckFailed(f"Viterbo index {v} at m = {m}, expected -4")
    return first


def _zero_mean_values(c: PrimeCharacteristic, relations, horizon: int = ZERO_MEAN_CHECK) -> list[int]:
    """Viterbo values of good iterates of a zero-mean characteristic; each recurs infinitely often."""
    try:
        return [zero_mean_profile(c.germ, c.n, relations, horizon)]
    except (HypothesisViolation, InconsistentData):
        pass
    per = period(c.germ)
    top = per if per is not None else horizon
    return sorted({c.viterbo(m) for m in range(1, top + 1) if is_good_iterate(c, m)})


# model level -----------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceResult:
    positive: tuple[Fraction, Fraction]
    negative: tuple[Fraction, Fraction]
    tol: float

    @staticmethod
    def _size(iv) -> Fraction:
        return max(abs(iv[0]), abs(iv[1]))

    @property
    def admissible(self) -> bool:
        return self._size(self.positive) <= Fraction(self.tol) and self._size(self.negative) <= Fraction(self.tol)

    @property
    def r_plus(self) -> float:
        return float((self.positive[0] + self.positive[1]) / 2)

    @property
    def r_minus(self) -> float:
        return float((self.negative[0] + self.negative[1]) / 2)


def _quotient(chi: Fraction, mean: LinearForm) -> tuple[Fraction, Fraction]:
    lo, hi = mean.interval
    if lo <= 0 <= hi:
        raise PrecisionError("mean index interval contains 0")
    a, b = chi / lo, chi / hi
    return min(a, b), max(a, b)


def resonance_residuals(model: SurfaceModel, tol: float = 1e-9) -> ResonanceResult:
    """Residuals of sum chi/mean - 1/2 over positive and sum chi/mean over negative means."""
    pos = [Fraction(-1, 2), Fraction(-1, 2)]
    neg = [Fraction(0), Fraction(0)]
    for c, mean in zip(model.characteristics, model.means()):
        if mean.sign == 0:
            raise HypothesisViolation(f"{c.label} has zero mean index; the resonance identity excludes it")
        lo, hi = _quotient(average_euler_char(c), mean.value)
        acc = pos if mean.sign > 0 else neg
        acc[0] += lo
        acc[1] += hi
    return ResonanceResult(tuple(pos), tuple(neg), tol)


def forbidden_values(n: int) -> tuple[int, ...]:
    """Maslov-type values excluded on good iterates of a perfect hypersurface."""
    return (-1,) if n % 2 == 0 else (-2, -1, 0)


@dataclass(frozen=True)
class PerfectResult:
    perfect: bool
    violations: tuple[tuple[str, int, int], ...]  # (label, m, Maslov index)
    note: str = ""


def _exit_iterate(germ: PathGerm, mean: MeanIndex, lo_val: int, hi_val: int) -> int:
    """An m beyond which index_at(m) provably avoids [lo_val, hi_val]."""
    low, high = deviation_bound(germ)
    a, b = mean.value.interval
    if mean.sign > 0:
        return max(1, floor(Fraction(hi_val + low) / a) + 1)
    return max(1, floor(Fraction(high - lo_val) / -b) + 1)


def is_perfect(model: SurfaceModel) -> PerfectResult:
    bad_values = forbidden_values(model.n)
    lo_val, hi_val = min(bad_values), max(bad_values)
    violations = []
    notes = []
    rels = model.all_relations()
    for c, mean in zip(model.characteristics, model.means()):
        g = c.germ
        if mean.sign == 0:
            try:
                v = zero_mean_profile(g, c.n, rels)
                i = v + c.n
                if i in bad_values:
                    violations.append((c.label, 1, i))
                    notes.append(f"{c.label}: constant Maslov-type index {i} at every iterate")
                continue
            except (HypothesisViolation, InconsistentData):
                pass
            per = period(g)
            if per is None:
                raise HypothesisViolation(f"{c.label}: zero mean index with irrational data has no finite scan")
            top = per
        else:
            top = _exit_iterate(g, mean, lo_val, hi_val)
        for m in range(1, top + 1):
            if is_good_iterate(c, m) and index_at(g, m) in bad_values:
                violations.append((c.label, m, index_at(g, m)))
    return PerfectResult(not violations, tuple(violations), "; ".join(notes))


def morse_numbers(model: SurfaceModel, window: tuple[int, int]) -> dict[int, int]:
    """M_p for p in the window: good iterates with Viterbo index p, over all characteristics."""
    lo, hi = window
    counts = {p: 0 for p in range(lo, hi + 1)}
    rels = model.all_relations()
    for c, mean in zip(model.characteristics, model.means()):
        if mean.sign == 0:
            values = [v for v in _zero_mean_values(c, rels) if lo <= v <= hi]
            if values:
                raise InfiniteMorseNumber(values[0], c.label)
            continue
        top = _exit_iterate(c.germ, mean, lo + c.n, hi + c.n)
        for m in range(1, top + 1):
            v = c.viterbo(m)
            if lo <= v <= hi and is_good_iterate(c, m):
                counts[v] += 1
    return counts


def betti(p: int) -> int:
    return 1 if p >= 0 and p % 2 == 0 else 0


def jump_window(n: int, N: int) -> tuple[int, int]:
    return (-2 * N - n - 1, 2 * N - n - 1) if n % 2 == 0 else (-2 * N - n, 2 * N - n)


def betti_side(n: int, N: int) -> int:
    lo, hi = jump_window(n, N)
    return sum((-1) ** (p % 2) * betti(p) for p in range(lo, hi + 1))


@dataclass(frozen=True)
class AlternatingSum:
    window: tuple[int, int]
    morse_side: int
    betti_side: int
    direction: str  # "<=" on odd-endpoint windows, ">=" on even-endpoint ones

    @property
    def holds(self) -> bool:
        if self.direction == "<=":
            return self.morse_side <= self.betti_side
        return self.morse_side >= self.betti_side


def alternating_sum_check(model: SurfaceModel, window: tuple[int, int],
                          numbers: dict[int, int] | None = None) -> AlternatingSum:
    lo, hi = window
    if (lo - hi) % 2:
        raise ParseError("window endpoints must have the same parity")
    mp = numbers if numbers is not None else morse_numbers(model, window)
    ms = sum((-1) ** (p % 2) * mp[p] for p in range(lo, hi + 1))
    bs = sum((-1) ** (p % 2) * betti(p) for p in range(lo, hi + 1))
    return AlternatingSum(window, ms, bs, "<=" if lo % 2 else ">=")


@dataclass(frozen=True)
class JumpCounts:
    plus_even: int
    plus_odd: int
    minus_even: int
    minus_odd: int
    plus_even_labels: tuple[str, ...]
    minus_even_labels: tuple[str, ...]
    middle: tuple[int, ...]  # Viterbo index of the 2 m_k iterate

    def swapped(self) -> tuple[int, int, int, int]:
        return self.minus_even, self.minus_odd, self.plus_even, self.plus_odd


def _thresholds(n: int, N: int) -> tuple[int, int, int, int]:
    """(negative-germ plus, positive-germ plus, negative-germ minus, positive-germ minus) cut-offs."""
    if n % 2 == 0:
        return -2 * N - n - 2, 2 * N - n, -2 * N - n, 2 * N - n - 2
    return -2 * N - n - 3, 2 * N - n + 1, -2 * N - n + 1, 2 * N - n - 3


def jump_counts(model: SurfaceModel, cert: JumpCertificate, signs: Sequence[int]) -> JumpCounts:
    """Classify the middle iterates 2 m_k against the window thresholds."""
    n, N = model.n, cert.N
    neg_plus, pos_plus, neg_minus, pos_minus = _thresholds(n, N)
    pe = po = me = mo = 0
    pe_l, me_l, mids = [], [], []
    for c, mk, s in zip(model.characteristics, cert.m, signs):
        v = c.viterbo(2 * mk)
        mids.append(v)
        p1 = c.viterbo(1) % 2
        parity = "e" if v % 2 == 0 and p1 == 0 else ("o" if v % 2 == 1 and p1 == 1 else "")
        if not parity:
            continue
        plus = (v <= neg_plus) if s < 0 else (v >= pos_plus)
        minus = (v >= neg_minus) if s < 0 else (v <= pos_minus)
        if plus:
            if parity == "e":
                pe += 1
                pe_l.append(c.label)
            else:
                po += 1
        if minus:
            if parity == "e":
                me += 1
                me_l.append(c.label)
            else:
                mo += 1
    return JumpCounts(pe, po, me, mo, tuple(pe_l), tuple(me_l), tuple(mids))


def small_iterate_tables(model: SurfaceModel, cert: JumpCertificate, signs: Sequence[int]) -> list[dict]:
    """Counts of iterates 2m_k +- m (1 <= m <= m-bar) by parity, per characteristic."""
    n = model.n
    cut_pos = -n - 2 if n % 2 == 0 else -n - 3
    cut_neg = -n if n % 2 == 0 else -n + 1
    out = []
    for c, mk, s in zip(model.characteristics, cert.m, signs):
        row = {"plus_even": 0, "plus_odd": 0, "minus_even": 0, "minus_odd": 0}
        p1 = c.viterbo(1) % 2
        for m in range(1, cert.mbar + 1):
            vm = c.viterbo(m)
            if (s > 0 and vm > cut_pos) or (s < 0 and vm < cut_neg):
                continue
            for side, it in (("plus", 2 * mk + m), ("minus", 2 * mk - m)):
                par = c.viterbo(it) % 2
                if par == p1:
                    row[f"{side}_{'even' if par == 0 else 'odd'}"] += 1
        out.append(row)
    return out


def threshold_violations(model: SurfaceModel, cert: JumpCertificate, signs: Sequence[int],
                         extra: int = 50) -> list[str]:
    """Iterates away from 2 m_k that land on the wrong side of the window."""
    n, N, mbar = model.n, cert.N, cert.mbar
    bad = []
    for c, mk, s in zip(model.characteristics, cert.m, signs):
        for m in range(mbar + 1, mbar + 1 + extra):
            v = c.viterbo(2 * mk + m)
            if (s > 0 and v < 2 * N - n + 1) or (s < 0 and v > -2 * N - n - 3):
                bad.append(f"{c.label}: iterate {2 * mk + m} has index {v}")
        for m in range(mbar + 1, 2 * mk):
            v = c.viterbo(2 * mk - m)
            if (s > 0 and v > 2 * N - n - 3) or (s < 0 and v < -2 * N - n + 1):
                bad.append(f"{c.label}: iterate {2 * mk - m} has index {v}")
    return bad


def claim_one(model: SurfaceModel, cert: JumpCertificate) -> tuple[Fraction, bool]:
    total = sum(2 * mk * average_euler_char(c) for c, mk in zip(model.characteristics, cert.m))
    return total, total == cert.N


@dataclass
class LedgerReport:
    n: int
    window: tuple[int, int]
    N: int
    N_dual: int
    certificate: JumpCertificate
    dual: JumpCertificate
    eps: Fraction
    morse: dict[int, int]
    alternating: AlternatingSum
    counts: JumpCounts
    dual_counts: JumpCounts
    identity_value: int
    bound: int
    non_hyperbolic: tuple[str, ...]
    extra: str | None
    tables: list[dict]
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def betti(self) -> dict[int, int]:
        return {p: betti(p) for p in range(self.window[0], self.window[1] + 1)}

    @property
    def identity_gap(self) -> int:
        """Direct alternating sum minus N + N_+^o - N_+^e; zero for even n."""
        return self.alternating.morse_side - self.identity_value


def multiplicity_report(model: SurfaceModel, delta: Fraction = DEFAULT_DELTA, eps: Fraction = DEFAULT_EPS,
                        scan_limit: int = DEFAULT_SCAN_LIMIT, workers: int = 1, halvings: int = 3) -> LedgerReport:
    """Run the full multiplicity argument on a model and check each step exactly."""
    model = model.mmi_order()
    n = model.n
    for c in model.characteristics:
        if not c.nondegenerate:
            raise HypothesisViolation(f"nondegeneracy fails for {c.label}")
    means = model.means()
    for c, mi in zip(model.characteristics, means):
        if mi.sign == 0:
            raise HypothesisViolation(f"{c.label} has zero mean index")
    perf = is_perfect(model)
    if not perf.perfect:
        label, m, i = perf.violations[0]
        raise HypothesisViolation(f"perfectness fails: {label} iterate {m} has Maslov-type index {i}")
    res = resonance_residuals(model)
    if not res.admissible:
        raise HypothesisViolation(f"resonance identity fails: residuals {res.r_plus:.3g}, {res.r_minus:.3g}")
    signs = [mi.sign for mi in means]
    rels = model.all_relations()
    mbar = stable_jump_horizon(model.germs, n, relations=rels)
    checks: list[CheckResult] = []
    e = Fraction(eps)
    for attempt in range(halvings + 1):
        inst = JumpInstance(model.germs, n, delta, e, mbar, rels)
        cert = next(iter_certificates(inst, scan_limit, workers), None)
        if cert is None:
            raise ScanExhausted(f"no certificate with N <= {scan_limit}", [])
        dual = dual_certificate(inst, cert, scan_limit, workers)
        ok1, ok2 = claim_one(model, cert)[1], claim_one(model, dual)[1]
        if ok1 and ok2:
            break
        if attempt == halvings:
            raise CheckFailed(f"claim-one identity still fails after {halvings} halvings of eps")
        e /= 2
    checks.append(CheckResult("claim_one", True, f"eps = {e}"))
    for g, a, b in zip(model.germs, cert.deltas, dual.deltas):
        if a + b != irrational_count(g):
            checks.append(CheckResult("vertex_symmetry", False, f"{g.label}: {a} + {b} != {irrational_count(g)}"))
            break
    else:
        checks.append(CheckResult("vertex_symmetry", True))
    N = cert.N
    window = jump_window(n, N)
    mp = morse_numbers(model, window)
    alt = alternating_sum_check(model, window, mp)
    checks.append(CheckResult("morse_inequality", alt.holds, f"{alt.morse_side} {alt.direction} {alt.betti_side}"))
    counts = jump_counts(model, cert, signs)
    dual_counts = jump_counts(model, dual, signs)
    swap = dual_counts.swapped() == (counts.plus_even, counts.plus_odd, counts.minus_even, counts.minus_odd)
    checks.append(CheckResult("count_swap", swap, f"{counts.swapped()[2:] + counts.swapped()[:2]} vs {dual_counts.swapped()}"))
    tables = small_iterate_tables(model, cert, signs)
    sym = all(t["plus_even"] == t["minus_even"] and t["plus_odd"] == t["minus_odd"] for t in tables)
    checks.append(CheckResult("small_iterate_symmetry", sym))
    thr = threshold_violations(model, cert, signs)
    checks.append(CheckResult("window_exclusions", not thr, "; ".join(thr[:5])))
    identity_value = N + counts.plus_odd - counts.plus_even
    if n % 2 == 0:
        checks.append(CheckResult("alternating_identity", identity_value == alt.morse_side,
                                  f"direct {alt.morse_side}, from counts {identity_value}"))
    half = n // 2 if n % 2 == 0 else (n - 1) // 2
    extra = None
    checks.append(CheckResult("plus_count", counts.plus_even >= half, f"{counts.plus_even} >= {half}"))
    checks.append(CheckResult("minus_count", dual_counts.plus_even >= half and counts.minus_even >= half,
                              f"{counts.minus_even} = {dual_counts.plus_even} >= {half}"))
    bound = counts.plus_even + counts.minus_even
    labels = list(counts.plus_even_labels) + list(counts.minus_even_labels)
    if n % 2 == 1:
        top = 2 * N - n - 1
        checks.append(CheckResult("top_morse_number", mp[top] >= 1, f"M_{top} = {mp[top]}"))
        for c, mk in zip(model.characteristics, cert.m):
            if c.label not in labels and c.viterbo(2 * mk) == top and is_good_iterate(c, 2 * mk):
                extra = c.label
                break
        checks.append(CheckResult("extra_characteristic", extra is not None, str(extra)))
        if extra is not None:
            bound += 1
    non_hyp = []
    for c in model.characteristics:
        if c.label in labels:
            if c.germ.c == 0:
                checks.append(CheckResult("non_hyperbolic", False, f"{c.label} counted but hyperbolic"))
            non_hyp.append(c.label)
    if extra is not None and next(c for c in model.characteristics if c.label == extra).germ.c > 0:
        non_hyp.append(extra)
    checks.append(CheckResult("multiplicity_bound", bound >= n, f"{bound} >= {n}"))
    return LedgerReport(n, window, N, dual.N, cert, dual, e, mp, alt, counts, dual_counts, identity_value,
                        bound, tuple(non_hyp), extra, tables, checks)
