"""Constructive common index jump search with exact certificates.

The search walks N = 1, 2, ... and looks for N whose multiples of the torus
vector v are all close to a vertex of the unit cube.  A float64 pass discards
almost every N cheaply; survivors are re-checked with exact interval
arithmetic, turned into multipliers m_k, and every identity the certificate
claims is recomputed from the raw germ data before it is returned.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, lcm
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (HypothesisViolation, ParseError, PrecisionError, ScanExhausted,
                     VerificationFailure)
from .iteration import (PathGerm, index_at, mean_index, nullity_at, stable_jump_horizon)
from .rotation import LinearForm, RotationNumber, ratio, reduce_form

DEFAULT_DELTA = Fraction(1, 20)
DEFAULT_EPS = Fraction(1, 1000)
DEFAULT_SCAN_LIMIT = 10**7
CHUNK = 1 << 20
SLACK = 1e-7

PATH_CHECKS = ("multiplier_form", "torus_approximation", "horizon_guard", "nullity_symmetry",
               "forward_jump", "backward_jump", "middle_jump", "delta_count")
ABSTRACT_CHECKS = ("index_identity", "near_integer", "integrality", "delta_count")


# torus vector ---------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    """One coordinate of the torus vector: exact, or an interval with exact ends."""

    lo: Fraction
    hi: Fraction
    exact: Fraction | None = None

    @property
    def approx(self) -> float:
        return float((self.lo + self.hi) / 2)

    def scaled(self, n: int) -> tuple[Fraction, Fraction]:
        return n * self.lo, n * self.hi


def _component(num: LinearForm, den: LinearForm) -> Component:
    """num/den for den certified positive."""
    q = ratio(num, den)
    if q is not None:
        return Component(q, q, q)
    alo, ahi = num.interval
    blo, bhi = den.interval
    if blo <= 0 or alo <= 0:
        raise PrecisionError("torus vector component not certified positive")
    return Component(alo / bhi, ahi / blo)


def _offset(c: Component, n: int) -> tuple[int, Fraction, Fraction]:
    """(k, lo, hi) with n*c - k in [lo, hi] and k the nearest integer."""
    if c.exact is not None:
        x = n * c.exact
        k = math.floor(x + Fraction(1, 2))
        return k, x - k, x - k
    lo, hi = c.scaled(n)
    k = math.floor((lo + hi) / 2 + Fraction(1, 2))
    return k, lo - k, hi - k


def torus_bits(components: Sequence[Component], n: int, eps: Fraction) -> tuple | None:
    """Vertex bits with |{n v_j} - bit| < eps, None entries for exact integers.

    Returns None when n misses the eps-neighbourhood of every vertex or a bit
    cannot be decided at the stored precision.
    """
    bits = []
    for c in components:
        _, lo, hi = _offset(c, n)
        if c.exact is not None:
            if lo == 0:
                bits.append(None)
            elif 0 < lo < eps:
                bits.append(0)
            elif -eps < lo < 0:
                bits.append(1)
            else:
                return None
            continue
        if max(-lo, hi) >= eps:
            return None
        if lo > 0:
            bits.append(0)
        elif hi < 0:
            bits.append(1)
        else:
            return None
    return tuple(bits)


def _prefilter(task: tuple) -> list[int]:
    approx, eps, start, stop = task
    ns = np.arange(start, stop, dtype=np.int64)
    keep = np.ones(len(ns), dtype=bool)
    for a in approx:
        x = ns * a
        keep &= np.abs(x - np.rint(x)) < eps
        if not keep.any():
            return []
    return ns[keep].tolist()


def scan_candidates(components: Sequence[Component], eps: Fraction, scan_limit: int,
                    workers: int = 1, start: int = 1) -> Iterator[int]:
    """N in [start, scan_limit] passing the float screen, ascending."""
    approx = tuple(c.approx for c in components)
    tol = float(eps) + SLACK
    tasks = [(approx, tol, a, min(a + CHUNK, scan_limit + 1)) for a in range(start, scan_limit + 1, CHUNK)]
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield from _prefilter(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for i in range(0, len(tasks), workers):
            for found in pool.map(_prefilter, tasks[i:i + workers]):
                yield from found


def _nearest_int(c: Component, n: int) -> int:
    return _offset(c, n)[0]


def _point_offset(f: LinearForm, m: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of m*f - nearest integer."""
    lo, hi = f.frac_times(m)
    if lo >= Fraction(1, 2):
        return lo - 1, hi - 1
    if hi <= Fraction(1, 2):
        return lo, hi
    raise PrecisionError("fractional part straddles 1/2")


def _dist_lower(f: LinearForm, m: int) -> Fraction:
    """Lower bound on the distance from m*f to the integers."""
    lo, hi = f.frac_times(m)
    return min(lo, 1 - hi)


# abstract form -------------------------------------------------------------

@dataclass
class AbstractJumpInstance:
    betas: tuple[int, ...]
    alphas: tuple[tuple[LinearForm, ...], ...]
    delta: Fraction = DEFAULT_DELTA
    eps: Fraction = DEFAULT_EPS
    relations: tuple[LinearForm, ...] = ()
    guard: int = 0

    def __post_init__(self) -> None:
        self.betas = tuple(int(b) for b in self.betas)
        self.alphas = tuple(tuple(LinearForm.of(a) for a in row) for row in self.alphas)
        self.delta, self.eps = Fraction(self.delta), Fraction(self.eps)
        self.relations = tuple(self.relations)
        if len(self.betas) != len(self.alphas) or not self.betas:
            raise ParseError("need one alpha list per beta and at least one index")
        if not 0 < self.delta < Fraction(1, 2):
            raise ParseError("delta must lie in (0, 1/2)")
        if self.delta * max(len(r) for r in self.alphas) >= Fraction(1, 2):
            raise HypothesisViolation("delta * max mu must be < 1/2")
        if self.eps <= 0:
            raise ParseError("eps must be positive")
        for row in self.alphas:
            for a in row:
                if a.sign(self.relations) <= 0:
                    raise ParseError("alpha values must be positive")
        self.d = tuple(reduce_form(LinearForm.of(b) + sum(row, LinearForm()), self.relations)
                       for b, row in zip(self.betas, self.alphas))
        self.signs = tuple(x.sign(self.relations) for x in self.d)
        if 0 in self.signs:
            raise HypothesisViolation("some D_i vanishes")
        self.modulus = clearing_modulus_of(a for row in self.alphas for a in row)
        self.abs_d = tuple(x * s for x, s in zip(self.d, self.signs))
        comps = [_component(LinearForm.of(Fraction(1, self.modulus)), d) for d in self.abs_d]
        for row, d in zip(self.alphas, self.abs_d):
            comps += [_component(reduce_form(a, self.relations), d) for a in row]
        self.components = tuple(comps)
        self._check_eps()

    def _check_eps(self) -> None:
        mod = self.modulus
        for row, d in zip(self.alphas, self.abs_d):
            spread = [self.eps * (1 + mod * a.interval[1]) for a in row if not a.is_exact]
            total = self.eps * mod * d.interval[1] + sum(spread)
            if total >= 1 or any(s >= self.delta for s in spread):
                raise HypothesisViolation(f"eps = {self.eps} too large for this instance")


@dataclass(frozen=True)
class AbstractSolution:
    N: int
    m: tuple[int, ...]
    deltas: tuple[int, ...]
    chi: tuple[int, ...] = ()


def clearing_modulus_of(alphas: Iterable[LinearForm]) -> int:
    out = 1
    for a in alphas:
        if a.is_exact:
            out = lcm(out, a.const.denominator)
    return out


def _abstract_checks(inst: AbstractJumpInstance, sol: AbstractSolution) -> list["CheckResult"]:
    out = []
    N, m = sol.N, sol.m
    ident, near, integ, dcount = [], [], [], []
    for i, (beta, row) in enumerate(zip(inst.betas, inst.alphas)):
        mi = m[i]
        try:
            lhs = mi * beta + sum(a.ceil_times(mi) for a in row)
            rhs = inst.signs[i] * N + sol.deltas[i]
            if lhs != rhs:
                ident.append(f"i={i + 1}: residual {lhs - rhs}")
            count = 0
            for a in row:
                lo, hi = a.frac_times(mi)
                if a.is_exact:
                    if lo != 0:
                        integ.append(f"i={i + 1}: {mi}*{a} not integral")
                    continue
                if not (hi < inst.delta or lo > 1 - inst.delta):
                    near.append(f"i={i + 1}: frac in [{float(lo):.6g}, {float(hi):.6g}]")
                if lo > 0 and hi < inst.delta:
                    count += 1
            if count != sol.deltas[i]:
                dcount.append(f"i={i + 1}: recomputed {count}, claimed {sol.deltas[i]}")
        except PrecisionError as exc:
            ident.append(f"i={i + 1}: {exc}")
    for name, bad in zip(ABSTRACT_CHECKS, (ident, near, integ, dcount)):
        out.append(CheckResult(name, not bad, "; ".join(bad)))
    return out


def verify_abstract(inst: AbstractJumpInstance, sol: AbstractSolution) -> "VerificationReport":
    return VerificationReport(tuple(_abstract_checks(inst, sol)))


def solve_abstract(inst: AbstractJumpInstance, count: int = 3, scan_limit: int = DEFAULT_SCAN_LIMIT,
                   workers: int = 1) -> list[AbstractSolution]:
    q = len(inst.betas)
    found: list[AbstractSolution] = []
    for N in scan_candidates(inst.components, inst.eps, scan_limit, workers):
        try:
            bits = torus_bits(inst.components, N, inst.eps)
            if bits is None:
                continue
            m = tuple(inst.modulus * _nearest_int(c, N) for c in inst.components[:q])
            if min(m) <= 0 or (inst.guard and inst.guard > 2 * min(m)):
                continue
            deltas = []
            for mi, row in zip(m, inst.alphas):
                cnt = 0
                for a in row:
                    lo, hi = a.frac_times(mi)
                    if not a.is_exact and lo > 0 and hi < inst.delta:
                        cnt += 1
                deltas.append(cnt)
        except PrecisionError:
            continue
        sol = AbstractSolution(N, m, tuple(deltas), tuple(0 if b is None else b for b in bits))
        report = verify_abstract(inst, sol)
        if not report.ok:
            raise VerificationFailure(report.first_failure.name, report.first_failure.detail)
        found.append(sol)
        if len(found) >= count:
            return found
    raise ScanExhausted(f"found {len(found)} of {count} solutions with N <= {scan_limit}", found)


# symplectic form -----------------------------------------------------------

@dataclass
class JumpInstance:
    germs: tuple[PathGerm, ...]
    n: int
    delta: Fraction = DEFAULT_DELTA
    eps: Fraction = DEFAULT_EPS
    mbar: int | None = None
    relations: tuple[LinearForm, ...] = ()

    def __post_init__(self) -> None:
        self.germs = tuple(self.germs)
        self.delta, self.eps = Fraction(self.delta), Fraction(self.eps)
        self.relations = tuple(self.relations) + tuple(r for g in self.germs for r in g.relations)
        if not self.germs:
            raise ParseError("a jump instance needs at least one germ")
        if not 0 < self.delta < Fraction(1, 2):
            raise ParseError("delta must lie in (0, 1/2)")
        if self.eps <= 0:
            raise ParseError("eps must be positive")
        if self.delta * max(g.c for g in self.germs) >= Fraction(1, 2):
            raise HypothesisViolation("delta * max mu must be < 1/2")
        means = [mean_index(g, self.relations) for g in self.germs]
        if any(mi.sign == 0 for mi in means):
            raise HypothesisViolation("every germ needs a nonzero mean index")
        self.signs = tuple(mi.sign for mi in means)
        self.abs_means = tuple(reduce_form(mi.value * mi.sign, self.relations) for mi in means)
        if self.mbar is None:
            self.mbar = stable_jump_horizon(self.germs, self.n, relations=self.relations)
        if self.mbar < 1:
            raise ParseError("m-bar must be positive")
        self.modulus = clearing_modulus(self)
        comps = [_component(LinearForm.of(Fraction(1, self.modulus)), d) for d in self.abs_means]
        self.layout: list[tuple[int, LinearForm]] = []
        for k, (g, d) in enumerate(zip(self.germs, self.abs_means)):
            for f, s in g.elliptic_points:
                for _ in range(s):
                    comps.append(_component(reduce_form(f * 2, self.relations), d))
                    self.layout.append((k, f))
        self.components = tuple(comps)
        self._check_eps()

    @property
    def q(self) -> int:
        return len(self.germs)

    def irrational_mask(self) -> tuple[bool, ...]:
        return tuple(c.exact is None for c in self.components)

    def _check_eps(self) -> None:
        mod, eps = self.modulus, self.eps
        for g, d in zip(self.germs, self.abs_means):
            spread = []
            for f, s in g.elliptic_points:
                if f.is_exact:
                    continue
                e = eps * (1 + 2 * mod * f.interval[1])
                spread += [e] * s
                room = min(_dist_lower(f, m) for m in range(1, self.mbar + 1))
                if e >= room:
                    raise HypothesisViolation(
                        f"eps = {eps} too large: iterates up to m-bar = {self.mbar} come within {float(room):.3g} of an integer")
            if eps * mod * d.interval[1] + sum(spread) >= 1 or any(e >= self.delta for e in spread):
                raise HypothesisViolation(f"eps = {eps} too large for this instance")

    def to_abstract(self) -> AbstractJumpInstance:
        alphas = []
        for g in self.germs:
            row = []
            for f, s in g.elliptic_points:
                row += [f * 2] * s
            alphas.append(tuple(row))
        return AbstractJumpInstance(tuple(g.slope for g in self.germs), tuple(alphas), self.delta, self.eps,
                                    self.relations, guard=self.mbar + 2)


def clearing_modulus(instance) -> int:
    """Least M with M*theta/pi integral for every rational circle point."""
    if isinstance(instance, AbstractJumpInstance):
        return clearing_modulus_of(a for row in instance.alphas for a in row)
    return clearing_modulus_of(f * 2 for g in instance.germs for f, _ in g.elliptic_points)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def first_failure(self) -> CheckResult | None:
        return next((c for c in self.checks if not c.ok), None)


@dataclass(frozen=True)
class JumpCertificate:
    N: int
    chi: tuple[int, ...]
    m: tuple[int, ...]
    deltas: tuple[int, ...]
    q_table: tuple[tuple[int, ...], ...]
    mbar: int
    delta: Fraction
    eps: Fraction
    eps_achieved: float
    checks: tuple[CheckResult, ...] = field(default=())


def q_value(germ: PathGerm, mk: int, m: int) -> int:
    total = 0
    for f, s in germ.elliptic_points:
        if f.is_exact and (2 * mk * f.const).denominator == 1 and (m * f.const).denominator == 1:
            total += s
    return total


def delta_value(germ: PathGerm, mk: int, delta: Fraction) -> int:
    total = 0
    for f, s in germ.elliptic_points:
        lo, hi = f.frac_times(2 * mk)
        if lo > 0 and hi < delta:
            total += s
        elif lo <= 0 < hi or (lo < delta <= hi):
            raise PrecisionError("Delta count undecidable")
    return total


def point_signs(germ: PathGerm, mk: int) -> tuple[int, ...]:
    """Signs of 2*mk*theta/2pi minus its nearest integer, per irrational point."""
    out = []
    for f, _ in germ.elliptic_points:
        if f.is_exact:
            continue
        lo, hi = _point_offset(f, 2 * mk)
        if lo > 0:
            out.append(1)
        elif hi < 0:
            out.append(-1)
        else:
            raise PrecisionError("point offset sign undecidable")
    return tuple(out)


def _path_checks(inst: JumpInstance, cert: JumpCertificate) -> list[CheckResult]:
    N, M, mbar = cert.N, inst.modulus, cert.mbar
    q = inst.q
    fails: dict[str, list[str]] = {name: [] for name in PATH_CHECKS}
    if len(cert.m) != q or len(cert.chi) != len(inst.components) or len(cert.deltas) != q:
        raise ParseError("certificate shape does not match the instance")
    for j, c in enumerate(inst.components):
        try:
            k, lo, hi = _offset(c, N)
            if lo < 0 <= hi and lo != hi:
                raise PrecisionError("floor undecidable")
            fl = k if lo >= 0 else k - 1
            frac_lo, frac_hi = lo - (fl - k), hi - (fl - k)
            chi = cert.chi[j]
            if c.exact is not None and frac_lo == 0:
                dist = Fraction(0)
            else:
                dist = max(abs(frac_lo - chi), abs(frac_hi - chi))
            if dist >= cert.eps:
                fails["torus_approximation"].append(f"component {j + 1}: |{{Nv}} - chi| up to {float(dist):.6g}")
            if j < q:
                integer = c.exact is not None and frac_lo == 0
                want = M * (fl + chi - (1 if integer and chi == 1 else 0))
                if cert.m[j] != want:
                    fails["multiplier_form"].append(f"germ {j + 1}: m = {cert.m[j]}, formula gives {want}")
        except PrecisionError as exc:
            fails["torus_approximation"].append(f"component {j + 1}: {exc}")
    if mbar + 2 > 2 * min(cert.m):
        fails["horizon_guard"].append(f"m-bar + 2 = {mbar + 2} > 2 min m_k = {2 * min(cert.m)}")
    for k, g in enumerate(inst.germs):
        mk, rho = cert.m[k], inst.signs[k]
        if mk < 1:
            fails["multiplier_form"].append(f"germ {k + 1}: nonpositive multiplier")
            continue
        try:
            for m in range(1, mbar + 1):
                im = index_at(g, m)
                nu = nullity_at(g, m)
                if 2 * mk - m >= 1:
                    nb = nullity_at(g, 2 * mk - m)
                    if not (nb == nullity_at(g, 2 * mk + m) == nu):
                        fails["nullity_symmetry"].append(f"germ {k + 1}, m={m}")
                    back = index_at(g, 2 * mk - m)
                    want = 2 * rho * N - im - 2 * (g.s_plus + q_value(g, mk, m))
                    if back != want:
                        fails["backward_jump"].append(f"germ {k + 1}, m={m}: residual {back - want}")
                else:
                    fails["backward_jump"].append(f"germ {k + 1}, m={m}: iterate 2m_k - m not positive")
                fwd = index_at(g, 2 * mk + m)
                if fwd != 2 * rho * N + im:
                    fails["forward_jump"].append(f"germ {k + 1}, m={m}: residual {fwd - 2 * rho * N - im}")
            mid = index_at(g, 2 * mk)
            want = 2 * rho * N - (g.s_plus + g.c - 2 * cert.deltas[k])
            if mid != want:
                fails["middle_jump"].append(f"germ {k + 1}: residual {mid - want}")
            dv = delta_value(g, mk, cert.delta)
            if dv != cert.deltas[k]:
                fails["delta_count"].append(f"germ {k + 1}: recomputed {dv}, claimed {cert.deltas[k]}")
            for f, _ in g.elliptic_points:
                lo, hi = f.frac_times(2 * mk)
                if not (hi < cert.delta or lo > 1 - cert.delta or (f.is_exact and lo == 0)):
                    fails["delta_count"].append(f"germ {k + 1}: point {f} not within delta of an integer")
        except PrecisionError as exc:
            fails["forward_jump"].append(f"germ {k + 1}: {exc}")
    return [CheckResult(name, not bad, "; ".join(bad)) for name, bad in fails.items()]


def verify_certificate(inst: JumpInstance, cert: JumpCertificate) -> VerificationReport:
    """Recompute every claimed identity from the germ data alone."""
    return VerificationReport(tuple(_path_checks(inst, cert)))


def _achieved(inst: JumpInstance, N: int) -> float:
    worst = Fraction(0)
    for c in inst.components:
        _, lo, hi = _offset(c, N)
        worst = max(worst, abs(lo), abs(hi))
    return float(worst)


def _build(inst: JumpInstance, N: int, bits: tuple, prefer: Sequence[int] | None) -> JumpCertificate | None:
    q = inst.q
    chi = tuple((b if b is not None else (prefer[j] if prefer else 0)) for j, b in enumerate(bits))
    m = tuple(inst.modulus * _nearest_int(c, N) for c in inst.components[:q])
    if min(m) < 1 or inst.mbar + 2 > 2 * min(m):
        return None
    deltas = tuple(delta_value(g, mk, inst.delta) for g, mk in zip(inst.germs, m))
    table = tuple(tuple(q_value(g, mk, j) for j in range(1, inst.mbar + 1)) for g, mk in zip(inst.germs, m))
    return JumpCertificate(N, chi, m, deltas, table, inst.mbar, inst.delta, inst.eps, _achieved(inst, N))


def _finish(inst: JumpInstance, cert: JumpCertificate) -> JumpCertificate:
    report = verify_certificate(inst, cert)
    if not report.ok:
        bad = report.first_failure
        raise VerificationFailure(bad.name, bad.detail)
    return JumpCertificate(cert.N, cert.chi, cert.m, cert.deltas, cert.q_table, cert.mbar, cert.delta,
                           cert.eps, cert.eps_achieved, report.checks)


def iter_certificates(inst: JumpInstance, scan_limit: int = DEFAULT_SCAN_LIMIT, workers: int = 1):
    """Verified certificates in increasing N."""
    for N in scan_candidates(inst.components, inst.eps, scan_limit, workers):
        try:
            bits = torus_bits(inst.components, N, inst.eps)
            if bits is None:
                continue
            cert = _build(inst, N, bits, None)
        except PrecisionError:
            continue
        if cert is not None:
            yield _finish(inst, cert)


def solve_paths(inst: JumpInstance, count: int = 3, scan_limit: int = DEFAULT_SCAN_LIMIT,
                workers: int = 1) -> list[JumpCertificate]:
    """The first ``count`` certificates in increasing N."""
    found: list[JumpCertificate] = []
    for cert in iter_certificates(inst, scan_limit, workers):
        found.append(cert)
        if len(found) >= count:
            return found
    raise ScanExhausted(f"found {len(found)} of {count} certificates with N <= {scan_limit}", found)


def dual_certificate(inst: JumpInstance, cert: JumpCertificate, scan_limit: int = DEFAULT_SCAN_LIMIT,
                     workers: int = 1) -> JumpCertificate:
    """A certificate at the opposite vertex whose point offsets all change sign.

    The sign flip makes Delta + Delta' equal the number of irrational circle
    points (with multiplicity) for every germ.
    """
    flipped = tuple(1 - b for b in cert.chi)
    mask = inst.irrational_mask()
    before = [point_signs(g, mk) for g, mk in zip(inst.germs, cert.m)]
    for N in scan_candidates(inst.components, inst.eps, scan_limit, workers):
        try:
            bits = torus_bits(inst.components, N, inst.eps)
            if bits is None:
                continue
            if any(irr and b != want for irr, b, want in zip(mask, bits, flipped)):
                continue
            cand = _build(inst, N, bits, flipped)
            if cand is None:
                continue
            after = [point_signs(g, mk) for g, mk in zip(inst.germs, cand.m)]
        except PrecisionError:
            continue
        if any(a != tuple(-x for x in b) for a, b in zip(after, before)):
            continue
        out = _finish(inst, cand)
        for g, d1, d2 in zip(inst.germs, cert.deltas, out.deltas):
            if d1 + d2 != irrational_count(g):
                raise VerificationFailure("vertex_symmetry", f"{d1} + {d2} != {irrational_count(g)}")
        return out
    raise ScanExhausted(f"no dual certificate with N <= {scan_limit}", [])


def irrational_count(germ: PathGerm) -> int:
    return sum(s for f, s in germ.elliptic_points if not f.is_exact)


def vertex_symmetry(inst: JumpInstance, a: JumpCertificate, b: JumpCertificate) -> list[tuple[int, int, int]]:
    """(Delta, Delta', C) per germ."""
    return [(x, y, g.c) for g, x, y in zip(inst.germs, a.deltas, b.deltas)]
