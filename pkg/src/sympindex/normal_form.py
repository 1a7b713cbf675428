"""Basic symplectic normal forms, their diamond sums and splitting numbers.

Points of the unit circle are written through theta/2pi as a ``LinearForm``
in [0, 1): 0 is the eigenvalue 1, 1/2 is -1, and a rotation block R(rho)
carries the two points rho and 1 - rho.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from .errors import CheckFailed, ParseError, PrecisionError
from .rotation import MIN_DIGITS, LinearForm, RotationNumber


@dataclass(frozen=True)
class CirclePoint:
    where: LinearForm  # theta / 2pi
    s_plus: int
    s_minus: int
    nullity: int


ONE = LinearForm.of(0)
MINUS_ONE = LinearForm.of(Fraction(1, 2))


@dataclass(frozen=True)
class N1:
    lam: int
    b: int

    def __post_init__(self) -> None:
        if self.lam not in (1, -1) or self.b not in (-1, 0, 1):
            raise ParseError(f"N1 needs lambda in {{1,-1}} and b in {{-1,0,1}}, got ({self.lam}, {self.b})")

    half_dim = 1

    def points(self) -> tuple[CirclePoint, ...]:
        nul = 2 if self.b == 0 else 1
        if self.lam == 1:
            s = 1 if self.b >= 0 else 0
            return (CirclePoint(ONE, s, s, nul),)
        s = 1 if self.b <= 0 else 0
        return (CirclePoint(MINUS_ONE, s, s, nul),)


@dataclass(frozen=True)
class D:
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ParseError(f"D needs sign +1 or -1, got {self.sign}")

    half_dim = 1

    def points(self) -> tuple[CirclePoint, ...]:
        return ()


def _check_rho(rho: RotationNumber, kind: str) -> None:
    if not isinstance(rho, RotationNumber):
        raise ParseError(f"{kind} needs a RotationNumber")
    if rho.is_rational and rho.exact() == Fraction(1, 2):
        raise ParseError(f"{kind} does not allow rotation number 1/2")
    if not rho.is_rational and not rho.excludes_half():
        raise PrecisionError(f"{kind} rotation {rho} cannot be certified away from 1/2")


@dataclass(frozen=True)
class R:
    rho: RotationNumber

    def __post_init__(self) -> None:
        _check_rho(self.rho, "R")

    half_dim = 1

    def points(self) -> tuple[CirclePoint, ...]:
        here = LinearForm.of(self.rho)
        return (CirclePoint(here, 0, 1, 1), CirclePoint(1 - here, 1, 0, 1))


@dataclass(frozen=True)
class N2:
    rho: RotationNumber
    nontrivial: bool

    def __post_init__(self) -> None:
        _check_rho(self.rho, "N2")

    half_dim = 2

    def points(self) -> tuple[CirclePoint, ...]:
        here = LinearForm.of(self.rho)
        s = 1 if self.nontrivial else 0
        return (CirclePoint(here, s, s, 1), CirclePoint(1 - here, s, s, 1))


@dataclass(frozen=True)
class OffCircle:
    half_dim: int

    def __post_init__(self) -> None:
        if self.half_dim < 1:
            raise ParseError("OffCircle needs half dimension >= 1")

    def points(self) -> tuple[CirclePoint, ...]:
        return ()


Block = Union[N1, D, R, N2, OffCircle]
Omega = Union[int, RotationNumber, LinearForm]


@dataclass(frozen=True)
class NormalForm:
    blocks: tuple[Block, ...] = ()

    def __init__(self, blocks: Iterable[Block] = ()) -> None:
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n(self) -> int:
        return sum(b.half_dim for b in self.blocks)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @cached_property
    def points(self) -> tuple[CirclePoint, ...]:
        """Circle points with splitting numbers summed over blocks."""
        merged: dict[LinearForm, list[int]] = {}
        for block in self.blocks:
            for pt in block.points():
                acc = merged.setdefault(pt.where, [0, 0, 0])
                acc[0] += pt.s_plus
                acc[1] += pt.s_minus
                acc[2] += pt.nullity
        return tuple(CirclePoint(w, a, b, c) for w, (a, b, c) in merged.items())

    def counts(self) -> dict[str, int]:
        """(r, s, r*, r0) plus the N1 factors."""
        out = {"r": 0, "s": 0, "r_star": 0, "r_zero": 0, "n1": 0, "off": 0}
        for b in self.blocks:
            if isinstance(b, R):
                out["r"] += 1
            elif isinstance(b, D):
                out["s"] += 1
            elif isinstance(b, N2):
                out["r_star" if b.nontrivial else "r_zero"] += 1
            elif isinstance(b, N1):
                out["n1"] += 1
            else:
                out["off"] += b.half_dim
        return out

    def __str__(self) -> str:
        return " <> ".join(block_name(b) for b in self.blocks) or "(empty)"


def block_name(b: Block) -> str:
    if isinstance(b, N1):
        return f"N1({b.lam},{b.b})"
    if isinstance(b, D):
        return f"D({'+' if b.sign > 0 else '-'})"
    if isinstance(b, R):
        return f"R({b.rho})"
    if isinstance(b, N2):
        return f"N2({b.rho},{'nontrivial' if b.nontrivial else 'trivial'})"
    return f"OffCircle({b.half_dim})"


def diamond_sum(a: NormalForm, b: NormalForm) -> NormalForm:
    return NormalForm(a.blocks + b.blocks)


def _omega_form(omega: Omega) -> LinearForm:
    if isinstance(omega, LinearForm):
        return omega
    if isinstance(omega, RotationNumber):
        return LinearForm.of(omega)
    if omega == 1:
        return ONE
    if omega == -1:
        return MINUS_ONE
    raise ParseError(f"omega must be +-1 or a rotation number, got {omega!r}")


def _lookup(nf: NormalForm, omega: Omega) -> CirclePoint | None:
    target = _omega_form(omega)
    hit = None
    for pt in nf.points:
        if pt.where == target:
            hit = pt
            continue
        d = pt.where - target
        if d.is_exact:
            continue
        lo, hi = d.interval
        if lo <= 0 <= hi:
            raise PrecisionError("omega cannot be separated from a stored circle point")
    return hit


def splitting_pair(nf: NormalForm, omega: Omega) -> tuple[int, int]:
    pt = _lookup(nf, omega)
    return (pt.s_plus, pt.s_minus) if pt else (0, 0)


def circle_nullity(nf: NormalForm, omega: Omega) -> int:
    pt = _lookup(nf, omega)
    return pt.nullity if pt else 0


def elliptic_count(nf: NormalForm) -> int:
    """C(M): total S^- over the circle minus the point 1."""
    return sum(pt.s_minus for pt in nf.points if pt.where != ONE)


# numeric front end ---------------------------------------------------------

def standard_j(n: int) -> np.ndarray:
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, -i], [i, z]])


def _block_matrix(b: Block) -> np.ndarray:
    if isinstance(b, N1):
        return np.array([[b.lam, b.b], [0.0, b.lam]], dtype=float)
    if isinstance(b, D):
        return np.diag([2.0 * b.sign, 0.5 * b.sign])
    if isinstance(b, R):
        t = 2 * np.pi * b.rho.approx()
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    if isinstance(b, OffCircle) and b.half_dim % 2 == 0:
        k = b.half_dim // 2
        a = 1.7 * np.array([[np.cos(0.9), -np.sin(0.9)], [np.sin(0.9), np.cos(0.9)]])
        a = np.kron(np.eye(k), a)
        return np.block([[a, np.zeros_like(a)], [np.zeros_like(a), np.linalg.inv(a).T]])
    raise ParseError(f"no matrix realization for {block_name(b)}")


def realize(nf: NormalForm) -> np.ndarray:
    """A matrix for the diamond sum, in (x_1..x_n, y_1..y_n) coordinates."""
    n = nf.n
    out = np.zeros((2 * n, 2 * n))
    off = 0
    for b in nf.blocks:
        h = b.half_dim
        m = _block_matrix(b)
        xs = list(range(off, off + h))
        ys = list(range(n + off, n + off + h))
        idx = xs + ys
        out[np.ix_(idx, idx)] = m
        off += h
    return out


def _sign_of_jordan(m: np.ndarray, lam: float, basis: np.ndarray, j: np.ndarray) -> int:
    shifted = m - lam * np.eye(len(m))
    images = shifted @ basis
    k = int(np.argmax(np.linalg.norm(images, axis=0)))
    v = basis[:, k]
    w = shifted @ v
    s = float((j @ v) @ w)
    return -1 if s > 0 else 1


def classify_matrix(m: np.ndarray, tol: float = 1e-12) -> NormalForm:
    """Normal form of a symplectic matrix with semisimple circle spectrum.

    Eigenvalues +-1 may appear with algebraic multiplicity two (an N1 block);
    every other circle eigenvalue must be simple.  Rotation numbers come back
    as 12-digit irrational rotation numbers.
    """
    m = np.asarray(m, dtype=float)
    dim = m.shape[0]
    if m.shape != (dim, dim) or dim % 2:
        raise ParseError("classify_matrix needs a square matrix of even size")
    n = dim // 2
    j = standard_j(n)
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m.T @ j @ m - j) > tol * scale * scale:
        raise CheckFailed("matrix is not symplectic within tolerance")
    radius = max(np.sqrt(tol), 1e-7) * scale
    vals, vecs = np.linalg.eig(m)
    used = [False] * dim
    clusters: list[list[int]] = []
    for a in range(dim):
        if used[a]:
            continue
        group = [a]
        used[a] = True
        for b in range(a + 1, dim):
            if not used[b] and abs(vals[b] - vals[a]) < radius:
                group.append(b)
                used[b] = True
        clusters.append(group)

    n1s, rots, hyps, offs = [], [], [], []
    seen_off = 0
    for group in clusters:
        lam = complex(np.mean(vals[group]))
        mult = len(group)
        on_circle = abs(abs(lam) - 1) <= radius
        if not on_circle and abs(abs(lam) - 1) < 10 * radius:
            raise PrecisionError("eigenvalue too close to the unit circle to classify")
        real = abs(lam.imag) <= radius
        if on_circle and real:
            sgn = 1 if lam.real > 0 else -1
            if mult != 2:
                raise CheckFailed(f"eigenvalue {sgn} must have algebraic multiplicity 0 or 2, found {mult}")
            shifted = m - sgn * np.eye(dim)
            sv = np.linalg.svd(shifted, compute_uv=False)
            kernel = int(np.sum(sv < radius))
            if kernel >= 2:
                n1s.append(N1(sgn, 0))
                continue
            u, s2, vh = np.linalg.svd(shifted @ shifted)
            basis = vh[-2:].T
            n1s.append(N1(sgn, _sign_of_jordan(m, sgn, basis, j)))
        elif on_circle:
            if lam.imag < 0:
                continue
            shifted = m - lam * np.eye(dim)
            _, sv, vh = np.linalg.svd(shifted)
            space = vh[dim - mult:].conj().T
            if int(np.sum(sv < radius)) != mult:
                raise CheckFailed("non-semisimple eigenvalue on the unit circle (N2-type data) is not supported")
            gram = space.conj().T @ (-1j * j) @ space
            krein = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
            if np.min(np.abs(krein)) < radius:
                raise PrecisionError("Krein sign undecidable")
            angle = float(np.angle(lam)) / (2 * np.pi)
            for k in krein:
                rho = angle if k > 0 else 1 - angle
                rots.append(R(RotationNumber.irrational(f"{rho:.15f}", MIN_DIGITS)))
        elif real:
            if abs(lam) > 1:
                hyps.extend(D(1 if lam.real > 0 else -1) for _ in range(mult))
        else:
            if abs(lam) > 1 and lam.imag > 0:
                seen_off += mult
    if seen_off:
        offs = [OffCircle(2) for _ in range(seen_off)]
    out = NormalForm(n1s + rots + hyps + offs)
    if out.n != n:
        raise CheckFailed(f"classified blocks cover half-dimension {out.n}, expected {n}")
    return out
