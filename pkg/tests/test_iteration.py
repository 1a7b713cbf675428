from fractions import Fraction

import pytest

from oracles import bott_index, bott_mean
from sympindex.errors import HypothesisViolation, InconsistentData, PrecisionError
from sympindex.iteration import (PathGerm, deviation_bound, index_at, mean_index, nullity_at, period,
                                 stable_jump_horizon, viterbo_index)
from sympindex.models import complement_rotation
from sympindex.normal_form import D, N1, N2, R, NormalForm
from sympindex.rotation import LinearForm, RotationNumber, golden_rotation, relation

G = golden_rotation()
THREE_TENTHS = RotationNumber.rational(3, 10)


def germ(i, *blocks, rels=()):
    return PathGerm(i, NormalForm(blocks), relations=tuple(rels))


def test_single_loop_indices():
    g = germ(1, N1(1, 1))
    assert [index_at(g, m) for m in range(1, 6)] == [1, 3, 5, 7, 9]


def test_rotation_germ_example():
    g = germ(1, R(THREE_TENTHS))
    assert index_at(g, 4) == 3


def test_zero_mean_germ_is_constant():
    h = complement_rotation(G)
    rel = relation([(1, G), (1, h)], 1)
    g = germ(-1, N1(1, 1), R(G), R(h), rels=[rel])
    assert {index_at(g, m) for m in range(1, 200)} == {-1}
    assert viterbo_index(g, 7, 3) == -4
    mi = mean_index(g)
    assert mi.sign == 0


def test_viterbo_examples():
    assert viterbo_index(germ(1, N1(1, 1)), 1, 1) == 0
    assert viterbo_index(germ(2, N1(1, 1), R(THREE_TENTHS)), 1, 2) == 0
    with pytest.raises(InconsistentData):
        viterbo_index(germ(1, N1(1, 1)), 1, 2)


def test_nullity_examples():
    assert all(nullity_at(germ(0, N1(1, 1)), m) == 1 for m in range(1, 20))
    assert nullity_at(germ(0, R(RotationNumber.rational(1, 3))), 3) == 2
    assert nullity_at(germ(0, R(RotationNumber.rational(1, 3))), 2) == 0
    assert all(nullity_at(germ(0, R(G)), m) == 0 for m in range(1, 50))


def test_mean_examples():
    a = mean_index(germ(1, N1(1, 1)))
    assert a.value == LinearForm.of(2) and a.sign == 1
    b = mean_index(germ(-3, N1(1, 1)))
    assert b.value == LinearForm.of(-2) and b.sign == -1


def test_deviation_examples():
    sigma = RotationNumber.irrational("0.41421356237309504880168872420969807856967187537694", 50)
    assert deviation_bound(germ(1, N1(1, 1))) == (1, 0)
    assert deviation_bound(germ(1, N1(1, 1), R(G), R(sigma))) == (3, 1)
    assert deviation_bound(germ(0, D(1))) == (0, 0)


def test_horizon_examples():
    assert stable_jump_horizon([germ(1, N1(1, 1))], 1) == 2
    assert stable_jump_horizon([germ(-3, N1(1, 1))], 1) == 2
    both = stable_jump_horizon([germ(1, N1(1, 1)), germ(-3, N1(1, 1))], 1)
    assert both == 2
    with pytest.raises(HypothesisViolation):
        stable_jump_horizon([germ(-1, N1(1, 1))], 1)


def test_horizon_satisfies_growth_condition():
    g1, g2 = germ(2, N1(1, 1), R(G)), germ(-3, N1(1, 1), R(G))
    n = 2
    mbar = stable_jump_horizon([g1, g2], n)
    for g, s in ((g1, 1), (g2, -1)):
        for m in range(mbar, mbar + 20):
            for l in range(1, 300):
                d = index_at(g, m + l) - index_at(g, l)
                assert s * d >= n + 1


def test_tightened_horizon_never_larger():
    g = germ(1, N1(1, 1), R(RotationNumber.rational(1, 3)))
    loose = stable_jump_horizon([g], 2)
    tight = stable_jump_horizon([g], 2, tighten=True)
    assert tight <= loose
    for m in range(tight, loose + 1):
        for l in range(1, 200):
            assert index_at(g, m + l) - index_at(g, l) >= 3


def test_period():
    assert period(germ(1, N1(1, 1), R(RotationNumber.rational(1, 3)), R(RotationNumber.rational(1, 4)))) == 12
    assert period(germ(1, N1(1, 1), R(G))) is None


@pytest.mark.parametrize("i1,blocks", [
    (2, (N1(1, 1), R(G))),
    (-3, (N1(1, 1), R(G), D(-1))),
    (3, (N1(-1, 1), N1(1, -1), N2(G, True))),
    (0, (N1(1, 0), R(RotationNumber.rational(2, 5)))),
    (5, (N1(-1, -1), N2(RotationNumber.rational(1, 3), False), R(RotationNumber.rational(1, 7)))),
])
def test_iteration_formula_matches_root_of_unity_sum(i1, blocks):
    g = PathGerm(i1, NormalForm(blocks))
    for m in range(1, 60):
        assert index_at(g, m) == bott_index(i1, blocks, m)
    assert abs(mean_index(g).approx() - bott_mean(i1, blocks)) < 1e-12


def test_mean_is_cesaro_limit():
    g = germ(2, N1(1, 1), R(G), D(1))
    mi = mean_index(g).approx()
    low, high = deviation_bound(g)
    for m in (10, 100, 1000, 10_000):
        i = index_at(g, m)
        assert -low <= i - m * mi < high + 1


def test_index_precision_error():
    near = RotationNumber.irrational("0.333333333333", 12)
    g = germ(1, N1(1, 1), R(near))
    with pytest.raises(PrecisionError):
        index_at(g, 3 * 10**12)
