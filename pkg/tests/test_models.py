import random

import pytest
import sympy

import oracles
from sympindex.errors import HypothesisViolation, InfiniteMorseNumber, ParseError
from sympindex.iteration import index_at, mean_index
from sympindex.ledger import average_euler_char, morse_numbers, resonance_residuals
from sympindex.models import (GOLDEN_AXES, GOLDEN_AXES_3, SILVER_AXES, EllipsoidSpec, ellipsoid,
                              ellipsoid_initial_index, ellipsoid_means, mixed_models, synthetic,
                              zero_mean_mixed_model)
from sympindex.modelfile import emit_model

PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


def test_golden_pair_data():
    e = ellipsoid(GOLDEN_AXES)
    y1, y2 = e.germs
    assert y1.initial_index == 2 and y2.initial_index == 4
    phi = (1 + 5 ** 0.5) / 2
    assert abs(mean_index(y1).approx() - 2 * (1 + 1 / phi)) < 1e-12
    assert abs(mean_index(y2).approx() - 2 * (1 + phi)) < 1e-12
    assert [average_euler_char(c) for c in e.characteristics] == [1, 1]


def test_shared_fractional_parts_reuse_symbols():
    e = ellipsoid(GOLDEN_AXES)
    rho1 = e.germs[0].end_form.blocks[1].rho
    rho2 = e.germs[1].end_form.blocks[1].rho
    assert rho1 == rho2


def test_three_axis_relations_declared():
    e = ellipsoid(GOLDEN_AXES_3)
    assert len(e.relations) == 1
    means = [mean_index(g, e.relations).approx() for g in e.germs]
    phi = (1 + 5 ** 0.5) / 2
    assert means == pytest.approx([4, 4 * phi, 4 * phi * phi], abs=1e-12)


def test_rational_ratio_rejected():
    with pytest.raises(HypothesisViolation):
        EllipsoidSpec(("1", "sqrt(2)", "2"))
    with pytest.raises(ParseError):
        EllipsoidSpec(("2", "1"))


def test_means_symbolic_resonance_up_to_four_axes():
    for axes in (SILVER_AXES, GOLDEN_AXES_3, ("1", "sqrt(2)", "sqrt(3)"), ("1", "sqrt(2)", "sqrt(3)", "sqrt(5)")):
        means = ellipsoid_means(axes)
        assert sympy.radsimp(sum(1 / m for m in means) - sympy.Rational(1, 2)).expand() == 0


def _random_axes(rng, n):
    ps = rng.sample(PRIMES, n)
    vals = [sympy.sqrt(p) * sympy.Rational(rng.randint(1, 9), rng.randint(1, 9)) for p in ps]
    return sorted(vals, key=lambda v: float(v))


def test_initial_index_matches_crossing_oracle():
    rng = random.Random(20261016)
    for _ in range(100):
        n = rng.randint(2, 4)
        vals = _random_axes(rng, n)
        floats = [float(v) for v in vals]
        for j in range(n):
            assert ellipsoid_initial_index(vals, j) == oracles.ellipsoid_oracle_index(floats, j)


def test_iterates_match_crossing_oracle():
    e = ellipsoid(("1", "sqrt(2)", "sqrt(3)"))
    axes = [1.0, 2 ** 0.5, 3 ** 0.5]
    for j, g in enumerate(e.germs):
        for m in range(1, 25):
            assert index_at(g, m) == oracles.ellipsoid_oracle_index(axes, j, m)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_resonance_small_ellipsoids(n):
    axes = ["1", "sqrt(2)", "sqrt(3)", "sqrt(5)"][:n]
    r = resonance_residuals(ellipsoid(axes))
    assert r.admissible and abs(r.r_plus) <= 1e-9 and r.negative == (0, 0)


def test_synthetic_mixed_pair():
    cfg = {"n": 1, "characteristics": [
        {"name": "a", "initial_index": 1, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]},
        {"name": "b", "initial_index": -3, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]},
    ]}
    m = synthetic(cfg)
    assert m.annotations["q0"] == 1
    assert m.annotations["nondegenerate"]


def test_synthetic_inadmissible_flag():
    cfg = {"n": 1, "characteristics": [
        {"name": "a", "initial_index": 1, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]},
        {"name": "b", "initial_index": 4, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]},
    ]}
    m = synthetic(cfg)
    assert m.annotations["admissible"] is False
    assert m.annotations["resonance"]["r_plus"] == pytest.approx(-0.1)


def test_zero_mean_fixture_loads_then_fails_ledger():
    m = synthetic(emit_model(zero_mean_mixed_model(2)))
    assert m.annotations["zero_mean"] == ["z2"]
    with pytest.raises(InfiniteMorseNumber):
        morse_numbers(m, (-8, 8))


def test_mixed_models_are_admissible():
    for name, m in mixed_models().items():
        a = m.annotations
        assert a["admissible"] and a["perfect"] and a["nondegenerate"], name
        signs = {mi.sign for mi in m.means()}
        assert signs == {1, -1}, name
