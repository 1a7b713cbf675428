from fractions import Fraction

import pytest

from sympindex.errors import InconsistentData, ParseError, PrecisionError, UndecidableSign
from sympindex.rotation import (LinearForm, RotationNumber, golden_rotation, ratio, reduce_form, relation,
                                silver_rotation, structurally_zero, working_digits)


def test_rational_normalises():
    r = RotationNumber.rational(6, 20)
    assert (r.p, r.q) == (3, 10)
    assert r.interval == (Fraction(3, 10), Fraction(3, 10))


@pytest.mark.parametrize("p,q", [(0, 3), (3, 3), (5, 3)])
def test_rational_out_of_range(p, q):
    with pytest.raises(ParseError):
        RotationNumber(p=p, q=q)


def test_irrational_needs_twelve_digits():
    with pytest.raises(ParseError):
        RotationNumber.irrational("0.3", 8)


def test_irrational_interval_radius():
    r = RotationNumber.irrational("0.300000000000", 12)
    lo, hi = r.interval
    assert hi - lo == Fraction(2, 10**12)


def test_golden_digits_and_value():
    import mpmath

    mpmath.mp.dps = 60
    g = golden_rotation(30)
    assert g.digits == 30
    lo, hi = g.interval
    exact = (mpmath.sqrt(5) - 1) / 2
    assert mpmath.mpf(lo.numerator) / lo.denominator < exact < mpmath.mpf(hi.numerator) / hi.denominator


def test_precision_env(monkeypatch):
    monkeypatch.setenv("SIL_PRECISION_DIGITS", "20")
    assert working_digits() == 20
    assert silver_rotation().digits == 20
    monkeypatch.setenv("SIL_PRECISION_DIGITS", "5")
    with pytest.raises(ParseError):
        working_digits()


def test_floor_and_ceil_certified():
    f = LinearForm.of(golden_rotation())
    assert f.floor_times(3) == 1
    assert f.ceil_times(3) == 2
    exact = LinearForm.of(Fraction(1, 3))
    assert exact.ceil_times(3) == 1
    assert exact.floor_times(3) == 1


def test_floor_undecidable_at_low_precision():
    r = RotationNumber.irrational("0.333333333333", 12)
    f = LinearForm.of(r)
    with pytest.raises(PrecisionError):
        f.floor_times(10**12)


def test_sign_needs_relation():
    g = golden_rotation()
    h = RotationNumber.irrational("0.38196601125010515179541316563436188227969082019424", 50)
    form = LinearForm.of(g) + LinearForm.of(h) - 1
    with pytest.raises(UndecidableSign):
        form.sign()
    rel = relation([(1, g), (1, h)], 1)
    assert form.sign([rel]) == 0
    assert structurally_zero(form * 3, [rel])


def test_contradicting_relation():
    g = golden_rotation()
    with pytest.raises(InconsistentData):
        relation([(2, g)], 1)


def test_reduce_form_substitutes_pivots():
    g = golden_rotation()
    h = RotationNumber.irrational("0.38196601125010515179541316563436188227969082019424", 50)
    rel = relation([(1, g), (1, h)], 1)
    form = LinearForm.of(g) * 2 + LinearForm.of(h) * 2 - 1
    assert reduce_form(form, [rel]) == LinearForm.of(1)


def test_ratio():
    g = golden_rotation()
    a = LinearForm.of(g) * 3
    assert ratio(a, LinearForm.of(g)) == 3
    assert ratio(a + 1, LinearForm.of(g)) is None
    assert ratio(LinearForm.of(4), LinearForm.of(2)) == 2
