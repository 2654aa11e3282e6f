import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldrunaway.errors import DomainError
from ldrunaway.fields import (
    NORMALIZATION,
    FieldModel,
    field_impulse,
    load_profile,
    scalar_field,
    scalar_field_raw,
    validate_theorem1_hypotheses,
)


@pytest.fixture
def coulomb():
    return FieldModel.cutoff_coulomb(1.0, 10.0)


def triangle(r0):
    # zero at r0/2 and r0, peak magnitude 1 at 3 r0 / 4
    return FieldModel.tabulated([(r0 / 2, 0.0), (0.75 * r0, 1.0), (r0, 0.0)], r0=r0)


def trapezoid_impulse(model, a, b, n=1_000_000):
    xs = np.linspace(a, b, n + 1)
    mags = np.array([model.magnitude(-x) for x in xs]) if n <= 1000 else model.magnitude_array(-xs)
    return 1.5 * np.trapezoid(mags, xs)


def test_normalization_constants():
    assert NORMALIZATION.electron_charge == -1.0
    assert NORMALIZATION.electron_mass == 2.0 / 3.0
    assert NORMALIZATION.light_speed == 1.0
    assert NORMALIZATION.field_scale == pytest.approx(1.5)


def test_scalar_field_raw_examples(coulomb):
    assert scalar_field_raw(coulomb, -2.0) == pytest.approx(-1.0 / 6.0, rel=1e-15)
    assert scalar_field_raw(coulomb, -20.0) == 0.0
    zero = FieldModel.tabulated([(1.0, 0.0), (5.0, 0.0)])
    for x in (-0.5, -3.0, -5.0, -7.0):
        assert scalar_field_raw(zero, x) == 0.0


def test_scalar_field_examples(coulomb):
    assert scalar_field(coulomb, -2.0) == pytest.approx(-0.25, rel=1e-15)
    assert scalar_field(coulomb, -1.0) == pytest.approx(-1.0, rel=1e-15)
    assert scalar_field(coulomb, -11.0) == 0.0
    assert scalar_field(triangle(4.0), -5.0) == 0.0


def test_tabulated_interpolation():
    fm = triangle(4.0)
    assert scalar_field_raw(fm, -3.0) == pytest.approx(-1.0)
    assert scalar_field_raw(fm, -2.5) == pytest.approx(-0.5)
    assert scalar_field_raw(fm, -4.0) == 0.0


@pytest.mark.parametrize("x", [0.0, 1.0])
def test_nonnegative_x_is_domain_error(coulomb, x):
    with pytest.raises(DomainError):
        scalar_field_raw(coulomb, x)
    with pytest.raises(DomainError):
        scalar_field(coulomb, x)


@pytest.mark.parametrize("bad", [dict(Q2=0.0, r0=1.0), dict(Q2=1.0, r0=0.0), dict(Q2=-1.0, r0=2.0)])
def test_invalid_coulomb_rejected(bad):
    with pytest.raises(ValueError):
        FieldModel.cutoff_coulomb(**bad)


models = st.one_of(
    st.builds(FieldModel.cutoff_coulomb, st.floats(0.1, 5.0), st.floats(0.5, 50.0)),
    st.floats(0.5, 50.0).map(triangle),
)


@given(models, st.floats(0.001, 1.5))
def test_bar_field_is_scaled_raw_field_and_nonpositive(model, frac):
    x = -frac * model.r0
    assert scalar_field(model, x) == 1.5 * scalar_field_raw(model, x)
    assert scalar_field(model, x) <= 0.0


def test_impulse_closed_form_example():
    # K = Q2 (1/r2 - 1/r0) with Q2 = 1, r2 = 1, r0 = 2
    assert field_impulse(FieldModel.cutoff_coulomb(1.0, 2.0), -2.0, -1.0) == pytest.approx(0.5, rel=1e-15)


def test_impulse_empty_interval(coulomb):
    assert field_impulse(coulomb, -3.0, -3.0) == 0.0
    assert field_impulse(triangle(4.0), -3.0, -3.0) == 0.0


def test_impulse_triangle_matches_trapezoid_oracle():
    fm = triangle(4.0)
    oracle = trapezoid_impulse(fm, -4.0, -0.1)
    # area of the unit triangle on [2, 4] times 1.5
    assert oracle == pytest.approx(1.5, rel=1e-9)
    assert field_impulse(fm, -4.0, -0.1) == pytest.approx(oracle, rel=1e-9)
    oracle_part = trapezoid_impulse(fm, -3.7, -2.2)
    assert field_impulse(fm, -3.7, -2.2) == pytest.approx(oracle_part, rel=1e-9)


def test_impulse_coulomb_matches_trapezoid_oracle():
    fm = FieldModel.cutoff_coulomb(2.0, 5.0)
    assert field_impulse(fm, -5.0, -1.0) == pytest.approx(trapezoid_impulse(fm, -5.0, -1.0), rel=1e-9)


@pytest.mark.parametrize("a,b", [(-5.0, 0.0), (-11.0, -1.0), (-2.0, -3.0)])
def test_impulse_domain_errors(coulomb, a, b):
    with pytest.raises(DomainError):
        field_impulse(coulomb, a, b)


@given(models, st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3))
def test_impulse_additive_and_monotone(model, fracs):
    c, b, a = sorted(-f * model.r0 for f in fracs)
    a, b, c = c, b, a  # a <= b <= c < 0
    whole = field_impulse(model, a, c)
    parts = field_impulse(model, a, b) + field_impulse(model, b, c)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-300)
    assert field_impulse(model, a, b) <= whole + 1e-15 * max(whole, 1.0)


@given(st.floats(0.1, 5.0), st.floats(0.5, 50.0), st.floats(0.01, 0.99))
def test_impulse_coulomb_closed_form(Q2, r0, frac):
    r2 = frac * r0
    fm = FieldModel.cutoff_coulomb(Q2, r0)
    assert field_impulse(fm, -r0, -r2) == pytest.approx(Q2 * (1 / r2 - 1 / r0), rel=1e-12)


@given(st.floats(0.1, 5.0), st.floats(0.5, 50.0))
@settings(max_examples=25)
def test_hypotheses_hold_for_any_cutoff_coulomb(Q2, r0):
    assert validate_theorem1_hypotheses(FieldModel.cutoff_coulomb(Q2, r0))


def test_hypotheses_fail_for_zero_profile():
    check = validate_theorem1_hypotheses(FieldModel.tabulated([(1.0, 0.0), (3.0, 0.0)]))
    assert not check
    assert "impulse" in check.diagnostic


def test_hypotheses_fail_when_field_vanishes_near_edge():
    r0 = 4.0
    fm = FieldModel.tabulated([(0.5, 1.0), (r0 / 2 - 1e-9, 1.0), (r0 / 2, 0.0), (r0, 0.0)], r0=r0)
    # direct quadrature: nothing in (r0/2, r0)
    assert trapezoid_impulse(fm, -r0, -r0 / 2 - 1e-3, n=1000) == 0.0
    check = validate_theorem1_hypotheses(fm)
    assert not check
    assert "eps" in check.diagnostic


def test_hypotheses_fail_for_inward_profile():
    check = validate_theorem1_hypotheses(FieldModel.tabulated([(1.0, -0.5), (2.0, -0.5)]))
    assert not check
    assert "inward" in check.diagnostic


def test_hypotheses_hold_for_triangle():
    assert validate_theorem1_hypotheses(triangle(4.0))


def test_profile_file_roundtrip(tmp_path):
    path = tmp_path / "profile.txt"
    path.write_text("# r magnitude\n1.0 0.5\n\n2.0   0.25\n# trailing comment\n4.0\t0.0\n")
    assert load_profile(path) == [(1.0, 0.5), (2.0, 0.25), (4.0, 0.0)]
    fm = FieldModel.from_file(path)
    assert fm.r0 == 4.0
    assert scalar_field_raw(fm, -1.5) == pytest.approx(-0.375)


@pytest.mark.parametrize("text", ["1.0 0.5 3\n", "# only comments\n", "2.0 1.0\n1.0 1.0\n"])
def test_bad_profile_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValueError):
        FieldModel.from_file(path)


def test_field_model_is_immutable(coulomb):
    with pytest.raises(AttributeError):
        coulomb.r0 = 3.0
    assert math.isclose(coulomb.r0, 10.0)
