import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from fieldline import ConfigError, DomainError, GaugeAxis, NumericError, eval_B, make_builtin
from fieldline.fields import (SERIES_EPS, exp_shape, exp_shape_prime, profile_from_field,
                              profile_from_field_table, profile_from_name, profile_from_table)

# 1 - 1/e, frozen from mpmath at 30 digits
ONE_MINUS_INV_E = 0.63212055882855767840


def _series_shape(u, terms=30):
    """sum_{n>=0} (-u)^n / (n+1)!  -- independent oracle for (1 - e^-u)/u."""
    return sum((-u) ** n / math.factorial(n + 1) for n in range(terms))


def test_uniform_shape_is_one_everywhere():
    prof = make_builtin("uniform", 1.0)
    assert prof.f(3.7) == 1.0
    assert prof.f_prime(3.7) == 0.0


def test_exp_shape_limit_at_origin():
    prof = make_builtin("exp_decay", 0.3)
    assert prof.f(0.0) == 1.0
    assert prof.f(1e-300) == 1.0
    assert prof.f_prime(0.0) == -0.5


def test_exp_shape_at_one_matches_frozen_value():
    prof = make_builtin("exp_decay", 1.0)
    assert prof.f(1.0) == pytest.approx(ONE_MINUS_INV_E, rel=1e-15)
    assert _series_shape(1.0) == pytest.approx(ONE_MINUS_INV_E, rel=1e-15)


@given(st.floats(min_value=-3.0, max_value=3.0))
def test_exp_shape_agrees_with_series_oracle(u):
    assert exp_shape(u) == pytest.approx(_series_shape(u, 60), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("side", [1.0, -1.0])
def test_exp_shape_series_branch_meets_direct_branch(side):
    u = side * SERIES_EPS
    direct = -math.expm1(-u) / u
    below = exp_shape(np.nextafter(u, 0.0))
    assert below == pytest.approx(direct, rel=1e-12)
    assert exp_shape(u) == pytest.approx(direct, rel=1e-12)


def test_zero_field_gives_zero_b():
    assert eval_B(make_builtin("zero_field", 1.0), 2.0) == 0.0


@given(st.floats(min_value=-5.0, max_value=20.0), st.floats(min_value=0.01, max_value=5.0))
def test_exp_decay_field_is_exponential(y, b0):
    assert eval_B(make_builtin("exp_decay", b0), y) == pytest.approx(b0 * math.exp(-y), rel=1e-13)


@given(st.floats(min_value=-100, max_value=100), st.floats(min_value=-5, max_value=5))
def test_uniform_field_is_b0(u, b0):
    assert eval_B(make_builtin("uniform", b0), u) == pytest.approx(b0)


def test_zero_field_singularity_raises():
    prof = make_builtin("zero_field", 1.0)
    with pytest.raises(DomainError):
        eval_B(prof, 0.0)


def test_unknown_kind_is_config_error():
    with pytest.raises(ConfigError):
        make_builtin("helical", 1.0)
    with pytest.raises(ConfigError):
        make_builtin("rational_ab", 1.0)
    with pytest.raises(ConfigError):
        make_builtin("uniform", float("nan"))


BUILTINS = [
    ("uniform", {}, GaugeAxis.Y_GAUGE),
    ("zero_field", {}, GaugeAxis.Y_GAUGE),
    ("exp_decay", {}, GaugeAxis.Y_GAUGE),
    ("exp_decay", {}, GaugeAxis.X_GAUGE),
    ("radial_exp", {}, GaugeAxis.RADIAL),
    ("rational_ab", {"a": 1.0, "b": 2.0}, GaugeAxis.RADIAL),
    ("rational_ab", {"a": 0.5, "b": -1.5}, GaugeAxis.Y_GAUGE),
    ("constant", {"value": -1.0}, GaugeAxis.RADIAL),
]


@pytest.mark.parametrize("name,params,axis", BUILTINS)
def test_f_prime_matches_central_difference(name, params, axis, rng):
    prof = make_builtin(name, 1.3, axis, **params)
    u = rng.uniform(0.2, 6.0, 50) * rng.choice([-1, 1], 50)
    if axis is GaugeAxis.RADIAL:
        u = np.abs(u)
    h = 1e-6
    fd = (prof.f(u + h) - prof.f(u - h)) / (2 * h)
    np.testing.assert_allclose(prof.f_prime(u), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("name,params,axis", [b for b in BUILTINS if b[2] is not GaugeAxis.RADIAL])
def test_landau_field_is_derivative_of_u_f(name, params, axis, rng):
    prof = make_builtin(name, 0.7, axis, **params)
    u = rng.uniform(0.2, 6.0, 50) * rng.choice([-1, 1], 50)
    h = 1e-5
    fd = ((u + h) * prof.f(u + h) - (u - h) * prof.f(u - h)) / (2 * h)
    np.testing.assert_allclose(eval_B(prof, u) / prof.b0, fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("name,params", [("uniform", {}), ("radial_exp", {}),
                                         ("rational_ab", {"a": 1.0, "b": 2.0})])
def test_radial_field_is_curl_of_rotational_potential(name, params, rng):
    prof = make_builtin(name, 0.9, GaugeAxis.RADIAL, **params)
    h = 1e-5

    def ax(x, y):
        return -prof.b0 * y * prof.f(math.hypot(x, y))

    def ay(x, y):
        return prof.b0 * x * prof.f(math.hypot(x, y))

    for _ in range(20):
        r, th = rng.uniform(0.3, 5.0), rng.uniform(0, 2 * math.pi)
        x, y = r * math.cos(th), r * math.sin(th)
        curl = ((ay(x + h, y) - ay(x - h, y)) - (ax(x, y + h) - ax(x, y - h))) / (2 * h)
        assert eval_B(prof, r) == pytest.approx(curl, rel=1e-6, abs=1e-8)


def test_radial_uniform_shape_doubles_b0():
    assert eval_B(make_builtin("uniform", 1.5, "radial"), 2.0) == pytest.approx(3.0)


def test_inverting_exp_field_gives_exp_shape():
    prof = profile_from_field(lambda s: math.exp(-s), 0.0)
    u = np.linspace(-2, 8, 37)
    np.testing.assert_allclose(prof.f(u), exp_shape(u), rtol=1e-12)
    np.testing.assert_allclose(prof.f_prime(u), exp_shape_prime(u), rtol=1e-8, atol=1e-12)


def test_inverting_unit_field_gives_unit_shape():
    prof = profile_from_field(lambda s: 1.0, 0.0)
    np.testing.assert_allclose(prof.f(np.linspace(-3, 3, 13)), 1.0, rtol=1e-14)


def test_inverting_linear_field_gives_identity_shape():
    s = sp.symbols("y")
    assert sp.simplify(sp.diff(s * s, s) - 2 * s) == 0  # (y f)' = 2y for f = y
    prof = profile_from_field(lambda v: 2 * v, 0.0)
    u = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(prof.f(u), u, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(prof.f_prime(u), 1.0, rtol=1e-8)


def test_integration_constant_shifts_shape_not_field():
    base = profile_from_field(lambda s: math.exp(-s), 0.0)
    shifted = profile_from_field(lambda s: math.exp(-s), 2.5)
    u = np.linspace(0.5, 4, 8)
    np.testing.assert_allclose(shifted.f(u) - base.f(u), 2.5 / u, rtol=1e-12)
    np.testing.assert_allclose(eval_B(shifted, u), eval_B(base, u), rtol=1e-9)
    with pytest.raises(DomainError):
        shifted.f(0.0)


def test_non_integrable_field_is_numeric_error():
    prof = profile_from_field(lambda s: 1.0 / abs(s) ** 1.5 if s else math.inf, 0.0, lower=0.0)
    with pytest.raises((NumericError, DomainError)):
        prof.f(2.0)


@pytest.mark.parametrize("name,params,axis", [
    ("uniform", {}, GaugeAxis.Y_GAUGE),
    ("exp_decay", {}, GaugeAxis.Y_GAUGE),
    ("exp_decay", {}, GaugeAxis.X_GAUGE),
    ("radial_exp", {}, GaugeAxis.RADIAL),
    ("uniform", {}, GaugeAxis.RADIAL),
])
def test_round_trip_through_field(name, params, axis, rng):
    prof = make_builtin(name, 1.0, axis, **params)
    back = profile_from_field(lambda s: float(prof.field_shape(s)), 0.0, axis)
    u = rng.uniform(0.05, 6.0, 100)
    np.testing.assert_allclose(back.f(u), prof.f(u), rtol=1e-8)


def test_round_trip_with_constant_for_singular_shapes(rng):
    prof = make_builtin("zero_field", 1.0)
    back = profile_from_field(lambda s: float(prof.field_shape(s)), 1.0)
    u = rng.uniform(0.1, 6.0, 100)
    np.testing.assert_allclose(back.f(u), prof.f(u), rtol=1e-8)
    rat = make_builtin("rational_ab", 1.0, "y", a=1.0, b=2.0)
    # P(u) = u + ab/u - (1 + ab) from 1, so c = 1 + ab - (a + b)
    back = profile_from_field(lambda s: float(rat.field_shape(s)), 0.0, lower=1.0)
    np.testing.assert_allclose(back.f(u), rat.f(u), rtol=1e-8)


def test_shape_table_is_interpolated(tmp_path):
    u = np.linspace(0.0, 6.0, 241)
    path = tmp_path / "shape.csv"
    path.write_text("u,f\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(u, exp_shape(u))))
    prof = profile_from_table(path, b0=0.5)
    q = np.linspace(0.1, 5.9, 29)
    np.testing.assert_allclose(prof.f(q), exp_shape(q), rtol=1e-6)
    with pytest.raises(DomainError):
        prof.f(7.0)


def test_field_table_round_trip(tmp_path):
    u = np.linspace(0.0, 5.0, 401)
    path = tmp_path / "field.csv"
    path.write_text("u,B\n" + "".join(f"{a:.17g},{0.3 * math.exp(-a):.17g}\n" for a in u))
    prof = profile_from_field_table(path, b0=0.3)
    q = np.linspace(0.05, 4.95, 50)
    np.testing.assert_allclose(prof.f(q), exp_shape(q), rtol=1e-6)
    np.testing.assert_allclose(eval_B(prof, q), 0.3 * np.exp(-q), rtol=1e-6)


@pytest.mark.parametrize("text", ["u,f\n0,1\n1,2\n", "u,g\n0,1\n1,1\n2,1\n", "u,f\n0,1\n0,1\n1,2\n",
                                  "u,f\n0,a\n1,1\n2,1\n"])
def test_bad_tables_are_config_errors(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ConfigError):
        profile_from_table(path)


def test_profile_from_name():
    assert profile_from_name("EXP_DECAY", 2.0).label == "exp_decay"
    assert profile_from_name("rational_ab", 1.0, a=1, b=2).axis is GaugeAxis.RADIAL
    with pytest.raises(ConfigError):
        profile_from_name("uniform", 1.0, c=2)
    with pytest.raises(ConfigError):
        profile_from_name("table", 1.0)


def test_radial_field_table_round_trip(tmp_path):
    prof = make_builtin("radial_exp", 0.3)
    u = np.linspace(0.0, 5.0, 401)
    path = tmp_path / "field.csv"
    path.write_text("u,B\n" + "".join(f"{a:.17g},{float(eval_B(prof, a)):.17g}\n" for a in u))
    back = profile_from_field_table(path, "radial", b0=0.3)
    q = np.linspace(0.05, 4.95, 50)
    np.testing.assert_allclose(back.f(q), prof.f(q), rtol=1e-6)
