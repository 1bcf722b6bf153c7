"""Transforms: closed forms, endpoint limits, combinators, means and the audit."""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fconcavity.transforms import (DomainError, Interval, admissibility_audit, affine, combine, conj_exp,
                                   conj_log, custom, f_mean, make_log_power, make_power, make_power_star,
                                   make_scaled_half_log, parse_transform, power_mean, reflect, rescale,
                                   restrict)


# -- examples --------------------------------------------------------------

@pytest.mark.parametrize("p,tau,expected", [(0, 1.0, 0.0), (2, 3.0, 4.0), (1, 0.0, -1.0), (-1, 2.0, 0.5)])
def test_power_values(p, tau, expected):
    assert make_power(p)(tau).value == pytest.approx(expected, abs=1e-15)


def test_power_limits_at_zero():
    assert make_power(-1)(0.0).is_neg_inf
    assert make_power(0)(0.0).is_neg_inf
    assert make_power(0.5)(0.0).value == -2.0


def test_power_star():
    F = make_power_star(2)
    assert F(0.0).is_neg_inf
    assert F(3.0).value == pytest.approx(4.0, rel=1e-15)
    assert make_power_star(-1)(2.0).value == pytest.approx(0.5)


def test_log_power_values():
    assert make_log_power(0.5)(math.exp(-4)).value == pytest.approx(-2.0, abs=1e-14)
    assert make_log_power(1.0)(math.exp(-1)).value == pytest.approx(0.0, abs=1e-15)
    assert make_log_power(-1.0)(0.0).value == -1.0
    assert make_log_power(0.0)(0.0).is_neg_inf
    assert make_log_power(0.5)(0.0).is_neg_inf
    assert make_log_power(2.0)(1.0).value == 0.5


def test_log_power_interval_closure():
    assert make_log_power(0.5).interval.hi_closed
    assert not make_log_power(-1.0).interval.hi_closed
    with pytest.raises(DomainError):
        make_log_power(-1.0)(1.0)


def test_scaled_half_log():
    assert make_scaled_half_log(1.0)(math.exp(-4)).value == pytest.approx(-2.0, abs=1e-14)
    N = make_scaled_half_log(math.e, normalized=True)
    assert N(1.0).value == pytest.approx(0.0, abs=1e-15)
    assert float(N.derivative(np.array([1.0]))[0]) == pytest.approx(1.0, abs=1e-12)
    # central difference as an independent check of the derivative
    h = 1e-6
    fd = (N(1 + h).value - N(1 - h).value) / (2 * h)
    assert fd == pytest.approx(1.0, abs=1e-8)


def test_normalized_needs_k_above_one():
    with pytest.raises(ValueError):
        make_scaled_half_log(1.0, normalized=True)


def test_out_of_interval_rejected():
    with pytest.raises(DomainError):
        make_power(1)(-0.5)


# -- combinators -----------------------------------------------------------

def test_affine_of_log_is_L1():
    F = combine(make_power(0), "affine", A=1.0, B=1.0)
    t = math.exp(-1)
    assert F(t).value == pytest.approx(0.0, abs=1e-15)
    assert F(t).value == pytest.approx(make_log_power(1.0)(t).value, abs=1e-15)


def test_affine_requires_positive_A():
    with pytest.raises(ValueError):
        affine(make_power(0), 0.0, 1.0)


def test_reflect():
    R = reflect(make_power(1))
    assert R(-2.0).value == pytest.approx(-1.0)
    assert R.interval.hi == 0.0


def test_rescale():
    R = rescale(make_power(0), 2.0)
    assert R(3.0).value == pytest.approx(math.log(6.0))
    with pytest.raises(ValueError):
        rescale(make_power(0), -1.0)


def test_restrict():
    J = Interval(0.5, 2.0, True, True)
    R = restrict(make_power(0), J)
    assert R(1.0).value == 0.0
    with pytest.raises(DomainError):
        R(0.25)
    with pytest.raises(ValueError):
        restrict(make_power(0), Interval(-1.0, 1.0, True, True))


def test_conj_exp_of_log_is_identity():
    G = conj_exp(make_power(0))
    ts = np.linspace(-20, 20, 41)
    np.testing.assert_allclose(G.evaluate(ts).finite, ts, atol=1e-12)


def test_conj_log_undoes_conj_exp():
    F = make_power(0.5)
    G = conj_log(conj_exp(F))
    assert G.interval.lo == 0.0 and G.interval.hi == math.inf
    ts = np.linspace(0.1, 10, 25)
    np.testing.assert_allclose(G.evaluate(ts).finite, F.evaluate(ts).finite, rtol=1e-13)


def test_conj_exp_rejects_negative_interval():
    with pytest.raises(ValueError):
        conj_exp(reflect(make_power(1)))


def test_bisection_inverse_for_custom():
    F = custom(lambda t: t ** 3 + t, Interval(-2.0, 2.0, True, True), name="cubic")
    assert F.inverse(2.0) == pytest.approx(1.0, abs=1e-12)


# -- means -----------------------------------------------------------------

def test_mean_examples():
    assert f_mean(make_power(1), 2, 4, 0.5) == pytest.approx(3.0)
    assert f_mean(make_power(0), 1, 4, 0.5) == pytest.approx(2.0)
    assert f_mean(make_power(-1), 1, 3, 0.5) == pytest.approx(1.5)
    assert f_mean(make_log_power(0.5), math.exp(-1), math.exp(-9), 0.5) == pytest.approx(math.exp(-4), rel=1e-12)


def test_mean_with_minus_infinity_is_lo():
    assert f_mean(make_power(0), 0.0, 4.0, 0.5) == 0.0
    assert f_mean(make_power(0), 0.0, 4.0, 1.0) == 4.0


def test_power_mean_examples():
    assert power_mean(1, 2, 4, 0.5) == pytest.approx(3.0)
    with mpmath.workdps(50):
        oracle = float((mpmath.mpf("0.5") + mpmath.mpf("0.5") * mpmath.mpf(4) ** -50) ** (mpmath.mpf(-1) / 50))
    got = power_mean(-50, 1, 4, 0.5)
    assert got == pytest.approx(oracle, rel=1e-13)
    assert abs(got - 1.0140) <= 1e-4


def test_power_mean_decreases_to_min():
    vals = [power_mean(p, 1, 4, 0.5) for p in (-5, -50, -500, -5000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1.0 and vals[-1] - 1.0 < 2e-4


# -- audit -----------------------------------------------------------------

def test_audit_passes_for_standard_transforms():
    assert admissibility_audit(make_power(2), 10_000).passed
    assert admissibility_audit(make_log_power(-1), 10_000).passed


def test_audit_catches_decreasing_map():
    bad = custom(lambda t: -t, Interval(0.0, 1.0, True, True), name="neg")
    rep = admissibility_audit(bad, 100)
    assert not rep.passed and rep.monotonicity_failures
    a, b = rep.monotonicity_failures[0]
    assert a < b


# -- parser ----------------------------------------------------------------

def test_parse_nested_spec():
    F = parse_transform("affine:A=2,B=1(power:p=0)")
    assert F(math.e).value == pytest.approx(3.0)
    assert parse_transform("halflogk:k=2,normalized=true")(1.0).value == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("spec", ["power", "power:q=1", "affine:A=1,B=0", "nosuch:p=1", "power:p=x"])
def test_parse_errors(spec):
    with pytest.raises(ValueError):
        parse_transform(spec)


# -- properties ------------------------------------------------------------

ps = st.sampled_from([-3.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
alphas = st.sampled_from([-1.0, 0.25, 0.5, 1.0, 2.0])
pos = st.floats(min_value=1e-3, max_value=1e3)
unit = st.floats(min_value=1e-6, max_value=1 - 1e-6)
mus = st.floats(min_value=0.0, max_value=1.0)


@given(ps, pos, pos)
def test_scalar_slack_identity(p, lam, tau):
    F = make_power(p)
    lhs = F(lam * tau).value
    rhs = lam ** p * F(tau).value + F(lam).value
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * max(1.0, abs(lam ** p * F(tau).value)))


@given(alphas, unit, st.floats(min_value=0.1, max_value=5.0))
def test_exponentiation_slack_identity(alpha, tau, r):
    L = make_log_power(alpha)
    assume(tau ** r > 0 and tau ** r < 1)
    lhs = L(tau ** r).value
    rhs = r ** alpha * L(tau).value + (1 - r ** alpha) / alpha
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@given(unit, st.floats(min_value=0.1, max_value=5.0))
def test_exponentiation_identity_alpha_zero(tau, r):
    L = make_log_power(0.0)
    assume(0 < tau ** r < 1)
    assert L(tau ** r).value == pytest.approx(L(tau).value - math.log(r), rel=1e-10, abs=1e-10)


@settings(max_examples=200)
@given(st.sampled_from(["power:p=0", "power:p=2", "power:p=-1", "logpower:alpha=0.5"]), unit, unit, mus)
def test_mean_between_arguments(spec, a, b, mu):
    F = parse_transform(spec)
    m = f_mean(F, a, b, mu)
    assert min(a, b) - 1e-15 <= m <= max(a, b) + 1e-15
    assert f_mean(F, a, a, mu) == pytest.approx(a, rel=1e-12)


@given(ps, pos, pos, st.floats(min_value=0.05, max_value=0.95))
def test_mean_monotone_in_first_argument(p, a, b, mu):
    F = make_power(p)
    assume(abs(a - b) > 1e-3 * max(a, b))
    lo, hi = sorted((a, b))
    assert f_mean(F, lo, b, mu) <= f_mean(F, hi, b, mu)


@given(alphas, st.floats(min_value=-5.0, max_value=5.0))
def test_log_power_profile_identity(alpha, x):
    # f_alpha(x) = L_alpha^{-1}(-|x|) has L_alpha(f_alpha(x)) = -|x|
    L = make_log_power(alpha)
    lo, hi = L.value_range()
    y = -abs(x)
    assume(lo < y and (hi.is_pos_inf or y < float(hi)))
    f = L.inverse(y)
    assume(0.0 < f < 1.0)
    assert L(f).value == pytest.approx(y, abs=1e-9)


@given(ps, st.floats(min_value=0.1, max_value=10.0))
def test_power_roundtrip(p, tau):
    F = make_power(p)
    assert F.inverse(F(tau).value) == pytest.approx(tau, rel=1e-12)


@given(alphas, unit)
def test_log_power_roundtrip(alpha, tau):
    L = make_log_power(alpha)
    assert L.inverse(L(tau).value) == pytest.approx(tau, rel=1e-10)


@given(ps, pos, pos)
def test_power_strictly_increasing(p, a, b):
    assume(a != b)
    F = make_power(p)
    lo, hi = sorted((a, b))
    assert F(lo) <= F(hi)
