"""Heat flow: whole-space kernel, Crank-Nicolson solver, eigenpair and screens."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from fconcavity.domains import interval_domain, polygon_domain, unit_square
from fconcavity.fields import Field
from fconcavity.heatflow import (Ball, asymptotic_profile_error, dirichlet_laplacian, fd_evolve,
                                 first_eigenpair, gaussian_screen, kernel_convolve, lemma42_check,
                                 mode_growth, preservation_probe)
from fconcavity.transforms import make_log_power, make_power, make_power_star


# -- kernel ----------------------------------------------------------------

def test_ball_kernel_at_origin():
    assert kernel_convolve(Ball(1.0), 1.0, [0.0])[0] == pytest.approx(special.erf(0.5), abs=1e-15)
    assert kernel_convolve(Ball(1.0), 1.0, [0.0])[0] == pytest.approx(0.5205, abs=1e-4)


def test_ball_kernel_small_time_recovers_indicator():
    u = kernel_convolve(Ball(1.0), 1e-8, [0.0, 0.5, 1.5])
    np.testing.assert_allclose(u, [1.0, 1.0, 0.0], atol=1e-12)


@given(st.floats(0.0, 10.0), st.floats(1e-3, 100.0))
def test_ball_kernel_is_even(x, t):
    a, b = kernel_convolve(Ball(1.0), t, [x, -x])
    assert a == b


def test_generic_quadrature_matches_closed_form():
    x = np.array([0.0, 0.7, 2.5])
    got = kernel_convolve(lambda y: float(np.exp(-y * y)), 0.5, x)
    # e^{tΔ} of a Gaussian stays Gaussian: (1+4t)^{-1/2} exp(-x²/(1+4t))
    np.testing.assert_allclose(got, np.exp(-x * x / 3.0) / math.sqrt(3.0), atol=1e-10)


def test_2d_ball_against_dblquad():
    t = 0.3
    got = kernel_convolve(Ball(1.0), t, [[0.4, 0.2]], dimension=2)[0]
    ref, _ = integrate.dblquad(lambda y2, y1: math.exp(-((0.4 - y1) ** 2 + (0.2 - y2) ** 2) / (4 * t)),
                               -1, 1, lambda y1: -math.sqrt(1 - y1 * y1), lambda y1: math.sqrt(1 - y1 * y1),
                               epsabs=1e-13)
    assert got == pytest.approx(ref / (4 * math.pi * t), abs=1e-9)


def test_kernel_rejects_bad_time():
    with pytest.raises(ValueError):
        kernel_convolve(Ball(1.0), 0.0, [0.0])


def test_profile_asymptotics():
    e100 = asymptotic_profile_error(100.0, 2.0)
    e400 = asymptotic_profile_error(400.0, 2.0)
    assert e100 <= 0.01 and e400 < e100
    assert asymptotic_profile_error(100.0, 0.0) <= e100


def test_profile_error_is_order_one_over_t():
    # Taylor of the kernel average over [-1, 1]: the leading error at x = 0 is 1/(12 t)
    t = 200.0
    assert asymptotic_profile_error(t, 0.0) == pytest.approx(1 / (12 * t), rel=0.02)


def test_profile_asymptotics_2d():
    assert asymptotic_profile_error(400.0, 1.0, 2, n_points=41) < asymptotic_profile_error(50.0, 1.0, 2, n_points=41)


# -- solver ----------------------------------------------------------------

def test_laplacian_stencil_1d():
    A, idx = dirichlet_laplacian(interval_domain(0.0, 1.0, n=5))
    assert list(idx) == [1, 2, 3]
    np.testing.assert_allclose(A.toarray() * 0.25 ** 2, [[-2, 1, 0], [1, -2, 1], [0, 1, -2]])


def test_sine_mode_decays_exactly():
    d = interval_domain(0.0, 1.0, h=1 / 200)
    f = Field.from_function(d, lambda x: np.sin(np.pi * x))
    st_ = fd_evolve(d, f, [0.01], 1e-4)[0]
    err = np.max(np.abs(st_.field.values - math.exp(-math.pi ** 2 * 0.01) * np.sin(np.pi * d.x)))
    assert err <= 1e-3


def test_discrete_mode_growth_is_exact_for_grid_eigenvector():
    d = interval_domain(0.0, 1.0, n=51)
    h = d.h
    lam = 4 / h ** 2 * math.sin(math.pi * h / 2) ** 2
    f = Field.from_function(d, lambda x: np.sin(np.pi * x))
    s = fd_evolve(d, f, [0.01, 0.05], 1e-3)
    for state, t in zip(s, (0.01, 0.05)):
        log = [e for e in state.diagnostics["step_log"]]
        # keep only the steps taken up to this state's time
        n = state.diagnostics["steps"]
        kept, total = [], 0
        for kind, step, count in log:
            c = min(count, n - total)
            if c > 0:
                kept.append([kind, step, c])
            total += c
        g = mode_growth(lam, kept)
        np.testing.assert_allclose(state.field.values, g * np.sin(np.pi * d.x), atol=1e-13)


def indicator(d, lo=0.45, hi=0.55):
    return Field(d, ((d.x > lo) & (d.x < hi)).astype(float))


def test_mass_decreases_and_max_principle():
    d = interval_domain(0.0, 1.0, h=1 / 200)
    states = fd_evolve(d, indicator(d), [1e-3, 1e-2, 1e-1], 1e-5)
    masses = [s.diagnostics["mass"] for s in states]
    initial_mass = float(np.sum(indicator(d).values) * d.h)
    assert masses[2] < masses[1] < initial_mass
    assert masses[0] <= initial_mass + 1e-12
    for s in states:
        assert s.diagnostics["max_value"] <= 1.0
        assert s.diagnostics["min_value"] >= 0.0
        assert s.diagnostics["scheme"] == "crank-nicolson/rannacher"


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_comparison_principle(seed):
    rng = np.random.default_rng(seed)
    d = interval_domain(0.0, 1.0, n=101)
    a = rng.uniform(0, 1, d.shape)
    b = a + rng.uniform(0, 1, d.shape)
    sa = fd_evolve(d, Field(d, a), [0.01, 0.05], 5e-4)
    sb = fd_evolve(d, Field(d, b), [0.01, 0.05], 5e-4)
    for x, y in zip(sa, sb):
        assert np.all(x.field.values <= y.field.values + 1e-14)


def test_kernel_and_solver_agree_on_wide_interval():
    d = interval_domain(-8.0, 8.0, h=1 / 100)
    init = Field(d, (np.abs(d.x) < 1).astype(float))
    u = fd_evolve(d, init, [0.5], 1e-3)[0].field.values
    ref = kernel_convolve(Ball(1.0), 0.5, d.x)
    inner = np.abs(d.x) <= 6
    assert np.max(np.abs(u[inner] - ref[inner])) <= 5e-3


def test_2d_square_sine_mode():
    d = unit_square(1 / 40)
    f = Field.from_function(d, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    u = fd_evolve(d, f, [0.02], 1e-3)[0].field.values
    X, Y = np.meshgrid(*d.axes, indexing="ij")
    exact = math.exp(-2 * math.pi ** 2 * 0.02) * np.sin(np.pi * X) * np.sin(np.pi * Y)
    assert np.max(np.abs(u - exact)) < 2e-3


def test_triangle_evolution_stays_bounded():
    d = polygon_domain([(0, 0), (1, 0), (0, 1)], 1 / 40)
    f = Field.constant(d, 1.0)
    s = fd_evolve(d, f, [0.01], 1e-3)[0]
    assert 0 <= s.diagnostics["min_value"] and s.diagnostics["max_value"] <= 1


@pytest.mark.parametrize("targets,dt", [([0.02, 0.01], 1e-3), ([0.0], 1e-3), ([0.005], 1e-3), ([0.1], 0.0)])
def test_bad_targets_rejected(targets, dt):
    d = interval_domain(0.0, 1.0, n=11)
    with pytest.raises(ValueError):
        fd_evolve(d, Field.constant(d, 1.0), targets, dt)


# -- eigenpair -------------------------------------------------------------

def test_eigenpair_interval():
    e = first_eigenpair(interval_domain(0.0, 1.0, h=1e-3))
    assert e.eigenvalue == pytest.approx(math.pi ** 2, rel=5e-3)
    inner = e.eigenfunction.values[1:-1]
    assert np.all(inner > 0) and np.max(e.eigenfunction.values) == pytest.approx(1.0)
    assert e.residual <= 1e-6


def test_eigenpair_matches_discrete_formula():
    d = interval_domain(0.0, 1.0, n=101)
    e = first_eigenpair(d, tolerance=1e-10)
    assert e.eigenvalue == pytest.approx(4 / d.h ** 2 * math.sin(math.pi * d.h / 2) ** 2, rel=1e-10)


def test_eigenpair_square():
    e = first_eigenpair(unit_square(1 / 200))
    assert e.eigenvalue == pytest.approx(2 * math.pi ** 2, rel=5e-3)
    d = e.eigenfunction.domain
    assert np.all(e.eigenfunction.values[d.interior_mask] > 0)
    l2 = e.l2_eigenfunction.values[d.mask]
    assert np.sum(l2 * l2) * d.h ** 2 == pytest.approx(1.0, rel=1e-10)


# -- screens ---------------------------------------------------------------

def test_screen_examples():
    assert all(r.outcome == "certified" for r in gaussian_screen(make_power(0), [0.5, 1.0, 2.0]))
    assert gaussian_screen(make_log_power(0.5), [1.0])[0].outcome == "certified"
    r = gaussian_screen(make_power(1), [1.0], ds=0.5)[0]
    assert r.outcome == "violated"
    assert r.second_difference_at(1.0) == pytest.approx(math.exp(-0.25) - 2 * math.exp(-1) + math.exp(-2.25),
                                                        abs=1e-14)


def test_screen_range_exit():
    assert gaussian_screen(make_log_power(0.5), [2.0])[0].outcome == "range_exit"


def test_lemma42_examples():
    r0 = lemma42_check(make_power(0), [0.5, 1.0, 2.0])
    assert r0.agree and r0.h_verdict == "concave" and r0.minus_infinity_by_concavity
    vals = [r0.sampled_values[k] for k in sorted(r0.sampled_values, key=float, reverse=True)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    r1 = lemma42_check(make_power(1), [0.5, 1.0, 2.0])
    assert r1.agree and r1.h_verdict == "violated" and r1.screen_verdict == "violated"


def test_lemma42_half_log_has_convex_H():
    rep = lemma42_check(make_log_power(0.5), [0.5, 1.0], t_range=(-6.0, -0.01))
    assert rep.h_verdict == "violated"
    assert all(s.outcome == "certified" for s in rep.screens)


# -- preservation ----------------------------------------------------------

def test_preservation_of_log_concavity_for_indicator():
    d = interval_domain(0.0, 1.0, h=1 / 200)
    out = preservation_probe(make_power_star(0), d, indicator(d), [1e-3, 1e-2], 1e-5)
    assert all(rep.certified for _, rep, _ in out)


def test_preservation_requires_certified_initial():
    d = interval_domain(0.0, 2.0, n=41)
    f = Field.from_function(d, np.exp)
    with pytest.raises(ValueError):
        preservation_probe(make_power(1), d, f, [0.1], 1e-3)


def test_generic_quadrature_2d():
    got = kernel_convolve(lambda x, y: float(np.exp(-x * x - y * y)), 0.5, [[0.3, 0.1]], dimension=2)[0]
    assert got == pytest.approx(math.exp(-0.1 / 3.0) / 3.0, abs=1e-10)
