import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from breakthrough_timing import (GbmParams, TechnologyPayoffs, apply_generator, drift_term_L, gbm_model,
                                 nash_split, shapley_split, solve_standalone)
from breakthrough_timing.payoffs import LinearPayoff, sign_change_point

PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def model():
    return gbm_model(GbmParams(0.0, math.sqrt(0.1), 0.05))


@pytest.fixture(scope="module")
def pay(model):
    return TechnologyPayoffs.linear(model, 1.0, 2.0)


def test_thresholds_match_closed_form(pay):
    assert pay.x_R == pytest.approx(PHI**2, abs=1e-10)
    assert pay.x_R == pytest.approx(2.6180340, abs=1e-7)
    assert pay.x_U == pytest.approx(pay.x_R / 2, abs=1e-10)
    assert pay.x0_R == pytest.approx(1.0, abs=1e-12)
    assert pay.x_U < pay.x_R and pay.x_R > pay.x0_R


def test_threshold_for_other_cost_and_drift():
    model = gbm_model(GbmParams(0.01, 0.2, 0.05))
    b1 = model.h1.power
    sol = solve_standalone(model, LinearPayoff(1.0, 3.0))
    assert sol.threshold == pytest.approx(b1 / (b1 - 1) * 3.0, rel=1e-11)
    assert sol.x0 == pytest.approx(0.05 * 3.0 / 0.04, rel=1e-12)


def test_smooth_fit_at_threshold(pay, model):
    t = pay.x_R
    lhs = pay.R.d1(t) * model.h1(t)
    rhs = pay.R(t) * model.h1.d1(t)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_nash_split_examples(pay):
    g, p = nash_split(pay, 3.0)
    assert p == pytest.approx(1.5, rel=1e-14)
    assert g == pytest.approx(3.5, rel=1e-14)
    assert pay.P(10.0) == pytest.approx(0.5 * (2 - 1) * 10.0)
    assert pay.P(1e-8) < 1e-10


def test_shapley_split_example(pay):
    g, p = shapley_split(pay, 3.0)
    assert g == pytest.approx(4.0, rel=1e-14)
    assert p == pytest.approx(0.5, rel=1e-14)


def test_split_ordering_on_random_states(pay):
    xs = np.random.default_rng(5).uniform(0.01, 20, 100)
    g, p = nash_split(pay, xs)
    gs, ps = shapley_split(pay, xs)
    assert np.all(gs > g) and np.all(g > pay.V_R(xs))
    assert np.all(p > ps) and np.all(ps > 0)


def test_drift_term(pay, model):
    xs = np.array([0.5, 2.0, 5.0])
    np.testing.assert_allclose(drift_term_L(pay, xs), (0.0 - 0.05) * xs + 0.05, rtol=1e-13)
    assert drift_term_L(pay, pay.x0_R) == pytest.approx(0.0, abs=1e-15)
    assert drift_term_L(pay, pay.x_R) < 0


def test_standalone_value_satisfies_its_equation(pay, model):
    xs = np.concatenate([np.geomspace(0.05, 0.99 * pay.x_R, 30), np.geomspace(1.01 * pay.x_R, 40, 30)])
    v = pay.V_R(xs)
    resid = apply_generator(model, pay.standalone_R, xs) - model.r * v
    below = xs < pay.x_R
    assert np.all(np.abs(resid[below]) < 1e-12 * np.maximum(1, v[below]))
    assert np.all(resid[~below] < 0)
    assert np.all(v > 0)


def test_invalid_payoffs(model):
    with pytest.raises(ValueError, match="kappa"):
        TechnologyPayoffs.linear(model, 1.0, 1.0)
    with pytest.raises(ValueError, match="I"):
        TechnologyPayoffs.linear(model, 0.0, 2.0)
    with pytest.raises(ValueError, match="bargaining"):
        TechnologyPayoffs.linear(model, 1.0, 2.0, "auction")


def test_sign_change_rejects_payoff_without_one(model):
    with pytest.raises(ValueError):
        sign_change_point(model, LinearPayoff(-1.0, 1.0))


def test_share_is_increasing_and_invertible(pay):
    xs = np.geomspace(1e-4, 1e4, 5001)
    assert np.all(np.diff(pay.P(xs)) > 0)
    zs = np.array([1e-6, 0.01, 0.3, 1.0, 50.0])
    np.testing.assert_allclose(pay.P(pay.P_inverse(zs)), zs, rtol=1e-12)


def test_share_derivative_takes_right_limit_at_kinks(pay):
    assert pay.P_d1(pay.x_R) == pytest.approx(0.5)
    h = 1e-7
    assert pay.P_d1(pay.x_U) == pytest.approx((pay.P(pay.x_U + h) - pay.P(pay.x_U)) / h, rel=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 6.0), st.floats(0.1, 5.0), st.floats(1e-3, 50.0))
def test_linear_family_invariants(kappa, cost, x):
    model = gbm_model(GbmParams(0.0, math.sqrt(0.1), 0.05))
    pay = TechnologyPayoffs.linear(model, cost, kappa)
    assert pay.x_U == pytest.approx(pay.x_R / kappa, rel=1e-10)
    assert pay.V_U(x) > pay.V_R(x) > 0
    assert pay.G(x) > pay.V_R(x)
