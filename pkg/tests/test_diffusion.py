import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from breakthrough_timing import GbmParams, apply_generator, gbm_model, hitting_laplace
from breakthrough_timing.diffusion import DomainError, PowerFunction

PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture
def golden():
    return gbm_model(GbmParams(0.0, math.sqrt(0.1), 0.05))


def test_golden_ratio_roots(golden):
    assert golden.h1.power == pytest.approx(PHI, abs=1e-12)
    assert golden.h2.power == pytest.approx(1 - PHI, abs=1e-12)
    assert golden.gamma == pytest.approx(math.sqrt(5), abs=1e-12)


def test_vieta_identities_for_drifted_model():
    b1, b2 = GbmParams(0.01, 0.2, 0.05).roots()
    assert b1 * b2 == pytest.approx(-2.5, rel=1e-12)
    assert b1 + b2 == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("mu,sigma,r,word", [(0.05, 0.2, 0.05, "mu < r"), (0.0, 0.0, 0.05, "sigma"),
                                             (0.0, 0.2, 0.0, "r")])
def test_invalid_parameters_name_the_constraint(mu, sigma, r, word):
    with pytest.raises(ValueError, match=word):
        GbmParams(mu, sigma, r)


def test_hitting_laplace_examples(golden):
    assert hitting_laplace(golden, 1.5, 1.5) == 1.0
    assert hitting_laplace(golden, 1.0, 2.0) == pytest.approx(2 ** -PHI, rel=1e-12)
    assert hitting_laplace(golden, 1.0, 2.0) == pytest.approx(0.32577911215, abs=1e-11)
    assert hitting_laplace(golden, 2.0, 1.0) == pytest.approx(2 ** (1 - PHI), rel=1e-12)
    with pytest.raises(DomainError):
        hitting_laplace(golden, -1.0, 2.0)


def test_generator_annihilates_fundamental_solutions(golden):
    xs = np.geomspace(1e-3, 1e3, 50)
    for h in (golden.h1, golden.h2):
        resid = apply_generator(golden, h, xs) - golden.r * h(xs)
        assert np.all(np.abs(resid) <= 1e-9 * golden.r * h(xs))


def test_generator_on_identity():
    model = gbm_model(GbmParams(0.02, 0.3, 0.05))
    ident = PowerFunction(1.0)
    xs = np.array([0.5, 1.0, 7.0])
    np.testing.assert_allclose(apply_generator(model, ident, xs) - model.r * xs, (0.02 - 0.05) * xs, rtol=1e-12)


def test_power_function_far_from_one(golden):
    assert golden.h2(1e-300) == pytest.approx(1e-300 ** (1 - PHI), rel=1e-12)
    assert golden.h1(1e100) == pytest.approx(math.exp(PHI * math.log(1e100)), rel=1e-12)


params = st.tuples(st.floats(-0.1, 0.04), st.floats(0.05, 0.8), st.floats(0.045, 0.2))


@settings(max_examples=60, deadline=None)
@given(params, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_model_invariants(p, x, y):
    mu, sigma, r = p
    model = gbm_model(GbmParams(mu, sigma, r))
    assert model.h1.power > 1 and model.h2.power < 0
    assert model.h1.d1(x) > 0 and model.h2.d1(x) < 0
    assert model.h1.d2(x) > 0 and model.h2.d2(x) > 0
    ratios = model.wronskian_ratio(np.array([x, y, 1.0]))
    np.testing.assert_allclose(ratios, model.gamma, rtol=1e-10)
    if x * (1 + 1e-3) < y:
        v = hitting_laplace(model, x, y)
        assert 0 < v < 1
        assert hitting_laplace(model, x * (1 + 1e-3), y) > v
        assert hitting_laplace(model, x, y * (1 + 1e-3)) < v
