import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from breakthrough_timing import CostLaw, Problem, hazard_order_dominates, threshold_law_from_costs
from breakthrough_timing.law import has_monotone_hazard


@pytest.fixture(scope="module")
def law():
    return Problem.gbm_linear().law


def test_exponential_above_stand_alone_threshold(law):
    ms = np.linspace(law.payoffs.x_R, 30, 40)
    p = 0.5 * ms
    np.testing.assert_allclose(law.cdf(ms), 1 - np.exp(-p), rtol=1e-12)
    np.testing.assert_allclose(law.pdf(ms), 0.5 * np.exp(-p), rtol=1e-12)
    np.testing.assert_allclose(law.hazard(ms), 0.5, rtol=1e-12)


def test_composition_everywhere(law):
    ms = np.geomspace(1e-3, 40, 200)
    np.testing.assert_allclose(law.cdf(ms), 1 - np.exp(-law.payoffs.P(ms)), atol=1e-12)
    np.testing.assert_allclose(law.hazard(ms), law.payoffs.P_d1(ms), rtol=1e-12)


def test_limits_and_positivity(law):
    assert law.cdf(1e-9) < 1e-9
    ms = np.geomspace(1e-3, 100, 500)
    assert np.all(law.pdf(ms) > 0)
    assert np.all(np.diff(law.cdf(ms)) >= 0)
    np.testing.assert_allclose(law.hazard(ms), law.pdf(ms) / law.sf(ms), rtol=1e-10)


def test_density_integrates_to_one(law):
    top = law.quantile_level(1e-9)
    pieces = [1e-12, law.payoffs.x_U, law.payoffs.x_R, top]
    total = sum(quad(law.pdf, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0] for a, b in zip(pieces, pieces[1:]))
    assert abs(total - 1) < 1e-6
    assert law.sf(top) == pytest.approx(1e-9, rel=1e-6)


def test_lognormal_costs():
    pr = Problem.gbm_linear(costs=CostLaw.lognormal(0.0, 1.0))
    ms = np.array([0.5, 2.0, 6.0])
    z = pr.payoffs.P(ms)
    from scipy.stats import norm
    np.testing.assert_allclose(pr.law.cdf(ms), norm.cdf(np.log(z)), rtol=1e-12)


def test_hazard_order():
    grid = np.geomspace(1e-3, 100, 100)
    a, b = CostLaw.exponential(2.0), CostLaw.exponential(1.0)
    assert hazard_order_dominates(a, b, grid)
    assert not hazard_order_dominates(b, a, grid)
    assert not hazard_order_dominates(a, a, grid)
    assert has_monotone_hazard(a, grid)
    assert not has_monotone_hazard(CostLaw.lognormal(0.0, 1.0), grid)


def test_invalid_cost_parameters():
    with pytest.raises(ValueError):
        CostLaw.exponential(0.0)
    with pytest.raises(ValueError):
        CostLaw.lognormal(0.0, -1.0)


def test_custom_law_matches_exponential():
    c = CostLaw.custom(lambda z: 3 * np.exp(-3 * z), lambda z: 1 - np.exp(-3 * z))
    ref = CostLaw.exponential(3.0)
    zs = np.array([0.1, 1.0, 4.0])
    np.testing.assert_allclose(c.hazard(zs), ref.hazard(zs), rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(1e-3, 60.0))
def test_exponential_hazard_scales_with_share_slope(rate, m):
    pr = Problem.gbm_linear()
    law = threshold_law_from_costs(CostLaw.exponential(rate), pr.payoffs)
    assert law.hazard(m) == pytest.approx(rate * pr.payoffs.P_d1(m), rel=1e-12)
    assert 0 <= law.cdf(m) <= 1
    assert law.cdf(m) == pytest.approx(-math.expm1(-rate * pr.payoffs.P(m)), abs=1e-12)
