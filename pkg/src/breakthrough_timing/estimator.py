"""scikit-learn style wrapper: ``fit`` solves the boundary, ``predict`` evaluates ``W``."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .boundary import SolverSettings, find_endpoint
from .law import CostLaw
from .problem import Problem
from .value import ValueSurface


def _cost_law(family: str, rate: float, location: float, scale: float) -> CostLaw:
    if family == "exponential":
        return CostLaw.exponential(rate)
    if family == "lognormal":
        return CostLaw.lognormal(location, scale)
    raise ValueError(f"cost_family must be 'exponential' or 'lognormal', got {family!r}")


class StoppingValueEstimator(BaseEstimator):
    """Value of the investment-timing problem for GBM with linear payoffs.

    Parameters mirror the config file.  Nothing is learned from data: ``fit``
    ignores ``X`` and solves for the free boundary.  Rows of ``X`` passed to
    ``predict`` and ``transform`` are states ``(x, m)`` with ``x <= m``.

    Attributes set by ``fit``: ``problem_``, ``boundary_``, ``surface_``,
    ``m_low_``.
    """

    def __init__(self, mu=0.0, sigma=0.1**0.5, r=0.05, investment_cost=1.0, kappa=2.0,
                 bargaining="nash", cost_family="exponential", cost_rate=1.0,
                 cost_location=0.0, cost_scale=1.0, rtol=1e-10, atol=1e-12,
                 diag_eps=1e-9, tol=None, horizon=None):
        self.mu = mu
        self.sigma = sigma
        self.r = r
        self.investment_cost = investment_cost
        self.kappa = kappa
        self.bargaining = bargaining
        self.cost_family = cost_family
        self.cost_rate = cost_rate
        self.cost_location = cost_location
        self.cost_scale = cost_scale
        self.rtol = rtol
        self.atol = atol
        self.diag_eps = diag_eps
        self.tol = tol
        self.horizon = horizon

    def _problem(self) -> Problem:
        costs = _cost_law(self.cost_family, self.cost_rate, self.cost_location, self.cost_scale)
        return Problem.gbm_linear(self.mu, self.sigma, self.r, self.investment_cost, self.kappa,
                                  costs, self.bargaining)

    def fit(self, X=None, y=None):
        self.problem_ = self._problem()
        settings = SolverSettings(rtol=self.rtol, atol=self.atol, diag_eps=self.diag_eps,
                                  tol=self.tol, horizon=self.horizon)
        self.boundary_ = find_endpoint(self.problem_, settings)
        self.surface_ = ValueSurface(self.problem_, self.boundary_)
        self.m_low_ = self.boundary_.m_low
        return self

    def _states(self, X):
        check_is_fitted(self, "surface_")
        X = check_array(X, dtype=float, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (x, m), got {X.shape[1]}")
        if np.any(X[:, 0] <= 0) or np.any(X[:, 0] > X[:, 1]):
            raise ValueError("each row must satisfy 0 < x <= m")
        return X[:, 0], X[:, 1]

    def predict(self, X) -> np.ndarray:
        x, m = self._states(X)
        return np.asarray(self.surface_.value(x, m), dtype=float)

    def transform(self, X) -> np.ndarray:
        """Columns ``W, dW/dx, dW/dm, region``."""
        x, m = self._states(X)
        s = self.surface_
        return np.column_stack([s.value(x, m), s.partial_x(x, m), s.partial_m(x, m), s.region(x, m)])

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)

    def boundary(self, m) -> np.ndarray:
        check_is_fitted(self, "boundary_")
        return self.boundary_(np.asarray(m, dtype=float))
