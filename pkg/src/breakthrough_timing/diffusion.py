"""Diffusion primitives.

A ``DiffusionModel`` bundles the generator coefficients of a one-dimensional
diffusion with its two fundamental solutions (the increasing ``h1`` and the
decreasing ``h2`` positive solutions of ``Lu - r u = 0``) and the derivative of
its scale function. Geometric Brownian motion has closed forms and is built by
:func:`gbm_model`; any other diffusion must be supplied with analytic
evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DomainError(ValueError):
    """Raised when a state lies outside the domain of an operation."""


@dataclass(frozen=True)
class PowerFunction:
    """``x -> coef * x**power`` with analytic derivatives.

    Evaluation uses ``exp(power * log(x))`` so that large states and negative
    powers do not overflow before the product is formed.
    """

    power: float
    coef: float = 1.0

    def __call__(self, x):
        if np.ndim(x):
            return self.coef * np.exp(self.power * np.log(x))
        return self.coef * math.exp(self.power * math.log(x))

    def d1(self, x):
        return self.power * self(x) / x

    def d2(self, x):
        return self.power * (self.power - 1.0) * self(x) / (x * x)

    def ratio(self, x, y):
        """``f(x) / f(y)`` computed as one exponential."""
        if np.ndim(x) or np.ndim(y):
            return np.exp(self.power * (np.log(x) - np.log(y)))
        return math.exp(self.power * (math.log(x) - math.log(y)))


@dataclass(frozen=True)
class SmoothFunction:
    """User-supplied function with its first and second derivatives."""

    f: Callable
    df: Callable
    d2f: Callable

    def __call__(self, x):
        return self.f(x)

    def d1(self, x):
        return self.df(x)

    def d2(self, x):
        return self.d2f(x)

    def ratio(self, x, y):
        return self.f(x) / self.f(y)


@dataclass(frozen=True)
class GbmParams:
    """Geometric Brownian motion ``dX = mu X dt + sigma X dW`` discounted at ``r``."""

    mu: float
    sigma: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"discount rate r must be positive, got r={self.r}")
        if not self.sigma > 0:
            raise ValueError(f"volatility sigma must be positive, got sigma={self.sigma}")
        if not self.mu < self.r:
            raise ValueError(
                f"drift must satisfy mu < r, got mu={self.mu}, r={self.r}")

    @property
    def nu(self) -> float:
        return self.mu / self.sigma**2 - 0.5

    def roots(self) -> tuple[float, float]:
        """Roots of ``0.5 sigma^2 b (b - 1) + mu b - r = 0``, larger first."""
        nu = self.nu
        q = 2.0 * self.r / self.sigma**2
        disc = math.sqrt(nu * nu + q)
        # the root with the same sign as -nu is cancellation free; Vieta gives the other
        if nu > 0:
            b2 = -nu - disc
            return -q / b2, b2
        b1 = -nu + disc
        return b1, -q / b1


@dataclass(frozen=True)
class DiffusionModel:
    """Diffusion data needed by the stopping problem.

    Attributes
    ----------
    state_interval : (float, float)
        Open interval ``(alpha, beta)``; ``beta`` may be ``inf``.
    h1, h2 : evaluators
        Increasing and decreasing fundamental solutions, each callable with
        ``d1`` and ``d2`` methods.
    gamma : float
        Constant ratio ``(h1' h2 - h1 h2') / S'``.
    scale_deriv : evaluator
        Derivative ``S'`` of the scale function, callable with ``d1``.
    drift, volatility : callables
        ``mu(x)`` and ``sigma(x)`` of the generator.
    r : float
        Discount rate.
    gbm : GbmParams or None
        Set when the model is a geometric Brownian motion; the Monte Carlo
        engine needs it for exact increments.
    """

    state_interval: tuple
    h1: object
    h2: object
    gamma: float
    scale_deriv: object
    drift: Callable
    volatility: Callable
    r: float
    gbm: GbmParams | None = field(default=None)

    def contains(self, x) -> bool:
        lo, hi = self.state_interval
        return bool(np.all((np.asarray(x) > lo) & (np.asarray(x) < hi)))

    def check_state(self, *xs):
        for x in xs:
            if not self.contains(x):
                raise DomainError(f"state {x!r} outside {self.state_interval}")

    def variance(self, x):
        s = self.volatility(x)
        return s * s

    def wronskian_ratio(self, x):
        """``(h1' h2 - h1 h2') / S'`` at ``x``; constant for a valid model."""
        num = self.h1.d1(x) * self.h2(x) - self.h1(x) * self.h2.d1(x)
        return num / self.scale_deriv(x)


def gbm_model(params: GbmParams) -> DiffusionModel:
    """Closed-form model for geometric Brownian motion on ``(0, inf)``."""
    b1, b2 = params.roots()
    mu, sigma = params.mu, params.sigma
    return DiffusionModel(
        state_interval=(0.0, math.inf),
        h1=PowerFunction(b1),
        h2=PowerFunction(b2),
        gamma=b1 - b2,
        scale_deriv=PowerFunction(-2.0 * params.nu - 1.0),
        drift=lambda x: mu * x,
        volatility=lambda x: sigma * x,
        r=params.r,
        gbm=params,
    )


def hitting_laplace(model: DiffusionModel, x, y) -> float:
    """``E_x[exp(-r tau_y)]`` for the first passage time of ``X`` to ``y``."""
    model.check_state(x, y)
    if x <= y:
        return model.h1.ratio(x, y)
    return model.h2.ratio(x, y)


def apply_generator(model: DiffusionModel, u, x):
    """``mu(x) u'(x) + 0.5 sigma(x)^2 u''(x)`` for an evaluator ``u``."""
    return model.drift(x) * u.d1(x) + 0.5 * model.variance(x) * u.d2(x)
