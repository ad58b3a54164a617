"""Law of the breakthrough threshold.

A developer with random cost ``Z`` delivers the breakthrough technology as soon
as the surplus share ``P(X)`` covers the cost, so the threshold on the state is
``Y = P^{-1}(Z)``.  This module maps a cost law to the threshold law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from .payoffs import TechnologyPayoffs


@dataclass(frozen=True)
class CostLaw:
    """Distribution of the developer cost on ``(0, inf)``.

    Use the ``exponential``, ``lognormal`` or ``custom`` constructors.
    ``params`` records the family parameters for reports.
    """

    family: str
    pdf: Callable
    cdf: Callable
    sf: Callable
    params: dict = field(default_factory=dict)
    hazard_fn: Callable | None = None

    @classmethod
    def exponential(cls, rate: float) -> "CostLaw":
        if not rate > 0:
            raise ValueError(f"exponential rate must be positive, got {rate}")
        return cls(
            "exponential",
            pdf=lambda z: rate * np.exp(-rate * z),
            cdf=lambda z: -np.expm1(-rate * z),
            sf=lambda z: np.exp(-rate * z),
            params={"rate": rate},
            hazard_fn=lambda z: rate + 0.0 * z,
        )

    @classmethod
    def lognormal(cls, location: float, scale: float) -> "CostLaw":
        """``log Z ~ Normal(location, scale**2)``."""
        if not scale > 0:
            raise ValueError(f"lognormal scale must be positive, got {scale}")
        dist = stats.lognorm(s=scale, scale=math.exp(location))
        return cls("lognormal", dist.pdf, dist.cdf, dist.sf,
                   params={"location": location, "scale": scale})

    @classmethod
    def custom(cls, pdf: Callable, cdf: Callable, sf: Callable | None = None) -> "CostLaw":
        return cls("custom", pdf, cdf, sf if sf is not None else (lambda z: 1.0 - cdf(z)))

    def hazard(self, z):
        if self.hazard_fn is not None:
            return self.hazard_fn(z)
        return self.pdf(z) / self.sf(z)


@dataclass(frozen=True)
class ThresholdLaw:
    """Law of ``Y = P^{-1}(Z)`` on the state interval."""

    costs: CostLaw
    payoffs: TechnologyPayoffs

    def cdf(self, m):
        return self.costs.cdf(self.payoffs.P(m))

    def sf(self, m):
        return self.costs.sf(self.payoffs.P(m))

    def pdf(self, m):
        return self.payoffs.P_d1(m) * self.costs.pdf(self.payoffs.P(m))

    def hazard(self, m):
        return self.payoffs.P_d1(m) * self.costs.hazard(self.payoffs.P(m))

    def quantile_level(self, tail: float) -> float:
        """Smallest state ``m`` with ``1 - F(m) <= tail``."""
        hi = self.payoffs.x_R
        while self.sf(hi) > tail:
            hi *= 2.0
        lo = hi / 2.0
        if self.sf(lo) <= tail:
            return lo
        return brentq(lambda m: math.log(self.sf(m)) - math.log(tail), lo, hi, xtol=1e-12 * hi)


def threshold_law_from_costs(costs: CostLaw, payoffs: TechnologyPayoffs) -> ThresholdLaw:
    """Compose the cost law with ``P``; checks that ``P`` increases on a probe grid."""
    xs = np.geomspace(payoffs.x_R * 1e-6, payoffs.x_R * 1e6, 2001)
    if not np.all(np.diff(payoffs.P(xs)) > 0):
        raise ValueError("developer share P must be strictly increasing")
    return ThresholdLaw(costs, payoffs)


def hazard_order_dominates(a: CostLaw, b: CostLaw, grid) -> bool:
    """True iff the hazard of ``a`` strictly exceeds that of ``b`` on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    return bool(np.all(a.hazard(grid) > b.hazard(grid)))


def has_monotone_hazard(costs: CostLaw, grid) -> bool:
    """Nondecreasing cost hazard on ``grid``, up to rounding."""
    h = costs.hazard(np.asarray(grid, dtype=float))
    return bool(np.all(np.diff(h) >= -1e-12 * np.abs(h[1:])))
