"""Stand-alone and breakthrough payoffs, their stopping solutions, and the split
of the breakthrough surplus between the decision maker and the developer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .diffusion import DiffusionModel, apply_generator


@dataclass(frozen=True)
class LinearPayoff:
    """``x -> slope * x - cost``."""

    slope: float
    cost: float

    def __call__(self, x):
        return self.slope * x - self.cost

    def d1(self, x):
        return self.slope + 0.0 * x

    def d2(self, x):
        return 0.0 * x


def _piecewise(x, threshold, above, below):
    # ``above`` applies on [threshold, inf), so kinks take the right derivative
    if np.ndim(x) == 0:
        return above(x) if x >= threshold else below(x)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    hi = x >= threshold
    out[hi] = above(x[hi])
    out[~hi] = below(x[~hi])
    return out


def _probe_grid(model: DiffusionModel, n: int = 4001) -> np.ndarray:
    lo, hi = model.state_interval
    lo = max(lo, 0.0)
    a = lo + 1e-9 if lo > 0 else 1e-9
    b = min(hi, 1e9) if math.isfinite(hi) else 1e9
    if lo > 0 and math.isfinite(hi):
        return np.linspace(lo, hi, n + 2)[1:-1]
    return np.geomspace(a, b, n)


def sign_change_point(model: DiffusionModel, payoff) -> float:
    """Unique point where ``L payoff - r payoff`` turns from positive to negative.

    Raises ``ValueError`` if the sign pattern on a probe grid is not a single
    change from positive to negative.
    """
    xs = _probe_grid(model)
    vals = apply_generator(model, payoff, xs) - model.r * payoff(xs)
    pos = vals > 0
    changes = np.flatnonzero(np.diff(pos))
    if len(changes) != 1 or not pos[0] or vals[-1] >= 0:
        raise ValueError("payoff does not have a single +/- sign change of L u - r u")
    i = changes[0]
    if vals[i + 1] == 0:
        return float(xs[i + 1])

    def excess(x):
        return apply_generator(model, payoff, x) - model.r * payoff(x)

    return brentq(excess, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class StandaloneSolution:
    """Value of stopping once at a threshold, ``h1(x)/h1(t) payoff(t)`` below it."""

    model: DiffusionModel
    payoff: object
    threshold: float
    x0: float

    @property
    def payoff_at_threshold(self) -> float:
        return self.payoff(self.threshold)

    def __call__(self, x):
        t, h1, pt = self.threshold, self.model.h1, self.payoff_at_threshold
        return _piecewise(x, t, self.payoff, lambda y: h1.ratio(y, t) * pt)

    def d1(self, x):
        t, h1 = self.threshold, self.model.h1
        c = self.payoff_at_threshold / h1(t)
        return _piecewise(x, t, self.payoff.d1, lambda y: c * h1.d1(y))

    def d2(self, x):
        t, h1 = self.threshold, self.model.h1
        c = self.payoff_at_threshold / h1(t)
        return _piecewise(x, t, self.payoff.d2, lambda y: c * h1.d2(y))


def solve_standalone(model: DiffusionModel, payoff, xtol: float | None = None) -> StandaloneSolution:
    """Optimal threshold for stopping ``payoff`` alone, by smooth fit.

    The threshold is the root of ``payoff' h1 - payoff h1'`` above the sign
    change point ``x0``; it is bracketed by geometric expansion and refined by
    bisection to ``xtol`` (default ``1e-12 * x0``).
    """
    x0 = sign_change_point(model, payoff)
    h1 = model.h1
    beta = model.state_interval[1]

    def g(x):
        return payoff.d1(x) * h1(x) - payoff(x) * h1.d1(x)

    if not g(x0) > 0:
        raise ValueError("smooth-fit function is not positive at the sign change point")
    lo, hi = x0, 2.0 * x0
    for _ in range(200):
        if hi >= beta:
            hi = 0.5 * (lo + beta)
        if g(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ValueError("could not bracket the stand-alone threshold")
    tol = 1e-12 * x0 if xtol is None else xtol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return StandaloneSolution(model, payoff, 0.5 * (lo + hi), x0)


@dataclass(frozen=True)
class BargainingSplit:
    """Linear split of the surplus ``V_U - V_R``.

    The decision maker keeps ``G = V_R + dm_share (V_U - V_R)`` and the
    developer receives ``P = developer_share (V_U - V_R)``.
    """

    name: str
    dm_share: float
    developer_share: float


NASH = BargainingSplit("nash", 0.5, 0.5)
SHAPLEY = BargainingSplit("shapley", 2.0 / 3.0, 1.0 / 6.0)
SPLITS = {"nash": NASH, "shapley": SHAPLEY}


@dataclass(frozen=True)
class TechnologyPayoffs:
    """Stand-alone payoff ``R``, breakthrough payoff ``U`` and derived quantities."""

    model: DiffusionModel
    R: object
    U: object
    standalone_R: StandaloneSolution
    standalone_U: StandaloneSolution
    split: BargainingSplit = NASH
    investment_cost: float | None = None
    kappa: float | None = None

    @classmethod
    def linear(cls, model: DiffusionModel, investment_cost: float = 1.0, kappa: float = 2.0,
               bargaining: str = "nash") -> "TechnologyPayoffs":
        """``R(x) = x - I`` and ``U(x) = kappa x - I``."""
        if not investment_cost > 0:
            raise ValueError(f"investment cost I must be positive, got I={investment_cost}")
        if not kappa > 1:
            raise ValueError(f"technology multiplier must satisfy kappa > 1, got kappa={kappa}")
        if bargaining not in SPLITS:
            raise ValueError(f"bargaining must be one of {sorted(SPLITS)}, got {bargaining!r}")
        R = LinearPayoff(1.0, investment_cost)
        U = LinearPayoff(kappa, investment_cost)
        tol = 1e-12 * investment_cost
        out = cls(model, R, U, solve_standalone(model, R, tol), solve_standalone(model, U, tol),
                  SPLITS[bargaining], investment_cost, kappa)
        if not out.x_U < out.x_R:
            raise ValueError("breakthrough threshold must lie below the stand-alone threshold")
        return out

    @property
    def x_R(self) -> float:
        return self.standalone_R.threshold

    @property
    def x_U(self) -> float:
        return self.standalone_U.threshold

    @property
    def x0_R(self) -> float:
        return self.standalone_R.x0

    def V_R(self, x):
        return self.standalone_R(x)

    def V_U(self, x):
        return self.standalone_U(x)

    def G(self, x):
        w = self.split.dm_share
        return (1.0 - w) * self.standalone_R(x) + w * self.standalone_U(x)

    def G_d1(self, x):
        w = self.split.dm_share
        return (1.0 - w) * self.standalone_R.d1(x) + w * self.standalone_U.d1(x)

    def G_d2(self, x):
        w = self.split.dm_share
        return (1.0 - w) * self.standalone_R.d2(x) + w * self.standalone_U.d2(x)

    def P(self, x):
        return self.split.developer_share * (self.standalone_U(x) - self.standalone_R(x))

    def P_d1(self, x):
        return self.split.developer_share * (self.standalone_U.d1(x) - self.standalone_R.d1(x))

    def P_inverse(self, z):
        """State ``x`` with ``P(x) = z``; ``P`` is increasing onto ``(0, inf)``."""
        if np.ndim(z):
            return np.array([self.P_inverse(float(v)) for v in np.ravel(z)]).reshape(np.shape(z))
        if not z > 0:
            raise ValueError("P_inverse requires z > 0")
        lo = hi = self.x_R
        while self.P(hi) < z:
            lo, hi = hi, 2.0 * hi
        while self.P(lo) > z:
            lo, hi = 0.5 * lo, lo
        if lo == hi:
            return lo
        return brentq(lambda x: self.P(x) - z, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps)


def nash_split(payoffs: TechnologyPayoffs, x):
    """``(G, P)`` under the symmetric Nash bargaining split."""
    vu, vr = payoffs.V_U(x), payoffs.V_R(x)
    return 0.5 * (vu + vr), 0.5 * (vu - vr)


def shapley_split(payoffs: TechnologyPayoffs, x):
    """``(G, P)`` under the Shapley value split."""
    vu, vr = payoffs.V_U(x), payoffs.V_R(x)
    return (2.0 * vu + vr) / 3.0, (vu - vr) / 6.0


def drift_term_L(payoffs: TechnologyPayoffs, x):
    """``L R(x) - r R(x)``, negative above the sign change point of ``R``."""
    return apply_generator(payoffs.model, payoffs.R, x) - payoffs.model.r * payoffs.R(x)
