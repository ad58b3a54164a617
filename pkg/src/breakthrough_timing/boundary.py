"""Free boundary of the stopping region.

Below the boundary ``x = b(m)`` the decision maker invests in the stand-alone
technology once the running maximum has passed ``m_low``.  ``b`` solves
``b'(m) = E(b(m), m)`` with ``b(m_low) = x_R``; the field ``E`` is positive
between the diagonal ``x = m`` and the null curve ``m = m_x`` and blows up at
the diagonal.  Trajectories started too early hit the diagonal, trajectories
started too late hit the null curve, and ``m_low`` is located by bisection
between the two classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .diffusion import DomainError, PowerFunction
from .integrate import dormand_prince
from .payoffs import drift_term_L
from .problem import Problem

HITS_DIAGONAL = "HitsDiagonal"
HITS_NULL_CURVE = "HitsNullCurve"
REACHES_HORIZON = "ReachesHorizon"


class BoundaryError(RuntimeError):
    """Solver failure; ``trace`` holds ``(m0, horizon, classification)`` tuples."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances of the boundary solver.

    ``tol`` defaults to ``1e-8 * x_R`` and ``horizon`` to the level where the
    threshold survival drops below ``tail``.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    diag_eps: float = 1e-9
    tol: float | None = None
    horizon: float | None = None
    tail: float = 1e-6
    max_iter: int = 200
    max_doublings: int = 8
    grid_step: float = 0.01

    def resolved_tol(self, x_R: float) -> float:
        return 1e-8 * x_R if self.tol is None else self.tol

    def halved(self, x_R: float) -> "SolverSettings":
        """All tolerances and the diagonal threshold halved."""
        return SolverSettings(self.rtol / 2, self.atol / 2, self.diag_eps / 2,
                              self.resolved_tol(x_R) / 2,
                              self.horizon, self.tail, self.max_iter, self.max_doublings,
                              self.grid_step)


class TransformCache:
    """Coordinates ``zeta = h1/h2`` and the transformed payoffs ``R/h2``, ``G/h2``.

    Methods with an ``_x`` suffix take the original state, the others take
    the transformed coordinate ``y = zeta(x)``.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        m = problem.model
        self._h1, self._h2, self._S = m.h1, m.h2, m.scale_deriv
        self._gamma = m.gamma
        self._R = problem.payoffs.R
        self._G = problem.payoffs
        self._power = isinstance(m.h1, PowerFunction) and isinstance(m.h2, PowerFunction)

    def zeta(self, x):
        return self._h1(x) / self._h2(x)

    def zeta_d1(self, x):
        h2 = self._h2(x)
        return (self._h1.d1(x) * h2 - self._h1(x) * self._h2.d1(x)) / (h2 * h2)

    def zeta_gap(self, x, m):
        """``zeta(m) - zeta(x)`` without cancellation for power functions."""
        if self._power:
            p = self._h1.power - self._h2.power
            c = self._h1.coef / self._h2.coef
            if np.ndim(x) or np.ndim(m):
                return c * np.exp(p * np.log(x)) * np.expm1(p * np.log(m / x))
            return c * math.exp(p * math.log(x)) * math.expm1(p * math.log(m / x))
        return self.zeta(m) - self.zeta(x)

    def zeta_inv(self, y):
        if np.ndim(y):
            return np.array([self.zeta_inv(float(v)) for v in np.ravel(y)]).reshape(np.shape(y))
        if self._power:
            p = self._h1.power - self._h2.power
            return (y * self._h2.coef / self._h1.coef) ** (1.0 / p)
        lo = hi = self.problem.x_R
        while self.zeta(hi) < y:
            lo, hi = hi, 2 * hi
        while self.zeta(lo) > y:
            lo, hi = lo / 2, lo
        if lo == hi:
            return lo
        return brentq(lambda x: self.zeta(x) - y, lo, hi, xtol=1e-15 * hi)

    def R_hat_x(self, x):
        return self._R(x) / self._h2(x)

    def R_hat_d1_x(self, x):
        R, h2 = self._R, self._h2
        return (R.d1(x) * h2(x) - R(x) * h2.d1(x)) / (self._gamma * self._S(x))

    def R_hat_d2_x(self, x):
        R, h2, S = self._R, self._h2, self._S
        q = R.d1(x) * h2(x) - R(x) * h2.d1(x)
        dq = R.d2(x) * h2(x) - R(x) * h2.d2(x)
        s = S(x)
        return (dq * s - q * S.d1(x)) / (self._gamma * s * s) / self.zeta_d1(x)

    def G_hat_x(self, x):
        return self._G.G(x) / self._h2(x)

    def G_hat_d1_x(self, x):
        G, h2 = self._G, self._h2
        return (G.G_d1(x) * h2(x) - G.G(x) * h2.d1(x)) / (h2(x) ** 2 * self.zeta_d1(x))

    def R_hat(self, y):
        return self.R_hat_x(self.zeta_inv(y))

    def R_hat_d1(self, y):
        return self.R_hat_d1_x(self.zeta_inv(y))

    def R_hat_d2(self, y):
        return self.R_hat_d2_x(self.zeta_inv(y))

    def G_hat(self, y):
        return self.G_hat_x(self.zeta_inv(y))

    def G_hat_d1(self, y):
        return self.G_hat_d1_x(self.zeta_inv(y))


class BoundaryField:
    """Vector field ``E(x, m)`` of the boundary ODE on ``x_R <= x < m``."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.transform = TransformCache(problem)
        self.x_R = problem.x_R
        self._fast = self._build_fast()

    def _build_fast(self):
        # For x, m >= x_R both stand-alone values sit on their payoff branch, so
        # G and the hazard only need the raw payoffs.
        pr = self.problem
        model, pay = pr.model, pr.payoffs
        h1, h2, S = model.h1, model.h2, model.scale_deriv
        R, U = pay.R, pay.U
        w, s = pay.split.dm_share, pay.split.developer_share
        hz = pr.law.costs.hazard
        gamma, r = model.gamma, model.r
        drift, vol = model.drift, model.volatility
        gap = self.transform.zeta_gap

        def E(x, m):
            if not m > x:
                raise DomainError(f"field needs m > x, got x={x}, m={m}")
            h2x, h2m = h2(x), h2(m)
            Rx, dRx = R(x), R.d1(x)
            Um, Rm = U(m), R(m)
            Gm = (1.0 - w) * Rm + w * Um
            Hm = s * (U.d1(m) - R.d1(m)) * hz(s * (Um - Rm))
            Sx = S(x)
            eta = (Gm / h2m - Rx / h2x) / gap(x, m) - (dRx * h2x - Rx * h2.d1(x)) / (gamma * Sx)
            sig = vol(x)
            var = sig * sig
            L = drift(x) * dRx + 0.5 * var * R.d2(x) - r * Rx
            return float(-Hm * var * gamma * Sx / (2.0 * L * h2x) * eta)

        return E

    def _check(self, x, m):
        if np.any(np.asarray(x) < self.x_R) or np.any(np.asarray(m) <= np.asarray(x)):
            raise DomainError(f"field domain is x_R <= x < m, got x={x}, m={m}")

    def __call__(self, x, m):
        """Transformed form of the field."""
        self._check(x, m)
        if np.ndim(x) == 0 and np.ndim(m) == 0:
            return self._fast(float(x), float(m))
        x, m = np.broadcast_arrays(np.asarray(x, float), np.asarray(m, float))
        return np.array([self._fast(a, b) for a, b in zip(x.ravel(), m.ravel())]).reshape(x.shape)

    def raw(self, x, m):
        """Field written with ``h1, h2`` directly instead of transformed payoffs."""
        self._check(x, m)
        pr = self.problem
        model, pay = pr.model, pr.payoffs
        h1, h2 = model.h1, model.h2
        R = pay.R
        D = h1(m) * h2(x) - h1(x) * h2(m)
        brace = (model.gamma * model.scale_deriv(x) / D * (R(x) * h2(m) - pay.G(m) * h2(x))
                 + R.d1(x) * h2(x) - R(x) * h2.d1(x))
        return pr.law.hazard(m) * model.variance(x) / (2.0 * drift_term_L(pay, x) * h2(x)) * brace

    def eta_xm(self, x, m):
        """``eta(zeta(m), zeta(x))`` evaluated in original coordinates."""
        t = self.transform
        return (t.G_hat_x(m) - t.R_hat_x(x)) / t.zeta_gap(x, m) - t.R_hat_d1_x(x)

    def eta(self, z, y):
        """``(G_hat(z) - R_hat(y)) / (z - y) - R_hat'(y)`` for ``z > y``."""
        if not np.all(np.asarray(z) > np.asarray(y)):
            raise DomainError("eta needs z > y")
        t = self.transform
        return (t.G_hat(z) - t.R_hat(y)) / (z - y) - t.R_hat_d1(y)

    def null_curve(self, x) -> float:
        """Level ``m_x > x`` at which the field vanishes."""
        if np.ndim(x):
            return np.array([self.null_curve(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
        if x < self.x_R:
            raise DomainError(f"null curve defined for x >= x_R, got {x}")
        lo, hi = x, 2.0 * x
        for _ in range(200):
            if self.eta_xm(x, hi) < 0:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise BoundaryError(f"could not bracket the null curve at x={x}")
        if lo == x:
            lo = x * (1 + 1e-12)
            while self.eta_xm(x, lo) <= 0:
                lo = x + (lo - x) * 1e-3
                if lo <= x:
                    raise BoundaryError(f"field not positive near the diagonal at x={x}")
        return brentq(lambda m: self.eta_xm(x, m), lo, hi, xtol=1e-13 * hi, rtol=4 * np.finfo(float).eps)


@dataclass
class Trajectory:
    kind: str
    m0: float
    horizon: float
    m: np.ndarray
    b: np.ndarray
    slope: np.ndarray


def classify_trajectory(problem: Problem, m0: float, horizon: float,
                        settings: SolverSettings = SolverSettings(),
                        field: BoundaryField | None = None, max_step: float = math.inf) -> Trajectory:
    """Integrate ``b' = E(b, m)`` from ``(x_R, m0)`` and report how it ends.

    ``max_step`` (in units of ``x_R``) caps the step, for a dense output grid.
    """
    field = BoundaryField(problem) if field is None else field
    x_R = problem.x_R
    if not m0 > x_R:
        raise DomainError(f"start level must exceed x_R={x_R}, got {m0}")
    eps = settings.diag_eps

    def rhs(m, b):
        return field._fast(b, m)

    h_max = max_step * x_R

    def cap(m, b, db):
        return min(h_max, 0.25 * (m - b) / max(1.0, db))

    def event(m, b, db):
        if m - b < eps * (1.0 + m):
            return HITS_DIAGONAL
        if db <= 0.0:
            return HITS_NULL_CURVE
        return None

    out = dormand_prince(rhs, m0, x_R, horizon, settings.rtol, settings.atol,
                         h0=1e-3 * (m0 - x_R), max_step=cap, event=event)
    if out.status == "nonfinite":
        raise BoundaryError(f"non-finite field value on trajectory from m0={m0}",
                            [(m0, horizon, "nonfinite")])
    if out.status == "underflow":
        kind = HITS_DIAGONAL
    elif out.status == "event":
        kind = out.event
    else:
        kind = REACHES_HORIZON
    return Trajectory(kind, m0, horizon, np.array(out.ts), np.array(out.ys), np.array(out.dys))


def _limit_slopes(x, y, d):
    # Fritsch-Carlson: keeps the Hermite cubic monotone on every interval
    d = np.array(d, dtype=float)
    delta = np.diff(y) / np.diff(x)
    for i, dl in enumerate(delta):
        if dl <= 0:
            d[i] = d[i + 1] = 0.0
            continue
        a, c = d[i] / dl, d[i + 1] / dl
        if a < 0:
            d[i], a = 0.0, 0.0
        if c < 0:
            d[i + 1], c = 0.0, 0.0
        s = a * a + c * c
        if s > 9.0:
            tau = 3.0 / math.sqrt(s)
            d[i], d[i + 1] = tau * a * dl, tau * c * dl
    return d


@dataclass
class FreeBoundary:
    """Solved boundary: endpoint ``m_low`` and a grid of ``(m, b, b')``.

    Between grid points ``b`` is a monotone cubic Hermite interpolant that uses
    the field values as slopes.  The grid is reported up to ``m_max``.
    """

    m_low: float
    x_R: float
    m: np.ndarray
    b: np.ndarray
    slope: np.ndarray
    bracket: tuple = (math.nan, math.nan)
    horizon: float = math.nan
    iterations: int = 0
    trace: list = field(default_factory=list)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.slope = np.asarray(self.slope, dtype=float)
        self._spline = CubicHermiteSpline(self.m, self.b, _limit_slopes(self.m, self.b, self.slope))
        self._dspline = self._spline.derivative()

    @property
    def m_max(self) -> float:
        return float(self.m[-1])

    @property
    def bracket_width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    def _check(self, m):
        m = np.asarray(m)
        if np.any(m < self.m_low) or np.any(m > self.m_max):
            raise DomainError(f"boundary known on [{self.m_low}, {self.m_max}], got {m}")

    def __call__(self, m):
        self._check(m)
        out = self._spline(m)
        return float(out) if np.ndim(m) == 0 else out

    def derivative(self, m):
        self._check(m)
        out = self._dspline(m)
        return float(out) if np.ndim(m) == 0 else out

    def shifted(self, delta: float) -> "FreeBoundary":
        """Boundary moved by ``delta`` and clipped to ``x_R <= b < m``."""
        b = np.clip(self.b + delta, self.x_R, None)
        b = np.minimum(b, self.m - 1e-9 * (1.0 + self.m))
        slope = np.where(b == self.b + delta, self.slope, 0.0)
        return FreeBoundary(self.m_low, self.x_R, self.m.copy(), b, slope, self.bracket,
                            self.horizon, self.iterations)


def default_horizon(problem: Problem, field: BoundaryField, tail: float = 1e-6) -> float:
    """Level where ``1 - F < tail``, raised to at least twice ``m_{x_R}``."""
    return max(problem.law.quantile_level(tail), 2.0 * field.null_curve(problem.x_R))


def find_endpoint(problem: Problem, settings: SolverSettings = SolverSettings(),
                  field: BoundaryField | None = None) -> FreeBoundary:
    """Locate ``m_low`` by shooting and return the boundary through it.

    Bisection on the start level: hitting the diagonal raises it, hitting the
    null curve lowers it.  When a start level survives to the horizon, both
    edges of the surviving set are refined; if the surviving set is still
    wider than ``tol`` the horizon is doubled and the search continues inside
    the current bracket.  The reported grid comes from a final trajectory
    started at the bracket midpoint and run to the base horizon.
    """
    field = BoundaryField(problem) if field is None else field
    x_R = problem.x_R
    tol = settings.resolved_tol(x_R)
    m_xR = field.null_curve(x_R)
    base = settings.horizon if settings.horizon is not None else default_horizon(problem, field, settings.tail)
    trace = []

    def classify(m0, horizon):
        if len(trace) >= settings.max_iter:
            raise BoundaryError("iteration limit reached while shooting", trace)
        kind = classify_trajectory(problem, m0, horizon, settings, field).kind
        trace.append((m0, horizon, kind))
        return kind

    lo, hi = x_R, m_xR
    horizon = base
    for _ in range(settings.max_doublings + 1):
        survivor = None
        while hi - lo >= tol:
            mid = 0.5 * (lo + hi)
            kind = classify(mid, horizon)
            if kind == HITS_DIAGONAL:
                lo = mid
            elif kind == HITS_NULL_CURVE:
                hi = mid
            else:
                survivor = mid
                break
        if survivor is None:
            break
        a = b = survivor
        while a - lo >= tol / 2:
            q = 0.5 * (lo + a)
            kind = classify(q, horizon)
            if kind == HITS_DIAGONAL:
                lo = q
            elif kind == REACHES_HORIZON:
                a = q
            else:
                raise BoundaryError("null-curve trajectory below a surviving one", trace)
        while hi - b >= tol / 2:
            q = 0.5 * (b + hi)
            kind = classify(q, horizon)
            if kind == HITS_NULL_CURVE:
                hi = q
            elif kind == REACHES_HORIZON:
                b = q
            else:
                raise BoundaryError("diagonal trajectory above a surviving one", trace)
        if hi - lo < tol:
            break
        horizon *= 2.0
    else:
        raise BoundaryError("surviving interval did not shrink below tol", trace)

    m_low = 0.5 * (lo + hi)
    final = classify_trajectory(problem, m_low, base, settings, field, settings.grid_step)
    if final.kind != REACHES_HORIZON:
        raise BoundaryError(f"trajectory from m_low={m_low} ended early ({final.kind}) "
                            f"at m={final.m[-1]}", trace + [(m_low, base, final.kind)])
    return FreeBoundary(m_low, x_R, final.m, final.b, final.slope, (lo, hi), horizon,
                        len(trace) + 1, trace)
