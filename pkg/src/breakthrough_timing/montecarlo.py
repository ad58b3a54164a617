"""Monte Carlo oracles for the value surface.

Paths of the pair (X, M) are simulated with exact geometric Brownian motion
increments. Stretches where nothing can happen are jumped over exactly:
- while ``M < m_low`` and ``X < M``, the time to regain the maximum is drawn;
- while ``X`` lies left of the stopping band, the time to reach ``x_R`` is drawn.
These passage times follow the inverse Gaussian law, with a defect mass when
the log-drift is negative. Inside the band's outer strip ``b(M) < X < M`` the
step grows with the distance to the nearest edge and falls back to ``dt``
near an edge.

Payoff functions enter the compiled kernels as tables on a log-spaced grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .boundary import FreeBoundary
from .problem import Problem
from .rng import normal, path_state, uniform


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``dt_max`` and ``safety`` control the adaptive step away from event edges:
    the step is ``max(dt, min(dt_max, (d / (safety sigma))^2))`` for a log
    distance ``d``.  Set ``adaptive=False`` for plain ``dt`` stepping.
    With ``bridge=True`` the maximum of each step and the crossing of the
    upper band edge are sampled from the Brownian bridge between the step's
    end points, which removes the discrete-monitoring bias.
    """

    start: tuple
    n_paths: int = 200_000
    dt: float = 1e-3
    t_max: float | None = None
    seed: int = 42
    adaptive: bool = True
    dt_max: float = 0.25
    safety: float = 6.0
    bridge: bool = True

    def __post_init__(self):
        x, m = self.start
        if not (0 < x <= m):
            raise ValueError(f"start must satisfy 0 < x <= m, got {self.start}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_max is not None and self.t_max < self.dt:
            raise ValueError("t_max must be at least dt")

    def horizon(self, r: float) -> float:
        return -math.log(1e-8) / r if self.t_max is None else self.t_max


@dataclass(frozen=True)
class SimResult:
    """Estimate with standard error.

    ``n_truncated`` counts every path that was not stopped: those alive at
    ``t_max`` and those that drifted away for good.
    """

    estimate: float
    std_error: float
    n_stopped: int
    n_truncated: int
    tail_bound: float = 0.0

    @property
    def n_paths(self) -> int:
        return self.n_stopped + self.n_truncated


# ---------------------------------------------------------------------------
# tables


class _Tables:
    """G, f, 1-F, F, R and a primitive of G f on a log-spaced grid."""

    def __init__(self, problem: Problem, lo: float, hi: float, n: int = 200_001):
        xs = np.geomspace(lo, hi, n)
        self.log_lo = math.log(lo)
        self.dlog = (math.log(hi) - math.log(lo)) / (n - 1)
        self.xs = xs
        pay, law = problem.payoffs, problem.law
        self.G = pay.G(xs)
        self.f = law.pdf(xs)
        self.sf = law.sf(xs)
        self.F = law.cdf(xs)
        self.R = pay.R(xs)
        gf = self.G * self.f
        # primitive by cubic Hermite steps, derivative of G f from the log grid
        dgf = np.gradient(gf, xs)
        h = np.diff(xs)
        cell = h * (gf[:-1] + gf[1:]) / 2 + h * h * (dgf[:-1] - dgf[1:]) / 12
        self.Phi = np.concatenate([[0.0], np.cumsum(cell)])
        self.gf = gf
        self.dgf = dgf


@njit(cache=True)
def _lookup(table, log_lo, dlog, x):
    u = (math.log(x) - log_lo) / dlog
    if u <= 0.0:
        return table[0]
    i = int(u)
    if i >= table.size - 1:
        return table[table.size - 1]
    w = u - i
    return table[i] * (1.0 - w) + table[i + 1] * w


@njit(cache=True)
def _primitive(Phi, gf, dgf, xs, log_lo, dlog, y):
    # integral of G f up to y, cubic Hermite on the cell of y
    u = (math.log(y) - log_lo) / dlog
    i = int(u)
    if i < 0:
        return 0.0
    if i >= xs.size - 1:
        return Phi[Phi.size - 1]
    h = xs[i + 1] - xs[i]
    s = (y - xs[i]) / h
    s2, s3, s4 = s * s, s * s * s, s * s * s * s
    return Phi[i] + h * (gf[i] * (0.5 * s4 - s3 + s)
                         + h * dgf[i] * (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2)
                         + gf[i + 1] * (s3 - 0.5 * s4)
                         + h * dgf[i + 1] * (0.25 * s4 - s3 / 3.0))


@njit(cache=True)
def _inverse(table, xs, u):
    # smallest grid state with table >= u, linearly refined
    lo, hi = 0, table.size - 1
    if u > table[hi]:
        return math.inf
    if u <= table[0]:
        return xs[0]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if table[mid] >= u:
            hi = mid
        else:
            lo = mid
    w = (u - table[lo]) / (table[hi] - table[lo])
    return xs[lo] * (1.0 - w) + xs[hi] * w


# ---------------------------------------------------------------------------
# policies


@dataclass(frozen=True)
class StoppingPolicy:
    """Stop when ``M >= m_low`` and ``lower <= X <= upper(M)``.

    ``upper`` is tabulated on a uniform grid in ``m``; beyond the grid the
    ratio ``upper/m`` of the last point is kept.  ``diagonal=True`` means
    ``upper(M) = M``.
    """

    name: str
    m_low: float
    lower: float
    grid_m0: float = 0.0
    grid_dm: float = 1.0
    upper: np.ndarray = np.zeros(2)
    diagonal: bool = False

    @classmethod
    def from_boundary(cls, boundary: FreeBoundary, n: int = 20_001, name="boundary") -> "StoppingPolicy":
        ms = np.linspace(boundary.m_low, boundary.m_max, n)
        return cls(name, boundary.m_low, boundary.x_R, float(ms[0]), float(ms[1] - ms[0]),
                   np.asarray(boundary(ms), dtype=float))

    @classmethod
    def threshold(cls, level: float) -> "StoppingPolicy":
        """Invest as soon as ``X >= level``, whatever the history."""
        return cls(f"threshold({level:g})", level, level, diagonal=True)

    @classmethod
    def never(cls) -> "StoppingPolicy":
        return cls("never", math.inf, math.inf, diagonal=True)


@njit(cache=True)
def _upper(m, grid_m0, grid_dm, upper, diagonal):
    if diagonal:
        return m
    u = (m - grid_m0) / grid_dm
    if u <= 0.0:
        return upper[0]
    i = int(u)
    if i >= upper.size - 1:
        last_m = grid_m0 + grid_dm * (upper.size - 1)
        return upper[upper.size - 1] / last_m * m
    w = u - i
    return upper[i] * (1.0 - w) + upper[i + 1] * w


@njit(cache=True)
def _passage_time(state, a, c, sigma):
    """Time for a Brownian motion with drift ``c`` to climb ``a > 0``; inf if never."""
    if c < 0.0:
        if uniform(state) > math.exp(2.0 * c * a / (sigma * sigma)):
            return math.inf
    if c == 0.0:
        z = normal(state)
        return (a / sigma) ** 2 / (z * z)
    mean = a / abs(c)
    shape = (a / sigma) ** 2
    z = normal(state)
    phi = mean * z * z / shape
    x = mean / (1.0 + 0.5 * phi + 0.5 * math.sqrt(phi * phi + 4.0 * phi))
    if uniform(state) <= mean / (mean + x):
        return x
    return mean * mean / x


@njit(cache=True)
def _stop_payoff(game, acc, t, r, x, m, log_lo, dlog, tR, tsf):
    pay = math.exp(-r * t) * _lookup(tR, log_lo, dlog, x)
    if not game:
        pay *= _lookup(tsf, log_lo, dlog, m)
    return acc + pay


@njit(cache=True)
def _run_paths(x0, m0, n_paths, seed, dt, t_max, adaptive, dt_max, safety, bridge,
               mu, sigma, r, game,
               m_low, lower, grid_m0, grid_dm, upper, diagonal,
               log_lo, dlog, tG, tf, tsf, tR, tF, xs, Phi, gf, dgf, out, stopped):
    c = mu - 0.5 * sigma * sigma
    var = sigma * sigma
    state = np.empty(5, dtype=np.uint64)
    for p in range(n_paths):
        path_state(seed, p, state)
        x, m, t, acc = x0, m0, 0.0, 0.0
        y = math.inf
        stopped[p] = False
        if game:
            y = _inverse(tF, xs, uniform(state))
            if y <= x:
                out[p] = _lookup(tG, log_lo, dlog, x)
                stopped[p] = True
                continue
        while True:
            if t >= t_max:
                break
            if game and m >= y:
                out[p] = math.exp(-r * t) * _lookup(tG, log_lo, dlog, y)
                stopped[p] = True
                break
            in_band = m >= m_low
            up = 0.0
            if in_band:
                up = _upper(m, grid_m0, grid_dm, upper, diagonal)
                if lower <= x <= up:
                    out[p] = _stop_payoff(game, acc, t, r, x, m, log_lo, dlog, tR, tsf)
                    stopped[p] = True
                    break
                if x < lower:
                    t += _passage_time(state, math.log(lower / x), c, sigma)
                    x = lower
                    continue
            elif x < m:
                t += _passage_time(state, math.log(m / x), c, sigma)
                x = m
                continue
            h = dt
            if adaptive:
                # with bridge maxima only the stopping edge (or the level
                # where it switches on) limits the step
                if in_band:
                    d = math.log(x / up)
                    if not bridge:
                        d = min(d, math.log(m / x))
                elif bridge:
                    d = math.log(m_low / m)
                else:
                    d = 0.0
                h = max(dt, min(dt_max, (d / (safety * sigma)) ** 2))
            inc = c * h + sigma * math.sqrt(h) * normal(state)
            x_new = x * math.exp(inc)
            top = x_new
            if bridge:
                # maximum of the Brownian bridge between the two log values
                top = x * math.exp(0.5 * (inc + math.sqrt(inc * inc - 2.0 * var * h * math.log(uniform(state)))))
            if game and top >= y:
                out[p] = math.exp(-r * (t + 0.5 * h)) * _lookup(tG, log_lo, dlog, y)
                stopped[p] = True
                break
            if top > m:
                if not game:
                    acc += math.exp(-r * (t + 0.5 * h)) * (
                        _primitive(Phi, gf, dgf, xs, log_lo, dlog, top)
                        - _primitive(Phi, gf, dgf, xs, log_lo, dlog, m))
                m = top
            t += h
            if m >= m_low:
                up = _upper(m, grid_m0, grid_dm, upper, diagonal)
                hit = -1.0
                if x_new <= up:
                    # entered or jumped through the band: from above it meets
                    # the upper edge first, from below the lower edge
                    if x > up:
                        hit = up
                    elif x_new >= lower:
                        hit = lower
                elif bridge and x > up:
                    p_cross = math.exp(-2.0 * math.log(x / up) * math.log(x_new / up) / (var * h))
                    if uniform(state) < p_cross:
                        hit = up
                if hit > 0.0:
                    out[p] = _stop_payoff(game, acc, t, r, hit, m, log_lo, dlog, tR, tsf)
                    stopped[p] = True
                    break
            x = x_new
        if not stopped[p]:
            out[p] = acc


@njit(cache=True)
def _integral_paths(x0, m0, n_paths, seed, dt, t_max, mu, sigma, r,
                    log_lo, dlog, tG, tf, Phi, gf, dgf, xs, lhs, rhs):
    c = mu - 0.5 * sigma * sigma
    state = np.empty(5, dtype=np.uint64)
    n_steps = int(round(t_max / dt))
    for p in range(n_paths):
        path_state(seed, p, state)
        x, m = x0, m0
        left = 0.0
        right = 0.0
        for k in range(1, n_steps + 1):
            t = k * dt
            x = x * math.exp(c * dt + sigma * math.sqrt(dt) * normal(state))
            if x > m:
                mid = 0.5 * (m + x)
                disc = math.exp(-r * t)
                left += disc * _lookup(tG, log_lo, dlog, mid) * _lookup(tf, log_lo, dlog, mid) * (x - m)
                right += disc * (_primitive(Phi, gf, dgf, xs, log_lo, dlog, x)
                                 - _primitive(Phi, gf, dgf, xs, log_lo, dlog, m))
                m = x
        lhs[p] = left
        rhs[p] = right


# ---------------------------------------------------------------------------
# public entry points


def _gbm(problem: Problem):
    params = problem.model.gbm
    if params is None:
        raise NotImplementedError("Monte Carlo oracles need a geometric Brownian motion model")
    return params


def _tables(problem: Problem, cfg: SimConfig, top: float) -> _Tables:
    x, m = cfg.start
    lo = min(x, problem.payoffs.x_U) * 1e-3
    hi = max(m, top) * 1e3
    return _Tables(problem, lo, hi)


def _summarise(values, stopped, r, t_max) -> SimResult:
    n = len(values)
    est = math.fsum(values) / n
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    k = int(np.count_nonzero(stopped))
    return SimResult(est, se, k, n - k, math.exp(-r * t_max))


def _run(problem, policy, cfg, game):
    params = _gbm(problem)
    top = policy.grid_m0 + policy.grid_dm * (len(policy.upper) - 1) if not policy.diagonal else cfg.start[1]
    tab = _tables(problem, cfg, top)
    t_max = cfg.horizon(params.r)
    out = np.zeros(cfg.n_paths)
    stopped = np.zeros(cfg.n_paths, dtype=np.bool_)
    x, m = cfg.start
    _run_paths(float(x), float(m), cfg.n_paths, np.uint64(cfg.seed), cfg.dt, t_max, cfg.adaptive,
               cfg.dt_max, cfg.safety, cfg.bridge, params.mu, params.sigma, params.r, game,
               policy.m_low, policy.lower, policy.grid_m0, policy.grid_dm,
               np.asarray(policy.upper, dtype=float), policy.diagonal,
               tab.log_lo, tab.dlog, tab.G, tab.f, tab.sf, tab.R, tab.F, tab.xs,
               tab.Phi, tab.gf, tab.dgf, out, stopped)
    return _summarise(out, stopped, params.r, t_max)


def simulate_stopped_value(problem: Problem, boundary: FreeBoundary | StoppingPolicy,
                           cfg: SimConfig) -> SimResult:
    """Estimate the value of stopping at the boundary from ``cfg.start``.

    The estimator adds the discounted breakthrough payoff collected as the
    running maximum rises to ``(1 - F(M)) exp(-r tau) R(X)`` at the stopping
    time.  Accepts a solved boundary or any :class:`StoppingPolicy`.
    """
    policy = boundary if isinstance(boundary, StoppingPolicy) else StoppingPolicy.from_boundary(boundary)
    return _run(problem, policy, cfg, game=False)


def simulate_game_value(problem: Problem, policy: StoppingPolicy, cfg: SimConfig) -> SimResult:
    """Estimate the value of a policy in the game with a random threshold.

    The threshold ``Y`` is drawn from the threshold law by inversion of its
    tabulated cdf; reaching ``Y`` first pays ``G(Y)``, stopping first pays
    ``R(X)``.  ``cfg.start`` must lie on the diagonal.
    """
    x, m = cfg.start
    if x != m:
        raise ValueError("the game starts with no history: start must satisfy x == m")
    return _run(problem, policy, cfg, game=True)


@dataclass(frozen=True)
class IntegralCheck:
    """Discrepancy between the Stieltjes sum and the level integral, per path."""

    max_relative: float
    mean_absolute: float
    n_paths: int
    n_moved: int


def maximum_integral_check(problem: Problem, cfg: SimConfig) -> IntegralCheck:
    """Compare the sum over increments of ``M`` with the integral over levels.

    Along each path the sum ``sum exp(-r t) G f(M) dM`` (midpoint in ``M``) is
    compared with ``integral exp(-r tau(y)) G(y) f(y) dy``, where ``tau(y)`` is
    the time the path first reached level ``y``.  Uses plain ``dt`` steps.
    """
    params = _gbm(problem)
    t_max = cfg.horizon(params.r)
    x, m = cfg.start
    top = m * math.exp(abs(params.mu) * t_max + 10 * params.sigma * math.sqrt(t_max))
    tab = _tables(problem, cfg, top)
    lhs = np.zeros(cfg.n_paths)
    rhs = np.zeros(cfg.n_paths)
    _integral_paths(float(x), float(m), cfg.n_paths, np.uint64(cfg.seed), cfg.dt, t_max,
                    params.mu, params.sigma, params.r, tab.log_lo, tab.dlog, tab.G, tab.f,
                    tab.Phi, tab.gf, tab.dgf, tab.xs, lhs, rhs)
    diff = np.abs(lhs - rhs)
    moved = rhs > 0
    rel = diff[moved] / rhs[moved]
    return IntegralCheck(float(rel.max()) if rel.size else 0.0, float(diff.mean()),
                         cfg.n_paths, int(moved.sum()))


def simulate_gbm(problem: Problem, x0: float, t: float, n_steps: int, n_paths: int,
                 seed: int = 42) -> np.ndarray:
    """Terminal values ``X_t`` from ``n_steps`` exact increments per path."""
    params = _gbm(problem)
    out = np.empty(n_paths)
    _terminal(float(x0), t / n_steps, n_steps, n_paths, np.uint64(seed), params.mu, params.sigma, out)
    return out


@njit(cache=True)
def _terminal(x0, dt, n_steps, n_paths, seed, mu, sigma, out):
    c = mu - 0.5 * sigma * sigma
    state = np.empty(5, dtype=np.uint64)
    for p in range(n_paths):
        path_state(seed, p, state)
        x = x0
        for _ in range(n_steps):
            x = x * math.exp(c * dt + sigma * math.sqrt(dt) * normal(state))
        out[p] = x
