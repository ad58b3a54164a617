"""Invariant suite run by ``check`` and by the test-suite.

Every check returns a :class:`CheckResult` holding the worst observed
discrepancy next to the tolerance it was held to.  ``level="full"`` adds the
Monte Carlo comparisons.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .boundary import FreeBoundary, SolverSettings, find_endpoint
from .montecarlo import SimConfig, StoppingPolicy, simulate_game_value, simulate_stopped_value
from .problem import Problem
from .value import BELOW_MLOW, LEFT_OF_STOP, REGION_NAMES, RIGHT_OF_STOP, STOP, ValueSurface


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: dict = field(default_factory=dict)


@dataclass
class CheckReport:
    level: str
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"level": self.level, "passed": self.passed,
                "checks": [asdict(r) for r in self.results]}


def _rel(a, b, floor=1e-300):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def sample_states(surface: ValueSurface, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random points ``x <= m`` with ``m`` below ``0.95 m_max``, log-uniform in both."""
    rng = np.random.default_rng(seed)
    b = surface.boundary
    m = np.exp(rng.uniform(math.log(0.2 * b.m_low), math.log(0.95 * b.m_max), n))
    x = m * np.exp(rng.uniform(math.log(1e-2), 0.0, n))
    return x, m


def _boundary_m(boundary: FreeBoundary, n: int) -> np.ndarray:
    lo = boundary.m_low
    return lo + (0.9 * boundary.m_max - lo) * np.linspace(0.0, 1.0, n + 1)[1:]


def check_boundary_structure(problem: Problem, boundary: FreeBoundary) -> CheckResult:
    x_R = problem.x_R
    start_gap = abs(float(boundary(boundary.m_low)) - x_R)
    increasing = bool(np.all(np.diff(boundary.b) > 0))
    in_band = bool(np.all(boundary.b >= x_R) and np.all(boundary.b < boundary.m))
    width = boundary.bracket_width
    width_ok = not math.isnan(width) and width < 1e-8 * x_R
    ok = start_gap <= 1e-7 and increasing and in_band and width_ok
    return CheckResult("boundary_structure", ok, start_gap, 1e-7,
                       {"increasing": increasing, "in_band": in_band,
                        "bracket_width": width, "bracket_tolerance": 1e-8 * x_R})


def check_smooth_fit(surface: ValueSurface, n: int = 100) -> CheckResult:
    """``dW/dx`` just right of the boundary against ``(1 - F) R'``.

    The coefficients come from integrating their ``m``-derivatives upward from
    ``m_low``, so a wrong boundary shows up here even though the closed-form
    coefficients satisfy smooth fit identically.
    """
    ms = _boundary_m(surface.boundary, n)
    b = surface.boundary(ms)
    A, B = surface.neumann_coefficients(ms)
    h1, h2 = surface.model.h1, surface.model.h2
    slope = A * h1.d1(b) + B * h2.d1(b)
    target = (1.0 - surface.law.cdf(ms)) * surface.payoffs.R.d1(b)
    err = _rel(slope, target)
    worst = float(err.max())
    return CheckResult("smooth_fit", worst < 1e-6, worst, 1e-6, {"m_at_worst": float(ms[err.argmax()])})


def check_neumann(surface: ValueSurface, n: int = 100) -> CheckResult:
    """Central difference of ``W(m, .)`` in ``m`` on the diagonal against ``-f G``."""
    ms = _boundary_m(surface.boundary, n)
    h = 1e-4 * ms
    up = surface.formula(ms, ms + h, RIGHT_OF_STOP)
    down = surface.formula(ms, ms - h, RIGHT_OF_STOP)
    fd = (up - down) / (2 * h)
    target = -surface.law.pdf(ms) * surface.payoffs.G(ms)
    err = _rel(fd, target)
    worst = float(err.max())
    return CheckResult("neumann", worst < 1e-6, worst, 1e-6, {"m_at_worst": float(ms[err.argmax()])})


def check_pde_residual(surface: ValueSurface, n: int = 1000, seed: int = 1) -> CheckResult:
    model = surface.model
    x, m = sample_states(surface, 4 * n, seed)
    reg = surface.region(x, m)
    cont = reg != STOP
    xc, mc = x[cont][:n], m[cont][:n]
    w = surface.value(xc, mc)
    wx = surface.partial_x(xc, mc)
    wxx = surface.partial_xx(xc, mc)
    drift, half_var = model.drift(xc) * wx, 0.5 * model.variance(xc) * wxx
    resid = drift + half_var - model.r * w
    scale = np.abs(drift) + np.abs(half_var) + model.r * np.abs(w)
    worst = float(np.max(np.abs(resid) / scale))
    xs, ms = x[~cont], m[~cont]
    stop_resid = (model.drift(xs) * surface.partial_x(xs, ms)
                  + 0.5 * model.variance(xs) * surface.partial_xx(xs, ms)
                  - model.r * surface.value(xs, ms))
    stop_ok = bool(np.all(stop_resid <= 0))
    return CheckResult("pde_residual", worst < 1e-7 and stop_ok, worst, 1e-7,
                       {"n_continuation": int(len(xc)), "n_stop": int(len(xs)),
                        "stop_side_nonpositive": stop_ok})


def check_continuity(surface: ValueSurface, n: int = 200) -> CheckResult:
    """Neighbouring region formulas evaluated on their shared interface."""
    ms = _boundary_m(surface.boundary, n)
    b = surface.boundary(ms)
    x_R, m_low = surface.x_R, surface.m_low
    gaps = {
        "stop|right": _rel(surface.formula(b, ms, STOP), surface.formula(b, ms, RIGHT_OF_STOP)),
        "left|stop": _rel(surface.formula(np.full(n, x_R), ms, LEFT_OF_STOP),
                          surface.formula(np.full(n, x_R), ms, STOP)),
    }
    xs = np.geomspace(1e-2 * m_low, m_low, n)
    above = np.where(xs < x_R, LEFT_OF_STOP, np.where(xs <= x_R, STOP, RIGHT_OF_STOP))
    upper = np.array([surface.formula(x, m_low, int(k)) for x, k in zip(xs, above)])
    gaps["below|above"] = _rel(surface.formula(xs, np.full(n, m_low), BELOW_MLOW), upper)
    worst = {k: float(v.max()) for k, v in gaps.items()}
    top = max(worst.values())
    return CheckResult("continuity", top < 1e-8, top, 1e-8, worst)


def check_bounds(surface: ValueSurface, n: int = 10_000, seed: int = 2) -> CheckResult:
    x, m = sample_states(surface, n, seed)
    w = surface.value(x, m)
    sf = 1.0 - surface.law.cdf(m)
    lower = sf * np.maximum(surface.payoffs.R(x), 0.0)
    upper = sf * surface.payoffs.G(x)
    cont = surface.region(x, m) != STOP
    lower_ok = bool(np.all(w - lower >= -1e-12 * np.abs(w)))
    strict = bool(np.all(w[cont] > lower[cont]))
    upper_margin = float(np.min((upper - w) / upper))
    ok = lower_ok and strict and upper_margin > 0 and bool(np.all(w > 0))
    return CheckResult("bounds", ok, upper_margin, 0.0,
                       {"lower_holds": lower_ok, "strict_on_continuation": strict,
                        "min_relative_gap_to_upper": upper_margin})


def _same_region(surface, x, m, dx, dm):
    reg = surface.region(x, m)
    keep = np.ones(len(x), bool)
    for sx, sm in ((dx, 0), (-dx, 0), (0, dm), (0, -dm)):
        xx, mm = x + sx, m + sm
        ok = xx <= mm
        keep &= ok
        keep[ok] &= surface.region(xx[ok], mm[ok]) == reg[ok]
        keep[ok] &= (mm[ok] >= surface.m_low) == (m[ok] >= surface.m_low)
    return keep


def check_monotonicity(surface: ValueSurface, n: int = 2000, n_kink: int = 20,
                       seed: int = 3) -> CheckResult:
    x, m = sample_states(surface, n, seed)
    off_kink = m != surface.m_low
    wm = surface.partial_m(x, m)
    wx = surface.partial_x(x, m)
    dec_m = bool(np.all(wm[off_kink] < 0))
    inc_x = bool(np.all(wx > 0))
    xk = np.geomspace(0.05 * surface.m_low, 0.99 * surface.m_low, n_kink)
    jump = (surface.partial_m(xk, np.full(n_kink, surface.m_low), "right")
            - surface.partial_m(xk, np.full(n_kink, surface.m_low), "left"))
    kink = bool(np.all(jump > 0))
    hx, hm = 1e-5 * x, 1e-5 * m
    keep = _same_region(surface, x, m, hx, hm)
    xs, ms, hx, hm = x[keep], m[keep], hx[keep], hm[keep]
    fd_x = (surface.value(xs + hx, ms) - surface.value(xs - hx, ms)) / (2 * hx)
    fd_m = (surface.value(xs, ms + hm) - surface.value(xs, ms - hm)) / (2 * hm)
    err = max(float(_rel(fd_x, wx[keep]).max()), float(_rel(fd_m, wm[keep]).max()))
    ok = dec_m and inc_x and kink and err < 1e-5
    return CheckResult("monotonicity", ok, err, 1e-5,
                       {"dW_dm_negative": dec_m, "dW_dx_positive": inc_x, "kink_sign": kink,
                        "n_finite_difference": int(keep.sum())})


def check_stability(problem: Problem, boundary: FreeBoundary, settings: SolverSettings,
                    n: int = 100, seed: int = 4) -> CheckResult:
    """Re-solve with halved tolerances and compare ``m_low`` and ``W``."""
    finer = find_endpoint(problem, settings.halved(problem.x_R))
    shift = abs(finer.m_low - boundary.m_low)
    a, c = ValueSurface(problem, boundary), ValueSurface(problem, finer)
    x, m = sample_states(a, n, seed)
    m = np.minimum(m, 0.95 * min(boundary.m_max, finer.m_max))
    x = np.minimum(x, m)
    change = float(_rel(a.value(x, m), c.value(x, m)).max())
    ok = shift < 1e-7 * problem.x_R and change < 1e-6
    return CheckResult("stability", ok, shift, 1e-7 * problem.x_R,
                       {"m_low_shift": shift, "max_relative_value_change": change})


def monte_carlo_points(surface: ValueSurface) -> list:
    """One start point per region plus a second one right of the boundary."""
    m_low, x_R = surface.m_low, surface.x_R
    m1 = min(1.1 * m_low, 0.9 * surface.boundary.m_max)
    b1 = float(surface.boundary(m1))
    return [(0.5 * (x_R + b1), m1), (0.6 * x_R, m1), (0.5 * (b1 + m1), m1),
            (0.9 * m1, m1), (0.5 * m_low, 0.5 * m_low)]


def check_monte_carlo(surface: ValueSurface, n_paths: int = 200_000, dt: float = 1e-3,
                      seed: int = 42) -> CheckResult:
    problem = surface.problem
    rows = []
    worst = 0.0
    for start in monte_carlo_points(surface):
        res = simulate_stopped_value(problem, surface.boundary,
                                     SimConfig(start, n_paths=n_paths, dt=dt, seed=seed))
        w = surface.value(*start)
        z = abs(res.estimate - w) / (res.std_error + 1e-12 * abs(w))
        rows.append({"mode": "stopped", "x": start[0], "m": start[1],
                     "region": REGION_NAMES[surface.region(*start)],
                     "analytic": w, "estimate": res.estimate, "std_error": res.std_error})
        worst = max(worst, z)
    policy = StoppingPolicy.from_boundary(surface.boundary)
    for x in (0.75 * surface.x_R, 1.5 * surface.x_R, 3.5 * surface.x_R):
        res = simulate_game_value(problem, policy, SimConfig((x, x), n_paths=n_paths, dt=dt, seed=seed))
        v = surface.initial_value(x)
        worst = max(worst, abs(res.estimate - v) / res.std_error)
        rows.append({"mode": "game", "x": x, "m": x, "region": "",
                     "analytic": v, "estimate": res.estimate, "std_error": res.std_error})
    return CheckResult("monte_carlo", worst <= 3.0, worst, 3.0, {"runs": rows})


def run_checks(problem: Problem, boundary: FreeBoundary, level: str = "fast",
               settings: SolverSettings = SolverSettings(), seed: int = 42) -> CheckReport:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    surface = ValueSurface(problem, boundary)
    results = [
        check_boundary_structure(problem, boundary),
        check_smooth_fit(surface),
        check_neumann(surface),
        check_pde_residual(surface),
        check_continuity(surface),
        check_bounds(surface),
        check_monotonicity(surface),
        check_stability(problem, boundary, settings),
    ]
    if level == "full":
        results.append(check_monte_carlo(surface, seed=seed))
    return CheckReport(level, results)
