"""Comparative statics of the free boundary.

Two instances that differ only in the cost law, or only in the breakthrough
multiplier, are solved side by side and their boundaries compared on a common
grid.  Orderings are only asserted when the preconditions hold; otherwise the
report is marked inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryField, FreeBoundary, SolverSettings, find_endpoint
from .law import has_monotone_hazard, hazard_order_dominates
from .payoffs import LinearPayoff
from .problem import Problem

HOLDS = "ordering holds"
EQUAL = "equal within tolerance"
INCONCLUSIVE = "inconclusive"
VIOLATED = "ordering violated"


@dataclass
class Comparison:
    mode: str
    verdict: str
    m_low: tuple
    grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    checks: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        return {"mode": self.mode, "verdict": self.verdict, "m_low_1": self.m_low[0],
                "m_low_2": self.m_low[1], "checks": self.checks, "reason": self.reason}

    def rows(self):
        return [(m, p, q, q - p) for m, p, q in zip(self.grid, self.b1, self.b2)]


def comparison_grid(first: FreeBoundary, second: FreeBoundary, n: int = 200) -> np.ndarray:
    """Log-spaced levels from the larger endpoint to ``0.9`` of the shorter grid."""
    lo = max(first.m_low, second.m_low)
    hi = 0.9 * min(first.m_max, second.m_max)
    return np.geomspace(lo, hi, n)


def _field_samples(fields, boundary_low: FreeBoundary, grid: np.ndarray, n: int = 200, seed: int = 0):
    # points right of the lower boundary, where both fields are positive
    rng = np.random.default_rng(seed)
    ms = rng.choice(grid, n)
    lo = boundary_low(ms)
    xs = lo + (ms - lo) * rng.uniform(0.0, 0.999, n)
    return xs, ms, [np.array([f._fast(x, m) for x, m in zip(xs, ms)]) for f in fields]


def _same_model(a: Problem, b: Problem) -> bool:
    return a.model.gbm is not None and a.model.gbm == b.model.gbm


def _equal(first: FreeBoundary, second: FreeBoundary, grid, x_R, tol) -> bool:
    return (abs(first.m_low - second.m_low) < 10 * tol
            and bool(np.all(np.abs(first(grid) - second(grid)) < 1e-7 * x_R)))


def _solve_pair(p1: Problem, p2: Problem, settings: SolverSettings):
    return find_endpoint(p1, settings), find_endpoint(p2, settings)


def compare_cost_laws(p1: Problem, p2: Problem, settings: SolverSettings = SolverSettings(),
                      n: int = 200) -> Comparison:
    """Boundary response to a hazard-rate ordering of the developer cost.

    When the cost hazard of the first instance exceeds the second one, the
    first endpoint lies higher and the second boundary lies above the first.
    Swapped inputs give the mirrored assertion.
    """
    if not _same_model(p1, p2) or p1.payoffs.split != p2.payoffs.split \
            or p1.payoffs.kappa != p2.payoffs.kappa \
            or p1.payoffs.investment_cost != p2.payoffs.investment_cost:
        return Comparison("costs", INCONCLUSIVE, (math.nan, math.nan),
                          reason="instances differ in more than the cost law")
    zs = np.geomspace(1e-6, 1e3, 400) * max(1.0, p1.payoffs.P(p1.x_R))
    c1, c2 = p1.law.costs, p2.law.costs
    if hazard_order_dominates(c1, c2, zs):
        order = 1
    elif hazard_order_dominates(c2, c1, zs):
        order = -1
    elif np.allclose(c1.hazard(zs), c2.hazard(zs), rtol=1e-12, atol=0.0):
        order = 0
    else:
        return Comparison("costs", INCONCLUSIVE, (math.nan, math.nan),
                          reason="cost laws are not ordered by hazard rate on the probe grid")
    b1, b2 = _solve_pair(p1, p2, settings)
    grid = comparison_grid(b1, b2, n)
    x_R = p1.x_R
    margin = 1e-7 * x_R
    v1, v2 = b1(grid), b2(grid)
    report = Comparison("costs", INCONCLUSIVE, (b1.m_low, b2.m_low), grid, v1, v2)
    tol = settings.resolved_tol(x_R)
    if order == 0:
        report.verdict = EQUAL if _equal(b1, b2, grid, x_R, tol) else VIOLATED
        return report
    # orient so that ``hi`` has the larger hazard
    hi, lo = (b1, b2) if order == 1 else (b2, b1)
    f_hi, f_lo = (BoundaryField(p1), BoundaryField(p2)) if order == 1 else (BoundaryField(p2), BoundaryField(p1))
    endpoint = hi.m_low > lo.m_low
    gap = float(np.min(lo(grid) - hi(grid)))
    _, _, (e_hi, e_lo) = _field_samples((f_hi, f_lo), lo, grid)
    fields = bool(np.all(e_hi > e_lo))
    report.checks = {"hazard_order": "first" if order == 1 else "second",
                     "endpoint_order": endpoint, "min_boundary_gap": gap,
                     "margin": margin, "field_order": fields}
    report.verdict = HOLDS if endpoint and gap > margin and fields else VIOLATED
    return report


def compare_payoffs(p1: Problem, p2: Problem, settings: SolverSettings = SolverSettings(),
                    n: int = 200) -> Comparison:
    """Boundary response to a larger breakthrough multiplier.

    With ``kappa2 > kappa1`` the second endpoint lies higher and the first
    boundary lies above the second.  Requires linear payoffs, a cost law with
    nondecreasing hazard and a convex increasing fundamental solution.
    """
    pay1, pay2 = p1.payoffs, p2.payoffs
    same_rest = (_same_model(p1, p2) and pay1.split == pay2.split
                 and pay1.investment_cost == pay2.investment_cost
                 and p1.law.costs.family == p2.law.costs.family
                 and p1.law.costs.params == p2.law.costs.params)
    if not same_rest or not (isinstance(pay1.U, LinearPayoff) and isinstance(pay2.U, LinearPayoff)):
        return Comparison("payoffs", INCONCLUSIVE, (math.nan, math.nan),
                          reason="instances must share model, costs and cost I, with linear payoffs")
    zs = np.geomspace(1e-6, 1e3, 400)
    xs = np.geomspace(1e-3, 1e3, 400) * p1.x_R
    if not has_monotone_hazard(p1.law.costs, zs):
        return Comparison("payoffs", INCONCLUSIVE, (math.nan, math.nan),
                          reason="cost law lacks a nondecreasing hazard")
    if not np.all(p1.model.h1.d2(xs) > 0):
        return Comparison("payoffs", INCONCLUSIVE, (math.nan, math.nan),
                          reason="increasing fundamental solution is not convex")
    k1, k2 = pay1.kappa, pay2.kappa
    b1, b2 = _solve_pair(p1, p2, settings)
    grid = comparison_grid(b1, b2, n)
    x_R = p1.x_R
    margin = 1e-7 * x_R
    report = Comparison("payoffs", INCONCLUSIVE, (b1.m_low, b2.m_low), grid, b1(grid), b2(grid))
    if k1 == k2:
        report.verdict = EQUAL if _equal(b1, b2, grid, x_R, settings.resolved_tol(x_R)) else VIOLATED
        return report
    # orient so that ``big`` has the larger multiplier
    big, small = (b2, b1) if k2 > k1 else (b1, b2)
    p_big, p_small = (p2, p1) if k2 > k1 else (p1, p2)
    share = (p_big.payoffs.P(xs) > p_small.payoffs.P(xs)) & (p_big.payoffs.P_d1(xs) > p_small.payoffs.P_d1(xs))
    endpoint = big.m_low > small.m_low
    gap = float(np.min(small(grid) - big(grid)))
    _, _, (e_big, e_small) = _field_samples((BoundaryField(p_big), BoundaryField(p_small)), small, grid)
    fields = bool(np.all(e_big > e_small))
    report.checks = {"larger_multiplier": "second" if k2 > k1 else "first",
                     "share_order": bool(np.all(share)), "endpoint_order": endpoint,
                     "min_boundary_gap": gap, "margin": margin, "field_order": fields}
    ok = endpoint and gap > margin and fields and bool(np.all(share))
    report.verdict = HOLDS if ok else VIOLATED
    return report
