"""Acceptance criteria on the reference instance.

GBM with mu = 0, sigma^2 = 0.1, r = 0.05, I = 1, kappa = 2, exponential
costs with rate 1, seed 42.  Each test records one PASS/FAIL line, printed
in the terminal summary (and immediately with ``-s``).
"""

import filecmp
import math
import time

import numpy as np
import pytest

from breakthrough_timing import (CostLaw, GbmParams, Problem, SimConfig, SolverSettings, StoppingPolicy,
                                 TechnologyPayoffs, ValueSurface, compare_cost_laws, compare_payoffs,
                                 find_endpoint, gbm_model, simulate_game_value, simulate_stopped_value)
from breakthrough_timing.checks import (check_boundary_structure, check_bounds, check_continuity,
                                        check_monotonicity, check_neumann, check_pde_residual, check_smooth_fit,
                                        check_stability)
from breakthrough_timing.cli import main
from conftest import ACCEPTANCE_LINES

SEED = 42
N_PATHS = 200_000
DT = 1e-3


def report(number: int, title: str, ok: bool, detail: str):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def best_time(fn, repeats=3):
    best, out = math.inf, None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def test_criterion_01_closed_form_anchors():
    params = GbmParams(0.0, math.sqrt(0.1), 0.05)

    def build():
        model = gbm_model(params)
        return model, TechnologyPayoffs.linear(model, 1.0, 2.0)

    build()
    elapsed, (model, pay) = best_time(build, repeats=20)
    nu = params.mu / params.sigma**2 - 0.5
    disc = math.sqrt(nu * nu + 2 * params.r / params.sigma**2)
    b1, b2 = -nu + disc, -nu - disc
    root_err = max(abs(model.h1.power - b1), abs(model.h2.power - b2))
    x_R = b1 / (b1 - 1) * 1.0
    thr_err = max(abs(pay.x_R - x_R), abs(pay.x_U - x_R / 2))
    ok = root_err < 1e-12 and thr_err < 1e-10 and abs(pay.x_R - 2.6180340) < 1e-7 and elapsed < 1e-3
    report(1, "closed-form anchors", ok,
           f"root err {root_err:.1e} (tol 1e-12), threshold err {thr_err:.1e} (tol 1e-10), "
           f"x_R={pay.x_R:.10f}, {elapsed * 1e3:.3f} ms (limit 1 ms)")


def test_criterion_02_boundary_structure(problem):
    elapsed, boundary = best_time(lambda: find_endpoint(problem), repeats=2)
    res = check_boundary_structure(problem, boundary)
    ok = res.passed and elapsed < 10.0
    report(2, "boundary structure", ok,
           f"|b(m_low)-x_R|={res.worst:.1e} (tol 1e-7), increasing={res.detail['increasing']}, "
           f"in band={res.detail['in_band']}, bracket {res.detail['bracket_width']:.2e} "
           f"(tol {res.detail['bracket_tolerance']:.2e}), m_low={boundary.m_low:.10f}, {elapsed:.2f} s (limit 10 s)")


def test_criterion_03_variational_residuals(problem, boundary):
    def run():
        s = ValueSurface(problem, boundary)
        return [check_smooth_fit(s), check_neumann(s), check_pde_residual(s), check_continuity(s)]

    elapsed, results = best_time(run, repeats=2)
    ok = all(r.passed for r in results) and elapsed < 5.0
    report(3, "variational residuals", ok,
           ", ".join(f"{r.name} {r.worst:.1e} (tol {r.tolerance:.0e})" for r in results)
           + f", {elapsed:.2f} s (limit 5 s)")


def test_criterion_04_bounds(surface):
    elapsed, res = best_time(lambda: check_bounds(surface, n=10_000), repeats=2)
    ok = res.passed and elapsed < 5.0
    report(4, "bounds", ok,
           f"lower holds={res.detail['lower_holds']}, strict on continuation={res.detail['strict_on_continuation']}, "
           f"min relative gap to upper {res.worst:.3g} > 0 at 10^4 points, {elapsed:.2f} s (limit 5 s)")


def test_criterion_05_monotonicity(surface):
    elapsed, res = best_time(lambda: check_monotonicity(surface, n_kink=20), repeats=2)
    ok = res.passed and elapsed < 5.0
    report(5, "monotonicity", ok,
           f"dW/dm<0 {res.detail['dW_dm_negative']}, dW/dx>0 {res.detail['dW_dx_positive']}, "
           f"kink sign {res.detail['kink_sign']} at 20 x, finite-difference err {res.worst:.1e} (tol 1e-5), "
           f"{elapsed:.2f} s (limit 5 s)")


def test_criterion_06_monte_carlo_consistency(problem, boundary, surface):
    t0 = time.perf_counter()
    starts = [(2.8, 9.0), (1.5, 9.0), (3.5, 9.0), (8.0, 9.0), (3.0, 3.0)]
    regions = {surface.region(*s) for s in starts}
    worst, parts = 0.0, []
    for s in starts:
        res = simulate_stopped_value(problem, boundary, SimConfig(s, n_paths=N_PATHS, dt=DT, seed=SEED))
        w = surface.value(*s)
        z = abs(res.estimate - w) / (res.std_error + 1e-7 * w)
        worst = max(worst, z)
        parts.append(f"{s}:{z:.2f}")
    policy = StoppingPolicy.from_boundary(boundary)
    for x in (2.0, 4.0, 9.0):
        res = simulate_game_value(problem, policy, SimConfig((x, x), n_paths=N_PATHS, dt=DT, seed=SEED))
        z = abs(res.estimate - surface.initial_value(x)) / res.std_error
        worst = max(worst, z)
        parts.append(f"game {x}:{z:.2f}")
    elapsed = time.perf_counter() - t0
    ok = worst <= 3.0 and len(regions) == 4 and elapsed < 300
    report(6, "Monte Carlo consistency", ok,
           f"max |z| {worst:.2f} (limit 3) over {', '.join(parts)}; all four regions covered; "
           f"{elapsed:.0f} s (limit 300 s)")


def test_criterion_07_optimality_proxy(problem, boundary, surface):
    t0 = time.perf_counter()
    # close to the boundary, so the outward shift stops at once with a lower payoff
    start = (boundary(9.0) + 0.05, 9.0)
    w = surface.value(*start)
    above, below, parts = True, False, []
    for frac in (0.01, -0.01, 0.05, -0.05):
        res = simulate_stopped_value(problem, boundary.shifted(frac * problem.x_R),
                                     SimConfig(start, n_paths=N_PATHS, dt=DT, seed=SEED))
        above &= res.estimate <= w + 3 * res.std_error
        below |= res.estimate < w - 2 * res.std_error
        parts.append(f"{frac:+.2f}: {res.estimate - w:+.2e} (se {res.std_error:.1e})")
    elapsed = time.perf_counter() - t0
    ok = above and below and elapsed < 300
    report(7, "optimality proxy", ok,
           f"start ({start[0]:.4f}, 9) W={w:.6f}; value minus W by shift {'; '.join(parts)}; "
           f"all <= W+3SE {above}, some < W-2SE {below}, {elapsed:.0f} s (limit 300 s)")


def test_criterion_08_comparative_statics(problem):
    t0 = time.perf_counter()
    costs = compare_cost_laws(Problem.gbm_linear(costs=CostLaw.exponential(2.0)), problem)
    kappa = compare_payoffs(problem, Problem.gbm_linear(kappa=3.0))
    elapsed = time.perf_counter() - t0
    margin = 1e-7 * problem.x_R
    ok = (costs.m_low[0] > costs.m_low[1] and np.all(costs.b2 - costs.b1 > margin)
          and kappa.m_low[1] > kappa.m_low[0] and np.all(kappa.b1 - kappa.b2 > margin)
          and costs.checks["field_order"] and elapsed < 30)
    report(8, "comparative statics", ok,
           f"rate 2 vs 1: m_low {costs.m_low[0]:.6f} > {costs.m_low[1]:.6f}, min b2-b1 "
           f"{costs.checks['min_boundary_gap']:.3g}; kappa 2 vs 3: m_low {kappa.m_low[1]:.6f} > "
           f"{kappa.m_low[0]:.6f}, min b1-b2 {kappa.checks['min_boundary_gap']:.3g} (margin {margin:.1e}); "
           f"field order at 200 points {costs.checks['field_order']}; {elapsed:.1f} s (limit 30 s)")


def test_criterion_09_numerical_stability(problem, boundary):
    t0 = time.perf_counter()
    res = check_stability(problem, boundary, SolverSettings(), n=100)
    elapsed = time.perf_counter() - t0
    ok = res.passed and elapsed < 30
    report(9, "numerical stability", ok,
           f"m_low shift {res.detail['m_low_shift']:.1e} (tol {res.tolerance:.1e}), max relative W change "
           f"{res.detail['max_relative_value_change']:.1e} (tol 1e-6) at 100 points, {elapsed:.1f} s (limit 30 s)")


def test_criterion_10_reproducibility(tmp_path, problem, boundary):
    from pathlib import Path
    cfg = str(Path(__file__).resolve().parent.parent / "configs" / "reference.json")
    codes = [main(["solve", "--config", cfg, "--out", str(tmp_path / d)]) for d in ("a", "b")]
    same_file = filecmp.cmp(tmp_path / "a" / "reference" / "boundary.csv",
                            tmp_path / "b" / "reference" / "boundary.csv", shallow=False)
    cfg_sim = SimConfig((3.5, 9.0), n_paths=50_000, seed=SEED)
    runs = [simulate_stopped_value(problem, boundary, cfg_sim) for _ in range(2)]
    same_sim = runs[0] == runs[1]
    ok = codes == [0, 0] and same_file and same_sim
    report(10, "reproducibility", ok,
           f"boundary.csv byte-identical {same_file}, simulation estimates identical {same_sim} "
           f"({runs[0].estimate!r})")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
