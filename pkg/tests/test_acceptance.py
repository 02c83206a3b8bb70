"""Acceptance criteria; each test prints one PASS/FAIL line with its measurement."""

import statistics
import time

import numpy as np
import pytest

from chebalance import trace
from chebalance.cheby import ChebySolver, Weights, augment, wrench_range
from chebalance.contacts import Mode, assemble
from chebalance.corpus import random_coplanar_stance, random_stance
from chebalance.friction import FilterKind, FrictionEstimator
from chebalance.harness import RunConfig, Runner, run
from chebalance.oracle import OracleError, ball_sample, chebyshev_lp, stance_polytope, support_polygon_check
from chebalance.scenario_io import load
from chebalance.spatial import gravity_wrench

from conftest import FOUR_CONTACT


@pytest.fixture
def report(capsys):
    def _report(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
        assert passed, detail

    return _report


def _blocks(st):
    return assemble(st.mass, st.gravity, st.contacts)


def _target(blocks, com):
    y = np.zeros(blocks.n_vars)
    y[:3] = com
    return y


@pytest.fixture(scope="module")
def corpus():
    """Random 2-4 contact stances drawn until 500 are bounded, nonempty polytopes per the LP oracle.

    Each kept stance carries the pure Chebyshev solve, the oracle radius and a
    solve with tracking weights. Draws the oracle rejects are kept separately
    so the solver's status on them can be checked too.
    """
    rng = np.random.default_rng(2024)
    solver = ChebySolver()
    kept, rejected = [], []
    t0 = time.perf_counter()
    while len(kept) < 500:
        st = random_stance(rng)
        b = _blocks(st)
        lp_sol = solver.solve(augment(b, weights=Weights.zero()))
        poly, _ = stance_polytope(b, lp_sol.scale)
        try:
            _, r_lp = chebyshev_lp(poly)
        except OracleError:
            rejected.append(lp_sol)
            continue
        qp_sol = solver.solve(augment(b, _target(b, st.com_target)))
        kept.append((st, b, lp_sol, qp_sol, r_lp))
    return kept, rejected, time.perf_counter() - t0


def test_01_radius_matches_lp_oracle(corpus, report):
    kept, rejected, elapsed = corpus
    worst, mismatched = 0.0, 0
    for _, _, sol, _, r_lp in kept:
        if not sol.optimal:
            mismatched += 1
            continue
        worst = max(worst, abs(sol.radius - r_lp) / max(abs(r_lp), 1e-12))
    mismatched += sum(sol.optimal for sol in rejected)
    ok = worst <= 1e-6 and mismatched == 0 and elapsed <= 60.0
    report(1, "radius vs LP oracle", ok,
           f"{len(kept)} bounded polytopes, worst rel err {worst:.2e} (tol 1e-6); "
           f"{len(rejected)} empty draws also non-optimal in QP, status mismatches {mismatched}; "
           f"{elapsed:.1f} s (limit 60 s)")


def test_02_equilibrium(corpus, scenario_run, scenario, report):
    entries, _, _ = corpus
    worst, n = 0.0, 0
    sc = scenario
    for r in scenario_run[0]:
        total = gravity_wrench(sc.mass, sc.gravity, r.com).vector + sum(r.wrenches.values())
        worst = max(worst, float(np.max(np.abs(total))))
        n += 1
    for st, _, lp_sol, qp_sol, _ in entries:
        for sol in (lp_sol, qp_sol):
            if not sol.optimal:
                continue
            total = gravity_wrench(st.mass, st.gravity, sol.com)
            for w in sol.wrenches.values():
                total = total + w
            worst = max(worst, float(np.max(np.abs(total.vector))))
            n += 1
    report(2, "Newton-Euler equilibrium", worst <= 1e-6, f"{n} solutions (corpus + scenario trace), max residual {worst:.2e} (tol 1e-6)")


def test_03_sliding_cone(corpus, report):
    entries, _, _ = corpus
    worst, n = 0.0, 0
    for st, b, _, sol, _ in entries:
        if not sol.optimal:
            continue
        for c in b.contacts:
            if c.mode is not Mode.SLIDING:
                continue
            f = c.rotation.T @ sol.contact_wrench(c.id)[:3]
            mu = c.sliding.mu_dynamic
            err = abs(np.hypot(f[0], f[1]) - mu * f[2]) / max(1.0, mu * f[2])
            worst = max(worst, err)
            n += 1
    report(3, "sliding force on dynamic cone", n > 0 and worst <= 1e-9,
           f"{n} sliding contacts, max scaled error {worst:.2e} (tol 1e-9)")


def test_04_ball_sampling(corpus, report):
    entries, _, _ = corpus
    chosen = [(b, sol) for _, b, _, sol, _ in entries if sol.optimal and sol.radius > 0][:50]
    violations, planted = 0, 0
    for k, (b, sol) in enumerate(chosen):
        rep = ball_sample(b, sol, samples=10_000, seed=k, plant=True)
        violations += rep.violations
        planted += bool(rep.planted_detected)
    ok = len(chosen) == 50 and violations == 0 and planted == 50
    report(4, "inscribed ball sampling", ok,
           f"{len(chosen)} solutions x 10000 probes, {violations} violations, planted violation caught {planted}/50")


def test_05_support_polygon(report):
    rng = np.random.default_rng(5)
    solver = ChebySolver()
    worst, checked, outside = np.inf, 0, 0
    for _ in range(1000):
        st = random_coplanar_stance(rng)
        b = _blocks(st)
        sol = solver.solve(augment(b, _target(b, st.com_target)))
        if not sol.optimal:
            continue
        chk = support_polygon_check(st.contacts, sol.com)
        worst = min(worst, chk.margin)
        checked += 1
        outside += chk.margin < 0
    report(5, "CoM inside support polygon", checked > 0 and outside == 0,
           f"{checked}/1000 feasible coplanar stances, min margin {worst:.3e} m, outside {outside}")


def test_06_wrench_range(corpus, report):
    entries, _, _ = corpus
    bad, n = 0, 0
    for _, _, _, sol, _ in entries:
        if sol.optimal:
            rw = wrench_range(sol)
            bad += rw.r_w != len(sol.contact_ids) * sol.radius
            n += 1
    report(6, "wrench range r_w = l r", bad == 0, f"{n} solutions, {bad} mismatches (exact)")


def test_07_scenario(scenario_run, report):
    rows, summary = scenario_run
    worst, sliding_ticks = 0.0, 0
    for r in rows:
        for cid, fz in r.targets.items():
            if r.modes[cid] is Mode.SLIDING:
                worst = max(worst, abs(r.normal_forces[cid] - fz))
                sliding_ticks += 1
    ok = summary.completed and worst <= 1e-6 and summary.min_radius > 0
    report(7, "scenario playback", ok,
           f"{summary.ticks} ticks completed={summary.completed}, {sliding_ticks} sliding targets, "
           f"max |f_z - target| {worst:.2e} N (tol 1e-6), min radius {summary.min_radius:.4f}")


def test_08_friction_estimation(scenario, report):
    rows, summary = run(scenario, RunConfig(filter=FilterKind.RECURSIVE, seed=11))
    shuffle = [r for r in rows if r.state == "shuffle"]
    est = shuffle[199].mu_filt["LF"] if len(shuffle) >= 200 else float("nan")
    within = abs(est - 0.4) <= 0.05 * 0.4
    worked = FrictionEstimator(gamma=0.8, mu_measured_prev=0.5).update((3.0, 0.0, 10.0)).estimate
    report(8, "friction estimation", summary.completed and within and worked == 0.46,
           f"recursive filter after 200 sliding ticks: {est:.4f} vs 0.4 (+-5%, noise 0.5 N); "
           f"two-tap filter (0.8, 0.5, 0.3) -> {worked!r} (expect 0.46)")


def test_09_timing(scenario, report):
    stance = load(FOUR_CONTACT)
    contacts = [c.build(c.mode, RunConfig().sign) for c in stance.contacts]
    b = assemble(stance.mass, stance.gravity, contacts)
    problem = augment(b, _target(b, stance.com))
    solver = ChebySolver()
    prev = solver.solve(problem)
    warm = []
    for _ in range(2000):
        prev = solver.solve(problem, solver.warm_start(prev, problem))
        warm.append(prev.solve_time)
    med = statistics.median(warm) * 1e3

    runner = Runner(scenario)
    steps = [runner.step().step_time for _ in range(scenario.total_ticks)]
    mean_step = statistics.fmean(steps) * 1e3
    p99_step = float(np.percentile(steps, 99)) * 1e3
    report(9, "solve timing", med <= 2.0 and mean_step <= 5.0,
           f"4-contact warm median {med:.3f} ms over 2000 solves (limit 2 ms); "
           f"scenario tick mean {mean_step:.3f} ms (limit 5 ms), p99 {p99_step:.3f} ms")


def test_10_deterministic_traces(scenario, report):
    texts = []
    for _ in range(2):
        rows, summary = run(scenario, RunConfig(seed=7))
        texts.append((trace.to_csv(rows, scenario).encode(),
                      trace.to_json(rows, scenario, summary).encode()))
    same = texts[0] == texts[1]
    report(10, "deterministic traces", same,
           f"two seeded runs: csv {len(texts[0][0])} bytes, json {len(texts[0][1])} bytes, identical={same}")
