"""Cross-checks of the QP path against the oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from chebalance.cheby import ChebySolver, Scaling, Weights, augment
from chebalance.contacts import Contact, Mode, SignConvention, assemble
from chebalance.corpus import random_stance
from chebalance.harness import Runner, RunConfig, Scenario
from chebalance.oracle import OracleError, ball_sample, chebyshev_lp, stance_polytope, support_polygon_check

RADIUS_RTOL = 1e-6
EQUILIBRIUM_TOL = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _equilibrium_residual(mass, g, contacts: Sequence[Contact], y) -> float:
    """Newton-Euler residual recomputed term by term from the decision vector."""
    com = y[:3]
    fg = np.array([0.0, 0.0, -mass * g])
    total_f = fg.copy()
    total_m = np.cross(com, fg)
    for k, c in enumerate([c for c in contacts if c.active]):
        f = y[3 + 6 * k:6 + 6 * k]
        tau = y[6 + 6 * k:9 + 6 * k]
        total_f += f
        total_m += np.cross(c.position, f) + tau
    return float(max(np.max(np.abs(total_f)), np.max(np.abs(total_m))))


def validate_stance(mass: float, g: float, contacts: Sequence[Contact], label: str = "stance",
                    scaling: Optional[Scaling] = None, corrupt_row=None, samples: int = 10_000,
                    seed: int = 0) -> List[Check]:
    scaling = scaling or Scaling()
    blocks = assemble(mass, g, contacts)
    problem = augment(blocks, weights=Weights.zero(), scaling=scaling)
    if corrupt_row is not None:
        j, factor = corrupt_row
        problem.G_star[int(j), :-1] *= factor
    sol = ChebySolver().solve(problem)
    checks = [Check(f"{label}: qp status", sol.optimal, sol.status.value)]

    poly, _ = stance_polytope(blocks, problem.scale)
    try:
        _, r_lp = chebyshev_lp(poly)
        lp_ok = True
    except OracleError as e:
        lp_ok, r_lp = False, None
        checks.append(Check(f"{label}: oracle LP", not sol.optimal, f"oracle reports {e}"))
    if not sol.optimal or not lp_ok:
        return checks

    err = abs(sol.radius - r_lp) / max(abs(r_lp), 1e-12)
    checks.append(Check(f"{label}: radius vs LP oracle", err <= RADIUS_RTOL,
                        f"qp {sol.radius:.12g} lp {r_lp:.12g} rel err {err:.3g}"))
    res = _equilibrium_residual(mass, g, contacts, sol.y)
    checks.append(Check(f"{label}: equilibrium", res <= EQUILIBRIUM_TOL, f"max residual {res:.3g}"))
    rep = ball_sample(blocks, sol, samples=samples, seed=seed)
    checks.append(Check(f"{label}: ball sample", rep.violations == 0,
                        f"{rep.violations} violations in {rep.samples} probes"))
    active = [c for c in contacts if c.active]
    if all(c.mode is Mode.FIXED for c in active):
        try:
            sp = support_polygon_check(active, sol.com)
        except OracleError:
            pass
        else:
            checks.append(Check(f"{label}: hull margin", sp.margin >= 0.0, f"margin {sp.margin:.6g} m"))
    return checks


def scenario_stances(scenario: Scenario, sign: SignConvention = SignConvention.OPPOSE_VELOCITY):
    """``(label, contacts)`` pairs: the declared stance, or the first tick of every state."""
    if not scenario.states:
        contacts = [c.build(c.mode, sign) for c in scenario.contacts]
        return [("stance", contacts)]
    runner = Runner(scenario, RunConfig(sign=sign))
    out = []
    tick = 0
    for st in scenario.states:
        _, _, contacts = runner.stance(tick)
        out.append((f"state {st.name}", contacts))
        tick += st.duration_ticks
    return out


def validate_scenario(scenario: Scenario, sign=SignConvention.OPPOSE_VELOCITY, scaling=None,
                      samples: int = 10_000) -> List[Check]:
    checks = []
    for label, contacts in scenario_stances(scenario, sign):
        checks += validate_stance(scenario.mass, scenario.gravity, contacts, label, scaling,
                                  scenario.corrupt_row, samples)
    return checks


def validate_random(count: int, seed: int = 0, samples: int = 1000, scaling=None) -> List[Check]:
    """Random feasible stances; infeasible draws (per the oracle) are skipped and redrawn."""
    rng = np.random.default_rng(seed)
    checks = []
    done = 0
    while done < count:
        st = random_stance(rng)
        blocks = assemble(st.mass, st.gravity, st.contacts)
        poly, _ = stance_polytope(blocks, (scaling or Scaling()).vector(blocks.contact_count))
        try:
            chebyshev_lp(poly, check=False)
        except OracleError:
            continue
        checks += validate_stance(st.mass, st.gravity, st.contacts, f"random {done}", scaling,
                                  samples=samples, seed=done)
        done += 1
    return checks
