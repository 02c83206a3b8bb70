"""Quasi-static scenario player.

A scenario is an ordered list of FSM states, each holding a set of contact
modes and targets for a fixed number of ticks. Every tick builds the stance,
solves the Chebyshev QP (warm-started from the previous tick), feeds noisy
force readings to the friction estimators and records a trace row. QP
outputs are taken as instantaneously achieved.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from chebalance.cheby import ChebySolution, ChebySolver, Scaling, Weights, augment, wrench_range
from chebalance.contacts import (
    Contact,
    ContactLimits,
    Mode,
    SignConvention,
    SlidingSpec,
    assemble,
)
from chebalance.friction import FilterKind, FrictionEstimator
from chebalance.spatial import WrenchTransform, gravity_wrench


class ScenarioError(ValueError):
    pass


# below this tangential speed (m/s) a sliding contact is held fixed for the tick
STILL_SPEED = 1e-9


@dataclass(frozen=True)
class PathSpec:
    """Parametric trajectory in the contact tangent plane, time in ticks from state start.

    ``circle``: radius (m) and period; ``shuttle``: amplitude (m), period and the
    in-plane axis angle (rad); ``line``: constant velocity (m/s) along ``vx, vy``.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        need = {"circle": 2, "shuttle": 3, "line": 2}
        if self.kind not in need:
            raise ScenarioError(f"unknown path kind {self.kind!r}")
        if len(self.params) != need[self.kind]:
            raise ScenarioError(f"path {self.kind!r} takes {need[self.kind]} parameters")
        if self.kind in ("circle", "shuttle") and not self.params[1] > 0:
            raise ScenarioError("path period must be positive")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def position(self, k: float, dt: float) -> np.ndarray:
        if self.kind == "circle":
            r, period = self.params
            th = 2.0 * math.pi * k / period
            return np.array([r * math.cos(th), r * math.sin(th)])
        if self.kind == "shuttle":
            a, period, phi = self.params
            s = a * math.sin(2.0 * math.pi * k / period)
            return np.array([s * math.cos(phi), s * math.sin(phi)])
        return np.array(self.params) * k * dt

    def velocity(self, k: int, dt: float) -> np.ndarray:
        """Central finite difference at the tick rate."""
        return (self.position(k + 1, dt) - self.position(k - 1, dt)) / (2.0 * dt)


@dataclass(frozen=True, eq=False)
class ContactSpec:
    """A contact as declared in a scenario or stance file."""

    id: str
    rotation: np.ndarray
    position: np.ndarray
    mode: Mode = Mode.FIXED
    limits: ContactLimits = field(default_factory=ContactLimits)
    mu_dynamic: Optional[float] = None
    velocity: Optional[np.ndarray] = None
    fz_des: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(2))

    @property
    def dynamic_mu(self) -> float:
        return self.limits.mu if self.mu_dynamic is None else self.mu_dynamic

    def build(self, mode: Mode, sign: SignConvention, offset=None, velocity=None, fz_des=None) -> Contact:
        pos = self.position
        if offset is not None:
            pos = pos + self.rotation @ np.array([offset[0], offset[1], 0.0])
        t = WrenchTransform(self.rotation, pos)
        mode = Mode(mode)
        if mode is not Mode.SLIDING:
            return Contact(self.id, t, mode, self.limits)
        v = self.velocity if velocity is None else velocity
        fz = self.fz_des if fz_des is None else fz_des
        if v is None:
            raise ScenarioError(f"sliding contact {self.id!r} has no velocity or path")
        if fz is None:
            raise ScenarioError(f"sliding contact {self.id!r} has no normal force target")
        return Contact(self.id, t, mode, self.limits, SlidingSpec(v, self.dynamic_mu, fz, sign))


@dataclass(frozen=True, eq=False)
class FsmState:
    name: str
    duration_ticks: int
    contact_modes: Dict[str, Mode]
    com_target: Optional[np.ndarray] = None
    force_targets: Dict[str, float] = field(default_factory=dict)
    sliding_paths: Dict[str, PathSpec] = field(default_factory=dict)


@dataclass(frozen=True)
class EstimatorConfig:
    gamma: float = 0.9
    fz_threshold: float = 5.0
    initial_guess: float = 0.5


@dataclass(eq=False)
class Scenario:
    mass: float
    gravity: float
    contacts: List[ContactSpec]
    states: List[FsmState] = field(default_factory=list)
    com: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.75]))
    noise: float = 0.0
    tick: float = 0.005
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    corrupt_row: Optional[tuple] = None  # (row index, factor), validation negative control

    def contact(self, cid: str) -> ContactSpec:
        for c in self.contacts:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def total_ticks(self) -> int:
        return sum(s.duration_ticks for s in self.states)

    def sliding_ids(self) -> List[str]:
        """Contacts that slide in some state (or in the stance itself), declaration order."""
        ids = {c.id for c in self.contacts if c.mode is Mode.SLIDING}
        for s in self.states:
            ids |= {cid for cid, m in s.contact_modes.items() if m is Mode.SLIDING}
        return [c.id for c in self.contacts if c.id in ids]

    def validate(self) -> None:
        if not self.mass > 0:
            raise ScenarioError("mass must be positive")
        if not self.tick > 0:
            raise ScenarioError("tick must be positive")
        if self.noise < 0:
            raise ScenarioError("noise must be non-negative")
        ids = [c.id for c in self.contacts]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate contact id")
        names = set()
        for s in self.states:
            if s.name in names:
                raise ScenarioError(f"duplicate state name {s.name!r}")
            names.add(s.name)
            if s.duration_ticks <= 0:
                raise ScenarioError(f"state {s.name!r}: duration must be positive")
            for cid in list(s.contact_modes) + list(s.force_targets) + list(s.sliding_paths):
                if cid not in ids:
                    raise ScenarioError(f"state {s.name!r} references unknown contact {cid!r}")
            if not any(m is not Mode.INACTIVE for m in s.contact_modes.values()):
                raise ScenarioError(f"state {s.name!r} has no active contact")

    def state_at(self, tick: int):
        """``(state index, tick within state)`` for a global tick index."""
        k = tick
        for i, s in enumerate(self.states):
            if k < s.duration_ticks:
                return i, k
            k -= s.duration_ticks
        raise IndexError(f"tick {tick} is past the end of the scenario")


@dataclass(frozen=True)
class RunConfig:
    weights: Weights = field(default_factory=Weights)
    scaling: Scaling = field(default_factory=Scaling)
    filter: FilterKind = FilterKind.TWO_TAP
    sign: SignConvention = SignConvention.OPPOSE_VELOCITY
    seed: int = 0
    max_iter: int = 200


@dataclass(eq=False)
class TraceRow:
    tick: int
    state: str
    status: str
    com: np.ndarray
    wrenches: Dict[str, np.ndarray]  # world frame, torque about the origin; zeros when inactive
    radius: float
    r_w: float
    mu_mes: Dict[str, Optional[float]]
    mu_filt: Dict[str, float]
    solve_time: float
    step_time: float
    max_violation: float
    equilibrium_residual: float
    modes: Dict[str, Mode]
    normal_forces: Dict[str, float]  # local f_z, zero when inactive
    targets: Dict[str, float] = field(default_factory=dict)
    transition_violations: List[str] = field(default_factory=list)
    warm: bool = False


@dataclass
class RunSummary:
    ticks: int
    completed: bool
    halt_reason: Optional[str]
    max_equilibrium_residual: float
    max_violation: float
    min_radius: float
    mean_solve_time: float
    max_solve_time: float
    mean_step_time: float


def _violated_labels(blocks, y, tol: float = 1e-6) -> List[str]:
    eq, ineq = blocks.residuals(y)
    labels = [blocks.eq_labels[i] for i in np.nonzero(np.abs(eq) > tol)[0]]
    labels += [blocks.row_labels[i] for i in np.nonzero(ineq > tol)[0]]
    return labels


class Runner:
    """Stateful player for one scenario run; ticks must be stepped in order."""

    def __init__(self, scenario: Scenario, config: Optional[RunConfig] = None):
        scenario.validate()
        if not scenario.states:
            raise ScenarioError("scenario has no states")
        self.scenario = scenario
        self.config = config or RunConfig()
        self.solver = ChebySolver(max_iter=self.config.max_iter)
        self.rng = np.random.default_rng(self.config.seed)
        est = scenario.estimator
        kind = FilterKind(self.config.filter)
        self.estimators = {
            cid: FrictionEstimator(est.gamma, est.fz_threshold, est.initial_guess, kind=kind)
            for cid in scenario.sliding_ids()
        }
        self.previous: Optional[ChebySolution] = None
        self.previous_state: Optional[int] = None
        self.tick = 0
        self.halt_reason: Optional[str] = None

    def stance(self, tick: int):
        """Contacts, CoM target and force targets in effect at ``tick``."""
        sc = self.scenario
        i, k = sc.state_at(tick)
        st = sc.states[i]
        contacts = []
        for spec in sc.contacts:
            mode = st.contact_modes.get(spec.id, Mode.INACTIVE)
            if mode is Mode.SLIDING:
                path = st.sliding_paths.get(spec.id)
                offset = velocity = None
                if path is not None:
                    offset = path.position(k, sc.tick)
                    velocity = path.velocity(k, sc.tick)
                v = velocity if velocity is not None else spec.velocity
                if v is not None and np.linalg.norm(v) <= STILL_SPEED:
                    contacts.append(spec.build(Mode.FIXED, self.config.sign, offset))
                    continue
                contacts.append(spec.build(mode, self.config.sign, offset, velocity,
                                           st.force_targets.get(spec.id)))
            else:
                contacts.append(spec.build(mode, self.config.sign))
        return i, st, contacts

    def _targets(self, st: FsmState, blocks) -> np.ndarray:
        y_des = np.zeros(blocks.n_vars)
        if st.com_target is not None:
            y_des[:3] = st.com_target
        elif self.previous is not None and self.previous.optimal:
            y_des[:3] = self.previous.com
        else:
            y_des[:3] = self.scenario.com
        for k, c in enumerate(blocks.contacts):
            fz = st.force_targets.get(c.id)
            if fz is not None and c.mode is Mode.FIXED:
                y_des[3 + 6 * k:6 + 6 * k] = c.rotation @ np.array([0.0, 0.0, fz])
        return y_des

    def step(self) -> TraceRow:
        t_start = time.perf_counter()
        sc = self.scenario
        tick = self.tick
        i, st, contacts = self.stance(tick)
        blocks = assemble(sc.mass, sc.gravity, contacts)
        problem = augment(blocks, self._targets(st, blocks), self.config.weights, self.config.scaling)

        transition = []
        if self.previous_state is not None and i != self.previous_state and self.previous is not None:
            transition = _violated_labels(blocks, _remap(self.previous, blocks))

        seed = self.solver.warm_start(self.previous, problem)
        sol = self.solver.solve(problem, seed)

        ids = [c.id for c in sc.contacts]
        modes = {c.id: c.mode for c in contacts}
        by_id = {c.id: c for c in blocks.contacts}
        wrenches = {cid: np.zeros(6) for cid in ids}
        normals = {cid: 0.0 for cid in ids}
        mu_mes: Dict[str, Optional[float]] = {cid: None for cid in self.estimators}
        radius = r_w = math.nan
        eq_res = max_viol = math.nan
        if sol.optimal:
            for cid, w in sol.wrenches.items():
                wrenches[cid] = w.vector
                c = by_id[cid]
                f_local = c.rotation.T @ sol.contact_wrench(cid)[:3]
                normals[cid] = float(f_local[2])
                est = self.estimators.get(cid)
                if est is not None and c.mode is Mode.SLIDING:
                    reading = f_local + (self.rng.normal(0.0, sc.noise, 3) if sc.noise > 0 else 0.0)
                    new = est.step(reading)
                    if new is not est:
                        mu_mes[cid] = new.mu_measured_prev
                    self.estimators[cid] = new
            radius = sol.radius
            r_w = wrench_range(sol).r_w
            total = gravity_wrench(sc.mass, sc.gravity, sol.com)
            for w in sol.wrenches.values():
                total = total + w
            eq_res = float(np.max(np.abs(total.vector)))
            eq, ineq = blocks.residuals(sol.y)
            max_viol = float(max(np.max(np.abs(eq)), np.max(ineq, initial=0.0), 0.0))

        targets = {cid: float(f) for cid, f in st.force_targets.items()}
        row = TraceRow(
            tick=tick,
            state=st.name,
            status=sol.status.value,
            com=sol.com.copy() if sol.optimal else np.full(3, math.nan),
            wrenches=wrenches,
            radius=radius,
            r_w=r_w,
            mu_mes=mu_mes,
            mu_filt={cid: e.estimate for cid, e in self.estimators.items()},
            solve_time=sol.solve_time,
            step_time=0.0,
            max_violation=max_viol,
            equilibrium_residual=eq_res,
            modes=modes,
            normal_forces=normals,
            targets=targets,
            transition_violations=transition,
            warm=sol.warm,
        )
        if not sol.optimal:
            y_probe = sol.y
            labels = _violated_labels(blocks, y_probe, tol=1e-8)
            row.transition_violations = transition or labels
            self.halt_reason = (
                f"tick {tick} state {st.name!r}: {sol.status.value}; violated rows: "
                + (", ".join(labels) if labels else "none identified")
            )
        self.previous = sol if sol.optimal else None
        self.previous_state = i
        self.tick += 1
        row.step_time = time.perf_counter() - t_start
        return row


def _remap(previous: ChebySolution, blocks) -> np.ndarray:
    """Previous decision vector laid out on new blocks' columns (absent contacts get zero)."""
    y = np.zeros(blocks.n_vars)
    y[:3] = previous.com
    for k, c in enumerate(blocks.contacts):
        if c.id in previous.contact_ids:
            y[3 + 6 * k:9 + 6 * k] = previous.contact_wrench(c.id)
    return y


def check_feasible_start(scenario: Scenario, config: Optional[RunConfig] = None) -> None:
    """The first state must admit a solution at tick 0."""
    runner = Runner(scenario, config)
    row = runner.step()
    if row.status != "optimal":
        raise ScenarioError(f"first state is not feasible: {runner.halt_reason}")


def run(scenario: Scenario, config: Optional[RunConfig] = None):
    """Play the whole scenario; returns ``(rows, summary)``. Halts on the first non-optimal tick."""
    runner = Runner(scenario, config)
    rows: List[TraceRow] = []
    for _ in range(scenario.total_ticks):
        row = runner.step()
        rows.append(row)
        if row.status != "optimal":
            break
    ok = [r for r in rows if r.status == "optimal"]
    solve_times = [r.solve_time for r in rows]
    summary = RunSummary(
        ticks=len(rows),
        completed=runner.halt_reason is None and len(rows) == scenario.total_ticks,
        halt_reason=runner.halt_reason,
        max_equilibrium_residual=max((r.equilibrium_residual for r in ok), default=math.nan),
        max_violation=max((r.max_violation for r in ok), default=math.nan),
        min_radius=min((r.radius for r in ok), default=math.nan),
        mean_solve_time=float(np.mean(solve_times)) if solve_times else math.nan,
        max_solve_time=max(solve_times, default=math.nan),
        mean_step_time=float(np.mean([r.step_time for r in rows])) if rows else math.nan,
    )
    return rows, summary
