"""Chebyshev QP: the balance constraints augmented with a safety radius.

The decision vector is scaled column-wise (CoM by a length, forces and
torques by characteristic magnitudes) before row norms are taken, so that
one radius is meaningful across mixed units. The solver works on
``X = [Y / s, r]``; outputs are unscaled back to SI.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from chebalance.contacts import ConstraintBlocks
from chebalance.qp import ActiveSetQP, QPStatus
from chebalance.spatial import WORLD, Frame, Wrench

Status = QPStatus


@dataclass(frozen=True)
class Weights:
    """Diagonal tracking weights on the scaled decision vector."""

    com: float = 1.0
    force: float = 1e-3
    torque: float = 1e-3
    # radius weight relative to the smallest nonzero tracked weight
    radius_ratio: float = 1e-6

    @classmethod
    def zero(cls) -> "Weights":
        """Pure radius maximization."""
        return cls(0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("com", "force", "torque", "radius_ratio"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name!r} must be non-negative")


@dataclass(frozen=True)
class Scaling:
    force: float = 100.0  # N
    torque: float = 10.0  # N m
    length: float = 1.0  # m

    def __post_init__(self):
        for name in ("force", "torque", "length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"scale {name!r} must be positive")

    def vector(self, contact_count: int) -> np.ndarray:
        per = [self.force] * 3 + [self.torque] * 3
        return np.array([self.length] * 3 + per * contact_count)


@dataclass(frozen=True, eq=False)
class ChebyProblem:
    A_star: np.ndarray
    b_eq: np.ndarray
    G_star: np.ndarray
    h_star: np.ndarray
    P: np.ndarray
    q: np.ndarray
    xi: np.ndarray
    scale: np.ndarray
    blocks: ConstraintBlocks
    x_des: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.q.size

    @property
    def G(self) -> np.ndarray:
        """Scaled inequality rows without the radius column."""
        return self.G_star[:-1, :-1]

    @property
    def h(self) -> np.ndarray:
        return self.h_star[:-1]

    def signature(self) -> tuple:
        return (self.blocks.signature(), self.A_star.shape, self.G_star.shape)


@dataclass(eq=False)
class ChebySolution:
    status: Status
    com: np.ndarray
    wrenches: Dict[str, Wrench]
    radius: float
    objective: float
    solve_time: float
    y: np.ndarray  # physical decision vector [c, W_1..W_l], W_i about the contact point
    x: np.ndarray  # scaled solver vector [Y/s, r]
    contact_ids: List[str]
    iterations: int = 0
    phase1_iterations: int = 0
    active: List[int] = field(default_factory=list)
    warm: bool = False
    fallback: bool = False
    signature: tuple = ()
    lam: Optional[np.ndarray] = None
    max_violation: float = 0.0
    scale: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def contact_wrench(self, contact_id: str) -> np.ndarray:
        """World-axes wrench of one contact, torque about the contact point."""
        k = self.contact_ids.index(contact_id)
        return self.y[3 + 6 * k:9 + 6 * k].copy()


@dataclass(frozen=True)
class WrenchRange:
    r_w: float
    contact_count: int


@dataclass(frozen=True, eq=False)
class WarmSeed:
    x0: Optional[np.ndarray]
    working: List[int]
    fallback: bool


class StructureError(ValueError):
    pass


def augment(blocks: ConstraintBlocks, y_des=None, weights: Optional[Weights] = None,
            scaling: Optional[Scaling] = None, q_diag=None) -> ChebyProblem:
    """Build the Chebyshev QP from constraint blocks and tracking targets.

    ``y_des`` is the physical target for ``Y`` (defaults to zeros). ``q_diag``,
    when given, overrides ``weights`` with an explicit diagonal over ``X``.
    """
    weights = Weights() if weights is None else weights
    scaling = Scaling() if scaling is None else scaling
    n = blocks.n_vars
    s = scaling.vector(blocks.contact_count)
    y_des = np.zeros(n) if y_des is None else np.asarray(y_des, dtype=float)
    if y_des.shape != (n,):
        raise StructureError(f"target has shape {y_des.shape}, expected ({n},)")

    A_star, G_star, h_star, xi = _radius_rows(blocks.A_eq * s, blocks.G_ineq * s, blocks.h_ineq)

    if q_diag is None:
        per = [weights.force] * 3 + [weights.torque] * 3
        qy = np.array([weights.com] * 3 + per * blocks.contact_count)
        nz = qy[qy > 0]
        q_r = weights.radius_ratio * nz.min() if nz.size else 0.0
        q_diag = np.concatenate([qy, [q_r]])
    else:
        q_diag = np.asarray(q_diag, dtype=float)
        if q_diag.shape != (n + 1,):
            raise StructureError(f"weight diagonal has shape {q_diag.shape}, expected ({n + 1},)")
        if np.any(q_diag < 0):
            raise ValueError("weights must be non-negative")

    x_des = np.concatenate([y_des / s, [0.0]])
    P = np.diag(2.0 * q_diag)
    q = -2.0 * q_diag * x_des
    q[n] -= 1.0
    return ChebyProblem(A_star, blocks.b_eq.copy(), G_star, h_star, P, q, xi, s, blocks, x_des)


def _radius_rows(A, G, h):
    """Append the radius column (row norms) and the ``r >= 0`` row."""
    n = G.shape[1]
    xi = np.linalg.norm(G, axis=1)
    m = G.shape[0]
    G_star = np.zeros((m + 1, n + 1))
    G_star[:m, :n] = G
    G_star[:m, n] = xi
    G_star[m, n] = -1.0
    h_star = np.concatenate([h, [0.0]])
    A_star = np.hstack([A, np.zeros((A.shape[0], 1))])
    return A_star, G_star, h_star, xi


def chebyshev_center(G, h, A=None, b=None, max_iter: int = 200):
    """Largest ball in ``{G x <= h}`` centred on ``{A x = b}``, through the QP path.

    Returns ``(center, radius, status)``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).reshape(-1)
    n = G.shape[1]
    A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
    A_star, G_star, h_star, _ = _radius_rows(A, G, h)
    q = np.zeros(n + 1)
    q[n] = -1.0
    res = ActiveSetQP(max_iter=max_iter).solve(np.zeros((n + 1, n + 1)), q, A_star, b, G_star, h_star)
    return res.x[:n], float(res.x[n]), res.status


class ChebySolver:
    """Solver workspace; use one instance per thread."""

    def __init__(self, max_iter: int = 200, feas_tol: float = 1e-8):
        self.qp = ActiveSetQP(max_iter=max_iter, feas_tol=feas_tol)

    def warm_start(self, previous: Optional[ChebySolution], problem: ChebyProblem) -> WarmSeed:
        if previous is None or not previous.optimal or previous.signature != problem.signature():
            return WarmSeed(None, [], fallback=previous is not None)
        return WarmSeed(previous.x.copy(), list(previous.active), fallback=False)

    def solve(self, problem: ChebyProblem, seed: Optional[WarmSeed] = None) -> ChebySolution:
        x0 = seed.x0 if seed is not None else None
        working = seed.working if seed is not None else None
        t0 = time.perf_counter()
        res = self.qp.solve(problem.P, problem.q, problem.A_star, problem.b_eq,
                            problem.G_star, problem.h_star, x0=x0, working=working)
        elapsed = time.perf_counter() - t0
        return _extract(problem, res, elapsed, fallback=bool(seed is not None and seed.fallback))


def _extract(problem: ChebyProblem, res, elapsed: float, fallback: bool) -> ChebySolution:
    blocks = problem.blocks
    n = blocks.n_vars
    x = res.x
    y = x[:n] * problem.scale
    ids = [c.id for c in blocks.contacts]
    wrenches = {}
    for k, c in enumerate(blocks.contacts):
        w = y[3 + 6 * k:9 + 6 * k]
        f = w[:3]
        wrenches[c.id] = Wrench(f, np.cross(c.position, f) + w[3:], WORLD)
    objective = float(0.5 * x @ problem.P @ x + problem.q @ x)
    return ChebySolution(
        status=res.status,
        com=y[:3].copy(),
        wrenches=wrenches,
        radius=float(x[n]),
        objective=objective,
        solve_time=elapsed,
        y=y,
        x=x.copy(),
        contact_ids=ids,
        iterations=res.iterations,
        phase1_iterations=res.phase1_iterations,
        active=list(res.active),
        warm=res.warm,
        fallback=fallback,
        signature=problem.signature(),
        lam=res.lam,
        max_violation=res.max_violation,
        scale=problem.scale.copy(),
    )


def solve(problem: ChebyProblem, seed: Optional[WarmSeed] = None, max_iter: int = 200) -> ChebySolution:
    return ChebySolver(max_iter=max_iter).solve(problem, seed)


def wrench_range(sol: ChebySolution, contact_count: Optional[int] = None) -> WrenchRange:
    """Radius of the ball of admissible total contact wrenches: ``l * r``."""
    if not sol.optimal:
        raise ValueError(f"wrench range needs an optimal solution, got {sol.status.value}")
    l = len(sol.contact_ids) if contact_count is None else int(contact_count)
    return WrenchRange(l * sol.radius, l)


def kkt_residuals(problem: ChebyProblem, sol: ChebySolution) -> dict:
    """Primal/dual feasibility and complementarity of a returned solution."""
    x = sol.x
    lam = sol.lam if sol.lam is not None else np.zeros(problem.G_star.shape[0])
    g = problem.P @ x + problem.q + problem.G_star.T @ lam
    # equality multipliers recovered by least squares on the stationarity residual
    if problem.A_star.shape[0]:
        nu = np.linalg.lstsq(problem.A_star.T, -g, rcond=None)[0]
        g = g + problem.A_star.T @ nu
    slack = problem.h_star - problem.G_star @ x
    return {
        "stationarity": float(np.max(np.abs(g))),
        "primal_eq": float(np.max(np.abs(problem.A_star @ x - problem.b_eq), initial=0.0)),
        "primal_ineq": float(max(0.0, -np.min(slack))),
        "dual": float(max(0.0, -np.min(lam, initial=0.0))),
        "complementarity": float(np.max(np.abs(lam * slack), initial=0.0)),
    }


def local_frame_wrench(sol: ChebySolution, contact) -> Wrench:
    """Wrench of ``contact`` in its own local frame (torque about the contact point)."""
    w = sol.contact_wrench(contact.id)
    RT = contact.rotation.T
    return Wrench(RT @ w[:3], RT @ w[3:], Frame.local(contact.id))
