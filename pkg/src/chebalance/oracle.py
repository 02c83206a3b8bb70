"""Brute-force ground truth used by tests and ``validate``; never on the solve path.

Shares no code with the QP path: the LP goes through HiGHS, row norms and
residuals are recomputed here from the raw blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from shapely.geometry import MultiPoint, Point

from chebalance.contacts import Contact, ConstraintBlocks, Mode


class OracleError(ValueError):
    pass


class UnboundedPolytope(OracleError):
    pass


class EmptyPolytope(OracleError):
    pass


@dataclass(frozen=True, eq=False)
class HPolytope:
    """``{x : normals @ x <= offsets, eq_normals @ x == eq_offsets}``."""

    normals: np.ndarray
    offsets: np.ndarray
    eq_normals: Optional[np.ndarray] = None
    eq_offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        N = np.atleast_2d(np.asarray(self.normals, dtype=float))
        o = np.asarray(self.offsets, dtype=float).reshape(-1)
        if N.shape[0] == 0 or N.shape[0] != o.size:
            raise OracleError("need a nonempty, consistent list of rows")
        object.__setattr__(self, "normals", N)
        object.__setattr__(self, "offsets", o)
        if self.eq_normals is not None:
            E = np.asarray(self.eq_normals, dtype=float).reshape(-1, N.shape[1])
            object.__setattr__(self, "eq_normals", E)
            object.__setattr__(self, "eq_offsets", np.asarray(self.eq_offsets, dtype=float).reshape(-1))

    @classmethod
    def from_rows(cls, rows: Sequence[tuple]) -> "HPolytope":
        return cls(np.array([r[0] for r in rows], dtype=float), np.array([r[1] for r in rows], dtype=float))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=float)
        ok = np.all(self.normals @ x <= self.offsets + tol)
        if self.eq_normals is not None and self.eq_normals.shape[0]:
            ok = ok and np.all(np.abs(self.eq_normals @ x - self.eq_offsets) <= tol)
        return bool(ok)


@dataclass(frozen=True, eq=False)
class VPolytope:
    vertices: np.ndarray


def _eq(p: HPolytope):
    if p.eq_normals is None or p.eq_normals.shape[0] == 0:
        return None, None
    return p.eq_normals, p.eq_offsets


def check_bounded(p: HPolytope) -> None:
    """Raise if the recession cone ``{d : E d = 0, N d <= 0}`` is not ``{0}``."""
    E, _ = _eq(p)
    M = p.normals if E is None else np.vstack([p.normals, E])
    if np.linalg.matrix_rank(M) < p.dim:
        raise UnboundedPolytope("polytope contains a line")
    # pointed cone: nonzero iff some N d can be made strictly negative
    m, n = p.normals.shape
    c = np.concatenate([np.zeros(n), -np.ones(m)])
    A_eq = np.hstack([p.normals, np.eye(m)])
    b_eq = np.zeros(m)
    if E is not None:
        A_eq = np.vstack([A_eq, np.hstack([E, np.zeros((E.shape[0], m))])])
        b_eq = np.zeros(A_eq.shape[0])
    bounds = [(None, None)] * n + [(0.0, 1.0)] * m
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun > 1e-9:
        raise UnboundedPolytope("polytope has a nonzero recession direction")


def chebyshev_lp(p: HPolytope, check: bool = True):
    """Center and radius of the largest Euclidean ball inside the inequality rows.

    The center is constrained to the equality rows, if any.
    """
    if check:
        check_bounded(p)
    N, o = p.normals, p.offsets
    m, n = N.shape
    norms = np.sqrt(np.sum(N * N, axis=1))
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([N, norms[:, None]])
    E, e = _eq(p)
    A_eq = None if E is None else np.hstack([E, np.zeros((E.shape[0], 1))])
    bounds = [(None, None)] * n + [(0.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=o, A_eq=A_eq, b_eq=e, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        raise EmptyPolytope("no point satisfies the rows")
    if res.status == 3:
        raise UnboundedPolytope("radius is unbounded")
    if res.status != 0:
        raise OracleError(f"LP failed: {res.message}")
    return res.x[:n], float(res.x[n])


def stance_polytope(blocks: ConstraintBlocks, scale) -> tuple:
    """H-representation of a stance in scaled coordinates.

    Columns that are identically zero in every row (the CoM height under
    vertical gravity) are dropped; returns ``(polytope, kept_columns)``.
    """
    s = np.asarray(scale, dtype=float)
    G = blocks.G_ineq * s
    A = blocks.A_eq * s
    used = np.nonzero(np.any(G != 0.0, axis=0) | np.any(A != 0.0, axis=0))[0]
    return HPolytope(G[:, used], blocks.h_ineq.copy(), A[:, used], blocks.b_eq.copy()), used


def enumerate_vertices(p: HPolytope, tol: float = 1e-8, max_combinations: int = 2_000_000) -> VPolytope:
    """Naive vertex enumeration over all ``dim``-row subsets (exponential)."""
    N, o = p.normals, p.offsets
    m, n = N.shape
    if n > 6 or m > 60:
        raise OracleError(f"vertex enumeration capped at dim 6 / 60 rows, got dim {n} / {m} rows")
    if p.eq_normals is not None and p.eq_normals.shape[0]:
        raise OracleError("vertex enumeration supports inequality rows only")
    if math.comb(m, n) > max_combinations:
        raise OracleError(f"{math.comb(m, n)} row subsets exceed the cap of {max_combinations}")
    combos = np.array(list(itertools.combinations(range(m), n)), dtype=int)
    if combos.size == 0:
        return VPolytope(np.zeros((0, n)))
    found = []
    for start in range(0, len(combos), 100_000):
        idx = combos[start:start + 100_000]
        M = N[idx]
        rhs = o[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-12
        if not np.any(ok):
            continue
        pts = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = np.all(pts @ N.T <= o + tol, axis=1)
        found.append(pts[feas])
    if not found:
        return VPolytope(np.zeros((0, n)))
    pts = np.vstack(found)
    verts = []
    for v in pts:
        if not any(np.max(np.abs(v - w)) <= tol for w in verts):
            verts.append(v)
    verts.sort(key=lambda v: tuple(np.round(v, 9)))
    return VPolytope(np.array(verts).reshape(-1, n))


@dataclass(frozen=True)
class SupportCheck:
    inside: bool
    margin: float  # m, positive inside


def _patch_corners(c: Contact) -> np.ndarray:
    sx, sy = c.limits.sigma_x, c.limits.sigma_y
    local = np.array([[sx, sy, 0.0], [sx, -sy, 0.0], [-sx, sy, 0.0], [-sx, -sy, 0.0]])
    return c.position + local @ c.rotation.T


def support_polygon_check(contacts: Sequence[Contact], com, tol: float = 1e-9) -> SupportCheck:
    """Signed distance of the CoM ground projection to the support polygon.

    The polygon is the convex hull of the contact patches (their corners).
    """
    fixed = [c for c in contacts if c.mode is Mode.FIXED]
    if not fixed or len(fixed) != len([c for c in contacts if c.active]):
        raise OracleError("support polygon check needs fixed contacts only")
    z0 = fixed[0].position[2]
    for c in fixed:
        if abs(c.position[2] - z0) > tol or np.linalg.norm(c.rotation[:, 2] - [0.0, 0.0, 1.0]) > 1e-9:
            raise OracleError(f"contact {c.id!r} is not on the common horizontal plane")
    corners = np.vstack([_patch_corners(c) for c in fixed])[:, :2]
    hull = MultiPoint([tuple(p) for p in corners]).convex_hull
    pt = Point(float(com[0]), float(com[1]))
    d = hull.exterior.distance(pt) if hull.geom_type == "Polygon" else hull.distance(pt)
    inside = hull.geom_type == "Polygon" and hull.contains(pt)
    on_boundary = d <= tol
    return SupportCheck(inside or on_boundary, float(d if inside else -d))


@dataclass
class BallReport:
    samples: int
    violations: int
    worst: float
    planted_detected: Optional[bool] = None
    details: List[str] = field(default_factory=list)


def ball_sample(blocks: ConstraintBlocks, solution, samples: int = 10_000, seed: int = 0,
                scale=None, tol: float = 1e-8, plant: bool = False) -> BallReport:
    """Probe the inscribed ball around ``solution`` with random directions.

    Checks ``G_j (y + rho a) <= h_j + tol`` for unit ``a`` in scaled decision
    space and ``rho`` in ``[0, r]``. With ``plant`` the probe is also pushed to
    ``1.01 r`` along the normal of the tightest row, which must be caught.
    """
    s = np.asarray(solution.scale if scale is None else scale, dtype=float)
    G = blocks.G_ineq * s
    h = blocks.h_ineq
    y = solution.y / s
    r = float(solution.radius)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((samples, G.shape[1]))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    rho = r * np.sqrt(rng.uniform(0.0, 1.0, samples))
    rho[: samples // 2] = r  # half the probes on the sphere itself
    base = G @ y
    vals = base[None, :] + rho[:, None] * (a @ G.T)
    excess = vals - h[None, :]
    bad = excess > tol
    report = BallReport(samples, int(np.count_nonzero(np.any(bad, axis=1))), float(np.max(excess, initial=-np.inf)))
    if plant:
        norms = np.sqrt(np.sum(G * G, axis=1))
        slack_ratio = np.where(norms > 0, (h - base) / np.where(norms > 0, norms, 1.0), np.inf)
        j = int(np.argmin(slack_ratio))
        probe = y + 1.01 * r * G[j] / norms[j]
        report.planted_detected = bool(np.any(G @ probe - h > tol))
        report.details.append(f"planted probe on row {blocks.row_labels[j]}")
    return report
