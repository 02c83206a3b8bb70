"""Contact patches and the constraint blocks they contribute to the balance QP.

Decision vector layout: ``Y = [c, W_1, ..., W_l]`` where ``c`` is the CoM and
each ``W_i = [f, tau]`` is the contact wrench in world axes, taken about the
contact point. Inactive contacts have no columns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from chebalance.spatial import WrenchTransform, cross_mat


class Mode(str, enum.Enum):
    FIXED = "fixed"
    SLIDING = "sliding"
    INACTIVE = "inactive"


class SignConvention(str, enum.Enum):
    # tangential force along the sliding velocity (raw sign of the alpha terms)
    ALONG_VELOCITY = "paper"
    # Coulomb friction opposing the contact's own sliding
    OPPOSE_VELOCITY = "oppose"


class ContactError(ValueError):
    pass


@dataclass(frozen=True)
class ContactLimits:
    mu: float = 0.5
    sigma_x: float = 0.0
    sigma_y: float = 0.0
    fz_min: float = 0.0
    fz_max: float = 1000.0
    tz_min: float = -10.0
    tz_max: float = 10.0

    def __post_init__(self):
        if self.mu < 0:
            raise ContactError(f"mu must be non-negative, got {self.mu}")
        if self.sigma_x < 0 or self.sigma_y < 0:
            raise ContactError("sigma_x and sigma_y must be non-negative")
        if self.fz_min < 0 or not self.fz_max > self.fz_min:
            raise ContactError(f"need 0 <= fz_min < fz_max, got [{self.fz_min}, {self.fz_max}]")
        if not self.tz_min <= 0 <= self.tz_max:
            raise ContactError(f"need tz_min <= 0 <= tz_max, got [{self.tz_min}, {self.tz_max}]")


@dataclass(frozen=True, eq=False)
class SlidingSpec:
    velocity_tangent: np.ndarray
    mu_dynamic: float
    fz_des: float
    sign_convention: SignConvention = SignConvention.OPPOSE_VELOCITY

    def __post_init__(self):
        v = np.asarray(self.velocity_tangent, dtype=float).reshape(2)
        object.__setattr__(self, "velocity_tangent", v)
        object.__setattr__(self, "sign_convention", SignConvention(self.sign_convention))
        if not np.linalg.norm(v) > 0:
            raise ContactError("sliding requires a nonzero tangential velocity")
        if self.mu_dynamic < 0:
            raise ContactError(f"mu_dynamic must be non-negative, got {self.mu_dynamic}")

    def direction(self) -> np.ndarray:
        """Unit direction of the tangential friction force in the contact plane."""
        alpha = self.velocity_tangent / np.linalg.norm(self.velocity_tangent)
        if self.sign_convention is SignConvention.OPPOSE_VELOCITY:
            alpha = -alpha
        return alpha


@dataclass(frozen=True, eq=False)
class Contact:
    id: str
    transform: WrenchTransform
    mode: Mode = Mode.FIXED
    limits: ContactLimits = field(default_factory=ContactLimits)
    sliding: Optional[SlidingSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.SLIDING:
            if self.sliding is None:
                raise ContactError(f"contact {self.id!r}: sliding mode needs a SlidingSpec")
            fz = self.sliding.fz_des
            if not self.limits.fz_min <= fz <= self.limits.fz_max:
                raise ContactError(
                    f"contact {self.id!r}: fz_des={fz} outside [{self.limits.fz_min}, {self.limits.fz_max}]"
                )

    @property
    def active(self) -> bool:
        return self.mode is not Mode.INACTIVE

    @property
    def position(self) -> np.ndarray:
        return self.transform.origin

    @property
    def rotation(self) -> np.ndarray:
        return self.transform.rotation

    def with_mode(self, mode: Mode, sliding: Optional[SlidingSpec] = None) -> "Contact":
        return replace(self, mode=Mode(mode), sliding=sliding if Mode(mode) is Mode.SLIDING else None)


FIXED_LABELS = (
    "fx<=mu*fz", "-fx<=mu*fz", "fy<=mu*fz", "-fy<=mu*fz", "fz>=fz_min", "fz<=fz_max",
    "tx<=sy*fz", "-tx<=sy*fz", "ty<=sx*fz", "-ty<=sx*fz", "tz>=tz_min", "tz<=tz_max",
)
SLIDING_LABELS = FIXED_LABELS[6:]


@dataclass(frozen=True, eq=False)
class ConstraintBlocks:
    """Stacked equality ``A_eq Y = b_eq`` and inequality ``G_ineq Y <= h_ineq`` rows."""

    A_eq: np.ndarray
    b_eq: np.ndarray
    G_ineq: np.ndarray
    h_ineq: np.ndarray
    row_labels: List[str]
    eq_labels: List[str]
    contacts: List[Contact]
    mass: float
    gravity: float

    @property
    def n_vars(self) -> int:
        return self.A_eq.shape[1]

    @property
    def contact_count(self) -> int:
        return len(self.contacts)

    def columns(self, contact_id: str) -> slice:
        for k, c in enumerate(self.contacts):
            if c.id == contact_id:
                return slice(3 + 6 * k, 9 + 6 * k)
        raise KeyError(contact_id)

    def signature(self) -> tuple:
        """Structural identity: same contacts in the same modes give the same matrix shapes."""
        return tuple((c.id, c.mode.value) for c in self.contacts)

    def residuals(self, y) -> tuple:
        y = np.asarray(y, dtype=float)
        return self.A_eq @ y - self.b_eq, self.G_ineq @ y - self.h_ineq


def _active(contacts: Sequence[Contact]) -> List[Contact]:
    return [c for c in contacts if c.active]


def build_equilibrium_block(mass: float, g: float, contacts: Sequence[Contact]):
    """Newton-Euler rows: ``A_g c + sum_i A_c,i W_i = b_g``.

    Returns ``(A_g, b_g, A_c)`` with ``A_c`` of shape ``(6, 6l)``.
    """
    if not mass > 0:
        raise ContactError(f"mass must be positive, got {mass}")
    active = _active(contacts)
    if not active:
        raise ContactError("at least one active contact is required")
    fg = np.array([0.0, 0.0, -mass * g])
    A_g = np.zeros((6, 3))
    # c x fg = -[fg]x c
    A_g[3:, :] = -cross_mat(fg)
    b_g = np.concatenate([-fg, np.zeros(3)])
    A_c = np.zeros((6, 6 * len(active)))
    for k, c in enumerate(active):
        blk = A_c[:, 6 * k:6 * k + 6]
        blk[:3, :3] = np.eye(3)
        blk[3:, :3] = cross_mat(c.position)
        blk[3:, 3:] = np.eye(3)
    return A_g, b_g, A_c


def sliding_local_force(spec: SlidingSpec) -> np.ndarray:
    """Local contact force pinned to the friction-cone surface along the sliding direction."""
    mu_xy = spec.mu_dynamic * spec.direction()
    C = np.array([[1.0, 0.0, -mu_xy[0]], [0.0, 1.0, -mu_xy[1]], [0.0, 0.0, 1.0]])
    K = np.array([0.0, 0.0, spec.fz_des])
    return np.linalg.solve(C, K)


def build_sliding_equality(contact: Contact):
    """Rows ``[I 0] W = R f_local`` fixing the world force of a sliding contact."""
    if contact.mode is not Mode.SLIDING:
        raise ContactError(f"contact {contact.id!r} is not sliding")
    if not np.linalg.norm(contact.sliding.velocity_tangent) > 0:
        raise ContactError(f"contact {contact.id!r}: zero tangential velocity")
    A_sl = np.hstack([np.eye(3), np.zeros((3, 3))])
    b_sl = contact.rotation @ sliding_local_force(contact.sliding)
    return A_sl, b_sl


def _local_fixed_rows(lim: ContactLimits):
    mu, sx, sy = lim.mu, lim.sigma_x, lim.sigma_y
    U = np.zeros((12, 6))
    h = np.zeros(12)
    # force rows on (fx, fy, fz)
    U[0, [0, 2]] = [1.0, -mu]
    U[1, [0, 2]] = [-1.0, -mu]
    U[2, [1, 2]] = [1.0, -mu]
    U[3, [1, 2]] = [-1.0, -mu]
    U[4, 2], h[4] = -1.0, -lim.fz_min
    U[5, 2], h[5] = 1.0, lim.fz_max
    # torque rows
    U[6, [3, 2]] = [1.0, -sy]
    U[7, [3, 2]] = [-1.0, -sy]
    U[8, [4, 2]] = [1.0, -sx]
    U[9, [4, 2]] = [-1.0, -sx]
    U[10, 5], h[10] = -1.0, -lim.tz_min
    U[11, 5], h[11] = 1.0, lim.tz_max
    return U, h


def build_fixed_inequalities(contact: Contact):
    """12 no-slip / no-tilt rows acting on the world-axes wrench of a fixed contact."""
    if contact.mode is not Mode.FIXED:
        raise ContactError(f"contact {contact.id!r} is not fixed")
    U, h = _local_fixed_rows(contact.limits)
    # local = diag(R^T, R^T) world, so rows pick up diag(R, R) on the right transposed
    return U @ contact.transform.rotation6().T, h


def build_sliding_inequalities(contact: Contact):
    """Torque-only rows (anti-tilt and yaw box) for a sliding contact."""
    if contact.mode is not Mode.SLIDING:
        raise ContactError(f"contact {contact.id!r} is not sliding")
    U, h = _local_fixed_rows(contact.limits)
    return U[6:] @ contact.transform.rotation6().T, h[6:]


def assemble(mass: float, g: float, contacts: Sequence[Contact]) -> ConstraintBlocks:
    active = _active(contacts)
    A_g, b_g, A_c = build_equilibrium_block(mass, g, active)
    n = 3 + 6 * len(active)

    eq_rows = [np.hstack([A_g, A_c])]
    eq_rhs = [b_g]
    eq_labels = ["eq:fx", "eq:fy", "eq:fz", "eq:mx", "eq:my", "eq:mz"]
    g_rows, h_rows, labels = [], [], []
    for k, c in enumerate(active):
        cols = slice(3 + 6 * k, 9 + 6 * k)
        if c.mode is Mode.SLIDING:
            A_sl, b_sl = build_sliding_equality(c)
            row = np.zeros((3, n))
            row[:, cols] = A_sl
            eq_rows.append(row)
            eq_rhs.append(b_sl)
            eq_labels += [f"{c.id}:slide_fx", f"{c.id}:slide_fy", f"{c.id}:slide_fz"]
            Psi, h = build_sliding_inequalities(c)
            names = SLIDING_LABELS
        else:
            Psi, h = build_fixed_inequalities(c)
            names = FIXED_LABELS
        row = np.zeros((Psi.shape[0], n))
        row[:, cols] = Psi
        g_rows.append(row)
        h_rows.append(h)
        labels += [f"{c.id}:{name}" for name in names]

    return ConstraintBlocks(
        A_eq=np.vstack(eq_rows),
        b_eq=np.concatenate(eq_rhs),
        G_ineq=np.vstack(g_rows),
        h_ineq=np.concatenate(h_rows),
        row_labels=labels,
        eq_labels=eq_labels,
        contacts=active,
        mass=float(mass),
        gravity=float(g),
    )
