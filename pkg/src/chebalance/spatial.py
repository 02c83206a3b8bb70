"""Frame-aware 3-D / 6-D algebra: cross maps, rotations and wrench transforms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class FrameError(ValueError):
    """Raised when wrenches expressed in different frames are combined."""


@dataclass(frozen=True)
class Frame:
    """Either the world frame or the local frame of one contact."""

    contact: Optional[str] = None

    @property
    def is_world(self) -> bool:
        return self.contact is None

    @classmethod
    def local(cls, contact_id: str) -> "Frame":
        return cls(str(contact_id))

    def __str__(self) -> str:
        return "world" if self.is_world else f"local:{self.contact}"


WORLD = Frame()


def cross_mat(v) -> np.ndarray:
    """Skew-symmetric matrix such that ``cross_mat(v) @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation matrix of ``angle`` radians about ``axis`` (Rodrigues)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    k = cross_mat(axis / n)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def is_rotation(R, tol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(np.allclose(R.T @ R, np.eye(3), atol=tol) and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True, eq=False)
class Wrench:
    force: np.ndarray
    torque: np.ndarray
    frame: Frame = WORLD

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float).reshape(3))

    @classmethod
    def from_vector(cls, w, frame: Frame = WORLD) -> "Wrench":
        w = np.asarray(w, dtype=float)
        return cls(w[:3], w[3:6], frame)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    def _check(self, other: "Wrench") -> None:
        if self.frame != other.frame:
            raise FrameError(f"cannot combine wrenches in frames {self.frame} and {other.frame}")

    def __add__(self, other: "Wrench") -> "Wrench":
        self._check(other)
        return Wrench(self.force + other.force, self.torque + other.torque, self.frame)

    def __sub__(self, other: "Wrench") -> "Wrench":
        self._check(other)
        return Wrench(self.force - other.force, self.torque - other.torque, self.frame)

    def __mul__(self, k: float) -> "Wrench":
        return Wrench(k * self.force, k * self.torque, self.frame)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Wrench(force={self.force.tolist()}, torque={self.torque.tolist()}, frame={self.frame})"


@dataclass(frozen=True, eq=False)
class WrenchTransform:
    """Pose of a local contact frame: ``rotation`` maps local axes to world, ``origin`` in m."""

    rotation: np.ndarray
    origin: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if not is_rotation(R):
            raise ValueError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "WrenchTransform":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        """6x6 map from a local wrench to the world wrench about the world origin."""
        R = self.rotation
        M = np.zeros((6, 6))
        M[:3, :3] = R
        M[3:, :3] = cross_mat(self.origin) @ R
        M[3:, 3:] = R
        return M

    def rotation6(self) -> np.ndarray:
        """Block-diagonal ``diag(R, R)``: local wrench to world axes, same reference point."""
        M = np.zeros((6, 6))
        M[:3, :3] = self.rotation
        M[3:, 3:] = self.rotation
        return M


def to_world(w: Wrench, t: WrenchTransform) -> Wrench:
    """Express a local contact wrench in the world frame, moments about the world origin."""
    if w.frame.is_world:
        raise FrameError("wrench is already expressed in the world frame")
    f = t.rotation @ w.force
    tau = np.cross(t.origin, f) + t.rotation @ w.torque
    return Wrench(f, tau, WORLD)


def to_local(w: Wrench, t: WrenchTransform, contact_id: str) -> Wrench:
    """Inverse of :func:`to_world`."""
    if not w.frame.is_world:
        raise FrameError("wrench must be expressed in the world frame")
    RT = t.rotation.T
    f = RT @ w.force
    tau = RT @ (w.torque - np.cross(t.origin, w.force))
    return Wrench(f, tau, Frame.local(contact_id))


def gravity_wrench(mass: float, g: float, com) -> Wrench:
    """Gravity wrench about the world origin; force is ``(0, 0, -mass * g)``."""
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}")
    f = np.array([0.0, 0.0, -mass * g])
    return Wrench(f, np.cross(np.asarray(com, dtype=float), f), WORLD)
