"""Random stance generators for property tests and corpus validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from chebalance.contacts import Contact, ContactLimits, Mode, SignConvention, SlidingSpec
from chebalance.spatial import WrenchTransform, axis_angle


@dataclass(frozen=True, eq=False)
class Stance:
    mass: float
    gravity: float
    contacts: List[Contact]
    com_target: np.ndarray


def _frame_facing(normal, yaw: float) -> np.ndarray:
    """Rotation whose local z axis is ``normal``, spun by ``yaw`` about it."""
    z = np.asarray(normal, dtype=float)
    z = z / np.linalg.norm(z)
    ref = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = ref - (ref @ z) * z
    x /= np.linalg.norm(x)
    R = np.column_stack([x, np.cross(z, x), z])
    return R @ axis_angle([0.0, 0.0, 1.0], yaw)


def _limits(rng, hand: bool) -> ContactLimits:
    return ContactLimits(
        mu=float(rng.uniform(0.3, 0.8)),
        sigma_x=float(rng.uniform(0.01, 0.05) if hand else rng.uniform(0.05, 0.12)),
        sigma_y=float(rng.uniform(0.01, 0.05) if hand else rng.uniform(0.03, 0.07)),
        fz_min=0.0,
        fz_max=float(rng.uniform(300.0, 1000.0)),
        tz_min=-float(rng.uniform(2.0, 20.0)),
        tz_max=float(rng.uniform(2.0, 20.0)),
    )


def random_stance(rng: np.random.Generator, n_contacts=None, p_sliding: float = 0.3,
                  sign: SignConvention = SignConvention.OPPOSE_VELOCITY) -> Stance:
    """2-4 non-coplanar contacts: tilted feet plus hands on walls, mixed modes."""
    l = int(rng.integers(2, 5)) if n_contacts is None else int(n_contacts)
    mass = float(rng.uniform(20.0, 60.0))
    g = 9.81
    contacts = []
    for k in range(l):
        hand = k >= 2
        if not hand:
            side = 1.0 if k == 0 else -1.0
            pos = np.array([rng.uniform(-0.15, 0.15), side * rng.uniform(0.05, 0.15), rng.uniform(0.0, 0.2)])
            tilt_axis = np.array([np.cos(a := rng.uniform(0, 2 * np.pi)), np.sin(a), 0.0])
            normal = axis_angle(tilt_axis, rng.uniform(0.0, np.radians(25.0))) @ [0.0, 0.0, 1.0]
        else:
            side = 1.0 if k == 2 else -1.0
            pos = np.array([rng.uniform(-0.2, 0.4), side * rng.uniform(0.25, 0.45), rng.uniform(0.6, 1.2)])
            inward = np.array([0.0, -side, 0.0]) + rng.normal(0.0, 0.4, 3)
            normal = inward / np.linalg.norm(inward)
        R = _frame_facing(normal, rng.uniform(-np.pi, np.pi))
        lim = _limits(rng, hand)
        mode = Mode.SLIDING if rng.uniform() < p_sliding else Mode.FIXED
        sliding = None
        if mode is Mode.SLIDING:
            v = rng.normal(size=2)
            fz = float(rng.uniform(5.0, 40.0) if hand else rng.uniform(40.0, 0.4 * mass * g))
            sliding = SlidingSpec(v, float(rng.uniform(0.1, 0.6)), fz, sign)
        contacts.append(Contact(f"c{k}", WrenchTransform(R, pos), mode, lim, sliding))
    com = np.array([0.0, 0.0, 0.8])
    return Stance(mass, g, contacts, com)


def random_coplanar_stance(rng: np.random.Generator, n_contacts=None) -> Stance:
    """2-4 fixed contacts on the plane z = 0, yawed at random."""
    l = int(rng.integers(2, 5)) if n_contacts is None else int(n_contacts)
    contacts = []
    for k in range(l):
        pos = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0])
        R = axis_angle([0.0, 0.0, 1.0], rng.uniform(-np.pi, np.pi))
        lim = _limits(rng, hand=False)
        contacts.append(Contact(f"c{k}", WrenchTransform(R, pos), Mode.FIXED, lim))
    com = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.8])
    return Stance(float(rng.uniform(20.0, 60.0)), 9.81, contacts, com)
