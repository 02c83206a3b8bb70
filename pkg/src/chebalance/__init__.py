"""Multi-contact balance via a Chebyshev-center QP.

Computes a safe CoM position, a per-contact wrench distribution and a
safety radius for any mix of fixed and sliding unilateral contacts.
"""

from chebalance.spatial import Frame, Wrench, WrenchTransform, cross_mat, gravity_wrench, to_world
from chebalance.contacts import Contact, ContactLimits, Mode, SlidingSpec, assemble
from chebalance.cheby import ChebySolution, ChebySolver, Weights, augment, solve, wrench_range
from chebalance.friction import FrictionEstimator

__version__ = "0.1.0"

__all__ = [
    "ChebySolution",
    "ChebySolver",
    "Contact",
    "ContactLimits",
    "Frame",
    "FrictionEstimator",
    "Mode",
    "SlidingSpec",
    "Weights",
    "Wrench",
    "WrenchTransform",
    "assemble",
    "augment",
    "cross_mat",
    "gravity_wrench",
    "solve",
    "to_world",
    "wrench_range",
]
