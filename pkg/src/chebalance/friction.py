"""Online dynamic friction estimation for sliding contacts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional


class FilterKind(str, enum.Enum):
    TWO_TAP = "paper"  # blends the previous raw measurement
    RECURSIVE = "recursive"  # exponential smoothing of the filtered value


def measure_mu(f_local) -> float:
    """Tangential-to-normal force ratio of a local contact force."""
    fx, fy, fz = (float(v) for v in f_local)
    if fz == 0.0:
        raise ValueError("friction ratio undefined for zero normal force")
    return math.hypot(fx, fy) / abs(fz)


@dataclass(frozen=True)
class FrictionEstimator:
    gamma: float = 0.9
    fz_threshold: float = 5.0
    initial_guess: float = 0.5
    mu_measured_prev: Optional[float] = None
    mu_filtered: Optional[float] = None
    kind: FilterKind = FilterKind.TWO_TAP

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.fz_threshold > 0:
            raise ValueError("fz_threshold must be positive")
        if self.initial_guess < 0:
            raise ValueError("initial_guess must be non-negative")
        object.__setattr__(self, "kind", FilterKind(self.kind))

    @property
    def estimate(self) -> float:
        return self.initial_guess if self.mu_filtered is None else self.mu_filtered

    @property
    def last_measurement(self) -> float:
        return self.initial_guess if self.mu_measured_prev is None else self.mu_measured_prev

    def update(self, f_local) -> "FrictionEstimator":
        """Two-tap filter over raw measurements: ``gamma * mu_mes[t-1] + (1 - gamma) * mu_mes[t]``."""
        if abs(f_local[2]) < self.fz_threshold:
            return self
        mu = measure_mu(f_local)
        filt = self.gamma * self.last_measurement + (1.0 - self.gamma) * mu
        return replace(self, mu_measured_prev=mu, mu_filtered=filt)

    def update_recursive(self, f_local) -> "FrictionEstimator":
        """Exponential smoothing: ``gamma * mu_filt[t-1] + (1 - gamma) * mu_mes[t]``."""
        if abs(f_local[2]) < self.fz_threshold:
            return self
        mu = measure_mu(f_local)
        filt = self.gamma * self.estimate + (1.0 - self.gamma) * mu
        return replace(self, mu_measured_prev=mu, mu_filtered=filt)

    def step(self, f_local) -> "FrictionEstimator":
        """Dispatch on the configured filter kind."""
        if self.kind is FilterKind.RECURSIVE:
            return self.update_recursive(f_local)
        return self.update(f_local)
