"""Instantaneous (Eulerian) tau-balance steering.

Two receptors register the wall points whose images land at ``-delta`` and
``+epsilon``; their geometric times-to-transit are formed on the spot and
discarded.  The balance law ``u = k (tau_l - tau_r)`` drives the vehicle to
``x = R (delta - epsilon) / (delta + epsilon)`` and the weighted law
``u = k (delta tau_l - epsilon tau_r)`` to ``x = (epsilon - delta) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (
    ADMISSIBLE_MARGIN,
    CameraModel,
    CorridorWorld,
    Pose,
    check_admissible,
    inverse_project_left,
    inverse_project_right,
)
from .perception import TauReading, geometric_tau


@dataclass(frozen=True)
class SteeringLaw:
    k: float = 0.5
    weighted: bool = False
    u_max: float | None = None

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"gain k must be positive, got {self.k}")
        if self.u_max is not None and not self.u_max > 0:
            raise ValueError("u_max must be positive when given")

    def saturate(self, u: float) -> float:
        if self.u_max is None:
            return u
        return max(-self.u_max, min(self.u_max, u))


def tau_pair_eulerian(
    pose: Pose,
    cam: CameraModel,
    world: CorridorWorld,
    v: float,
    margin: float = ADMISSIBLE_MARGIN,
) -> tuple[TauReading, TauReading]:
    """Geometric taus of the wall points seen by the left and right receptors."""
    check_admissible(pose, world, cam, margin)
    left = inverse_project_left(pose, cam, world)
    right = inverse_project_right(pose, cam, world)
    return geometric_tau(pose, v, left), geometric_tau(pose, v, right)


def steering_balance(tau_l: float, tau_r: float, k: float) -> float:
    return k * (tau_l - tau_r)


def steering_weighted(tau_l: float, tau_r: float, k: float, delta: float, epsilon: float) -> float:
    return k * (delta * tau_l - epsilon * tau_r)


def apply_law(law: SteeringLaw, cam: CameraModel, tau_l: float, tau_r: float) -> float:
    if law.weighted:
        u = steering_weighted(tau_l, tau_r, law.k, cam.delta, cam.epsilon)
    else:
        u = steering_balance(tau_l, tau_r, law.k)
    return law.saturate(u)


def eulerian_control(
    pose: Pose,
    cam: CameraModel,
    world: CorridorWorld,
    law: SteeringLaw,
    v: float,
    margin: float = ADMISSIBLE_MARGIN,
) -> tuple[float, float, float]:
    """Return ``(u, tau_l, tau_r)`` for the configured law at ``pose``."""
    tl, tr = tau_pair_eulerian(pose, cam, world, v, margin)
    return apply_law(law, cam, tl.value, tr.value), tl.value, tr.value


def predicted_limits(
    world: CorridorWorld, cam: CameraModel, law: SteeringLaw
) -> tuple[float, float]:
    """Asymptotic ``(x, theta)`` the closed loop settles to."""
    d, e = cam.delta, cam.epsilon
    if law.weighted:
        x_inf = (e - d) / 2.0
    else:
        x_inf = world.R * (d - e) / (d + e)
    return x_inf, math.pi / 2
