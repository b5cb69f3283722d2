"""Unicycle kinematics x' = v cos(theta), y' = v sin(theta), theta' = u."""

from __future__ import annotations

import math
from typing import Callable

from .geometry import Pose, wrap_angle


def unicycle_rates(pose: Pose, u: float, v: float) -> tuple[float, float, float]:
    return v * math.cos(pose.theta), v * math.sin(pose.theta), u


def _advance(p: Pose, k: tuple[float, float, float], a: float) -> Pose:
    return Pose(p.x + a * k[0], p.y + a * k[1], p.theta + a * k[2])


def rk4_step(pose: Pose, u: float, v: float, dt: float) -> Pose:
    """One classical RK4 step with ``u`` and ``v`` held over the step."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = unicycle_rates(pose, u, v)
    k2 = unicycle_rates(_advance(pose, k1, dt / 2), u, v)
    k3 = unicycle_rates(_advance(pose, k2, dt / 2), u, v)
    k4 = unicycle_rates(_advance(pose, k3, dt), u, v)
    w = dt / 6.0
    return Pose(
        pose.x + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        pose.y + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        wrap_angle(pose.theta + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])),
    )


def rk4_step_feedback(
    pose: Pose, control: Callable[[Pose], float], v: float, dt: float
) -> Pose:
    """RK4 step of the closed loop with the controller evaluated at every stage."""
    k1 = unicycle_rates(pose, control(pose), v)
    p2 = _advance(pose, k1, dt / 2)
    k2 = unicycle_rates(p2, control(p2), v)
    p3 = _advance(pose, k2, dt / 2)
    k3 = unicycle_rates(p3, control(p3), v)
    p4 = _advance(pose, k3, dt)
    k4 = unicycle_rates(p4, control(p4), v)
    w = dt / 6.0
    return Pose(
        pose.x + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        pose.y + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        wrap_angle(pose.theta + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])),
    )


def arc_pose(pose0: Pose, u: float, v: float, t: float) -> Pose:
    """Exact pose after driving ``t`` seconds at constant ``u`` and ``v``."""
    th = pose0.theta + u * t
    if u == 0.0:
        return Pose(
            pose0.x + v * t * math.cos(pose0.theta),
            pose0.y + v * t * math.sin(pose0.theta),
            pose0.theta,
        )
    r = v / u
    return Pose(
        pose0.x + r * (math.sin(th) - math.sin(pose0.theta)),
        pose0.y - r * (math.cos(th) - math.cos(pose0.theta)),
        wrap_angle(th),
    )
