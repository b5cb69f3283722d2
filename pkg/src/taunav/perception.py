"""Four ways of obtaining time-to-transit.

* geometric: ground truth from world geometry, ``d_fwd / v``.
* perceived: image-plane ``s / s_dot`` including rotational flow.
* quasi-linear: ``s`` divided by the translational part of ``s_dot`` only.
* finite difference: ``s`` divided by a backward difference of tracked samples.

Perceived and quasi-linear values measure transit of the pinhole point
``(f, 0)`` rather than of the vehicle origin, so on a straight constant-speed
segment ``perceived = geometric - f/v``.  Every differencing steering law
cancels the offset.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import StationaryImage, UndefinedAtFoE, ZeroSpeed
from .geometry import CameraModel, FeaturePoint, Pose, project, to_body_frame

TAU_TOL = 1e-9

GEOMETRIC = "geometric"
PERCEIVED = "perceived"
QUASI_LINEAR = "quasi_linear"
FINITE_DIFFERENCE = "finite_difference"
TAU_KINDS = (GEOMETRIC, PERCEIVED, QUASI_LINEAR, FINITE_DIFFERENCE)


class TauReading(NamedTuple):
    value: float
    kind: str
    feature_id: int | None = None


def geometric_tau(pose: Pose, v: float, feat: FeaturePoint) -> TauReading:
    if not v > 0:
        raise ZeroSpeed(f"geometric tau needs v > 0, got {v}")
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    value = (c * (feat.xf - pose.x) + s * (feat.yf - pose.y)) / v
    return TauReading(value, GEOMETRIC, feat.feature_id)


def perceived_tau(
    cam: CameraModel, pose: Pose, v: float, u: float, feat: FeaturePoint
) -> TauReading:
    """Image-plane ``s / s_dot`` while moving with speed ``v`` and turn rate ``u``."""
    bc = to_body_frame(pose, feat)
    s = project(cam, bc, check_fov=False)
    depth = bc.d_fwd - cam.f
    s_dot = cam.f * (u * (bc.d_fwd * depth + bc.d_lat**2) - v * bc.d_lat) / (depth * depth)
    if abs(s_dot) < TAU_TOL:
        if abs(s) < TAU_TOL:
            raise UndefinedAtFoE("feature sits at the focus of expansion")
        raise StationaryImage(f"image point at s={s} is not moving")
    return TauReading(s / s_dot, PERCEIVED, feat.feature_id)


def image_partials(cam: CameraModel, pose: Pose, feat: FeaturePoint) -> tuple[float, float]:
    """Partial derivatives of the image coordinate w.r.t. world (x, y), heading frozen."""
    bc = to_body_frame(pose, feat)
    project(cam, bc, check_fov=False)
    depth = bc.d_fwd - cam.f
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    scale = -cam.f / (depth * depth)
    ds_dx = scale * (s * depth + bc.d_lat * c)
    ds_dy = scale * (-c * depth + bc.d_lat * s)
    return ds_dx, ds_dy


def quasilinear_tau_star(
    cam: CameraModel, pose: Pose, v: float, feat: FeaturePoint
) -> TauReading:
    """Tau from the translational image motion alone; independent of turn rate."""
    bc = to_body_frame(pose, feat)
    if abs(bc.d_lat) < TAU_TOL:
        raise UndefinedAtFoE("feature on the optical axis has no translational flow")
    s = project(cam, bc, check_fov=False)
    ds_dx, ds_dy = image_partials(cam, pose, feat)
    trans = ds_dx * v * math.cos(pose.theta) + ds_dy * v * math.sin(pose.theta)
    if abs(trans) < TAU_TOL:
        raise StationaryImage("translational image velocity vanishes")
    return TauReading(s / trans, QUASI_LINEAR, feat.feature_id)


def finite_difference_tau(
    s_prev: float, s_curr: float, dt: float, feature_id: int | None = None
) -> TauReading:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ds = s_curr - s_prev
    if abs(ds) < TAU_TOL:
        raise StationaryImage("image point did not move between samples")
    return TauReading(s_curr * dt / ds, FINITE_DIFFERENCE, feature_id)
