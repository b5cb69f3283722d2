"""Corridor geometry and the 1-D pinhole camera.

World frame: the corridor runs along the world y-axis with walls at
``x = -R`` (left) and ``x = +R`` (right).  The vehicle pose is ``(x, y, theta)``
with ``theta`` measured from the world x-axis, so ``theta = pi/2`` is straight
down the corridor.

Body frame: x-axis along the heading (``d_fwd``), y-axis to the vehicle's
left (``d_lat``).  The pinhole sits at body point ``(f, 0)`` and the image
line is the body y-axis through the vehicle origin, which gives

    s = -f * d_lat / (d_fwd - f)

Features on the left wall land at negative image coordinates, features on the
right wall at positive ones.  The two receptors of the "2-pixel" camera sit at
``-delta`` and ``+epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import BehindPinhole, OutOfFov, OutsideAdmissibleRegion, Singular

#: Denominators smaller than this (normalized units) are treated as singular.
SING_TOL = 1e-9

#: Default angular margin kept from the edge of the admissible heading cone.
ADMISSIBLE_MARGIN = 0.02

LEFT = "left"
RIGHT = "right"
FREE = "free"


def wrap_angle(theta: float) -> float:
    """Map ``theta`` into (-pi, pi]; values already in range are returned as is."""
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = math.remainder(theta, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


class Pose(NamedTuple):
    x: float
    y: float
    theta: float

    def normalized(self) -> "Pose":
        return Pose(self.x, self.y, wrap_angle(self.theta))


class BodyFrameCoords(NamedTuple):
    d_fwd: float
    d_lat: float


@dataclass(frozen=True)
class CorridorWorld:
    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"corridor half-width must be positive, got {self.R}")


@dataclass(frozen=True)
class CameraModel:
    """Idealized 1-D pinhole camera with two receptors.

    ``delta`` and ``epsilon`` are magnitudes: the left receptor sits at image
    coordinate ``-delta``, the right one at ``+epsilon``.  ``max_range`` is an
    optional depth horizon (on ``d_fwd``) used only by Lagrangian observation.
    """

    f: float = 1.0
    delta: float = 1.0
    epsilon: float = 1.0
    r_max: float = 2.0
    max_range: float = math.inf

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError(f"focal length must be positive, got {self.f}")
        if not (self.delta > 0 and self.epsilon > 0):
            raise ValueError("receptor offsets delta and epsilon must be positive")
        if not self.r_max >= max(self.delta, self.epsilon):
            raise ValueError(
                f"r_max={self.r_max} must be >= max(delta, epsilon)"
                f"={max(self.delta, self.epsilon)}"
            )
        if not self.max_range > self.f:
            raise ValueError("max_range must exceed the focal length")

    @property
    def half_angle(self) -> float:
        """Angle whose tangent is the focal length; bounds the admissible headings."""
        return math.atan(self.f)


@dataclass(frozen=True)
class FeaturePoint:
    xf: float
    yf: float
    wall_side: str = FREE
    feature_id: int | None = None

    @classmethod
    def on_wall(cls, side: str, yf: float, world: CorridorWorld, feature_id=None):
        if side == LEFT:
            return cls(-world.R, yf, LEFT, feature_id)
        if side == RIGHT:
            return cls(world.R, yf, RIGHT, feature_id)
        raise ValueError(f"wall side must be 'left' or 'right', got {side!r}")


def to_body_frame(pose: Pose, feat: FeaturePoint) -> BodyFrameCoords:
    dx = feat.xf - pose.x
    dy = feat.yf - pose.y
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    return BodyFrameCoords(c * dx + s * dy, -s * dx + c * dy)


def project(
    cam: CameraModel, bc: BodyFrameCoords, check_fov: bool = True, check_front: bool = True
) -> float:
    """Image coordinate of a body-frame point.

    Raises :class:`BehindPinhole` when ``d_fwd <= f`` and :class:`OutOfFov` when
    ``|s| > r_max``.  Either check can be switched off to evaluate the bare
    projective formula; a point at the pinhole depth is always singular.
    """
    depth = bc.d_fwd - cam.f
    if check_front and depth <= SING_TOL:
        raise BehindPinhole(f"d_fwd={bc.d_fwd} is not in front of the pinhole at f={cam.f}")
    if abs(depth) <= SING_TOL:
        raise Singular(f"d_fwd={bc.d_fwd} is at the pinhole depth f={cam.f}")
    s = -cam.f * bc.d_lat / depth
    if check_fov and abs(s) > cam.r_max:
        raise OutOfFov(f"image coordinate {s} exceeds r_max={cam.r_max}")
    return s


def image_velocity(cam: CameraModel, bc: BodyFrameCoords, v: float, u: float) -> float:
    """Time derivative of :func:`project` under the unicycle flow.

    Uses d_fwd' = u*d_lat - v and d_lat' = -u*d_fwd.
    """
    depth = bc.d_fwd - cam.f
    if depth <= SING_TOL:
        raise BehindPinhole(f"d_fwd={bc.d_fwd} is not in front of the pinhole at f={cam.f}")
    rot = u * (bc.d_fwd * depth + bc.d_lat * bc.d_lat)
    return cam.f * (rot - v * bc.d_lat) / (depth * depth)


def inverse_project_left(
    pose: Pose, cam: CameraModel, world: CorridorWorld, check_front: bool = True
) -> FeaturePoint:
    """Left-wall point whose image falls on the receptor at ``-delta``.

    With ``check_front`` false the ray-wall intersection is returned even when
    it lies behind the pinhole (the pinhole itself is outside the corridor).
    """
    f, d = cam.f, cam.delta
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    den = d * s - f * c
    if abs(den) < SING_TOL:
        raise Singular(f"left receptor ray is parallel to the wall (theta={pose.theta})")
    yl = pose.y + f * s + (world.R + pose.x + f * c) * (d * c + f * s) / den
    d_fwd = c * (-world.R - pose.x) + s * (yl - pose.y)
    if check_front and d_fwd - f <= SING_TOL:
        raise BehindPinhole("left receptor ray meets the wall behind the pinhole")
    return FeaturePoint(-world.R, yl, LEFT)


def inverse_project_right(
    pose: Pose, cam: CameraModel, world: CorridorWorld, check_front: bool = True
) -> FeaturePoint:
    """Right-wall point whose image falls on the receptor at ``+epsilon``."""
    f, e = cam.f, cam.epsilon
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    den = f * c + e * s
    if abs(den) < SING_TOL:
        raise Singular(f"right receptor ray is parallel to the wall (theta={pose.theta})")
    yr = pose.y + f * s + (world.R - pose.x - f * c) * (f * s - e * c) / den
    d_fwd = c * (world.R - pose.x) + s * (yr - pose.y)
    if check_front and d_fwd - f <= SING_TOL:
        raise BehindPinhole("right receptor ray meets the wall behind the pinhole")
    return FeaturePoint(world.R, yr, RIGHT)


def admissible_heading_bound(cam: CameraModel, margin: float = ADMISSIBLE_MARGIN) -> float:
    """Largest allowed |theta - pi/2|."""
    return math.pi / 2 - cam.half_angle - margin


def is_admissible(
    pose: Pose, world: CorridorWorld, cam: CameraModel, margin: float = ADMISSIBLE_MARGIN
) -> bool:
    return (
        abs(pose.x) < world.R
        and abs(pose.theta - math.pi / 2) < admissible_heading_bound(cam, margin)
    )


def check_admissible(
    pose: Pose, world: CorridorWorld, cam: CameraModel, margin: float = ADMISSIBLE_MARGIN
) -> None:
    if not is_admissible(pose, world, cam, margin):
        raise OutsideAdmissibleRegion(
            f"pose (x={pose.x:.6g}, theta={pose.theta:.6g}) is outside "
            f"|x|<{world.R}, |theta-pi/2|<{admissible_heading_bound(cam, margin):.6g}"
        )
