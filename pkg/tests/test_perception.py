import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from taunav.errors import StationaryImage, UndefinedAtFoE, ZeroSpeed
from taunav.geometry import CameraModel, FeaturePoint, Pose, project, to_body_frame
from taunav.kinematics import arc_pose
from taunav.perception import (
    finite_difference_tau,
    geometric_tau,
    image_partials,
    perceived_tau,
    quasilinear_tau_star,
)

UP = math.pi / 2


def test_geometric_examples():
    assert geometric_tau(Pose(0, 0, UP), 1, FeaturePoint(0, 5)).value == pytest.approx(5)
    assert geometric_tau(Pose(0, 0, UP), 1, FeaturePoint(3, 0)).value == pytest.approx(0, abs=1e-15)
    val = geometric_tau(Pose(1, 2, math.pi / 3), 2, FeaturePoint(4, 6)).value
    assert val == pytest.approx((1.5 + 2 * math.sqrt(3)) / 2, abs=1e-12)
    with pytest.raises(ZeroSpeed):
        geometric_tau(Pose(0, 0, UP), 0, FeaturePoint(0, 5))


def test_perceived_examples(cam):
    # d_fwd = 3, d_lat = 1
    feat = FeaturePoint(-1, 3)
    assert perceived_tau(cam, Pose(0, 0, UP), 1, 0, feat).value == pytest.approx(2, abs=1e-12)
    with pytest.raises(UndefinedAtFoE):
        perceived_tau(cam, Pose(0, 0, UP), 1, 0, FeaturePoint(0, 5))


def test_perceived_equals_ratio_of_image_position_and_velocity(cam):
    # s / (ds/dt) with ds/dt from a central difference along the exact arc
    pose0, feat, v, u, t, h = Pose(0.1, 0, UP + 0.1), FeaturePoint(-1, 7), 1.2, 0.15, 0.5, 1e-5

    def s_at(tt):
        return project(cam, to_body_frame(arc_pose(pose0, u, v, tt), feat))

    sdot = (s_at(t + h) - s_at(t - h)) / (2 * h)
    expected = s_at(t) / sdot
    assert perceived_tau(cam, arc_pose(pose0, u, v, t), v, u, feat).value == pytest.approx(expected, rel=1e-8)


def test_tau_star_example(cam):
    feat = FeaturePoint(-1, 3)
    pose = Pose(0, 0, UP)
    assert quasilinear_tau_star(cam, pose, 1, feat).value == pytest.approx(2, abs=1e-12)
    assert perceived_tau(cam, pose, 1, 0.5, feat).value != pytest.approx(2, abs=1e-3)
    with pytest.raises(UndefinedAtFoE):
        quasilinear_tau_star(cam, pose, 1, FeaturePoint(0, 5))


@pytest.mark.parametrize("pose,feat", [
    (Pose(0, 0, UP), FeaturePoint(-1, 3)),
    (Pose(0.3, 1, UP + 0.2), FeaturePoint(1, 6)),
    (Pose(-0.4, 2, UP - 0.3), FeaturePoint(-1, 5.5)),
])
def test_image_partials_match_central_difference(cam, pose, feat):
    h = 1e-6

    def s_at(x, y):
        return project(cam, to_body_frame(Pose(x, y, pose.theta), feat), check_fov=False)

    fx = (s_at(pose.x + h, pose.y) - s_at(pose.x - h, pose.y)) / (2 * h)
    fy = (s_at(pose.x, pose.y + h) - s_at(pose.x, pose.y - h)) / (2 * h)
    ds_dx, ds_dy = image_partials(cam, pose, feat)
    assert ds_dx == pytest.approx(fx, abs=1e-6)
    assert ds_dy == pytest.approx(fy, abs=1e-6)


@given(
    st.floats(-0.9, 0.9), st.floats(-0.6, 0.6), st.floats(-3, 3), st.floats(-3, 3),
    st.floats(0.2, 3), st.floats(0.3, 2),
)
def test_tau_star_is_geometric_minus_focal_offset(x, dth, fx, fy, v, f):
    cam = CameraModel(f, 1, 1)
    pose = Pose(x, 0, UP + dth)
    feat = FeaturePoint(fx, fy + 6)
    bc = to_body_frame(pose, feat)
    assume(bc.d_fwd - f > 0.1 and abs(bc.d_lat) > 1e-3)
    star = quasilinear_tau_star(cam, pose, v, feat).value
    assert star == pytest.approx(geometric_tau(pose, v, feat).value - f / v, abs=1e-9)


def test_finite_difference_examples():
    assert finite_difference_tau(0.9, 1.0, 0.1).value == pytest.approx(1.0)
    with pytest.raises(StationaryImage):
        finite_difference_tau(0.5, 0.5, 0.1)
    with pytest.raises(ValueError):
        finite_difference_tau(0.5, 0.6, 0.0)


def test_finite_difference_converges_first_order(cam):
    pose0, feat, v = Pose(0, 0, UP), FeaturePoint(-1, 6), 1.0
    t = 1.0
    truth = perceived_tau(cam, arc_pose(pose0, 0, v, t), v, 0, feat).value
    errs = []
    dts = [0.08, 0.04, 0.02, 0.01, 0.005]
    for dt in dts:
        s0 = project(cam, to_body_frame(arc_pose(pose0, 0, v, t - dt), feat))
        s1 = project(cam, to_body_frame(arc_pose(pose0, 0, v, t), feat))
        err = abs(finite_difference_tau(s0, s1, dt).value - truth)
        assert err < 5 * dt
        errs.append(err)
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)


def test_turning_toward_feature_inflates_perceived_tau_more_than_geometric():
    from taunav.config import ExperimentConfig
    from taunav.experiments import tau_compare

    _, rows = tau_compare(ExperimentConfig.build("turn_exaggeration"))
    straight = [r for r in rows if r[0] == "straight"]
    arc = [r for r in rows if r[0] == "arc"]
    for s, a in zip(straight[1:], arc[1:]):
        geo_rise = a[5] - s[5]
        per_rise = a[6] - s[6]
        assert per_rise > geo_rise > 0
        assert a[9] > 0
    assert arc[-1][6] - straight[-1][6] > 10 * (arc[-1][5] - straight[-1][5])
