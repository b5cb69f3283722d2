import math

import pytest

from taunav.errors import OutsideAdmissibleRegion
from taunav.geometry import CameraModel, CorridorWorld, Pose
from taunav.steering import (
    SteeringLaw,
    apply_law,
    eulerian_control,
    predicted_limits,
    steering_balance,
    steering_weighted,
    tau_pair_eulerian,
)

UP = math.pi / 2


def test_centerline_taus(cam, world):
    tl, tr = tau_pair_eulerian(Pose(0, 0, UP), cam, world, 1.0)
    assert tl.value == pytest.approx(2) and tr.value == pytest.approx(2)


def test_outside_region_rejected(cam, world):
    with pytest.raises(OutsideAdmissibleRegion):
        tau_pair_eulerian(Pose(1.2, 0, UP), cam, world, 1.0)


def test_law_examples():
    assert steering_balance(2.5, 2.5, 0.7) == 0
    assert steering_balance(3, 2, 1) == 1
    assert steering_weighted(4, 2, 1, 0.5, 1) == 0


def test_saturation():
    law = SteeringLaw(k=10, u_max=0.5)
    assert apply_law(law, CameraModel(), 3, 1) == 0.5
    assert apply_law(law, CameraModel(), 1, 3) == -0.5
    with pytest.raises(ValueError):
        SteeringLaw(k=0)


def test_predicted_limits():
    world = CorridorWorld(1)
    assert predicted_limits(world, CameraModel(), SteeringLaw()) == (0, UP)
    x, th = predicted_limits(world, CameraModel(delta=0.5, epsilon=1), SteeringLaw())
    assert x == pytest.approx(-1 / 3) and th == UP
    x, _ = predicted_limits(CorridorWorld(2), CameraModel(delta=0.5, epsilon=1), SteeringLaw(weighted=True))
    assert x == pytest.approx(0.25)


@pytest.mark.parametrize("R", [1.0, 2.0])
@pytest.mark.parametrize("delta,eps", [(0.5, 1.0), (1.0, 0.4), (0.8, 0.8)])
def test_predicted_limits_are_equilibria(R, delta, eps):
    world = CorridorWorld(R)
    cam = CameraModel(1, delta, eps)
    for weighted in (False, True):
        law = SteeringLaw(k=0.5, weighted=weighted)
        x, th = predicted_limits(world, cam, law)
        u = eulerian_control(Pose(x, 0, th), cam, world, law, 1.0)[0]
        assert abs(u) < 1e-12


def test_balance_steers_toward_center(cam, world):
    law = SteeringLaw(k=0.5)
    # displaced right and heading straight: turn left (u > 0)
    assert eulerian_control(Pose(0.4, 0, UP), cam, world, law, 1)[0] > 0
    assert eulerian_control(Pose(-0.4, 0, UP), cam, world, law, 1)[0] < 0
    # on the centerline heading left: turn back right
    assert eulerian_control(Pose(0, 0, UP + 0.2), cam, world, law, 1)[0] < 0
