import math

import numpy as np
import pytest

from taunav.config import ExperimentConfig
from taunav.errors import AbortedOutsideRegion, ConfigError
from taunav.geometry import CameraModel, CorridorWorld, Pose
from taunav.kinematics import arc_pose, rk4_step
from taunav.sim import SimConfig, TrajectoryRecord, convergence_metrics, run
from taunav.steering import SteeringLaw

UP = math.pi / 2


def _integrate(pose, u, dt, t_end):
    for _ in range(int(round(t_end / dt))):
        pose = rk4_step(pose, u, 1.0, dt)
    return pose


def _err(a, b):
    return max(abs(a.x - b.x), abs(a.y - b.y), abs(a.theta - b.theta))


def test_rk4_straight_step():
    p = rk4_step(Pose(0.3, 1.0, UP), 0.0, 1.0, 0.1)
    assert p.y == pytest.approx(1.1, abs=1e-15)
    assert p.x == pytest.approx(0.3, abs=1e-15) and p.theta == UP


def test_rk4_matches_exact_arc():
    p0 = Pose(0.0, 0.0, 0.3)
    assert _err(_integrate(p0, 1.0, 0.01, 1.0), arc_pose(p0, 1.0, 1.0, 1.0)) < 1e-10


def test_rk4_fourth_order():
    p0 = Pose(0.0, 0.0, 0.3)
    exact = arc_pose(p0, 1.0, 1.0, 2.0)
    e1 = _err(_integrate(p0, 1.0, 0.2, 2.0), exact)
    e2 = _err(_integrate(p0, 1.0, 0.1, 2.0), exact)
    assert 14 < e1 / e2 < 18


def test_record_shape():
    rec = run(SimConfig(T=2.0, x0=0.3))
    assert len(rec) == 2001
    assert np.allclose(np.diff(rec.t), 1e-3)
    assert rec.tau_kind[0] == "geometric" and rec.phase[0] == "continuous"


@pytest.mark.parametrize("delta,eps,weighted", [(1, 1, False), (0.5, 1, False), (0.5, 1, True)])
def test_equilibrium_is_kept(delta, eps, weighted):
    controller = "continuous_weighted" if weighted else "continuous_balance"
    cam = CameraModel(1, delta, eps)
    from taunav.steering import predicted_limits

    x_inf, th_inf = predicted_limits(CorridorWorld(1), cam, SteeringLaw(weighted=weighted))
    rec = run(SimConfig(T=10.0, x0=x_inf, theta0=th_inf, camera=cam, controller=controller))
    assert np.max(np.abs(rec.x - x_inf)) < 1e-9


def test_unstable_sampled_gain_aborts():
    cfg = SimConfig(controller="sampled", h=0.05, law=SteeringLaw(k=30), T=10, x0=0.5)
    rec = run(cfg)
    assert rec.aborted and len(rec) < cfg.n_steps + 1
    with pytest.raises(AbortedOutsideRegion) as info:
        run(cfg, strict=True)
    assert len(info.value.record) == len(rec)


def test_sampled_holds_control():
    rec = run(SimConfig(controller="sampled", h=0.05, T=1.0, x0=0.4))
    u = rec.u.reshape(-1)[:1000].reshape(20, 50)
    assert np.all(u == u[:, :1])
    assert rec.phase[0] == "sample" and rec.phase[1] == "hold"


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(controller="sampled", h=0.0505)
    with pytest.raises(ConfigError):
        SimConfig(controller="sampled", h=0.005, dt=1e-3)
    with pytest.raises(ConfigError):
        SimConfig(T=1.0005)
    with pytest.raises(ConfigError):
        SimConfig(controller="warp")


@pytest.mark.parametrize("controller", ["continuous_balance", "sampled", "spa"])
def test_translation_invariance(controller):
    extra = {"field.density": "10"} if controller == "spa" else {}
    sets = [f"sim.controller={controller}", "sim.T=5", "sim.x0=0.4", "sim.theta0=pi/2+0.1"]
    sets += [f"{k}={v}" for k, v in extra.items()]
    a = run(ExperimentConfig.build(overrides=sets).sim_config())
    b = run(ExperimentConfig.build(overrides=sets + ["sim.y0=12.5"]).sim_config())
    assert np.allclose(a.x, b.x, atol=1e-9, rtol=0)
    assert np.allclose(a.theta, b.theta, atol=1e-9, rtol=0)
    assert np.allclose(b.y - a.y, 12.5, atol=1e-9)
    assert convergence_metrics(a, (0, UP)) == pytest.approx(convergence_metrics(a.translated(7.0), (0, UP)))


@pytest.mark.parametrize("controller", ["continuous_balance", "sampled", "spa"])
def test_mirror_symmetry(controller):
    a = run(SimConfig(controller=controller, T=4.0, x0=0.4, theta0=UP + 0.1))
    b = run(SimConfig(controller=controller, T=4.0, x0=-0.4, theta0=UP - 0.1))
    assert np.allclose(a.x, -b.x, atol=1e-9, rtol=0)
    assert np.allclose(a.theta - UP, UP - b.theta, atol=1e-9, rtol=0)


def test_mirrored_receptors():
    a = run(SimConfig(T=20.0, x0=0.2, camera=CameraModel(1, 0.5, 1.0)))
    b = run(SimConfig(T=20.0, x0=-0.2, camera=CameraModel(1, 1.0, 0.5)))
    assert np.allclose(a.x, -b.x, atol=1e-9, rtol=0)
    assert a.x[-1] == pytest.approx(-1 / 3, abs=1e-3)


def _const_record(x, theta, n=5):
    t = np.arange(n) * 0.1
    z = np.zeros(n)
    return TrajectoryRecord(t, np.full(n, x), z, np.full(n, theta), z, z, z, ["geometric"] * n, [""] * n)


def test_metrics():
    assert convergence_metrics(_const_record(0.0, UP), (0.0, UP)) == (0.0, 0.0, 0.0)
    rec = run(SimConfig(T=20.0, x0=0.5))
    m = convergence_metrics(rec, (0.0, UP))
    inside = np.maximum(np.abs(rec.x), np.abs(rec.theta - UP)) <= 1e-2
    first = int(np.argmax(rec.t >= m.settling_time))
    assert np.all(inside[first:]) and not inside[first - 1]
    cfg = SimConfig(T=20.0, x0=0.5)
    assert convergence_metrics(rec, config=cfg) == m
    with pytest.raises(ValueError):
        convergence_metrics(rec)


@pytest.mark.parametrize("preset", ["theorem1", "corollary1", "corollary2", "theorem2", "spa_reference"])
def test_dt_robustness(preset):
    finals = []
    for dt in ("0.001", "0.0005"):
        rec = run(ExperimentConfig.build(preset, overrides=[f"sim.dt={dt}"]).sim_config())
        assert not rec.aborted
        finals.append(rec.final_pose)
    assert abs(finals[0].x - finals[1].x) < 1e-6
    assert abs(finals[0].theta - finals[1].theta) < 1e-6
