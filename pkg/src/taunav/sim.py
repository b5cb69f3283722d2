"""Fixed-step closed-loop simulation of the unicycle under tau steering."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import AbortedOutsideRegion, ConfigError, TauNavError
from .geometry import ADMISSIBLE_MARGIN, CameraModel, CorridorWorld, Pose, is_admissible
from .kinematics import rk4_step, rk4_step_feedback
from .lagrangian import (
    AGGREGATIONS,
    INTERPOLATED_RECEPTOR,
    UNIFORM_GRID,
    FeatureField,
    SpaController,
    SpaSchedule,
    generate_features,
)
from .perception import FINITE_DIFFERENCE, GEOMETRIC
from .steering import SteeringLaw, eulerian_control, predicted_limits

CONTINUOUS_BALANCE = "continuous_balance"
CONTINUOUS_WEIGHTED = "continuous_weighted"
SAMPLED = "sampled"
SPA = "spa"
CONTROLLERS = (CONTINUOUS_BALANCE, CONTINUOUS_WEIGHTED, SAMPLED, SPA)

TRAJECTORY_COLUMNS = ("t", "x", "y", "theta", "u", "tau_l", "tau_r", "tau_kind", "phase")
EVENT_COLUMNS = ("t", "feature_id", "track_id", "event")


def _is_multiple(span: float, dt: float) -> bool:
    q = span / dt
    return abs(q - round(q)) <= 1e-6 * max(1.0, q)


def fmt(value) -> str:
    """17-significant-digit float formatting used by every CSV writer."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass(frozen=True)
class FieldSpec:
    density: float = 10.0
    start: float | None = None
    end: float | None = None
    placement: str = UNIFORM_GRID
    path: str | None = None


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    T: float = 50.0
    v: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    theta0: float = math.pi / 2
    controller: str = CONTINUOUS_BALANCE
    world: CorridorWorld = field(default_factory=CorridorWorld)
    camera: CameraModel = field(default_factory=CameraModel)
    law: SteeringLaw = field(default_factory=SteeringLaw)
    h: float = 0.05
    spa: SpaSchedule | None = None
    aggregation: str = INTERPOLATED_RECEPTOR
    field: FieldSpec = field(default_factory=FieldSpec)
    noise_sigma: float = 0.0
    seed: int = 0
    margin: float = ADMISSIBLE_MARGIN

    def __post_init__(self):
        self.validate()

    @property
    def weighted(self) -> bool:
        return self.controller == CONTINUOUS_WEIGHTED or self.law.weighted

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def spa_schedule(self) -> SpaSchedule:
        return self.spa if self.spa is not None else SpaSchedule(dt=self.dt)

    def validate(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"unknown controller {self.controller!r}; choose from {CONTROLLERS}")
        if not self.dt > 0 or not self.T > 0:
            raise ConfigError("dt and T must be positive")
        if not _is_multiple(self.T, self.dt):
            raise ConfigError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        if not self.v > 0:
            raise ConfigError("forward speed v must be positive")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"unknown aggregation {self.aggregation!r}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.controller == SAMPLED:
            if not _is_multiple(self.h, self.dt):
                raise ConfigError(f"hold interval h={self.h} is not a multiple of dt={self.dt}")
            if self.dt > self.h / 10 + 1e-15:
                raise ConfigError("dt must be at most h/10")
        if self.controller == SPA:
            sched = self.spa_schedule
            if abs(sched.dt - self.dt) > 1e-15:
                raise ConfigError("SPA schedule dt must equal the integrator dt")
            if self.dt > sched.h / 10 + 1e-15:
                raise ConfigError("dt must be at most h/10")

    def feature_field(self) -> FeatureField:
        spec = self.field
        if spec.path is not None:
            return FeatureField.load(spec.path, self.world)
        lo = self.y0 - 5.0 if spec.start is None else spec.start
        hi = self.y0 + self.v * self.T + 20.0 if spec.end is None else spec.end
        return generate_features(self.world, spec.density, (lo, hi), self.seed, spec.placement)


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    tau_l: np.ndarray
    tau_r: np.ndarray
    tau_kind: list
    phase: list
    events: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""
    spa_intervals: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    @property
    def final_pose(self) -> Pose:
        return Pose(float(self.x[-1]), float(self.y[-1]), float(self.theta[-1]))

    def rows(self):
        for i in range(len(self.t)):
            yield (
                self.t[i], self.x[i], self.y[i], self.theta[i], self.u[i],
                self.tau_l[i], self.tau_r[i], self.tau_kind[i], self.phase[i],
            )

    def to_csv(self, path=None) -> str:
        """Write (or return) the trajectory table; see TRAJECTORY_COLUMNS."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for row in self.rows():
            w.writerow([fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def events_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for ev in self.events:
            w.writerow([fmt(v) for v in ev])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def translated(self, dy: float) -> "TrajectoryRecord":
        return TrajectoryRecord(
            self.t, self.x, self.y + dy, self.theta, self.u, self.tau_l, self.tau_r,
            self.tau_kind, self.phase, self.events, self.aborted, self.abort_reason,
            self.spa_intervals,
        )


def run(config: SimConfig, strict: bool = False) -> TrajectoryRecord:
    """Integrate the closed loop from ``(x0, y0, theta0)`` over ``[0, T]``.

    Continuous laws are evaluated at every RK4 stage; the sampled law is
    re-evaluated every ``h/dt`` steps and held; the SPA controller follows its
    schedule.  If the state leaves the admissible region (or the sensing
    geometry breaks down) the run stops and the partial record is returned
    with ``aborted`` set, or :class:`AbortedOutsideRegion` is raised when
    ``strict`` is true.
    """
    cfg = config
    n = cfg.n_steps + 1
    dt, v = cfg.dt, cfg.v
    law = SteeringLaw(k=cfg.law.k, weighted=cfg.weighted, u_max=cfg.law.u_max)
    cam, world = cfg.camera, cfg.world

    t = np.arange(n) * dt
    xs = np.full(n, np.nan)
    ys = np.full(n, np.nan)
    ths = np.full(n, np.nan)
    us = np.full(n, np.nan)
    tls = np.full(n, np.nan)
    trs = np.full(n, np.nan)
    kind = GEOMETRIC
    phases = [""] * n

    spa = None
    if cfg.controller == SPA:
        kind = FINITE_DIFFERENCE
        spa = SpaController(
            cfg.feature_field(), cam, world, cfg.spa_schedule, law.k, v,
            cfg.aggregation, law.weighted, cfg.noise_sigma, cfg.seed,
        )
    hold_steps = int(round(cfg.h / dt))
    held = (math.nan, math.nan, math.nan)

    def control(p: Pose) -> float:
        return eulerian_control(p, cam, world, law, v, cfg.margin)[0]

    pose = Pose(cfg.x0, cfg.y0, cfg.theta0)
    aborted, reason, last = False, "", n - 1
    for i in range(n):
        xs[i], ys[i], ths[i] = pose
        if not is_admissible(pose, world, cam, cfg.margin):
            aborted, reason, last = True, f"left admissible region at t={t[i]:.6g}", i
            break
        try:
            if cfg.controller in (CONTINUOUS_BALANCE, CONTINUOUS_WEIGHTED):
                u, tl, tr = eulerian_control(pose, cam, world, law, v, cfg.margin)
                phases[i] = "continuous"
                if i < n - 1:
                    nxt = rk4_step_feedback(pose, control, v, dt)
            elif cfg.controller == SAMPLED:
                if i % hold_steps == 0:
                    held = eulerian_control(pose, cam, world, law, v, cfg.margin)
                    phases[i] = "sample"
                else:
                    phases[i] = "hold"
                u, tl, tr = held
                if i < n - 1:
                    nxt = rk4_step(pose, u, v, dt)
            else:
                u, tl, tr, phases[i] = spa.step(i, float(t[i]), pose)
                if i < n - 1:
                    nxt = rk4_step(pose, u, v, dt)
        except TauNavError as exc:
            aborted, reason, last = True, f"{type(exc).__name__} at t={t[i]:.6g}: {exc}", i
            break
        us[i], tls[i], trs[i] = u, tl, tr
        if i < n - 1:
            pose = nxt

    m = last + 1
    rec = TrajectoryRecord(
        t[:m], xs[:m], ys[:m], ths[:m], us[:m], tls[:m], trs[:m],
        [kind] * m, phases[:m],
        events=list(spa.tracks.events) if spa is not None else [],
        aborted=aborted,
        abort_reason=reason,
        spa_intervals=list(spa.intervals) if spa is not None else [],
    )
    if aborted and strict:
        raise AbortedOutsideRegion(reason, rec)
    return rec


class Metrics(NamedTuple):
    final_err_x: float
    final_err_theta: float
    settling_time: float


def convergence_metrics(record: TrajectoryRecord, target=None, band: float = 1e-2, config=None) -> Metrics:
    """Final errors against ``target = (x_inf, theta_inf)`` and settling time.

    Settling time is the first sample time after which both errors stay within
    ``band``; ``inf`` if the record ends outside the band.  ``target`` defaults
    to the predicted limit for ``config``.
    """
    if len(record) == 0:
        raise ValueError("empty trajectory record")
    if target is None:
        if config is None:
            raise ValueError("need a target or a config to predict it")
        target = predicted_limits(config.world, config.camera, SteeringLaw(
            k=config.law.k, weighted=config.weighted))
    x_inf, th_inf = target
    ex = np.abs(record.x - x_inf)
    eth = np.abs(record.theta - th_inf)
    outside = np.flatnonzero(np.maximum(ex, eth) > band)
    if len(outside) == 0:
        settle = 0.0
    elif outside[-1] == len(record) - 1:
        settle = math.inf
    else:
        settle = float(record.t[outside[-1] + 1])
    return Metrics(float(ex[-1]), float(eth[-1]), settle)
