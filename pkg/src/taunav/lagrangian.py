"""Lagrangian optical flow: discrete wall features tracked on the image line.

Features are anonymous points on the corridor walls.  Each frame projects the
visible ones onto the image line; tracks follow individual features (data
association is perfect, identified by feature id) and tau is estimated by a
backward difference of the last two samples.

The sense-perceive-act controller splits every interval of length ``h`` into a
straight sub-segment (``u = 0``) during which tracks are sampled, followed by a
constant-curvature sub-segment whose turn rate comes from the tau estimates
taken at the end of the straight part.  Only sample pairs that both lie in the
straight part of the current interval may feed the steering signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import EmptyField, TauNavError, WallStarved
from .geometry import (
    LEFT,
    RIGHT,
    SING_TOL,
    CameraModel,
    CorridorWorld,
    FeaturePoint,
    Pose,
)
from .perception import TAU_TOL
from .steering import SteeringLaw, apply_law, eulerian_control

SIDE_CODE = {LEFT: -1, RIGHT: 1}
SIDE_NAME = {-1: LEFT, 1: RIGHT}

UNIFORM_GRID = "uniform_grid"
POISSON = "poisson"

INTERPOLATED_RECEPTOR = "interpolated_receptor"
NEAREST_RECEPTOR = "nearest_receptor"
MEDIAN = "median"
AGGREGATIONS = (INTERPOLATED_RECEPTOR, NEAREST_RECEPTOR, MEDIAN)

# track status codes
NONE, LIVE, EXITED_FOV, BEHIND = 0, 1, 2, 3
STATUS_NAME = {NONE: "none", LIVE: "live", EXITED_FOV: "exited_fov", BEHIND: "behind"}


@dataclass
class FeatureField:
    """Wall features stored column-wise; ``ids[i] == i``."""

    xf: np.ndarray
    yf: np.ndarray
    side: np.ndarray  # -1 left, +1 right
    R: float
    density: float = math.nan
    extent: tuple[float, float] = (math.nan, math.nan)
    seed: int | None = None
    placement: str = UNIFORM_GRID
    _order: np.ndarray = dc_field(init=False, repr=False)
    _y_sorted: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        self.xf = np.asarray(self.xf, dtype=float)
        self.yf = np.asarray(self.yf, dtype=float)
        self.side = np.asarray(self.side, dtype=np.int8)
        self._order = np.argsort(self.yf, kind="stable")
        self._y_sorted = self.yf[self._order]

    def __len__(self):
        return len(self.xf)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self.xf))

    @property
    def features(self) -> list[FeaturePoint]:
        return [
            FeaturePoint(float(x), float(y), SIDE_NAME[int(sd)], i)
            for i, (x, y, sd) in enumerate(zip(self.xf, self.yf, self.side))
        ]

    def count(self, side: str) -> int:
        return int(np.sum(self.side == SIDE_CODE[side]))

    def window(self, y_lo: float, y_hi: float) -> np.ndarray:
        """Indices of features with ``y_lo <= yf <= y_hi``."""
        a = np.searchsorted(self._y_sorted, y_lo, side="left")
        b = np.searchsorted(self._y_sorted, y_hi, side="right")
        return self._order[a:b]

    def mirrored(self) -> "FeatureField":
        return FeatureField(
            -self.xf, self.yf.copy(), -self.side, self.R,
            self.density, self.extent, self.seed, self.placement,
        )

    def save(self, path) -> None:
        """Write the plain-text table ``id side y``, one feature per line."""
        lines = [
            f"# R={self.R!r} density={self.density!r} extent={self.extent[0]!r},{self.extent[1]!r}"
            f" seed={self.seed} placement={self.placement}",
            "# id side y",
        ]
        for i, (sd, y) in enumerate(zip(self.side, self.yf)):
            lines.append(f"{i} {SIDE_NAME[int(sd)]} {float(y)!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path, world: CorridorWorld) -> "FeatureField":
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fid, side, y = line.split()
            if side not in SIDE_CODE:
                raise ValueError(f"bad wall side {side!r} in feature table")
            rows.append((int(fid), SIDE_CODE[side], float(y)))
        rows.sort()
        if [r[0] for r in rows] != list(range(len(rows))):
            raise ValueError("feature ids must be 0..n-1")
        if not rows:
            raise EmptyField("feature table is empty")
        side = np.array([r[1] for r in rows], dtype=np.int8)
        yf = np.array([r[2] for r in rows])
        return cls(side * world.R, yf, side, world.R)


def generate_features(
    world: CorridorWorld,
    density: float,
    extent: tuple[float, float],
    seed: int = 0,
    placement: str = UNIFORM_GRID,
) -> FeatureField:
    """Features on both walls over ``extent = (y_start, y_end)``.

    ``uniform_grid`` puts features at cell centres with spacing ``1/density``;
    ``poisson`` draws exponential gaps from a generator seeded with ``seed``
    (left wall first, then right).
    """
    if not density > 0:
        raise ValueError(f"density must be positive, got {density}")
    y0, y1 = extent
    length = y1 - y0
    if not length * density >= 1:
        raise EmptyField(f"extent length {length} x density {density} < 1 feature")
    if placement == UNIFORM_GRID:
        n = int(math.floor(length * density + 1e-9))
        ys = y0 + (np.arange(n) + 0.5) / density
        walls = [ys, ys.copy()]
    elif placement == POISSON:
        rng = np.random.default_rng(seed)
        walls = []
        for _ in range(2):
            expected = length * density
            n_draw = int(expected + 10 * math.sqrt(expected) + 10)
            ys = y0 + np.cumsum(rng.exponential(1.0 / density, size=n_draw))
            while ys[-1] < y1:
                more = ys[-1] + np.cumsum(rng.exponential(1.0 / density, size=n_draw))
                ys = np.concatenate([ys, more])
            walls.append(ys[ys < y1])
    else:
        raise ValueError(f"unknown placement {placement!r}")
    if len(walls[0]) + len(walls[1]) == 0:
        raise EmptyField("no features generated")
    side = np.concatenate([np.full(len(walls[0]), -1), np.full(len(walls[1]), 1)])
    yf = np.concatenate(walls)
    return FeatureField(side * world.R, yf, side, world.R, density, (y0, y1), seed, placement)


class FlowFrame(NamedTuple):
    """Visible features (sorted ids) with their image coordinates."""

    ids: np.ndarray
    s: np.ndarray
    side: np.ndarray
    behind_ids: np.ndarray

    def __len__(self):
        return len(self.ids)


def observe(
    pose: Pose,
    cam: CameraModel,
    field: FeatureField,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> FlowFrame:
    """Project every feature in front of the pinhole with ``|s| <= r_max``.

    Optional additive Gaussian noise with standard deviation ``noise_sigma`` is
    applied to the reported coordinates; visibility uses the noiseless ones.
    """
    if math.isfinite(cam.max_range):
        reach = cam.max_range * math.sqrt(1.0 + (cam.r_max / cam.f) ** 2)
        idx = field.window(pose.y - reach, pose.y + reach)
    else:
        idx = field.ids
    dx = field.xf[idx] - pose.x
    dy = field.yf[idx] - pose.y
    c, sn = math.cos(pose.theta), math.sin(pose.theta)
    d_fwd = c * dx + sn * dy
    d_lat = -sn * dx + c * dy
    depth = d_fwd - cam.f
    front = depth > SING_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(front, -cam.f * d_lat / np.where(front, depth, 1.0), np.nan)
    visible = front & (np.abs(s) <= cam.r_max) & (d_fwd <= cam.max_range)
    order = np.argsort(idx[visible], kind="stable")
    ids = idx[visible][order]
    s_vis = s[visible][order]
    if noise_sigma > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise_sigma > 0")
        s_vis = s_vis + rng.normal(0.0, noise_sigma, size=s_vis.shape)
    return FlowFrame(ids, s_vis, field.side[ids], np.sort(idx[~front]))


@dataclass
class FeatureTrack:
    feature_id: int
    track_id: int
    wall_side: str
    samples: list = dc_field(default_factory=list)
    status: str = "live"


class TauEstimates(NamedTuple):
    feature_id: np.ndarray
    track_id: np.ndarray
    side: np.ndarray
    s: np.ndarray
    tau: np.ndarray
    t_prev: np.ndarray
    t_curr: np.ndarray

    def __len__(self):
        return len(self.feature_id)

    def rows(self):
        for i in range(len(self.feature_id)):
            yield (
                int(self.feature_id[i]),
                SIDE_NAME[int(self.side[i])],
                float(self.s[i]),
                float(self.tau[i]),
            )


class TrackSet:
    """Tracks for every feature of a field, updated one frame at a time.

    Only the last two samples of each track are kept unless ``keep_history``
    is set.  A feature that drops out and later re-enters starts a new track.
    """

    def __init__(self, field: FeatureField, keep_history: bool = False):
        n = len(field)
        self.field = field
        self.keep_history = keep_history
        self.track_of = np.full(n, -1, dtype=np.int64)
        self.status = np.zeros(n, dtype=np.int8)
        self.count = np.zeros(n, dtype=np.int64)
        self.t0 = np.full(n, np.nan)
        self.s0 = np.full(n, np.nan)
        self.tag0 = np.full(n, -1, dtype=np.int64)
        self.t1 = np.full(n, np.nan)
        self.s1 = np.full(n, np.nan)
        self.tag1 = np.full(n, -1, dtype=np.int64)
        self.live = np.empty(0, dtype=np.int64)
        self.next_track_id = 0
        self.last_t = -math.inf
        self.events: list[tuple[float, int, int, str]] = []
        self.history: dict[int, FeatureTrack] = {}

    def update(self, frame: FlowFrame, t: float, tag: int = -1) -> "TrackSet":
        if not t > self.last_t:
            raise ValueError(f"frame time {t} does not follow {self.last_t}")
        vis = np.asarray(frame.ids, dtype=np.int64)
        new = vis[self.status[vis] != LIVE]
        if len(new):
            tids = np.arange(self.next_track_id, self.next_track_id + len(new))
            self.next_track_id += len(new)
            self.track_of[new] = tids
            self.status[new] = LIVE
            self.count[new] = 0
            self.t1[new] = np.nan
            self.s1[new] = np.nan
            self.tag1[new] = -1
            for fid, tid in zip(new.tolist(), tids.tolist()):
                self.events.append((t, fid, tid, "enter"))
                if self.keep_history:
                    side = SIDE_NAME[int(self.field.side[fid])]
                    self.history[tid] = FeatureTrack(fid, tid, side)
        self.t0[vis] = self.t1[vis]
        self.s0[vis] = self.s1[vis]
        self.tag0[vis] = self.tag1[vis]
        self.t1[vis] = t
        self.s1[vis] = frame.s
        self.tag1[vis] = tag
        self.count[vis] += 1

        lost = np.setdiff1d(self.live, vis, assume_unique=True)
        if len(lost):
            behind = np.isin(lost, frame.behind_ids)
            self.status[lost] = np.where(behind, BEHIND, EXITED_FOV)
            for fid in lost.tolist():
                tid = int(self.track_of[fid])
                self.events.append((t, fid, tid, "exit"))
                if self.keep_history:
                    self.history[tid].status = STATUS_NAME[int(self.status[fid])]
        if self.keep_history:
            for fid, s in zip(vis.tolist(), np.asarray(frame.s).tolist()):
                self.history[int(self.track_of[fid])].samples.append((t, s))
        self.live = vis
        self.last_t = t
        return self

    def tracks(self) -> list[FeatureTrack]:
        """All tracks started so far (requires ``keep_history``)."""
        if not self.keep_history:
            raise ValueError("track history was not kept")
        return [self.history[k] for k in sorted(self.history)]

    def estimate(self, tag: int | None = None, window: tuple[float, float] | None = None) -> TauEstimates:
        """Backward-difference tau for live tracks with two usable samples.

        ``tag`` restricts to sample pairs both carrying that tag; ``window``
        to pairs with both sample times inside ``[t_lo, t_hi]``.  Tracks whose
        image did not move are skipped.
        """
        idx = self.live[self.count[self.live] >= 2]
        if tag is not None:
            idx = idx[(self.tag0[idx] == tag) & (self.tag1[idx] == tag)]
        if window is not None:
            lo, hi = window
            eps = 1e-12 * max(1.0, abs(hi))
            ok = (self.t0[idx] >= lo - eps) & (self.t1[idx] <= hi + eps)
            idx = idx[ok]
        ds = self.s1[idx] - self.s0[idx]
        moving = np.abs(ds) >= TAU_TOL
        idx = idx[moving]
        ds = ds[moving]
        dt = self.t1[idx] - self.t0[idx]
        return TauEstimates(
            idx,
            self.track_of[idx],
            self.field.side[idx],
            self.s1[idx],
            self.s1[idx] * dt / ds,
            self.t0[idx],
            self.t1[idx],
        )


def update_tracks(tracks: TrackSet, frame: FlowFrame, t: float, tag: int = -1) -> TrackSet:
    return tracks.update(frame, t, tag)


def estimate_taus(tracks: TrackSet, window=None, tag=None) -> TauEstimates:
    return tracks.estimate(tag=tag, window=window)


class WallSignal(NamedTuple):
    u: float
    tau_l: float
    tau_r: float
    feature_l: int
    feature_r: int


def _pick(est: TauEstimates, side: str, target: float, aggregation: str):
    mask = est.side == SIDE_CODE[side]
    if not np.any(mask):
        raise WallStarved(side)
    idx = np.flatnonzero(mask)
    nearest = idx[np.argmin(np.abs(est.s[idx] - target))]
    if aggregation == NEAREST_RECEPTOR:
        return float(est.tau[nearest]), int(est.feature_id[nearest])
    if aggregation == INTERPOLATED_RECEPTOR:
        below = idx[est.s[idx] <= target]
        above = idx[est.s[idx] > target]
        if len(below) == 0 or len(above) == 0:
            return float(est.tau[nearest]), int(est.feature_id[nearest])
        a = below[np.argmax(est.s[below])]
        b = above[np.argmin(est.s[above])]
        w = (target - est.s[a]) / (est.s[b] - est.s[a])
        return float((1 - w) * est.tau[a] + w * est.tau[b]), int(est.feature_id[nearest])
    if aggregation == MEDIAN:
        return float(np.median(est.tau[mask])), -1
    raise ValueError(f"unknown aggregation {aggregation!r}")


def segment_steering_signal(
    estimates: TauEstimates,
    cam: CameraModel,
    k: float,
    aggregation: str = INTERPOLATED_RECEPTOR,
    weighted: bool = False,
) -> WallSignal:
    """Group estimates by wall, reduce each wall to one tau, apply the tau-balance law.

    The receptor sits at ``-delta`` (left) or ``+epsilon`` (right).
    ``nearest_receptor`` takes the estimate imaged closest to it;
    ``interpolated_receptor`` interpolates linearly in image coordinate between
    the estimates bracketing it (falling back to the nearest one at the edge);
    ``median`` takes the wall median.  The reported feature id is always the
    nearest one (``-1`` for the median).
    """
    tl, fl = _pick(estimates, LEFT, -cam.delta, aggregation)
    tr, fr = _pick(estimates, RIGHT, cam.epsilon, aggregation)
    u = apply_law(SteeringLaw(k=k, weighted=weighted), cam, tl, tr)
    return WallSignal(u, tl, tr, fl, fr)


@dataclass(frozen=True)
class SpaSchedule:
    """Interval ``h`` split into a straight sensing part and a turning part."""

    h: float = 0.5
    straight_fraction: float = 0.4
    dt: float = 1e-3

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("SPA interval h must be positive")
        if not 0 < self.straight_fraction < 1:
            raise ValueError("straight_fraction must lie strictly between 0 and 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        for name, span in (("h", self.h), ("straight_fraction*h", self.straight_fraction * self.h)):
            q = span / self.dt
            if abs(q - round(q)) > 1e-6 * max(1.0, q):
                raise ValueError(f"{name}={span} is not an integer multiple of dt={self.dt}")
        if self.straight_steps < 1 or self.straight_steps >= self.interval_steps:
            raise ValueError("straight and turning sub-segments need at least one step each")

    @property
    def interval_steps(self) -> int:
        return int(round(self.h / self.dt))

    @property
    def straight_steps(self) -> int:
        return int(round(self.straight_fraction * self.h / self.dt))

    def partition(self, T: float) -> np.ndarray:
        """Switching times ``t_0 < t_1 < ...`` covering ``[0, T]``."""
        n = int(math.floor(T / self.h + 1e-9))
        return np.arange(n + 1) * self.h


class SpaInterval(NamedTuple):
    index: int
    t_act: float
    pose: Pose
    u: float
    tau_l: float
    tau_r: float
    feature_l: int
    feature_r: int
    starved: str
    n_estimates: int
    sample_window: tuple[float, float]
    used_times: tuple[float, float, float, float]
    u_eulerian: float


class SpaController:
    """Sense-perceive-act controller driven step by step from the simulator.

    Call :meth:`step` once per integrator step with the step index ``i``, the
    time and the current pose; it returns the turn rate to hold over
    ``[t, t + dt)``.  On a starved wall the turning sub-segment is driven
    straight (``u = 0``).
    """

    def __init__(
        self,
        field: FeatureField,
        cam: CameraModel,
        world: CorridorWorld,
        schedule: SpaSchedule,
        k: float,
        v: float = 1.0,
        aggregation: str = INTERPOLATED_RECEPTOR,
        weighted: bool = False,
        noise_sigma: float = 0.0,
        seed: int = 0,
        keep_history: bool = False,
    ):
        self.field = field
        self.cam = cam
        self.world = world
        self.schedule = schedule
        self.k = k
        self.v = v
        self.aggregation = aggregation
        self.weighted = weighted
        self.noise_sigma = noise_sigma
        self.rng = np.random.default_rng(seed)
        self.tracks = TrackSet(field, keep_history=keep_history)
        self.intervals: list[SpaInterval] = []
        self._u = 0.0
        self._tau = (math.nan, math.nan)

    def step(self, i: int, t: float, pose: Pose) -> tuple[float, float, float, str]:
        """Return ``(u, tau_l, tau_r, phase)`` for the step starting at ``t``."""
        H = self.schedule.interval_steps
        S = self.schedule.straight_steps
        j, r = divmod(i, H)
        tag = j if r <= S else -1
        frame = observe(pose, self.cam, self.field, self.noise_sigma, self.rng)
        self.tracks.update(frame, t, tag)
        if r < S:
            return 0.0, self._tau[0], self._tau[1], "sense"
        if r == S:
            self._act(j, t, pose)
        return self._u, self._tau[0], self._tau[1], "act"

    def _act(self, j: int, t: float, pose: Pose) -> None:
        t_start = t - self.schedule.straight_steps * self.schedule.dt
        est = self.tracks.estimate(tag=j)
        starved = ""
        try:
            sig = segment_steering_signal(est, self.cam, self.k, self.aggregation, self.weighted)
            u, tl, tr, fl, fr = sig
        except WallStarved as exc:
            starved = exc.side
            u, tl, tr, fl, fr = 0.0, math.nan, math.nan, -1, -1
        used = (math.nan,) * 4
        if not starved and fl >= 0:
            used = (
                float(self.tracks.t0[fl]), float(self.tracks.t1[fl]),
                float(self.tracks.t0[fr]), float(self.tracks.t1[fr]),
            )
        try:
            u_eul = eulerian_control(
                pose, self.cam, self.world, SteeringLaw(k=self.k, weighted=self.weighted), self.v
            )[0]
        except TauNavError:
            u_eul = math.nan
        self._u = u
        self._tau = (tl, tr)
        self.intervals.append(
            SpaInterval(j, t, pose, u, tl, tr, fl, fr, starved, len(est), (t_start, t), used, u_eul)
        )
