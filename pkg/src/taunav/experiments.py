"""Experiment runners behind the command line: simulate, map, sweep, tau-compare.

Every runner is deterministic for a given configuration and seed, and every
table is written with :func:`taunav.sim.fmt` so repeated runs are
byte-identical.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_float, parse_value
from .errors import ConfigError, DomainEscape, FeatureLost, GeometryError, TauNavError
from .geometry import FeaturePoint, Pose, project, to_body_frame
from .kinematics import arc_pose
from .perception import finite_difference_tau, geometric_tau, perceived_tau, quasilinear_tau_star
from .sampled import (
    PHI_MAX,
    SampledConfig,
    classify_iterates,
    estimate_k_crit,
    g_prime,
    g_prime_printed,
    gprime_grid,
    iterate_heading_map,
)
from .sim import Metrics, convergence_metrics, fmt, run
from .steering import SteeringLaw, predicted_limits


def write_table(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# -- simulate -------------------------------------------------------------------


def predicted_target(exp: ExperimentConfig) -> tuple[float, float]:
    cfg = exp.sim_config()
    law = SteeringLaw(k=cfg.law.k, weighted=cfg.weighted)
    return predicted_limits(cfg.world, cfg.camera, law)


def simulate(exp: ExperimentConfig):
    """Run one experiment; returns ``(record, metrics, target)``."""
    cfg = exp.sim_config()
    record = run(cfg)
    target = predicted_target(exp)
    return record, convergence_metrics(record, target), target


def summary_text(exp: ExperimentConfig, record, metrics: Metrics, target) -> str:
    final = record.final_pose
    items = [
        ("scenario", exp["scenario"]),
        ("controller", exp["sim.controller"]),
        ("seed", exp["seed"]),
        ("rows", len(record)),
        ("aborted", record.aborted),
        ("abort_reason", record.abort_reason or "-"),
        ("t_final", float(record.t[-1])),
        ("x_final", final.x),
        ("theta_final", final.theta),
        ("x_predicted", target[0]),
        ("theta_predicted", target[1]),
        ("final_err_x", metrics.final_err_x),
        ("final_err_theta", metrics.final_err_theta),
        ("settling_time", metrics.settling_time),
    ]
    if record.spa_intervals:
        starved = sum(1 for iv in record.spa_intervals if iv.starved)
        items.append(("spa_intervals", len(record.spa_intervals)))
        items.append(("spa_starved_intervals", starved))
    return "".join(f"{k}: {fmt(v)}\n" for k, v in items)


SPA_INTERVAL_COLUMNS = (
    "index", "t_act", "x", "y", "theta", "u", "tau_l", "tau_r",
    "feature_l", "feature_r", "starved", "n_estimates", "u_eulerian",
)


def spa_interval_rows(record):
    for iv in record.spa_intervals:
        yield (
            iv.index, iv.t_act, iv.pose.x, iv.pose.y, iv.pose.theta, iv.u, iv.tau_l,
            iv.tau_r, iv.feature_l, iv.feature_r, iv.starved or "-", iv.n_estimates,
            iv.u_eulerian,
        )


GNUPLOT_SCRIPT = """\
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,1
set ylabel 'x'
plot 'trajectory.csv' using 1:2 with lines
set ylabel 'theta'
set xlabel 't'
plot 'trajectory.csv' using 1:4 with lines
unset multiplot
"""


def write_simulation(out_dir, exp, record, metrics, target, gnuplot=False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record.to_csv(out / "trajectory.csv")
    (out / "summary.txt").write_text(summary_text(exp, record, metrics, target))
    (out / "config.txt").write_text(exp.to_text())
    if record.events:
        record.events_csv(out / "events.csv")
    if record.spa_intervals:
        write_table(out / "spa_intervals.csv", SPA_INTERVAL_COLUMNS, spa_interval_rows(record))
    if gnuplot:
        (out / "plot.gp").write_text(GNUPLOT_SCRIPT)


# -- map --------------------------------------------------------------------------


def map_analysis(h, k, R=1.0, phi0=0.2, x=0.0, n=200, pitch=0.01, phi_max=PHI_MAX, x_max=None):
    """Iterate the frozen-x heading map and scan ``g'`` on the grid.

    The scan covers ``|x| <= x_max`` (default ``R``) and ``|phi| <= phi_max``.
    Returns a dict with ``iterates`` (rows ``step, phi_in, phi_out, gprime``),
    the grid ``(X, PHI, G)`` and scalar diagnostics.
    """
    if not abs(phi0) <= phi_max:
        raise ConfigError(f"|phi0|={abs(phi0)} is outside the map domain |phi| <= {phi_max:.6g}")
    if not abs(x) <= R:
        raise ConfigError(f"|x|={abs(x)} exceeds the corridor half-width {R}")
    if n < 0:
        raise ConfigError("n must be non-negative")
    if not 0 < phi_max <= PHI_MAX:
        raise ConfigError(f"phi_max must lie in (0, {PHI_MAX:.6g}]")
    x_max = R if x_max is None else x_max
    if not 0 <= x_max <= R:
        raise ConfigError("x_max must lie in [0, R]")
    cfg = SampledConfig(h=h, k=k, R=R, phi_max=phi_max)
    try:
        phis = iterate_heading_map(phi0, x, cfg, n)
        escaped = False
    except DomainEscape as exc:
        phis = exc.iterates
        escaped = True
    rows = []
    for i in range(1, len(phis)):
        rows.append((i, phis[i - 1], phis[i], float(g_prime(phis[i - 1], x, h, k, R))))
    X, P, G = gprime_grid(h, k, R, x_max, phi_max, pitch)
    max_abs = float(np.max(np.abs(G)))
    return {
        "iterates": rows,
        "grid": (X, P, G),
        "max_abs_gprime": max_abs,
        "contractive": max_abs < 1,
        "k_crit": estimate_k_crit(h, R, x_max, phi_max, pitch),
        "gprime_at_zero": float(g_prime(0.0, x, h, k, R)),
        "gprime_printed_at_zero": float(g_prime_printed(0.0, x, h, k, R)),
        "hk": h * k,
        "escaped": escaped,
        "behaviour": "diverged" if escaped else classify_iterates(phis),
        "phi_final": float(phis[-1]),
    }


def write_map(out_dir, result) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "iterates.csv", ("step", "phi_in", "phi_out", "gprime"), result["iterates"])
    X, P, G = result["grid"]
    write_table(
        out / "gprime_grid.csv", ("x", "phi", "gprime"),
        zip(X.ravel(), P.ravel(), G.ravel()),
    )
    keys = (
        "hk", "max_abs_gprime", "contractive", "k_crit", "gprime_at_zero",
        "gprime_printed_at_zero", "behaviour", "phi_final",
    )
    (out / "summary.txt").write_text("".join(f"{k}: {fmt(result[k])}\n" for k in keys))


# -- sweep ------------------------------------------------------------------------


def parse_vary(spec: str) -> tuple[str, list[str]]:
    """``key=v1,v2,...`` or ``key=start:stop:num`` (inclusive linspace)."""
    if "=" not in spec:
        raise ConfigError(f"expected key=values, got {spec!r}")
    key, rhs = spec.split("=", 1)
    key, rhs = key.strip(), rhs.strip()
    if rhs.count(":") == 2:
        a, b, num = rhs.split(":")
        try:
            count = int(num)
        except ValueError as exc:
            raise ConfigError(f"bad count in range {rhs!r}") from exc
        if count < 1:
            raise ConfigError("range count must be >= 1")
        vals = np.linspace(parse_float(a), parse_float(b), count)
        return key, [format(float(v), ".17g") for v in vals]
    values = [v.strip() for v in rhs.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"no values given for {key!r}")
    return key, values


SWEEP_METRIC_COLUMNS = (
    "x_final", "theta_final", "x_target", "theta_target",
    "final_err_x", "final_err_theta", "settling_time", "aborted", "error",
)


def _sweep_point(args):
    base_values, assignment = args
    exp = ExperimentConfig(dict(base_values))
    try:
        for key, value in assignment:
            exp.set(key, value)
        exp.validate()
        record, metrics, target = simulate(exp)
        final = record.final_pose
        return (
            final.x, final.theta, target[0], target[1], metrics.final_err_x,
            metrics.final_err_theta, metrics.settling_time, record.aborted,
            record.abort_reason or "-",
        )
    except TauNavError as exc:
        nan = math.nan
        return (nan, nan, nan, nan, nan, nan, nan, True, f"{type(exc).__name__}: {exc}")


def sweep(base: ExperimentConfig, varies, jobs: int = 1):
    """Cartesian product over ``varies``; rows come back in grid order.

    Returns ``(header, rows)``; each row is ``index``, the varied values, then
    :data:`SWEEP_METRIC_COLUMNS`.
    """
    keys = [k for k, _ in varies]
    parsed = [[parse_value(k, v) for v in vals] for k, vals in varies]
    grid = list(itertools.product(*[vals for _, vals in varies]))
    tasks = [(base.values, list(zip(keys, point))) for point in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    header = ("index", *keys, *SWEEP_METRIC_COLUMNS)
    rows = []
    for i, (point, res) in enumerate(zip(itertools.product(*parsed), results)):
        rows.append((i, *point, *res))
    return header, rows


# -- tau comparison ------------------------------------------------------------

TAU_COMPARE_COLUMNS = (
    "path", "t", "x", "y", "theta", "geometric", "perceived", "tau_star",
    "fd_tau", "perceived_minus_geometric", "tau_star_minus_geometric",
)


def tau_compare(exp: ExperimentConfig):
    """Geometric, perceived, quasi-linear and finite-difference tau of one feature.

    The vehicle starts at ``(sim.x0, sim.y0, sim.theta0)`` and follows a
    straight path and a constant turn at ``tau_compare.u_arc``.  Raises
    :class:`FeatureLost` if the feature leaves the field of view.
    """
    cam = exp.camera()
    v = exp["sim.v"]
    feat = FeaturePoint(exp["tau_compare.feature_x"], exp["tau_compare.feature_y"])
    pose0 = Pose(exp["sim.x0"], exp["sim.y0"], exp["sim.theta0"])
    dt = exp["tau_compare.dt"]
    duration = exp["tau_compare.duration"]
    if not dt > 0 or not duration > 0:
        raise ConfigError("tau_compare.dt and tau_compare.duration must be positive")
    n = int(round(duration / dt))
    rows = []
    for path, u in (("straight", 0.0), ("arc", exp["tau_compare.u_arc"])):
        s_prev = math.nan
        for i in range(n + 1):
            t = i * dt
            pose = arc_pose(pose0, u, v, t)
            try:
                s = project(cam, to_body_frame(pose, feat))
            except GeometryError as exc:
                raise FeatureLost(f"feature lost on the {path} path at t={t:.6g}: {exc}") from exc
            geo = geometric_tau(pose, v, feat).value
            per = perceived_tau(cam, pose, v, u, feat).value
            star = quasilinear_tau_star(cam, pose, v, feat).value
            fd = finite_difference_tau(s_prev, s, dt).value if i > 0 else math.nan
            rows.append((path, t, pose.x, pose.y, pose.theta, geo, per, star, fd, per - geo, star - geo))
            s_prev = s
    return TAU_COMPARE_COLUMNS, rows
