import csv
import math

import pytest

from taunav.cli import main
from taunav.config import PRESETS, ExperimentConfig, parse_float
from taunav.errors import ConfigError
from taunav.experiments import TAU_COMPARE_COLUMNS
from taunav.sampled import estimate_k_crit
from taunav.sim import TRAJECTORY_COLUMNS


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _summary(path):
    out = {}
    for line in path.read_text().splitlines():
        k, v = line.split(": ", 1)
        out[k] = v
    return out


def test_presets_listed(capsys):
    assert main(["presets"]) == 0
    text = capsys.readouterr().out
    for name in PRESETS:
        assert name in text


def test_simulate_centering_preset(tmp_path):
    assert main(["simulate", "--preset", "theorem1", "--out", str(tmp_path), "--gnuplot"]) == 0
    s = _summary(tmp_path / "summary.txt")
    assert abs(float(s["x_final"])) < 1e-3
    rows = _read(tmp_path / "trajectory.csv")
    assert list(rows[0]) == list(TRAJECTORY_COLUMNS)
    assert len(rows) == 50001
    assert (tmp_path / "plot.gp").exists() and (tmp_path / "config.txt").exists()


def test_simulate_offset_preset(tmp_path):
    assert main(["simulate", "--preset", "corollary1", "--out", str(tmp_path)]) == 0
    s = _summary(tmp_path / "summary.txt")
    assert float(s["x_final"]) == pytest.approx(-0.3333, abs=1e-3)
    assert float(s["x_predicted"]) == pytest.approx(-1 / 3, abs=1e-15)


def test_error_exits(tmp_path, capsys):
    assert main(["simulate", "--preset", "nope", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "theorem1" in err and "corollary2" in err
    assert main(["simulate", "--set", "camera.zoom=2", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--set", "sim.controller=sampled", "--set", "sampled.h=0.0505",
                 "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--preset", "sampled_unstable", "--out", str(tmp_path)]) == 3


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scenario\nsim.T = 3   # short\nsim.x0 = 0.2\nsim.theta0 = pi/2 - 0.1\n")
    exp = ExperimentConfig.build("theorem1", cfg, ["sim.x0=0.3"], seed=5)
    assert exp["sim.T"] == 3 and exp["sim.x0"] == 0.3 and exp["seed"] == 5
    assert exp["sim.theta0"] == pytest.approx(math.pi / 2 - 0.1)
    assert exp["law.k"] == 0.5
    bad = tmp_path / "bad.cfg"
    bad.write_text("sim.T 3\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.build(config_file=bad)
    assert parse_float("2*pi") == pytest.approx(2 * math.pi)
    with pytest.raises(ConfigError):
        parse_float("__import__('os')")


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("TAU_NAV_OUT", str(tmp_path / "env"))
    assert main(["simulate", "--set", "sim.T=1"]) == 0
    assert (tmp_path / "env" / "trajectory.csv").exists()
    assert main(["simulate", "--set", "sim.T=1", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "trajectory.csv").exists()


@pytest.mark.parametrize("preset", ["theorem2", "spa_limit"])
def test_byte_identical_reruns(tmp_path, preset):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--preset", preset, "--set", "sim.T=5", "--seed", "3", "--out", str(out)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_poisson_seed_changes_output(tmp_path):
    base = ["simulate", "--preset", "spa_limit", "--set", "field.placement=poisson", "--set", "sim.T=2"]
    assert main(base + ["--seed", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--seed", "2", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_map_command(tmp_path, capsys):
    out = tmp_path / "m"
    assert main(["map", "--h", "0.05", "--k", "1", "--phi-max", "0.5", "--out", str(out)]) == 0
    s = _summary(out / "summary.txt")
    assert float(s["max_abs_gprime"]) < 1 and s["contractive"] == "True"
    assert main(["map", "--h", "0.05", "--k", "6", "--x", "0", "--out", str(out)]) == 0
    s = _summary(out / "summary.txt")
    assert float(s["gprime_at_zero"]) == pytest.approx(1 - 4 * 0.3, abs=1e-12)
    assert float(s["gprime_printed_at_zero"]) == pytest.approx(1 - 8 * 0.3, abs=1e-12)
    assert s["contractive"] == "False"
    assert main(["map", "--n", "0", "--out", str(out)]) == 0
    assert (out / "iterates.csv").read_text() == "step,phi_in,phi_out,gprime\n"
    rows = _read(out / "gprime_grid.csv")
    assert list(rows[0]) == ["x", "phi", "gprime"]
    assert main(["map", "--phi0", "0.8", "--out", str(out)]) == 2


def test_sweep_order_and_parallel(tmp_path):
    args = ["sweep", "--preset", "theorem2", "--set", "sim.T=3", "--vary", "law.k=0.5,2", "--vary", "sim.x0=0.1:0.3:2"]
    assert main(args + ["--out", str(tmp_path / "s1")]) == 0
    assert main(args + ["--jobs", "3", "--out", str(tmp_path / "s3")]) == 0
    a = (tmp_path / "s1" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "s3" / "sweep.csv").read_bytes()
    rows = _read(tmp_path / "s1" / "sweep.csv")
    assert [(r["law.k"], r["sim.x0"]) for r in rows] == [
        ("0.5", "0.10000000000000001"), ("0.5", "0.29999999999999999"),
        ("2", "0.10000000000000001"), ("2", "0.29999999999999999"),
    ]


def test_single_point_sweep_equals_simulate(tmp_path):
    assert main(["simulate", "--preset", "corollary2", "--set", "sim.T=10", "--out", str(tmp_path / "sim")]) == 0
    assert main(["sweep", "--preset", "corollary2", "--set", "sim.T=10", "--vary", "camera.delta=0.5",
                 "--out", str(tmp_path / "sw")]) == 0
    s = _summary(tmp_path / "sim" / "summary.txt")
    row = _read(tmp_path / "sw" / "sweep.csv")[0]
    assert row["x_final"] == s["x_final"] and row["settling_time"] == s["settling_time"]


def test_sweep_k_flips_near_threshold(tmp_path):
    h = 0.05
    k_pred = estimate_k_crit(h, 1.0, 0.0, 0.0)
    assert 9.5 < k_pred < 10.5
    assert main(["sweep", "--preset", "theorem2", "--set", "sim.T=20", "--set", "sim.x0=0.05",
                 "--vary", "law.k=9,9.5,10.5,11", "--jobs", "4", "--out", str(tmp_path)]) == 0
    flags = [r["aborted"] for r in _read(tmp_path / "sweep.csv")]
    assert flags == ["False", "False", "True", "True"]


def test_sweep_all_failed_exit(tmp_path):
    assert main(["sweep", "--preset", "sampled_unstable", "--vary", "law.k=30,40", "--out", str(tmp_path)]) == 3


def test_sweep_delta_epsilon_limits(tmp_path):
    assert main(["sweep", "--preset", "corollary1", "--vary", "camera.delta=0.5,1.5",
                 "--vary", "camera.epsilon=0.7,1", "--jobs", "4", "--out", str(tmp_path)]) == 0
    for r in _read(tmp_path / "sweep.csv"):
        d, e = float(r["camera.delta"]), float(r["camera.epsilon"])
        assert float(r["x_final"]) == pytest.approx((d - e) / (d + e), abs=1e-3)


def test_tau_compare(tmp_path):
    assert main(["tau-compare", "--out", str(tmp_path)]) == 0
    rows = _read(tmp_path / "tau_compare.csv")
    assert list(rows[0]) == list(TAU_COMPARE_COLUMNS)
    for r in rows:
        assert float(r["tau_star_minus_geometric"]) == pytest.approx(-1.0, abs=1e-9)
        if r["path"] == "straight":
            assert float(r["perceived_minus_geometric"]) == pytest.approx(-1.0, abs=1e-12)
    assert main(["tau-compare", "--set", "tau_compare.feature_y=2.5", "--out", str(tmp_path)]) == 3
