"""Flat ``key = value`` experiment configuration and named presets.

Keys are dotted (``camera.f``, ``law.k`` ...).  Numeric values may use ``pi``
in simple arithmetic, e.g. ``sim.theta0 = pi/2 + 0.2``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .geometry import CameraModel, CorridorWorld
from .lagrangian import AGGREGATIONS, POISSON, UNIFORM_GRID, SpaSchedule
from .sim import CONTROLLERS, SPA, FieldSpec, SimConfig
from .steering import SteeringLaw

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _eval_number(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.Name) and node.id == "inf":
        return math.inf
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _eval_number(node.operand)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    raise ValueError("unsupported expression")


def parse_float(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return _eval_number(ast.parse(text, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {text!r} as a number") from exc


def _optional_float(text: str):
    return None if text.strip().lower() in ("none", "") else parse_float(text)


def _optional_str(text: str):
    return None if text.strip().lower() in ("none", "") else text.strip()


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse {text!r} as a boolean")


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r} as an integer") from exc


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ConfigError(f"{t!r} is not one of {', '.join(options)}")
        return t

    return parse


# key -> (parser, default)
SCHEMA: dict[str, tuple[Any, Any]] = {
    "scenario": (str.strip, "custom"),
    "seed": (_int, 0),
    "out": (str.strip, "taunav_out"),
    "world.R": (parse_float, 1.0),
    "camera.f": (parse_float, 1.0),
    "camera.delta": (parse_float, 1.0),
    "camera.epsilon": (parse_float, 1.0),
    "camera.r_max": (parse_float, 2.0),
    "camera.max_range": (parse_float, math.inf),
    "law.k": (parse_float, 0.5),
    "law.u_max": (_optional_float, None),
    "law.weighted": (_bool, False),
    "sim.controller": (_choice(*CONTROLLERS), "continuous_balance"),
    "sim.dt": (parse_float, 1e-3),
    "sim.T": (parse_float, 50.0),
    "sim.v": (parse_float, 1.0),
    "sim.x0": (parse_float, 0.0),
    "sim.y0": (parse_float, 0.0),
    "sim.theta0": (parse_float, math.pi / 2),
    "sim.margin": (parse_float, 0.02),
    "sampled.h": (parse_float, 0.05),
    "spa.h": (parse_float, 0.5),
    "spa.straight_fraction": (parse_float, 0.4),
    "spa.aggregation": (_choice(*AGGREGATIONS), AGGREGATIONS[0]),
    "field.density": (parse_float, 10.0),
    "field.start": (_optional_float, None),
    "field.end": (_optional_float, None),
    "field.placement": (_choice(UNIFORM_GRID, POISSON), UNIFORM_GRID),
    "field.path": (_optional_str, None),
    "flow.noise_sigma": (parse_float, 0.0),
    "tau_compare.feature_x": (parse_float, -1.0),
    "tau_compare.feature_y": (parse_float, 6.0),
    "tau_compare.u_arc": (parse_float, 0.02),
    "tau_compare.duration": (parse_float, 2.0),
    "tau_compare.dt": (parse_float, 0.01),
}


PRESETS: dict[str, dict[str, str]] = {
    "theorem1": {
        "sim.controller": "continuous_balance",
        "law.k": "0.5",
        "sim.T": "50",
        "sim.x0": "0.5",
        "sim.theta0": "pi/2 + 0.2",
    },
    "corollary1": {
        "sim.controller": "continuous_balance",
        "camera.delta": "0.5",
        "camera.epsilon": "1.0",
        "sim.T": "100",
    },
    "corollary2": {
        "sim.controller": "continuous_weighted",
        "camera.delta": "0.5",
        "camera.epsilon": "1.0",
        "sim.T": "100",
    },
    "theorem2": {
        "sim.controller": "sampled",
        "sampled.h": "0.05",
        "law.k": "1.0",
        "sim.T": "50",
        "sim.x0": "0.5",
    },
    "sampled_unstable": {
        "sim.controller": "sampled",
        "sampled.h": "0.05",
        "law.k": "30",
        "sim.T": "10",
        "sim.x0": "0.5",
    },
    "spa_reference": {
        "sim.controller": "spa",
        "sim.x0": "0.5",
        "sim.T": "100",
        "law.k": "0.5",
        "field.density": "10",
        "spa.h": "0.5",
        "spa.straight_fraction": "0.4",
        "camera.max_range": "8",
    },
    "spa_limit": {
        "sim.controller": "spa",
        "sim.x0": "0.5",
        "sim.T": "5",
        "law.k": "0.5",
        "field.density": "50",
        "spa.h": "0.5",
        "spa.straight_fraction": "0.4",
        "camera.max_range": "8",
    },
    "turn_exaggeration": {
        "tau_compare.feature_x": "-1",
        "tau_compare.feature_y": "6",
        "tau_compare.u_arc": "0.02",
        "tau_compare.duration": "2",
        "tau_compare.dt": "0.01",
    },
}


def parse_value(key: str, text: str):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    return SCHEMA[key][0](text)


def parse_assignment(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def read_config_text(text: str) -> dict[str, str]:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = parse_assignment(line)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        raw[key] = value
    return raw


@dataclass
class ExperimentConfig:
    """Resolved parameter set; build module configs with the ``*_config`` methods."""

    values: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, preset=None, config_file=None, overrides=(), seed=None) -> "ExperimentConfig":
        """Defaults, then preset, then config file, then ``--set`` overrides."""
        raw: dict[str, str] = {}
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(
                    f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}"
                )
            raw["scenario"] = preset
            raw.update(PRESETS[preset])
        if config_file is not None:
            try:
                raw.update(read_config_text(Path(config_file).read_text()))
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
        for item in overrides:
            key, value = parse_assignment(item)
            raw[key] = value
        if seed is not None:
            raw["seed"] = str(seed)
        cfg = cls({k: default for k, (_, default) in SCHEMA.items()})
        for key, value in raw.items():
            cfg.set(key, value)
        cfg.validate()
        return cfg

    def set(self, key: str, value) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = parse_value(key, value) if isinstance(value, str) else value

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **pairs) -> "ExperimentConfig":
        new = ExperimentConfig(dict(self.values))
        for key, value in pairs.items():
            new.set(key, value)
        new.validate()
        return new

    def validate(self) -> None:
        try:
            self.sim_config()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def world(self) -> CorridorWorld:
        return CorridorWorld(self["world.R"])

    def camera(self) -> CameraModel:
        return CameraModel(
            self["camera.f"], self["camera.delta"], self["camera.epsilon"],
            self["camera.r_max"], self["camera.max_range"],
        )

    def law(self) -> SteeringLaw:
        return SteeringLaw(self["law.k"], self["law.weighted"], self["law.u_max"])

    def sim_config(self) -> SimConfig:
        v = self.values
        spa = None
        if v["sim.controller"] == SPA:
            spa = SpaSchedule(v["spa.h"], v["spa.straight_fraction"], v["sim.dt"])
        return SimConfig(
            dt=v["sim.dt"],
            T=v["sim.T"],
            v=v["sim.v"],
            x0=v["sim.x0"],
            y0=v["sim.y0"],
            theta0=v["sim.theta0"],
            controller=v["sim.controller"],
            world=self.world(),
            camera=self.camera(),
            law=self.law(),
            h=v["sampled.h"],
            spa=spa,
            aggregation=v["spa.aggregation"],
            field=FieldSpec(
                v["field.density"], v["field.start"], v["field.end"],
                v["field.placement"], v["field.path"],
            ),
            noise_sigma=v["flow.noise_sigma"],
            seed=v["seed"],
            margin=v["sim.margin"],
        )

    def to_text(self) -> str:
        lines = []
        for key in SCHEMA:
            val = self.values[key]
            if isinstance(val, float):
                val = format(val, ".17g")
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"
