"""Simulation config files.

One YAML document with five sections::

    robot: puma560_hebi5.yaml       # path (relative to this file), "builtin", or an inline mapping
    constraint:
      tangent_frame: {origin: [x, y, z], rpy: [r, p, y]}   # z axis = surface normal
      r_max: 0.3
    path:
      center: [x, y, z]
      normal: [1, 0, 0]
      radius: 0.1
      start_direction: [0, 0, 1]    # optional
      orientation_mode: fixed       # or tracking
    resolution:
      strategy: all                 # or one strategy name
      alpha: -1.0
      weights: [0.5, 100.0, 0.6, 0.01]
      fd_step: 1.0e-5
      sw2_variant: duality-consistent
      length_scale: null
    simulation:
      dt: 0.005
      duration: 2.5
      q1: [...]                     # initial chain-1 joints
      q2: [...]                     # initial chain-2 joints
      tracking_gain: 10.0
      max_tracking_error: 0.05
      project_brace: true
"""

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..bracing import ConstraintSpec
from ..description import LINE_KEY, Reader, example_robot_path, load_robot, load_yaml, robot_from_dict
from ..errors import ConfigError
from ..resolve import STRATEGIES, ResolutionConfig
from ..robot import BracedRobot, Configuration
from .path import TaskPath
from .runner import SimulationSettings

SECTIONS = ("robot", "constraint", "path", "resolution", "simulation")


@dataclass(frozen=True)
class Scenario:
    robot: BracedRobot
    constraint: ConstraintSpec
    path: TaskPath
    resolution: ResolutionConfig
    strategies: Tuple[str, ...]
    initial: Configuration
    settings: SimulationSettings
    source: Optional[str] = None


def _resolve_robot(reader, node, base_dir):
    if isinstance(node, dict):
        return robot_from_dict(node, reader.source)
    if not isinstance(node, str):
        raise ConfigError("robot must be a file path, 'builtin', or a mapping", reader.source)
    if node == "builtin":
        return load_robot(example_robot_path())
    p = Path(node)
    if not p.is_absolute():
        p = base_dir / p
    if not p.exists():
        raise ConfigError(f"robot file {node!r} not found", reader.source)
    return load_robot(p)


def scenario_from_dict(doc, source=None, base_dir=None):
    reader = Reader(source)
    base_dir = Path(".") if base_dir is None else Path(base_dir)
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping", source)
    for key in SECTIONS:
        reader.section(doc, key, "")
    unknown = [k for k in doc if k not in SECTIONS and k != LINE_KEY]
    if unknown:
        reader.fail(doc, f"unknown top-level section(s): {', '.join(map(str, unknown))}")

    robot = _resolve_robot(reader, doc["robot"], base_dir)

    c = doc["constraint"]
    tangent = reader.frame(reader.section(c, "tangent_frame", "constraint"), "constraint.tangent_frame")
    try:
        constraint = ConstraintSpec(tangent, reader.number(c, "r_max", "constraint"),
                                    str(c.get("kind", "frictionless-point")))
    except ValueError as exc:
        reader.fail(c, f"constraint: {exc}")

    s = doc["simulation"]
    dt = reader.number(s, "dt", "simulation")
    duration = reader.number(s, "duration", "simulation")
    q1 = reader.vector(s, "q1", "simulation", robot.n1)
    q2 = reader.vector(s, "q2", "simulation", robot.n2)
    try:
        settings = SimulationSettings(
            tracking_gain=reader.number(s, "tracking_gain", "simulation", False, 10.0),
            max_tracking_error=reader.number(s, "max_tracking_error", "simulation", False, 0.05),
            project_brace=bool(s.get("project_brace", True)),
        )
    except ValueError as exc:
        reader.fail(s, f"simulation: {exc}")

    p = doc["path"]
    try:
        path = TaskPath(
            center=reader.vector(p, "center", "path", 3),
            normal=reader.vector(p, "normal", "path", 3),
            radius=reader.number(p, "radius", "path"),
            duration=duration,
            dt=dt,
            start_direction=reader.vector(p, "start_direction", "path", 3, required=False),
            orientation_mode=str(p.get("orientation_mode", "fixed")),
            kind=str(p.get("kind", "circle")),
        )
    except ValueError as exc:
        reader.fail(p, f"path: {exc}")

    r = doc["resolution"]
    strategy = str(r.get("strategy", "all"))
    if strategy == "all":
        strategies = STRATEGIES
    elif strategy in STRATEGIES:
        strategies = (strategy,)
    else:
        reader.fail(r, f"resolution.strategy must be 'all' or one of {STRATEGIES}, got {strategy!r}")
    weights = reader.vector(r, "weights", "resolution", 4, required=False,
                            default=ResolutionConfig.__dataclass_fields__["weights"].default)
    length_scale = r.get("length_scale")
    try:
        resolution = ResolutionConfig(
            strategy=strategies[0],
            alpha=reader.number(r, "alpha", "resolution", False, -1.0),
            weights=tuple(weights),
            fd_step=reader.number(r, "fd_step", "resolution", False, 1e-5),
            sw2_variant=str(r.get("sw2_variant", "duality-consistent")),
            length_scale=None if length_scale is None else reader.number(r, "length_scale", "resolution"),
        )
    except ValueError as exc:
        reader.fail(r, f"resolution: {exc}")

    return Scenario(robot, constraint, path, resolution, tuple(strategies),
                    Configuration(q1, q2), settings, source)


def load_scenario(path, overrides=None):
    """Load a config file; ``overrides`` maps dotted keys (``"simulation.dt"``) to values."""
    path = Path(path)
    doc = load_yaml(path.read_text())
    if overrides:
        doc = apply_overrides(doc, overrides, str(path))
    return scenario_from_dict(doc, str(path), path.parent)


def apply_overrides(doc, overrides, source=None):
    doc = copy.deepcopy(doc)
    for dotted, value in overrides.items():
        keys = dotted.split(".")
        node = doc
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigError(f"cannot override {dotted!r}: no section {k!r}", source)
            node = node[k]
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override {dotted!r}", source)
        node[keys[-1]] = value
    return doc


def parse_value(text):
    """Interpret a command-line value with YAML rules (numbers, lists, strings)."""
    import yaml

    value = yaml.safe_load(text)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def scenario_dict(scenario):
    """Plain-data view of a scenario, for writing back out."""
    t = scenario.constraint.tangent_frame
    return {
        "constraint": {"tangent_frame": {"origin": t.origin.tolist(), "matrix": t.rotation.tolist()},
                       "r_max": scenario.constraint.r_max},
        "path": {"center": scenario.path.center.tolist(), "normal": scenario.path.normal.tolist(),
                 "radius": scenario.path.radius,
                 "start_direction": scenario.path.start_direction.tolist(),
                 "orientation_mode": scenario.path.orientation_mode},
        "simulation": {"dt": scenario.path.dt, "duration": scenario.path.duration,
                       "q1": np.asarray(scenario.initial.q1).tolist(),
                       "q2": np.asarray(scenario.initial.q2).tolist()},
    }
