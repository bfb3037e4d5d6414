"""Loading robot descriptions from YAML.

Schema (lengths in m, angles in rad, stiffness in N*m/rad or N/m)::

    name: my-robot
    default_stiffness: 170.0        # optional, used when a joint omits it
    chain1:                         # world {0} -> brace frame {b}, exactly 6 joints
      base: {origin: [x, y, z], rpy: [roll, pitch, yaw]}
      joints:
        - kind: revolute            # or prismatic
          axis: [0, 0, 1]           # unit axis in the joint frame
          offset: {origin: [a, 0, d], rpy: [alpha, 0, 0]}
          stiffness: 170.0
    chain2:                         # {b} -> end-effector {e}, expressed in {b}
      base: {...}
      joints: [...]

A frame may give ``matrix`` (3x3 nested list) instead of ``rpy``.  Errors
are reported with the line of the offending entry.
"""

from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .robot import BracedRobot, JointDescription, SerialChain
from .spatial import Frame, rpy

LINE_KEY = "__line__"


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = loader.construct_mapping(node, deep=deep)
    mapping[LINE_KEY] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_yaml(text):
    """Parse YAML, tagging every mapping with the 1-based line it starts on."""
    try:
        return yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {exc}", line=None if mark is None else mark.line + 1)


def strip_lines(obj):
    if isinstance(obj, dict):
        return {k: strip_lines(v) for k, v in obj.items() if k != LINE_KEY}
    if isinstance(obj, list):
        return [strip_lines(v) for v in obj]
    return obj


class Reader:
    """Small helper that raises :class:`ConfigError` with line information."""

    def __init__(self, source=None):
        self.source = source

    def fail(self, node, message):
        line = node.get(LINE_KEY) if isinstance(node, dict) else None
        raise ConfigError(message, self.source, line)

    def section(self, node, key, path, required=True):
        if not isinstance(node, dict):
            self.fail(node, f"{path} must be a mapping")
        if key not in node:
            if required:
                self.fail(node, f"missing required key '{path}.{key}'" if path else f"missing required key '{key}'")
            return None
        return node[key]

    def vector(self, node, key, path, size, required=True, default=None):
        value = self.section(node, key, path, required)
        if value is None:
            return None if default is None else np.asarray(default, dtype=float)
        try:
            v = np.asarray([float(x) for x in value], dtype=float)
        except (TypeError, ValueError):
            self.fail(node, f"{path}.{key} must be a list of {size} numbers")
        if v.shape != (size,) or not np.all(np.isfinite(v)):
            self.fail(node, f"{path}.{key} must be a list of {size} finite numbers, got {value!r}")
        return v

    def number(self, node, key, path, required=True, default=None):
        value = self.section(node, key, path, required)
        if value is None:
            return default
        # YAML 1.1 reads "1e-5" as a string
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(node, f"{path}.{key} must be a number, got {value!r}")
        return float(value)

    def frame(self, node, path):
        if node is None:
            return Frame.identity()
        if not isinstance(node, dict):
            self.fail(node, f"{path} must be a mapping with origin and rpy/matrix")
        origin = self.vector(node, "origin", path, 3, required=False, default=np.zeros(3))
        if "matrix" in node and "rpy" in node:
            self.fail(node, f"{path}: give either rpy or matrix, not both")
        if "matrix" in node:
            try:
                R = np.asarray(node["matrix"], dtype=float)
            except (TypeError, ValueError):
                self.fail(node, f"{path}.matrix must be a 3x3 nested list")
        else:
            angles = self.vector(node, "rpy", path, 3, required=False, default=np.zeros(3))
            R = rpy(*angles)
        try:
            return Frame(R, origin)
        except ValueError as exc:
            self.fail(node, f"{path}: {exc}")


def _chain(reader, node, path, default_stiffness):
    if not isinstance(node, dict):
        reader.fail(node, f"{path} must be a mapping")
    base = reader.frame(node.get("base"), f"{path}.base")
    joints_node = reader.section(node, "joints", path)
    if not isinstance(joints_node, list) or not joints_node:
        reader.fail(node, f"{path}.joints must be a non-empty list")
    joints = []
    for i, jn in enumerate(joints_node):
        jpath = f"{path}.joints[{i}]"
        if not isinstance(jn, dict):
            reader.fail(node, f"{jpath} must be a mapping")
        kind = reader.section(jn, "kind", jpath)
        axis = reader.vector(jn, "axis", jpath, 3)
        offset = reader.frame(jn.get("offset"), f"{jpath}.offset")
        stiffness = reader.number(jn, "stiffness", jpath, required=default_stiffness is None,
                                  default=default_stiffness)
        try:
            joints.append(JointDescription(kind, axis, offset, stiffness))
        except ValueError as exc:
            reader.fail(jn, f"{jpath}: {exc}")
    return SerialChain(tuple(joints), base)


def robot_from_dict(doc, source=None):
    reader = Reader(source)
    if not isinstance(doc, dict):
        raise ConfigError("robot description must be a mapping", source)
    default_stiffness = reader.number(doc, "default_stiffness", "", required=False)
    chain1 = _chain(reader, reader.section(doc, "chain1", ""), "chain1", default_stiffness)
    chain2 = _chain(reader, reader.section(doc, "chain2", ""), "chain2", default_stiffness)
    try:
        return BracedRobot(chain1, chain2, str(doc.get("name", "braced-robot")))
    except ValueError as exc:
        reader.fail(doc["chain1"], str(exc))


def load_robot(path):
    path = Path(path)
    return robot_from_dict(load_yaml(path.read_text()), str(path))


def example_robot_path():
    return Path(__file__).with_name("data") / "puma560_hebi5.yaml"


def example_robot():
    """PUMA 560 with a five-module series-elastic arm on its flange (approximate geometry)."""
    return load_robot(example_robot_path())
