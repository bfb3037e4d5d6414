"""Desired end-effector motion along a circular task path."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError
from ..spatial import axis_angle

ORIENTATION_MODES = ("fixed", "tracking")


def _unit(v, name):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise DimensionError(f"{name} must be a 3-vector")
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


@dataclass(frozen=True)
class TaskPath:
    """A circle traversed once, counter-clockwise about ``normal``, over ``duration`` seconds.

    The path starts at ``center + radius * start_direction`` (the start
    direction is projected into the circle's plane).
    """

    center: np.ndarray
    normal: np.ndarray
    radius: float
    duration: float
    dt: float
    start_direction: np.ndarray = None
    orientation_mode: str = "fixed"
    kind: str = "circle"

    def __post_init__(self):
        if self.kind != "circle":
            raise ValueError(f"unsupported path kind {self.kind!r}")
        if self.orientation_mode not in ORIENTATION_MODES:
            raise ValueError(f"orientation_mode must be one of {ORIENTATION_MODES}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration >= 0:
            raise ValueError("duration must be nonnegative")
        if self.duration > 0 and self.dt > self.duration:
            raise ValueError("dt must not exceed duration")
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.shape != (3,):
            raise DimensionError("center must be a 3-vector")
        n = _unit(self.normal, "normal")
        if self.start_direction is None:
            # any in-plane direction; prefer the world axis least aligned with the normal
            seed = np.eye(3)[int(np.argmin(np.abs(n)))]
        else:
            seed = np.asarray(self.start_direction, dtype=float)
        u = seed - (seed @ n) * n
        u = _unit(u, "start_direction (projected into the circle plane)")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "start_direction", u)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def angular_rate(self):
        return 0.0 if self.duration == 0 else 2.0 * math.pi / self.duration

    @property
    def peak_speed(self):
        return self.radius * self.angular_rate

    @property
    def n_steps(self):
        if self.duration == 0:
            return 0
        return int(math.ceil(self.duration / self.dt - 1e-9))

    def times(self):
        return np.array([min(i * self.dt, self.duration) for i in range(self.n_steps + 1)])

    def phase(self, t):
        if not (0.0 <= t <= self.duration):
            raise ValueError(f"time {t!r} is outside [0, {self.duration!r}]")
        return self.angular_rate * t


def _in_plane(path, phi):
    u = path.start_direction
    v = np.cross(path.normal, u)
    return u, v, math.cos(phi), math.sin(phi)


def radial_direction(path, t):
    u, v, c, s = _in_plane(path, path.phase(t))
    return c * u + s * v


def path_pose(path, t, R0=None):
    """Desired position and orientation at time ``t``.

    ``R0`` is the orientation at ``t = 0``; in tracking mode it turns about
    the circle normal with the path.
    """
    phi = path.phase(t)
    p = path.center + path.radius * radial_direction(path, t)
    if R0 is None:
        return p, None
    if path.orientation_mode == "tracking":
        return p, axis_angle(path.normal, phi) @ R0
    return p, np.asarray(R0, dtype=float)


def path_twist(path, t):
    """Feed-forward end-effector twist ``(v, w)`` at time ``t``."""
    u, v, c, s = _in_plane(path, path.phase(t))
    w = path.angular_rate
    lin = path.radius * w * (-s * u + c * v)
    ang = w * path.normal if path.orientation_mode == "tracking" else np.zeros(3)
    return np.concatenate([lin, ang])
