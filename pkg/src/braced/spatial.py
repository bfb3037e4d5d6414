"""Frames, twists, wrenches and the frame-shift transforms between them.

All 6-vectors in this package are stored linear-first: a twist is
``(v, w)`` (linear velocity, then angular velocity) and a wrench is
``(f, m)`` (force, then moment).  Nothing here ever permutes that order.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DimensionError, InvalidRotationError

ROTATION_TOL = 1e-10

SW2_VARIANTS = ("duality-consistent", "paper-verbatim")


def skew(a):
    """Return the 3x3 cross-product matrix of ``a`` so that ``skew(a) @ v == cross(a, v)``.

             [  0  -a3   a2]
    [a]x  =  [ a3    0  -a1]
             [-a2   a1    0]
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (3,):
        raise DimensionError(f"skew expects a 3-vector, got shape {a.shape}")
    return np.array([[0.0, -a[2], a[1]],
                     [a[2], 0.0, -a[0]],
                     [-a[1], a[0], 0.0]])


def check_rotation(R, tol=ROTATION_TOL):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidRotationError(f"rotation must be 3x3, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidRotationError("rotation has non-finite entries")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol or abs(np.linalg.det(R) - 1.0) > tol:
        raise InvalidRotationError("rotation is not special orthogonal")
    return R


def axis_angle(axis, angle):
    """Rotation matrix about unit ``axis`` by ``angle`` (Rodrigues)."""
    k = np.asarray(axis, dtype=float)
    K = skew(k)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rpy(roll, pitch, yaw):
    """Fixed-axis roll/pitch/yaw: ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return Rotation.from_euler("xyz", [roll, pitch, yaw]).as_matrix()


def quaternion(R):
    """Unit quaternion ``(qx, qy, qz, qw)`` of a rotation matrix, with ``qw >= 0``."""
    q = Rotation.from_matrix(R).as_quat()
    if q[3] < 0:
        q = -q
    return q


@dataclass(frozen=True)
class Frame:
    """A rigid frame: ``rotation`` maps frame coordinates into the parent frame."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = check_rotation(self.rotation)
        p = np.asarray(self.origin, dtype=float).reshape(-1)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise DimensionError("frame origin must be a finite 3-vector")
        R = R.copy()
        p = p.copy()
        R.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "origin", p)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def _trusted(cls, R, p):
        # skips validation for products of already-valid frames
        f = object.__new__(cls)
        object.__setattr__(f, "rotation", R)
        object.__setattr__(f, "origin", p)
        return f

    def compose(self, other):
        """``self * other``: ``other`` is expressed in this frame."""
        return Frame._trusted(self.rotation @ other.rotation,
                              self.rotation @ other.origin + self.origin)

    __matmul__ = compose

    def inverse(self):
        Rt = self.rotation.T
        return Frame._trusted(Rt, -Rt @ self.origin)

    def apply(self, point):
        return self.rotation @ np.asarray(point, dtype=float) + self.origin

    @property
    def x_axis(self):
        return self.rotation[:, 0]

    @property
    def y_axis(self):
        return self.rotation[:, 1]

    @property
    def z_axis(self):
        return self.rotation[:, 2]

    def as_matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.origin
        return T


@dataclass(frozen=True)
class Twist:
    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        for name in ("linear", "angular"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise DimensionError(f"twist {name} part must be a finite 3-vector")
            object.__setattr__(self, name, v)

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:])

    def as_vector(self):
        return np.concatenate([self.linear, self.angular])


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        for name in ("force", "moment"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise DimensionError(f"wrench {name} part must be a finite 3-vector")
            object.__setattr__(self, name, v)

    @classmethod
    def from_vector(cls, w):
        w = np.asarray(w, dtype=float)
        return cls(w[:3], w[3:])

    def as_vector(self):
        return np.concatenate([self.force, self.moment])


def frame_shift_transforms(b_origin, e_origin, R0b, sw2_variant="duality-consistent"):
    """Build the four 6x6 transforms relating brace-point and end-effector quantities.

    Returns ``(S_t1, S_t2, S_w1, S_w2)``:

    * ``S_t1`` moves a twist referenced at ``b`` to the end-effector point ``e``
      (both parallel to the world frame).
    * ``S_t2`` re-expresses a twist given in the brace frame orientation in
      world orientation.
    * ``S_w1`` moves a world-aligned wrench at ``e`` to ``b``.
    * ``S_w2`` maps a world-aligned wrench at ``e`` into brace frame orientation.
      ``"duality-consistent"`` gives ``blockdiag(R0b.T, R0b.T) == S_t2.T``;
      ``"paper-verbatim"`` adds the moment-arm block ``R0b.T @ skew(b - e)``.
    """
    b = np.asarray(b_origin, dtype=float)
    e = np.asarray(e_origin, dtype=float)
    R = check_rotation(R0b)
    if b.shape != (3,) or e.shape != (3,):
        raise DimensionError("b_origin and e_origin must be 3-vectors")

    if sw2_variant not in SW2_VARIANTS:
        raise ValueError(f"unknown sw2_variant {sw2_variant!r}; expected one of {SW2_VARIANTS}")
    arm = skew(b - e)
    Rt = R.T

    S_t1 = np.eye(6)
    S_t1[:3, 3:] = arm
    S_t2 = np.zeros((6, 6))
    S_t2[:3, :3] = S_t2[3:, 3:] = R
    S_w1 = np.eye(6)
    S_w1[3:, :3] = -arm
    S_w2 = np.zeros((6, 6))
    S_w2[:3, :3] = S_w2[3:, 3:] = Rt
    if sw2_variant == "paper-verbatim":
        S_w2[3:, :3] = Rt @ arm
    return S_t1, S_t2, S_w1, S_w2
