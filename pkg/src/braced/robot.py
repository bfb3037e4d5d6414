"""Serial chains, forward kinematics and the Jacobians of a braced robot.

A braced robot is split at the brace point ``b`` into two chains:

* ``chain1`` runs from the world frame {0} to the brace frame {b};
* ``chain2`` runs from {b} to the end-effector frame {e}, and is described
  relative to {b}, so its Jacobian comes out in brace-frame orientation.
"""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import DimensionError, InvalidProjectorError
from .spatial import Frame, frame_shift_transforms, skew

REVOLUTE = "revolute"
PRISMATIC = "prismatic"
JOINT_KINDS = (REVOLUTE, PRISMATIC)

PROJECTOR_TOL = 1e-10


@dataclass(frozen=True)
class JointDescription:
    """One joint followed by the fixed transform to the next joint frame.

    ``axis`` is a unit vector in the joint's own frame.  ``stiffness`` is in
    N*m/rad for revolute joints and N/m for prismatic ones.
    """

    kind: str
    axis: np.ndarray
    frame_offset: Frame = field(default_factory=Frame.identity)
    stiffness: float = 1.0

    def __post_init__(self):
        if self.kind not in JOINT_KINDS:
            raise ValueError(f"joint kind must be one of {JOINT_KINDS}, got {self.kind!r}")
        axis = np.asarray(self.axis, dtype=float).reshape(-1)
        if axis.shape != (3,):
            raise DimensionError("joint axis must be a 3-vector")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-10:
            raise ValueError(f"joint axis must be unit length, |axis| = {np.linalg.norm(axis)!r}")
        if not (np.isfinite(self.stiffness) and self.stiffness > 0):
            raise ValueError(f"joint stiffness must be > 0, got {self.stiffness!r}")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "stiffness", float(self.stiffness))
        K = skew(axis)
        object.__setattr__(self, "_K", K)
        object.__setattr__(self, "_K2", K @ K)

    def motion(self, q):
        if self.kind == REVOLUTE:
            R = np.eye(3) + math.sin(q) * self._K + (1.0 - math.cos(q)) * self._K2
            return Frame._trusted(R, np.zeros(3))
        return Frame._trusted(np.eye(3), self.axis * q)


@dataclass(frozen=True)
class SerialChain:
    joints: Tuple[JointDescription, ...]
    base: Frame = field(default_factory=Frame.identity)

    def __post_init__(self):
        joints = tuple(self.joints)
        if not joints:
            raise ValueError("a serial chain needs at least one joint")
        object.__setattr__(self, "joints", joints)

    @property
    def n(self):
        return len(self.joints)

    @property
    def stiffnesses(self):
        return np.array([j.stiffness for j in self.joints])

    def check_q(self, q):
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape != (self.n,):
            raise DimensionError(f"chain has {self.n} joints but q has {q.size} entries")
        return q


@dataclass(frozen=True)
class BracedRobot:
    chain1: SerialChain
    chain2: SerialChain
    name: str = "braced-robot"

    def __post_init__(self):
        if self.chain1.n != 6:
            raise ValueError(
                f"chain1 must have exactly 6 joints so its Jacobian is square, got {self.chain1.n}")

    @property
    def n1(self):
        return self.chain1.n

    @property
    def n2(self):
        return self.chain2.n

    @property
    def stiffnesses(self):
        return np.concatenate([self.chain1.stiffnesses, self.chain2.stiffnesses])

    def full_chain(self):
        return concatenate_chains(self.chain1, self.chain2)


@dataclass(frozen=True)
class Configuration:
    q1: np.ndarray
    q2: np.ndarray

    def __post_init__(self):
        for name in ("q1", "q2"):
            v = np.array(getattr(self, name), dtype=float).reshape(-1)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_vector(cls, q, n1=6):
        q = np.asarray(q, dtype=float)
        return cls(q[:n1], q[n1:])

    def as_vector(self):
        return np.concatenate([self.q1, self.q2])

    def check(self, robot):
        if self.q1.size != robot.n1 or self.q2.size != robot.n2:
            raise DimensionError(
                f"configuration sizes ({self.q1.size}, {self.q2.size}) do not match "
                f"robot ({robot.n1}, {robot.n2})")
        return self


def concatenate_chains(first, second):
    """Join two chains end to end; ``second.base`` is folded into the last offset of ``first``."""
    joints = list(first.joints)
    last = joints[-1]
    joints[-1] = JointDescription(last.kind, last.axis,
                                  last.frame_offset @ second.base, last.stiffness)
    return SerialChain(tuple(joints) + tuple(second.joints), first.base)


def chain_frames(chain, q):
    """Joint frames (before each joint's motion) and the chain's end frame.

    Everything is expressed in the chain's parent frame.
    """
    q = chain.check_q(q)
    T = chain.base
    frames = []
    for joint, qi in zip(chain.joints, q):
        frames.append(T)
        T = T @ joint.motion(qi) @ joint.frame_offset
    return frames, T


def chain_forward_kinematics(chain, q):
    return chain_frames(chain, q)[1]


def forward_kinematics(robot, cfg):
    """Return ``(brace_frame, ee_frame)``, both expressed in the world frame."""
    cfg.check(robot)
    b = chain_forward_kinematics(robot.chain1, cfg.q1)
    e_in_b = chain_forward_kinematics(robot.chain2, cfg.q2)
    return b, b @ e_in_b


def _jacobian_from_frames(chain, frames, point):
    J = np.zeros((6, chain.n))
    for i, (joint, T) in enumerate(zip(chain.joints, frames)):
        z = T.rotation @ joint.axis
        if joint.kind == "revolute":
            r = point - T.origin
            J[0, i] = z[1] * r[2] - z[2] * r[1]
            J[1, i] = z[2] * r[0] - z[0] * r[2]
            J[2, i] = z[0] * r[1] - z[1] * r[0]
            J[3:, i] = z
        else:
            J[:3, i] = z
    return J


def chain_jacobian(chain, q, reference_point=None):
    """Geometric Jacobian (linear rows first) in the chain's parent orientation.

    The linear rows give the velocity of ``reference_point`` (default: the
    chain's end point) when it is rigidly attached to the last link.
    """
    frames, end = chain_frames(chain, q)
    p = end.origin if reference_point is None else np.asarray(reference_point, dtype=float)
    if p.shape != (3,):
        raise DimensionError("reference_point must be a 3-vector")
    return _jacobian_from_frames(chain, frames, p)


@dataclass(frozen=True)
class BracedKinematics:
    """Everything first-order about a braced robot at one configuration."""

    brace: Frame
    ee: Frame
    J1: np.ndarray
    J2: np.ndarray
    S_t1: np.ndarray
    S_t2: np.ndarray
    S_w1: np.ndarray
    S_w2: np.ndarray


def evaluate(robot, cfg, sw2_variant="duality-consistent"):
    cfg.check(robot)
    frames1, b = chain_frames(robot.chain1, cfg.q1)
    frames2, e_in_b = chain_frames(robot.chain2, cfg.q2)
    e = b @ e_in_b
    J1 = _jacobian_from_frames(robot.chain1, frames1, b.origin)
    J2 = _jacobian_from_frames(robot.chain2, frames2, e_in_b.origin)
    S = frame_shift_transforms(b.origin, e.origin, b.rotation, sw2_variant)
    return BracedKinematics(b, e, J1, J2, *S)


def braced_task_jacobian(robot, cfg, H, kin=None):
    """``A = [S_t1 H, S_t2 J2]`` mapping ``(reduced brace rates, q2 rates)`` to the end-effector twist."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != 6 or H.shape[1] < 1:
        raise DimensionError(f"H must be 6 x l with l >= 1, got {H.shape}")
    kin = evaluate(robot, cfg) if kin is None else kin
    return np.hstack([kin.S_t1 @ H, kin.S_t2 @ kin.J2])


def free_space_jacobian(robot, cfg, kin=None):
    kin = evaluate(robot, cfg) if kin is None else kin
    return np.hstack([kin.S_t1 @ kin.J1, kin.S_t2 @ kin.J2])


def check_projector(P, tol=PROJECTOR_TOL):
    P = np.asarray(P, dtype=float)
    if P.shape != (6, 6):
        raise InvalidProjectorError(f"projector must be 6x6, got {P.shape}")
    if np.max(np.abs(P @ P - P)) > tol:
        raise InvalidProjectorError("P is not idempotent")
    return P


def constrained_jacobian(robot, cfg, P, kin=None):
    """``J~ = [S_t1 (I - P) J1, S_t2 J2]``: joint rates to end-effector twist with the brace enforced."""
    P = check_projector(P)
    kin = evaluate(robot, cfg) if kin is None else kin
    return np.hstack([kin.S_t1 @ (np.eye(6) - P) @ kin.J1, kin.S_t2 @ kin.J2])
