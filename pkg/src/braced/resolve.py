"""Redundancy resolution for a braced robot.

The braced instantaneous kinematics ``A [b~'; q2'] = dx_e`` are solved either
in minimum-norm form or with a gradient-projection self-motion that
descends a weighted objective

    g = w1 * k + w2 * C_i + w3 * theta_z + w4 * d

built from the Frobenius condition number ``k`` of the free-space Jacobian,
the compliance index ``C_i``, the brace tilt ``theta_z`` and the bracing
region barrier ``d``.  Chain-1 joint rates are recovered from the reduced
brace rates through ``J1^-1 H``.
"""

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .bracing import allowable_twist_basis, region_distance
from .compliance import check_unit_screw, compliance_index, end_effector_compliance
from .errors import (InfeasibleTwistError, RegionBoundaryError, SingularityError,
                     StencilFailureError)
from .robot import Configuration, braced_task_jacobian, evaluate, free_space_jacobian
from .spatial import SW2_VARIANTS

FREE_SPACE_MIN_NORM = "free-space-min-norm"
BRACED_MIN_NORM = "braced-min-norm"
BRACED_GRADIENT_PROJECTION = "braced-gradient-projection"
STRATEGIES = (FREE_SPACE_MIN_NORM, BRACED_MIN_NORM, BRACED_GRADIENT_PROJECTION)

PINV_RCOND = 1e-10
FEASIBILITY_TOL = 1e-9
MIN_RCOND = 1e-10
STENCIL_SHRINKS = 3

DEFAULT_WEIGHTS = (0.5, 100.0, 0.6, 0.01)


@dataclass(frozen=True)
class ResolutionConfig:
    strategy: str = BRACED_GRADIENT_PROJECTION
    alpha: float = -1.0
    weights: tuple = DEFAULT_WEIGHTS
    fd_step: float = 1e-5
    beta_x: np.ndarray = field(default_factory=lambda: np.eye(6)[0])
    sw2_variant: str = "duality-consistent"
    length_scale: Optional[float] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not self.alpha < 0:
            raise ValueError(f"alpha must be negative, got {self.alpha!r}")
        w = tuple(float(x) for x in self.weights)
        if len(w) != 4 or any(not (x >= 0) for x in w):
            raise ValueError(f"weights must be four nonnegative numbers, got {self.weights!r}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step!r}")
        if self.sw2_variant not in SW2_VARIANTS:
            raise ValueError(f"unknown sw2_variant {self.sw2_variant!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "fd_step", float(self.fd_step))
        object.__setattr__(self, "beta_x", check_unit_screw(self.beta_x, "beta_x"))

    @property
    def braced(self):
        return self.strategy != FREE_SPACE_MIN_NORM


class ObjectiveTerms(NamedTuple):
    k: float
    Ci: float
    theta_z: float
    d: float


@dataclass(frozen=True)
class ResolutionStep:
    b_reduced_velocity: Optional[np.ndarray]
    q2_rates: np.ndarray
    q1_rates: np.ndarray
    g: float
    terms: Optional[ObjectiveTerms]
    residual: float

    @property
    def q_rates(self):
        return np.concatenate([self.q1_rates, self.q2_rates])


def pinv(A):
    return np.linalg.pinv(np.asarray(A, dtype=float), rcond=PINV_RCOND)


def _feasibility(A, x, dx_e, strict):
    residual = float(np.linalg.norm(A @ x - dx_e))
    if residual > FEASIBILITY_TOL * max(1.0, float(np.linalg.norm(dx_e))):
        msg = f"twist is outside the range of the task Jacobian (residual {residual:.3e})"
        if strict:
            raise InfeasibleTwistError(msg, x, residual)
    return residual


def min_norm_solve(A, dx_e, strict=True):
    """Minimum-norm solution of ``A x = dx_e`` via the SVD pseudoinverse.

    If ``dx_e`` is not reachable, :class:`InfeasibleTwistError` carries the
    least-squares solution and its residual; with ``strict=False`` that
    solution is returned instead.
    """
    A = np.asarray(A, dtype=float)
    dx_e = np.asarray(dx_e, dtype=float)
    x = pinv(A) @ dx_e
    _feasibility(A, x, dx_e, strict)
    return x


def gradient_projection_step(A, dx_e, grad_g, alpha, strict=True):
    """``A+ dx_e + (I - A+ A) alpha grad_g``; the null-space term leaves ``A x`` unchanged."""
    A = np.asarray(A, dtype=float)
    dx_e = np.asarray(dx_e, dtype=float)
    grad_g = np.asarray(grad_g, dtype=float)
    Ap = pinv(A)
    x0 = Ap @ dx_e
    _feasibility(A, x0, dx_e, strict)
    eta = alpha * grad_g
    return x0 + eta - Ap @ (A @ eta)


def _check_invertible(J1):
    s = np.linalg.svd(J1, compute_uv=False)
    rcond = s[-1] / s[0] if s[0] > 0 else 0.0
    if rcond < MIN_RCOND:
        raise SingularityError(f"chain-1 Jacobian is singular (reciprocal condition {rcond:.3e})",
                               rcond)
    return rcond


def recover_q1_rates(J1, H, b_reduced_velocity):
    """Solve ``J1 q1' = H b~'`` for the chain-1 joint rates."""
    J1 = np.asarray(J1, dtype=float)
    _check_invertible(J1)
    return np.linalg.solve(J1, np.asarray(H, dtype=float) @ np.asarray(b_reduced_velocity, dtype=float))


def frobenius_condition_number(J):
    """``sqrt(tr(J J^T) tr((J J^T)^-1)) / 6``; ``inf`` when ``J J^T`` is singular."""
    J = np.asarray(J, dtype=float)
    s = np.linalg.svd(J, compute_uv=False)
    if s.size < J.shape[0] or s[-1] <= s[0] * 1e-15 or s[-1] == 0.0:
        return math.inf
    s2 = s * s
    return float(np.sqrt(np.sum(s2) * np.sum(1.0 / s2)) / J.shape[0])


def brace_alignment_angle(spec, brace_frame):
    c = float(spec.tangent_frame.z_axis @ brace_frame.z_axis)
    return math.acos(min(1.0, max(-1.0, c)))


def region_penalty(spec, r):
    """Barrier ``r_max^2 / (r_max^2 - r^2)``: 1 at the centre, unbounded at the rim."""
    r_max = spec.r_max
    if not r < r_max:
        raise RegionBoundaryError(f"brace point is {r:.6g} m from the region centre, "
                                  f"outside r_max = {r_max:.6g} m", r, r_max)
    return r_max * r_max / (r_max * r_max - r * r)


def objective_terms(robot, cfg, spec, rescfg, kin=None):
    kin = evaluate(robot, cfg, rescfg.sw2_variant) if kin is None else kin
    k = frobenius_condition_number(free_space_jacobian(robot, cfg, kin))
    Ce = end_effector_compliance(robot, cfg, spec, rescfg.sw2_variant, kin)
    Ci = compliance_index(Ce, rescfg.beta_x, rescfg.length_scale)
    theta = brace_alignment_angle(spec, kin.brace)
    d = region_penalty(spec, region_distance(spec, kin.brace.origin))
    return ObjectiveTerms(k, Ci, theta, d)


def objective(robot, cfg, spec, rescfg, kin=None):
    """Weighted objective and its individual terms at ``cfg``."""
    terms = objective_terms(robot, cfg, spec, rescfg, kin)
    w = rescfg.weights
    # zero weights drop their term even if it is infinite
    g = sum(wi * ti for wi, ti in zip(w, terms) if wi != 0.0)
    return float(g), terms


def joint_gradient(robot, cfg, spec, rescfg):
    """Central-difference partials of ``g`` with respect to all joint variables.

    A stencil point that leaves the bracing region shrinks that coordinate's
    step by 10x, up to three times, before giving up.
    """
    q = cfg.as_vector()
    n1 = robot.n1
    grad = np.zeros(q.size)
    if all(w == 0.0 for w in rescfg.weights):
        return grad
    for i in range(q.size):
        h = rescfg.fd_step
        for _ in range(STENCIL_SHRINKS + 1):
            try:
                qp = q.copy()
                qm = q.copy()
                qp[i] += h
                qm[i] -= h
                gp = objective(robot, Configuration.from_vector(qp, n1), spec, rescfg)[0]
                gm = objective(robot, Configuration.from_vector(qm, n1), spec, rescfg)[0]
            except RegionBoundaryError:
                h /= 10.0
                continue
            grad[i] = (gp - gm) / (2.0 * h)
            break
        else:
            raise StencilFailureError(
                f"central difference for joint {i} left the bracing region even at step {h * 10:.1e}")
    return grad


def objective_gradient(robot, cfg, spec, rescfg, kin=None):
    """Gradient of ``g`` with respect to ``(reduced brace coordinates, q2)``."""
    kin = evaluate(robot, cfg, rescfg.sw2_variant) if kin is None else kin
    H = allowable_twist_basis(spec)
    dg = joint_gradient(robot, cfg, spec, rescfg)
    dg1, dg2 = dg[:robot.n1], dg[robot.n1:]
    _check_invertible(kin.J1)
    # row vector dg1 @ J1^-1 @ H, computed as a transposed solve
    dgb = H.T @ np.linalg.solve(kin.J1.T, dg1)
    return np.concatenate([dgb, dg2])


def resolve_rates(robot, cfg, spec, rescfg, dx_e, strict=True):
    """Joint rates achieving end-effector twist ``dx_e`` under ``rescfg.strategy``."""
    kin = evaluate(robot, cfg, rescfg.sw2_variant)
    dx_e = np.asarray(dx_e, dtype=float)
    n1 = robot.n1
    if rescfg.strategy == FREE_SPACE_MIN_NORM:
        J = free_space_jacobian(robot, cfg, kin)
        qd = min_norm_solve(J, dx_e, strict)
        residual = float(np.linalg.norm(J @ qd - dx_e))
        return ResolutionStep(None, qd[n1:], qd[:n1], math.nan, None, residual)

    H = allowable_twist_basis(spec)
    A = braced_task_jacobian(robot, cfg, H, kin)
    if rescfg.strategy == BRACED_GRADIENT_PROJECTION:
        grad = objective_gradient(robot, cfg, spec, rescfg, kin)
        x = gradient_projection_step(A, dx_e, grad, rescfg.alpha, strict)
    else:
        x = min_norm_solve(A, dx_e, strict)
    l = H.shape[1]
    bdot, q2d = x[:l], x[l:]
    q1d = recover_q1_rates(kin.J1, H, bdot)
    residual = float(np.linalg.norm(A @ x - dx_e))
    g, terms = objective(robot, cfg, spec, rescfg, kin)
    return ResolutionStep(bdot, q2d, q1d, g, terms, residual)


def with_beta_x(rescfg, beta_x):
    return replace(rescfg, beta_x=beta_x)
