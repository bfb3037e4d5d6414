"""First-order compliance of a braced robot.

Compliance matrices are 6x6 and map a world-aligned wrench ``(f, m)`` to a
small displacement twist ``(dp, dtheta)``.  Units are SI and the blocks are
mixed: m/N (top-left), m/(N*m) (top-right), rad/N (bottom-left) and
rad/(N*m) (bottom-right).  Second-order terms from the Jacobian derivative
are not modelled.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bracing import constraint_projection
from .errors import DimensionError
from .robot import chain_jacobian, check_projector, evaluate

UNIT_TOL = 1e-10
PSD_TOL = -1e-12


@dataclass(frozen=True)
class ComplianceSet:
    C1: np.ndarray
    C1_braced: np.ndarray
    C2: np.ndarray
    Ce: np.ndarray


@dataclass(frozen=True)
class TaskDirections:
    beta_x: np.ndarray
    beta_w: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "beta_x", check_unit_screw(self.beta_x, "beta_x"))
        if self.beta_w is not None:
            object.__setattr__(self, "beta_w", check_unit_screw(self.beta_w, "beta_w"))


def check_unit_screw(beta, name="beta"):
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape != (6,):
        raise DimensionError(f"{name} must be a 6-vector")
    if abs(np.linalg.norm(beta) - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, got {np.linalg.norm(beta)!r}")
    return beta


def chain_compliance(J, stiffnesses):
    """``J diag(1/k) J^T`` for a chain with joint stiffnesses ``k``."""
    J = np.asarray(J, dtype=float)
    k = np.asarray(stiffnesses, dtype=float).reshape(-1)
    if J.ndim != 2 or J.shape[0] != 6 or J.shape[1] != k.size:
        raise DimensionError(f"J is {J.shape} but {k.size} stiffnesses were given")
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise ValueError("joint stiffnesses must all be > 0")
    C = (J / k) @ J.T
    return 0.5 * (C + C.T)


def bracing_consistent_compliance(C1, P):
    """``(I - P) C1 (I - P)``: chain-1 compliance restricted to motions the brace allows."""
    P = check_projector(P)
    Q = np.eye(6) - P
    return Q @ np.asarray(C1, dtype=float) @ Q


def compliance_set(robot, cfg, spec=None, sw2_variant="duality-consistent", kin=None):
    """All compliance matrices at ``cfg``.  ``spec=None`` means no brace (``P = 0``)."""
    kin = evaluate(robot, cfg, sw2_variant) if kin is None else kin
    P = np.zeros((6, 6)) if spec is None else constraint_projection(spec)
    C1 = chain_compliance(kin.J1, robot.chain1.stiffnesses)
    C2 = chain_compliance(kin.J2, robot.chain2.stiffnesses)
    C1b = bracing_consistent_compliance(C1, P)
    Ce = kin.S_t1 @ C1b @ kin.S_w1 + kin.S_t2 @ C2 @ kin.S_w2
    return ComplianceSet(C1, C1b, C2, Ce)


def end_effector_compliance(robot, cfg, spec=None, sw2_variant="duality-consistent", kin=None):
    return compliance_set(robot, cfg, spec, sw2_variant, kin).Ce


def free_space_compliance(robot, cfg):
    """Compliance of the whole robot treated as one unbraced chain."""
    chain = robot.full_chain()
    J = chain_jacobian(chain, cfg.as_vector())
    return chain_compliance(J, chain.stiffnesses)


def _length_weights(length_scale):
    return np.array([1.0, 1.0, 1.0, length_scale, length_scale, length_scale])


def directional_compliance(Ce, beta_x, beta_w):
    """Deflection along ``beta_x`` per unit wrench along ``beta_w``."""
    bx = check_unit_screw(beta_x, "beta_x")
    bw = check_unit_screw(beta_w, "beta_w")
    return float(bx @ np.asarray(Ce, dtype=float) @ bw)


def compliance_index(Ce, beta_x, length_scale=None):
    """Norm of the row ``beta_x^T Ce``: worst-case deflection along ``beta_x`` per unit wrench.

    Translational and rotational entries are mixed unweighted unless a
    characteristic ``length_scale`` (m) is given, in which case rotations
    and moments are rescaled by it before taking the norm.
    """
    bx = check_unit_screw(beta_x, "beta_x")
    Ce = np.asarray(Ce, dtype=float)
    if length_scale is not None:
        D = _length_weights(float(length_scale))
        Ce = D[:, None] * Ce * D[None, :]
    return float(np.linalg.norm(bx @ Ce))


def is_psd(C, tol=PSD_TOL):
    C = np.asarray(C, dtype=float)
    return bool(np.min(np.linalg.eigvalsh(0.5 * (C + C.T))) >= tol)
