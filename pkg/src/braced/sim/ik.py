"""Seed search for a braced initial configuration.

Finds joints that put the brace point on the bracing plane inside the region,
align the brace z axis with the surface normal, and place the end effector at
the start of the task path.  Random restarts followed by damped least squares;
this is a convenience for writing configs, not part of the resolution scheme.
"""

import logging

import numpy as np

from ..bracing import region_distance
from ..robot import Configuration, evaluate

log = logging.getLogger(__name__)


def _residual(robot, cfg, spec, target, ee_weight):
    kin = evaluate(robot, cfg)
    n = spec.normal
    res = np.concatenate([
        [spec.normal_offset(kin.brace.origin)],
        kin.brace.z_axis - n,
        ee_weight * (kin.ee.origin - target),
    ])
    # stacked Jacobian of the residual: rows match the blocks above
    J_b = kin.J1
    z = kin.brace.z_axis
    Jz = np.cross(-z[None, :], J_b[3:].T).T  # d z_b / d q1 = w x z
    Jrows = np.zeros((res.size, robot.n1 + robot.n2))
    Jrows[0, :robot.n1] = n @ J_b[:3]
    Jrows[1:4, :robot.n1] = Jz
    Jfull = np.hstack([kin.S_t1 @ kin.J1, kin.S_t2 @ kin.J2])
    Jrows[4:7] = ee_weight * Jfull[:3]
    return res, Jrows, kin


def seed_configuration(robot, spec, target, q_guess=None, restarts=20, iters=200,
                       damping=1e-3, tol=1e-10, ee_weight=1.0, seed=0):
    """Return a :class:`Configuration` meeting the braced start conditions.

    ``target`` is the desired end-effector position.  Raises ``RuntimeError``
    when no restart converges.
    """
    rng = np.random.default_rng(seed)
    n = robot.n1 + robot.n2
    target = np.asarray(target, dtype=float)
    best = None
    for attempt in range(restarts):
        if attempt == 0 and q_guess is not None:
            q = np.asarray(q_guess, dtype=float).copy()
        else:
            q = rng.uniform(-np.pi, np.pi, n)
        for _ in range(iters):
            cfg = Configuration.from_vector(q, robot.n1)
            res, Jr, kin = _residual(robot, cfg, spec, target, ee_weight)
            err = float(np.linalg.norm(res))
            if err < tol:
                break
            lhs = Jr.T @ Jr + damping * np.eye(n)
            q = q - np.linalg.solve(lhs, Jr.T @ res)
        cfg = Configuration.from_vector(q, robot.n1)
        res, _, kin = _residual(robot, cfg, spec, target, ee_weight)
        err = float(np.linalg.norm(res))
        inside = region_distance(spec, kin.brace.origin) < spec.r_max
        log.debug("restart %d: residual %.3e inside=%s", attempt, err, inside)
        if inside and (best is None or err < best[0]):
            best = (err, cfg)
        if inside and err < tol:
            break
    if best is None or best[0] > 1e-8:
        raise RuntimeError("inverse-kinematics seed search did not converge")
    return best[1]
