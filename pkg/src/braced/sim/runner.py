"""Explicit-Euler path following under one redundancy-resolution strategy."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from ..bracing import constraint_projection, region_distance
from ..compliance import compliance_index, end_effector_compliance
from ..errors import (RegionBoundaryError, SimulationAborted, SingularityError,
                      TrackingDivergenceError)
from ..resolve import (FREE_SPACE_MIN_NORM, brace_alignment_angle, frobenius_condition_number,
                       objective, region_penalty, resolve_rates, _check_invertible)
from ..robot import Configuration, constrained_jacobian, evaluate, free_space_jacobian
from ..spatial import quaternion
from .metrics import block_singular_values
from .path import path_pose, path_twist, radial_direction

log = logging.getLogger(__name__)

BRACE_PROJECTION_TOL = 1e-12
BRACE_PROJECTION_ITERS = 5
LIFT_OFF_TOL = 1e-9


@dataclass(frozen=True)
class SimulationSettings:
    """Integration knobs that are not part of the resolution scheme itself.

    ``tracking_gain`` (1/s) closes the loop on end-effector pose error so
    Euler drift does not accumulate; ``project_brace`` pulls the brace point
    back onto the bracing plane after every braced step.
    """

    tracking_gain: float = 10.0
    max_tracking_error: float = 0.05
    project_brace: bool = True


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    cfg: Configuration
    ee_position: np.ndarray
    ee_quaternion: np.ndarray
    brace_position: np.ndarray
    Ci: float
    prod_sigma_t: float
    prod_sigma_o: float
    k: float
    g: float
    theta_z: float
    d: float
    residual: float
    sigma_t_min: float
    sigma_o_min: float
    k_free: float
    tracking_error: float
    brace_normal_offset: float


@dataclass(frozen=True)
class SummaryStats:
    strategy: str
    mean_Ci: float
    min_Ci: float
    mean_prod_sigma_t: float
    mean_prod_sigma_o: float
    min_sigma_t: float
    min_sigma_o: float
    mean_k: float
    n_samples: int = 0
    status: str = "ok"


def summarize(samples, strategy="", status="ok"):
    """Path means and minima of the recorded measures."""
    if not samples:
        nan = math.nan
        return SummaryStats(strategy, nan, nan, nan, nan, nan, nan, nan, 0, "error: no samples")

    def col(name):
        return np.array([getattr(s, name) for s in samples], dtype=float)

    Ci = col("Ci")
    return SummaryStats(
        strategy=strategy,
        mean_Ci=float(np.mean(Ci)),
        min_Ci=float(np.min(Ci)),
        mean_prod_sigma_t=float(np.mean(col("prod_sigma_t"))),
        mean_prod_sigma_o=float(np.mean(col("prod_sigma_o"))),
        min_sigma_t=float(np.min(col("sigma_t_min"))),
        min_sigma_o=float(np.min(col("sigma_o_min"))),
        mean_k=float(np.mean(col("k"))),
        n_samples=len(samples),
        status=status,
    )


def _orientation_error(R_des, R):
    return Rotation.from_matrix(R_des @ R.T).as_rotvec()


def _project_brace(robot, cfg, spec):
    """Newton-correct chain 1 so the brace point lies on the bracing plane."""
    q1 = np.array(cfg.q1)
    n = spec.normal
    for _ in range(BRACE_PROJECTION_ITERS):
        kin = evaluate(robot, Configuration(q1, cfg.q2))
        offset = spec.normal_offset(kin.brace.origin)
        if abs(offset) <= BRACE_PROJECTION_TOL:
            break
        _check_invertible(kin.J1)
        q1 = q1 - np.linalg.solve(kin.J1, np.concatenate([offset * n, np.zeros(3)]))
    return Configuration(q1, cfg.q2)


def lift_off_speed(robot, cfg, spec, dx, kin=None):
    """Normal speed at which the brace would leave the surface without contact.

    The free-space minimum-norm motion for ``dx`` is taken as what the robot
    would do if nothing held the brace; a positive result means keeping the
    brace on the plane needs the surface to pull.  No forces are computed.
    """
    kin = evaluate(robot, cfg) if kin is None else kin
    qd = np.linalg.pinv(free_space_jacobian(robot, cfg, kin), rcond=1e-10) @ dx
    return float(spec.normal @ (kin.J1[:3] @ qd[:robot.n1]))


def measure(robot, cfg, spec, rescfg, beta_x, t=0.0, target=None, residual=0.0):
    """Record every per-sample measure at ``cfg``."""
    braced = rescfg.strategy != FREE_SPACE_MIN_NORM
    kin = evaluate(robot, cfg, rescfg.sw2_variant)
    P = constraint_projection(spec) if braced else np.zeros((6, 6))
    Jt = constrained_jacobian(robot, cfg, P, kin)
    Ce = end_effector_compliance(robot, cfg, spec if braced else None, rescfg.sw2_variant, kin)
    Ci = compliance_index(Ce, beta_x, rescfg.length_scale)
    st = block_singular_values(Jt, "translational")
    so = block_singular_values(Jt, "orientational")
    scfg = replace(rescfg, beta_x=beta_x)
    try:
        g, terms = objective(robot, cfg, spec, scfg, kin)
        k_free, theta, d = terms.k, terms.theta_z, terms.d
    except RegionBoundaryError:
        # only reachable for the free-space strategy, which ignores the brace
        g, d = math.inf, math.inf
        theta = brace_alignment_angle(spec, kin.brace)
        k_free = frobenius_condition_number(free_space_jacobian(robot, cfg, kin))
    err = 0.0 if target is None else float(np.linalg.norm(kin.ee.origin - target))
    return TrajectorySample(
        time=float(t), cfg=cfg,
        ee_position=np.array(kin.ee.origin), ee_quaternion=quaternion(kin.ee.rotation),
        brace_position=np.array(kin.brace.origin),
        Ci=Ci, prod_sigma_t=float(np.prod(st)), prod_sigma_o=float(np.prod(so)),
        k=frobenius_condition_number(Jt), g=float(g), theta_z=float(theta), d=float(d),
        residual=float(residual), sigma_t_min=float(st[-1]), sigma_o_min=float(so[-1]),
        k_free=float(k_free), tracking_error=err,
        brace_normal_offset=spec.normal_offset(kin.brace.origin),
    )


def run_simulation(robot, spec, path, rescfg, initial, settings=None):
    """Follow ``path`` from configuration ``initial``.

    Returns ``(samples, summary)``.  On singularity, leaving the bracing
    region, or tracking divergence a :class:`SimulationAborted` is raised
    carrying the samples recorded so far.
    """
    settings = SimulationSettings() if settings is None else settings
    braced = rescfg.strategy != FREE_SPACE_MIN_NORM
    cfg = initial.check(robot)
    R0 = evaluate(robot, cfg).ee.rotation
    samples: List[TrajectorySample] = []
    times = path.times()
    lift_steps = 0
    try:
        for i, t in enumerate(times):
            kin = evaluate(robot, cfg)
            p_des, R_des = path_pose(path, t, R0)
            err = float(np.linalg.norm(kin.ee.origin - p_des))
            if err > settings.max_tracking_error:
                raise TrackingDivergenceError(
                    f"tracking error {err:.3e} m exceeds {settings.max_tracking_error:.3e} m at t={t:.4f}")
            if braced:
                r = region_distance(spec, kin.brace.origin)
                if r >= spec.r_max:
                    raise RegionBoundaryError(
                        f"brace point left the bracing region (r={r:.4f} m) at t={t:.4f}", r, spec.r_max)
            beta_x = np.concatenate([radial_direction(path, t), np.zeros(3)])
            scfg = replace(rescfg, beta_x=beta_x)
            dx = path_twist(path, t)
            dx[:3] += settings.tracking_gain * (p_des - kin.ee.origin)
            dx[3:] += settings.tracking_gain * _orientation_error(R_des, kin.ee.rotation)
            step = resolve_rates(robot, cfg, spec, scfg, dx, strict=False)
            if braced and lift_off_speed(robot, cfg, spec, dx, kin) > LIFT_OFF_TOL:
                lift_steps += 1
                log.debug("t=%.4f: resolved motion needs a pulling normal force at the brace", t)
            samples.append(measure(robot, cfg, spec, scfg, beta_x, t, p_des, step.residual))
            if i == len(times) - 1:
                break
            h = times[i + 1] - t
            cfg = Configuration(cfg.q1 + h * step.q1_rates, cfg.q2 + h * step.q2_rates)
            if braced and settings.project_brace:
                cfg = _project_brace(robot, cfg, spec)
    except (SingularityError, RegionBoundaryError, TrackingDivergenceError) as exc:
        raise SimulationAborted(f"{rescfg.strategy}: {exc}", samples, exc) from exc
    finally:
        if lift_steps:
            log.warning("%s: %d of %d steps would need a pulling normal force at the brace",
                        rescfg.strategy, lift_steps, len(times))
    return samples, summarize(samples, rescfg.strategy)
