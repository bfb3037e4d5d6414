import math
from dataclasses import replace

import numpy as np
import pytest

from braced.bracing import allowable_twist_basis, constraint_direction, region_distance
from braced.errors import InfeasibleTwistError, RegionBoundaryError, SingularityError, StencilFailureError
from braced.resolve import (BRACED_GRADIENT_PROJECTION, BRACED_MIN_NORM, FREE_SPACE_MIN_NORM, ResolutionConfig,
                            brace_alignment_angle, frobenius_condition_number, gradient_projection_step,
                            joint_gradient, min_norm_solve, objective, objective_gradient, recover_q1_rates,
                            region_penalty, resolve_rates)
from braced.robot import Configuration, braced_task_jacobian, evaluate, free_space_jacobian
from braced.bracing import ConstraintSpec
from braced.spatial import Frame, axis_angle

from conftest import brace_spec_at, random_configs, random_rotation


def test_min_norm_identity_block():
    A = np.hstack([np.eye(6), np.zeros((6, 4))])
    dx = np.arange(1.0, 7.0)
    assert np.allclose(min_norm_solve(A, dx), np.concatenate([dx, np.zeros(4)]), atol=1e-15)
    assert np.array_equal(min_norm_solve(A, np.zeros(6)), np.zeros(10))


def test_min_norm_matches_normal_equations():
    rng = np.random.default_rng(50)
    for _ in range(50):
        A = rng.normal(size=(6, 10))
        dx = rng.normal(size=6)
        expected = A.T @ np.linalg.solve(A @ A.T, dx)
        assert np.allclose(min_norm_solve(A, dx), expected, atol=1e-10)


def test_min_norm_is_smallest_solution():
    rng = np.random.default_rng(51)
    A = rng.normal(size=(6, 10))
    dx = rng.normal(size=6)
    x = min_norm_solve(A, dx)
    N = np.eye(10) - np.linalg.pinv(A) @ A
    for _ in range(20):
        v = x + N @ rng.normal(size=10)
        assert np.linalg.norm(A @ v - dx) < 1e-10
        assert np.linalg.norm(v) >= np.linalg.norm(x) - 1e-12


def test_min_norm_reports_infeasible_twist():
    A = np.zeros((6, 3))
    A[:3, :3] = np.eye(3)
    dx = np.array([1.0, 2, 3, 0, 0, 1])
    with pytest.raises(InfeasibleTwistError) as info:
        min_norm_solve(A, dx)
    assert np.allclose(info.value.solution, [1, 2, 3])
    assert info.value.residual == pytest.approx(1.0)
    assert np.allclose(min_norm_solve(A, dx, strict=False), [1, 2, 3])


def test_gradient_projection_special_cases():
    rng = np.random.default_rng(52)
    A = rng.normal(size=(6, 10))
    dx = rng.normal(size=6)
    x0 = min_norm_solve(A, dx)
    assert np.allclose(gradient_projection_step(A, dx, np.zeros(10), -1.0), x0, atol=1e-14)
    row_space = A.T @ rng.normal(size=6)
    assert np.allclose(gradient_projection_step(A, dx, row_space, -1.0), x0, atol=1e-10)


def test_gradient_projection_task_invariance():
    rng = np.random.default_rng(53)
    for _ in range(100):
        A = rng.normal(size=(6, 10))
        dx, grad = rng.normal(size=6), rng.normal(size=10) * 10
        x = gradient_projection_step(A, dx, grad, -rng.uniform(0.1, 5))
        assert np.linalg.norm(A @ x - A @ min_norm_solve(A, dx)) <= 1e-10


def test_recover_q1_rates_cases():
    rng = np.random.default_rng(54)
    H = allowable_twist_basis(ConstraintSpec(Frame(random_rotation(rng)), 1.0))
    assert np.array_equal(recover_q1_rates(np.eye(6), H, np.zeros(5)), np.zeros(6))
    b = rng.normal(size=5)
    assert np.allclose(recover_q1_rates(np.eye(6), H, b), H @ b)
    for _ in range(20):
        J1 = rng.normal(size=(6, 6))
        b = rng.normal(size=5)
        assert np.linalg.norm(J1 @ recover_q1_rates(J1, H, b) - H @ b) <= 1e-10


def test_recover_q1_rates_singular():
    J1 = np.eye(6)
    J1[5, 5] = 1e-12
    with pytest.raises(SingularityError) as info:
        recover_q1_rates(J1, np.eye(6)[:, :5], np.ones(5))
    assert info.value.rcond < 1e-10


def test_frobenius_condition_number_cases():
    rng = np.random.default_rng(55)
    Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    assert frobenius_condition_number(3.0 * Q) == pytest.approx(1.0, abs=1e-12)
    J = np.hstack([np.diag([1.0, 1, 1, 1, 1, 2]), np.zeros((6, 3))])
    assert frobenius_condition_number(J) == pytest.approx(math.sqrt(47.25 / 36), abs=1e-12)
    J = np.diag([1.0, 1, 1, 1, 1, 1e-6])
    assert frobenius_condition_number(J) > 1e5
    assert frobenius_condition_number(np.diag([1.0, 1, 1, 1, 1, 0])) == math.inf
    for _ in range(20):
        assert frobenius_condition_number(rng.normal(size=(6, 11))) >= 1.0


def test_brace_alignment_angle_cases():
    spec = ConstraintSpec(Frame(), 1.0)
    assert brace_alignment_angle(spec, Frame()) == 0.0
    assert brace_alignment_angle(spec, Frame(axis_angle([1, 0, 0], np.pi / 2))) == pytest.approx(np.pi / 2)
    assert brace_alignment_angle(spec, Frame(axis_angle([0, 1, 0], np.pi / 4))) == pytest.approx(np.pi / 4)
    assert brace_alignment_angle(spec, Frame(axis_angle([0, 1, 0], np.pi))) == pytest.approx(np.pi)


def test_region_penalty_cases():
    spec = ConstraintSpec(Frame(), 0.3)
    assert region_penalty(spec, 0.0) == 1.0
    assert region_penalty(spec, 0.3 / math.sqrt(2)) == pytest.approx(2.0, abs=1e-12)
    assert region_penalty(spec, 0.999 * 0.3) > 500
    values = [region_penalty(spec, r) for r in np.linspace(0, 0.29, 30)]
    assert all(b > a for a, b in zip(values, values[1:]))
    with pytest.raises(RegionBoundaryError):
        region_penalty(spec, 0.3)


def test_objective_weighted_sum(robot, monkeypatch):
    import braced.resolve as resolve
    from braced.resolve import ObjectiveTerms

    monkeypatch.setattr(resolve, "objective_terms", lambda *a, **k: ObjectiveTerms(2.0, 0.1, 0.0, 1.0))
    cfg = random_configs(robot, 1, seed=56)[0]
    spec = brace_spec_at(robot, cfg)
    g, terms = objective(robot, cfg, spec, ResolutionConfig())
    assert g == pytest.approx(11.01, abs=1e-12)
    assert terms == (2.0, 0.1, 0.0, 1.0)


def test_objective_terms_are_consistent(robot):
    cfg = random_configs(robot, 1, seed=57)[0]
    spec = brace_spec_at(robot, cfg, offset=(0.05, 0.02))
    g, t = objective(robot, cfg, spec, ResolutionConfig())
    assert t.k == pytest.approx(frobenius_condition_number(free_space_jacobian(robot, cfg)))
    assert t.theta_z == pytest.approx(0.0, abs=1e-7)
    assert t.d == pytest.approx(0.09 / (0.09 - 0.05 ** 2 - 0.02 ** 2))
    assert g == pytest.approx(0.5 * t.k + 100 * t.Ci + 0.6 * t.theta_z + 0.01 * t.d)
    zero = ResolutionConfig(weights=(0, 0, 0, 0))
    assert objective(robot, cfg, spec, zero)[0] == 0.0
    assert np.array_equal(objective_gradient(robot, cfg, spec, zero), np.zeros(10))


def test_objective_is_continuous(robot):
    rng = np.random.default_rng(58)
    rc = ResolutionConfig()
    for cfg in random_configs(robot, 5, seed=59):
        spec = brace_spec_at(robot, cfg, offset=(0.05, 0.0))
        g0 = objective(robot, cfg, spec, rc)[0]
        for _ in range(5):
            q = cfg.as_vector() + 1e-8 * rng.normal(size=11)
            assert abs(objective(robot, Configuration.from_vector(q), spec, rc)[0] - g0) < 1e-5


def d_only(spec_r_max=0.3):
    return ResolutionConfig(weights=(0.0, 0.0, 0.0, 1.0))


def closed_form_d_gradient(robot, cfg, spec):
    kin = evaluate(robot, cfg)
    diff = kin.brace.origin - spec.tangent_frame.origin
    r2, R2 = diff @ diff, spec.r_max ** 2
    grad_b = 2 * R2 * diff / (R2 - r2) ** 2
    dq1 = grad_b @ kin.J1[:3]
    return np.concatenate([dq1, np.zeros(robot.n2)]), grad_b


def test_d_gradient_matches_closed_form(robot):
    rc = d_only()
    for cfg in random_configs(robot, 10, seed=60):
        spec = brace_spec_at(robot, cfg, offset=(0.1, -0.08))
        fd = joint_gradient(robot, cfg, spec, rc)
        exact, grad_b = closed_form_d_gradient(robot, cfg, spec)
        assert np.linalg.norm(fd - exact) <= 1e-6 * np.linalg.norm(exact)
        # reduced coordinates: only the in-plane slides see the barrier
        H = allowable_twist_basis(spec)
        red = objective_gradient(robot, cfg, spec, rc)
        exact_red = H.T @ np.concatenate([grad_b, np.zeros(3)])
        assert np.linalg.norm(red[:5] - exact_red) <= 1e-6 * np.linalg.norm(exact_red)
        assert np.allclose(red[5:], 0.0)


def test_gradient_richardson_convergence(robot):
    cfg = random_configs(robot, 1, seed=61)[0]
    spec = brace_spec_at(robot, cfg, offset=(0.1, -0.08))
    exact, _ = closed_form_d_gradient(robot, cfg, spec)
    errors = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = joint_gradient(robot, cfg, spec, replace(d_only(), fd_step=h))
        errors.append(np.linalg.norm(fd - exact))
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


def test_stencil_shrinks_near_boundary(robot):
    cfg = random_configs(robot, 1, seed=62)[0]
    b = evaluate(robot, cfg).brace
    # brace point 1e-10 m inside the rim: even the thrice-shrunk step leaves
    spec = ConstraintSpec(Frame(b.rotation, b.origin - b.rotation[:, 0] * (0.3 - 1e-10)), 0.3)
    assert region_distance(spec, b.origin) < 0.3
    rc = replace(d_only(), fd_step=1e-4)
    with pytest.raises(StencilFailureError):
        joint_gradient(robot, cfg, spec, rc)
    spec = ConstraintSpec(Frame(b.rotation, b.origin - b.rotation[:, 0] * (0.3 - 2e-5)), 0.3)
    grad = joint_gradient(robot, cfg, spec, rc)
    assert np.all(np.isfinite(grad))


def test_resolve_rates_strategies(robot):
    rng = np.random.default_rng(63)
    for cfg in random_configs(robot, 10, seed=64):
        spec = brace_spec_at(robot, cfg, offset=(0.03, 0.02))
        dx = rng.normal(size=6) * 0.1
        kin = evaluate(robot, cfg)
        free = resolve_rates(robot, cfg, spec, ResolutionConfig(strategy=FREE_SPACE_MIN_NORM), dx)
        assert np.allclose(free_space_jacobian(robot, cfg, kin) @ free.q_rates, dx, atol=1e-9)
        for s in (BRACED_MIN_NORM, BRACED_GRADIENT_PROJECTION):
            step = resolve_rates(robot, cfg, spec, ResolutionConfig(strategy=s), dx)
            assert step.residual <= 1e-9
            # chain-1 rates realise the reduced brace motion, which has no normal translation
            H = allowable_twist_basis(spec)
            assert np.allclose(kin.J1 @ step.q1_rates, H @ step.b_reduced_velocity, atol=1e-10)
            v_b = kin.J1 @ step.q1_rates
            assert abs(constraint_direction(spec) @ v_b) < 1e-12
            # and the whole robot reproduces the task twist
            assert np.allclose(free_space_jacobian(robot, cfg, kin) @ step.q_rates, dx, atol=1e-9)
            assert math.isfinite(step.g)


def test_self_motion_descends(robot):
    rng = np.random.default_rng(65)
    checked = 0
    for cfg in random_configs(robot, 10, seed=66, min_rcond=1e-2):
        # tilt the plane: theta_z = 0 is a kink the central difference cannot see
        R = evaluate(robot, cfg).brace.rotation @ axis_angle([1, 0, 0], 0.1)
        spec = brace_spec_at(robot, cfg, offset=(0.05, 0.05), rotation=R)
        beta = np.concatenate([rng.normal(size=3), np.zeros(3)])
        rc = ResolutionConfig(beta_x=beta / np.linalg.norm(beta))
        step = resolve_rates(robot, cfg, spec, rc, np.zeros(6))
        if np.linalg.norm(step.q_rates) < 1e-9:
            continue
        dt = 1e-4
        nxt = Configuration(cfg.q1 + dt * step.q1_rates, cfg.q2 + dt * step.q2_rates)
        assert objective(robot, nxt, spec, rc)[0] < objective(robot, cfg, spec, rc)[0]
        checked += 1
    assert checked >= 5


@pytest.mark.parametrize("kwargs", [dict(alpha=0.0), dict(alpha=1.0), dict(fd_step=0.0), dict(strategy="x"),
                                    dict(weights=(1, 1, 1)), dict(weights=(1, -1, 1, 1)),
                                    dict(beta_x=np.ones(6)), dict(sw2_variant="x")])
def test_resolution_config_validation(kwargs):
    with pytest.raises(ValueError):
        ResolutionConfig(**kwargs)
