import sys

import numpy as np
import pytest

from braced.bracing import ConstraintSpec
from braced.description import example_robot
from braced.robot import Configuration, evaluate
from braced.spatial import Frame, axis_angle


@pytest.fixture(scope="session")
def robot():
    return example_robot()


def random_rotation(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return axis_angle(axis, rng.uniform(-np.pi, np.pi))


def random_unit(rng, n=3):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_configs(robot, n, seed=0, min_rcond=1e-3):
    """Configurations whose chain-1 Jacobian is comfortably invertible."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        cfg = Configuration(rng.uniform(-np.pi, np.pi, robot.n1), rng.uniform(-np.pi, np.pi, robot.n2))
        s = np.linalg.svd(evaluate(robot, cfg).J1, compute_uv=False)
        if s[-1] / s[0] > min_rcond:
            out.append(cfg)
    return out


def brace_spec_at(robot, cfg, r_max=0.3, offset=(0.0, 0.0), rotation=None):
    """Bracing plane through the brace point of ``cfg``, normal along the brace z axis.

    ``offset`` shifts the region centre in the plane so the brace point is
    off-centre.
    """
    b = evaluate(robot, cfg).brace
    R = b.rotation if rotation is None else rotation
    centre = b.origin - R[:, 0] * offset[0] - R[:, 1] * offset[1]
    return ConstraintSpec(Frame(R, centre), r_max)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
