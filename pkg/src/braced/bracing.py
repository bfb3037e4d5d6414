"""Contact models for a single brace point.

Only the frictionless point contact is implemented.  The tangent frame {t}
sits on the (planar) bracing surface with its z axis along the surface
normal and stays fixed for a whole simulation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, UnsupportedContactError
from .spatial import Frame

FRICTIONLESS_POINT = "frictionless-point"
CONTACT_KINDS = (FRICTIONLESS_POINT,)


@dataclass(frozen=True)
class ConstraintSpec:
    tangent_frame: Frame = field(default_factory=Frame.identity)
    r_max: float = 1.0
    kind: str = FRICTIONLESS_POINT

    def __post_init__(self):
        if not (np.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError(f"r_max must be > 0, got {self.r_max!r}")
        object.__setattr__(self, "r_max", float(self.r_max))

    @property
    def normal(self):
        return self.tangent_frame.z_axis

    def normal_offset(self, point):
        """Signed distance of ``point`` from the bracing plane along its normal."""
        return float(self.normal @ (np.asarray(point, dtype=float) - self.tangent_frame.origin))


@dataclass(frozen=True)
class BraceState:
    b_reduced_velocity: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.b_reduced_velocity, dtype=float).reshape(-1)
        object.__setattr__(self, "b_reduced_velocity", v)

    def check(self, H):
        if self.b_reduced_velocity.size != np.shape(H)[1]:
            raise DimensionError("reduced brace velocity length must equal the column count of H")
        return self


def _require_point_contact(spec):
    if spec.kind != FRICTIONLESS_POINT:
        raise UnsupportedContactError(f"contact kind {spec.kind!r} is not supported")


def allowable_twist_basis(spec):
    """6x5 basis of brace-point twists a frictionless point contact allows.

    Columns: slide along x_t, slide along y_t, rotate about x_t, y_t, z_t.
    """
    _require_point_contact(spec)
    R = spec.tangent_frame.rotation
    H = np.zeros((6, 5))
    H[:3, 0] = R[:, 0]
    H[:3, 1] = R[:, 1]
    H[3:, 2] = R[:, 0]
    H[3:, 3] = R[:, 1]
    H[3:, 4] = R[:, 2]
    return H


def constraint_direction(spec):
    """The constrained direction ``X = [n; 0]`` (pure force / pure normal translation)."""
    _require_point_contact(spec)
    return np.concatenate([spec.normal, np.zeros(3)])


def projection_from_normal(normal):
    n = np.asarray(normal, dtype=float).reshape(-1)
    if n.shape != (3,):
        raise DimensionError("normal must be a 3-vector")
    if not np.linalg.norm(n) > 0:
        raise ValueError("surface normal must be nonzero")
    X = np.concatenate([n, np.zeros(3)])[:, None]
    return X @ np.linalg.inv(X.T @ X) @ X.T


def constraint_projection(spec):
    """Rank-1 projector ``P = X (X^T X)^-1 X^T`` onto the constrained direction."""
    _require_point_contact(spec)
    return projection_from_normal(spec.normal)


def region_distance(spec, b_origin):
    return float(np.linalg.norm(np.asarray(b_origin, dtype=float) - spec.tangent_frame.origin))
