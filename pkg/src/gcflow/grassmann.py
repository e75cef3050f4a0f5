"""Oriented 2-planes of R^4 as pairs of sphere points.

A plane is encoded either by an oriented orthonormal frame or by the pair
(m, n) of unit imaginary quaternions produced by the star-operator split of
its bivector.  The two encodings are inverse to each other:

    pair_from_plane(plane_from_pair(g)) == g

and a point x lies on the plane of (m, n) exactly when m*x == x*n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameError
from .quat import (
    FRAME_ATOL,
    IDENTITY4,
    imag_unit_quaternion,
    qmul,
    qnormalize,
    rotor,
    wedge_split,
)

MEMBERSHIP_ATOL = 1e-8


@dataclass(frozen=True, eq=False)
class OrientedPlane:
    """Ordered orthonormal frame (f1, f2) spanning an oriented 2-plane."""

    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        f1 = np.asarray(self.f1, dtype=float)
        f2 = np.asarray(self.f2, dtype=float)
        if (
            abs(float(np.linalg.norm(f1)) - 1.0) > FRAME_ATOL
            or abs(float(np.linalg.norm(f2)) - 1.0) > FRAME_ATOL
            or abs(float(np.dot(f1, f2))) > FRAME_ATOL
        ):
            raise FrameError("plane frame is not orthonormal")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)


@dataclass(frozen=True, eq=False)
class GrassPoint:
    """Pair of unit imaginary quaternions naming an oriented 2-plane."""

    m: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", imag_unit_quaternion(self.m))
        object.__setattr__(self, "n", imag_unit_quaternion(self.n))


def left_matrix(m) -> np.ndarray:
    """Matrix of x -> m*x, columns indexed by the standard basis."""
    cols = [qmul(m, IDENTITY4[a]) for a in range(4)]
    return np.stack(cols, axis=-1)


def right_matrix(n) -> np.ndarray:
    """Matrix of x -> x*n."""
    cols = [qmul(IDENTITY4[a], n) for a in range(4)]
    return np.stack(cols, axis=-1)


def involution_matrix(m, n) -> np.ndarray:
    """The symmetric involution x -> -m*x*n whose +1 eigenspace is the plane."""
    return -np.matmul(left_matrix(m), right_matrix(n))


def plane_frames(m, n):
    """Deterministic oriented frames (f1, f2 = m*f1) of {x : m x = x n}, batched.

    f1 is the normalized projection onto the +1 eigenspace of the first
    standard basis vector whose projection is not degenerate.
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    T = involution_matrix(m, n)
    # columns of (I + T)/2 are the eigenspace projections of the basis vectors
    proj = 0.5 * (IDENTITY4 + T)
    norms = np.linalg.norm(proj, axis=-2)
    usable = norms >= 0.3
    idx = np.argmax(usable, axis=-1)
    f1 = np.take_along_axis(proj, idx[..., None, None], axis=-1)[..., 0]
    f1 = qnormalize(f1)
    f2 = qmul(m, f1)
    return f1, f2


def plane_from_pair(g: GrassPoint) -> OrientedPlane:
    """Oriented plane of a factor pair; orientation is (x, m*x)."""
    f1, f2 = plane_frames(g.m, g.n)
    return OrientedPlane(f1, f2)


def pair_from_plane(plane: OrientedPlane) -> GrassPoint:
    """Factor pair of an oriented plane, via the star split of its bivector."""
    m, n = wedge_split(plane.f1, plane.f2)
    return GrassPoint(m, n)


def membership_defect(g: GrassPoint, x) -> float:
    """Distance of x from the plane of g, as ||m x - x n|| / 2."""
    return 0.5 * float(np.linalg.norm(qmul(g.m, x) - qmul(x, g.n)))


def circle_point(g: GrassPoint, x0, t) -> np.ndarray:
    """exp(t*m) * x0: the great circle cut by the plane of g, batched in t.

    x0 must lie on the plane; the curve has period 2*pi and derivative m*x0
    at t = 0.
    """
    x0 = np.asarray(x0, dtype=float)
    if membership_defect(g, x0) > MEMBERSHIP_ATOL:
        raise FrameError("base point does not lie on the plane")
    return qmul(rotor(g.m, t), x0)


def frame_of_field_plane(p, xp):
    """Oriented plane spanned by a sphere point and a unit tangent vector."""
    return OrientedPlane(p, xp)
