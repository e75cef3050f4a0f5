"""Quaternion and exterior algebra of R^4.

Conventions fixed here and relied on by every other module:

* basis (e0, e1, e2, e3) = (1, i, j, k) with Hamilton products ij = k,
  jk = i, ki = j;
* R^4 oriented by det(e0, e1, e2, e3) = +1; the unit 3-sphere carries the
  outward-normal-first orientation;
* Hodge star on 2-vectors: star(e01) = e23, star(e02) = e31, star(e03) = e12.

Quaternions are ndarrays of shape (..., 4); imaginary quaternions keep
component 0 equal to zero exactly.  Every function broadcasts over leading
axes, so a single code path serves both scalar calls and batched scans.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import FrameError

UNIT_ATOL = 1e-8       # constructors reject a norm further than this from 1
TANGENT_ATOL = 1e-10   # tangency invariant of TangentVector
FRAME_ATOL = 1e-8      # orthonormality required of input frames

IDENTITY4 = np.eye(4)
ONE = IDENTITY4[0]
I_ = IDENTITY4[1]
J_ = IDENTITY4[2]
K_ = IDENTITY4[3]

# Bivector component order used throughout: (e01, e02, e03, e23, e31, e12).
BIVECTOR_PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        inversions = sum(
            1 for x in range(4) for y in range(x + 1, 4) if perm[x] > perm[y]
        )
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


EPS4 = _levi_civita4()


def qnorm(q) -> np.ndarray:
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def qnormalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    out = -q.copy()
    out[..., 0] = q[..., 0]
    return out


def qmul(a, b) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = (a[..., k] for k in range(4))
    bw, bx, by, bz = (b[..., k] for k in range(4))
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def unit_quaternion(q) -> np.ndarray:
    """Validate and renormalize a point of the unit 3-sphere."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(n - 1.0) > UNIT_ATOL):
        raise ValueError(f"norm {n} further than {UNIT_ATOL} from 1")
    return q / n[..., None]


def imag_unit_quaternion(q) -> np.ndarray:
    """Validate and renormalize a unit imaginary quaternion.

    Accepts either a 4-component quaternion with vanishing real part or the
    bare 3 imaginary components.  The real component of the result is zero
    exactly.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1] == 3:
        q = np.concatenate([np.zeros(q.shape[:-1] + (1,)), q], axis=-1)
    if np.any(np.abs(q[..., 0]) > UNIT_ATOL):
        raise ValueError("real part exceeds the imaginary-quaternion tolerance")
    out = q.copy()
    out[..., 0] = 0.0
    n = np.linalg.norm(out, axis=-1)
    if np.any(np.abs(n - 1.0) > UNIT_ATOL):
        raise ValueError(f"imaginary norm {n} further than {UNIT_ATOL} from 1")
    return out / n[..., None]


def im3(q) -> np.ndarray:
    """Imaginary components (i, j, k) of a quaternion."""
    return np.asarray(q, dtype=float)[..., 1:]


def from_im3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def rotor(a, t) -> np.ndarray:
    """exp(t*a) = cos(t) + sin(t)*a for a unit imaginary a."""
    a = np.asarray(a, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.sin(t)[..., None] * a
    out[..., 0] = np.cos(t)
    return out


def conjugate_rotate(p, a) -> np.ndarray:
    """p * a * conj(p): the rotation of the imaginary 3-space induced by p.

    The real component of the result is forced to zero and the imaginary
    part renormalized, so drift cannot accumulate over long iterations.
    """
    out = qmul(qmul(p, a), qconj(p))
    out[..., 0] = 0.0
    return qnormalize(out)


def wedge(x, y) -> np.ndarray:
    """x wedge y as a 6-vector in the basis (e01, e02, e03, e23, e31, e12)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    comps = [x[..., a] * y[..., b] - x[..., b] * y[..., a] for a, b in BIVECTOR_PAIRS]
    return np.stack(comps, axis=-1)


def hodge_star(w) -> np.ndarray:
    """Hodge star on 2-vectors; swaps the (e01,e02,e03) and (e23,e31,e12) blocks."""
    w = np.asarray(w, dtype=float)
    return np.concatenate([w[..., 3:], w[..., :3]], axis=-1)


def wedge_square(w) -> np.ndarray:
    """Coefficient of w ^ w on the volume form; zero exactly on decomposables."""
    w = np.asarray(w, dtype=float)
    return 2.0 * np.sum(w[..., :3] * w[..., 3:], axis=-1)


def wedge_split(x, y):
    """Split the plane spanned by an oriented orthonormal pair into sphere factors.

    Forms w = x wedge y and projects onto the two eigenspaces of the star
    operator.  Each 3-component part has unit length for an orthonormal input
    pair; both are returned as unit imaginary quaternions (m, n).  The
    labeling is calibrated so that planes of right-multiplication circle
    fields x -> x*b have varying first factor p*b*conj(p) and constant second
    factor b; the first factor carries the coordinates of (w + star w), the
    second those of (w - star w).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    bad = (
        (np.abs(np.linalg.norm(x, axis=-1) - 1.0) > FRAME_ATOL)
        | (np.abs(np.linalg.norm(y, axis=-1) - 1.0) > FRAME_ATOL)
        | (np.abs(np.sum(x * y, axis=-1)) > FRAME_ATOL)
    )
    if np.any(bad):
        raise FrameError("wedge_split requires an orthonormal pair")
    w = wedge(x, y)
    m3 = w[..., :3] + w[..., 3:]
    n3 = w[..., :3] - w[..., 3:]
    m3 = m3 / np.linalg.norm(m3, axis=-1, keepdims=True)
    n3 = n3 / np.linalg.norm(n3, axis=-1, keepdims=True)
    return from_im3(m3), from_im3(n3)


def bivector_of_pair(m, n) -> np.ndarray:
    """Reconstruct the unit decomposable bivector with factors (m, n)."""
    a = im3(m)
    b = im3(n)
    return np.concatenate([(a + b) / 2.0, (a - b) / 2.0], axis=-1)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A vector of R^4 attached to a sphere point, orthogonal to it."""

    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "vec", np.asarray(self.vec, dtype=float))
        scale = max(1.0, float(np.linalg.norm(self.vec)))
        if abs(float(np.dot(self.base, self.vec))) > TANGENT_ATOL * scale:
            raise FrameError("vector is not tangent to the sphere at its base point")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def __repr__(self) -> str:  # pragma: no cover
        return f"TangentVector(base={self.base.tolist()}, vec={self.vec.tolist()})"


def _require_based_at(t, p, name):
    if isinstance(t, TangentVector):
        if not np.allclose(t.base, p, atol=1e-10):
            raise FrameError(f"{name} is not based at the given point")
        return t.vec, True
    return np.asarray(t, dtype=float), False


def cross3(p, v, u):
    """Oriented cross product of tangent 3-spaces of the unit sphere.

    Returns the unique w with <w, y> = det[p, v, u, y] for every y.  Bilinear
    and antisymmetric in (v, u); the output is orthogonal to p, v, u.
    Accepts raw arrays or TangentVector arguments; the typed form checks that
    both vectors share the base point p and returns a TangentVector.
    """
    p = np.asarray(p, dtype=float)
    vv, v_typed = _require_based_at(v, p, "v")
    uv, u_typed = _require_based_at(u, p, "u")
    w = np.einsum("ijkl,...i,...j,...k->...l", EPS4, p, vv, uv)
    if v_typed or u_typed:
        return TangentVector(p, w)
    return w
