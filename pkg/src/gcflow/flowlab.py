"""Unit tangent bundle of the round 3-sphere: flow, kernel structures, chirality.

Points of the bundle are pairs (p, v); the kernel of the canonical contact
form at (p, v) is carried by pairs of vectors orthogonal to both p and v
(the horizontal and vertical parts).  On the round sphere of curvature one
the flow derivative is a closed-form rotation of those parts, so no
integrator error enters any test built here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariationError, FrameError
from .fibration import FibrationMap, field_many, locate_fibre
from .grassmann import OrientedPlane, pair_from_plane
from .quat import TangentVector, cross3, im3, qnormalize

KER_ATOL = 1e-10
VARIATION_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SMPoint:
    """A unit tangent vector (p, v) of the 3-sphere."""

    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if (
            abs(float(np.linalg.norm(p)) - 1.0) > KER_ATOL
            or abs(float(np.linalg.norm(v)) - 1.0) > KER_ATOL
            or abs(float(np.dot(p, v))) > KER_ATOL
        ):
            raise FrameError("not a unit tangent pair")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class KerAlphaVector:
    """Horizontal/vertical component pair of a kernel vector."""

    xi_h: np.ndarray
    xi_v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi_h", np.asarray(self.xi_h, dtype=float))
        object.__setattr__(self, "xi_v", np.asarray(self.xi_v, dtype=float))

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.xi_h, self.xi_h) + np.dot(self.xi_v, self.xi_v)))


def _check_at(q: SMPoint, xi: KerAlphaVector):
    scale = max(1.0, xi.norm)
    for comp in (xi.xi_h, xi.xi_v):
        if abs(float(np.dot(comp, q.p))) > KER_ATOL * scale or abs(
            float(np.dot(comp, q.v))
        ) > KER_ATOL * scale:
            raise FrameError("kernel vector components must be orthogonal to p and v")


def geodesic_flow(q: SMPoint, t: float) -> SMPoint:
    """Time-t geodesic flow: rotation of (p, v) in their common plane."""
    c, s = np.cos(t), np.sin(t)
    return SMPoint(c * q.p + s * q.v, -s * q.p + c * q.v)


def dflow_ker_alpha(q: SMPoint, xi: KerAlphaVector, t: float) -> KerAlphaVector:
    """Flow derivative on the kernel: the components rotate by t.

    The components are constant vectors of the fixed 2-plane orthogonal to
    span{p, v}; curvature one makes the propagation (h, v) ->
    (h cos t + v sin t, -h sin t + v cos t).
    """
    _check_at(q, xi)
    c, s = np.cos(t), np.sin(t)
    return KerAlphaVector(c * xi.xi_h + s * xi.xi_v, -s * xi.xi_h + c * xi.xi_v)


def apply_acs(q: SMPoint, xi: KerAlphaVector, which: str) -> KerAlphaVector:
    """Apply one of the two almost complex structures on the kernel.

    "J" is the symplectic rotation (h, v) -> (-v, h); "JJ" applies the
    oriented quarter-turn of the tangent plane to each component.  Both
    square to minus the identity.
    """
    _check_at(q, xi)
    if which == "J":
        return KerAlphaVector(-xi.xi_v, xi.xi_h)
    if which == "JJ":
        return KerAlphaVector(
            cross3(q.p, q.v, xi.xi_h),
            cross3(q.p, q.v, xi.xi_v),
        )
    raise ValueError("which must be 'J' or 'JJ'")


def dalpha(q: SMPoint, xi: KerAlphaVector, eta: KerAlphaVector) -> float:
    """The kernel symplectic pairing <xi_H, eta_V> - <xi_V, eta_H>."""
    _check_at(q, xi)
    _check_at(q, eta)
    return float(np.dot(xi.xi_h, eta.xi_v) - np.dot(xi.xi_v, eta.xi_h))


def commutation_defect(q: SMPoint, xi: KerAlphaVector, t: float, which: str) -> float:
    """Norm of dflow(A xi) - A(dflow xi) at time t, for A in {J, JJ}."""
    lhs = dflow_ker_alpha(q, apply_acs(q, xi, which), t)
    qt = geodesic_flow(q, t)
    rhs = apply_acs(qt, dflow_ker_alpha(q, xi, t), which)
    return float(
        np.sqrt(
            np.sum((lhs.xi_h - rhs.xi_h) ** 2) + np.sum((lhs.xi_v - rhs.xi_v) ** 2)
        )
    )


def push_forward(F: FibrationMap, p, u, seed=None):
    """Lift of a perpendicular direction by the field: (u, D_u X) at (p, X(p)).

    Returns (q, xi) with q = (p, X(p)); the vertical part is projected onto
    the orthogonal complement of span{p, X(p)} to strip finite-difference
    dust before the kernel invariants are enforced.
    """
    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    x = field_many(F, p[None], a[None])[0][0]
    uv = u.vec if isinstance(u, TangentVector) else np.asarray(u, dtype=float)
    h = 1e-5
    xp = field_many(F, qnormalize(p + h * uv)[None], a[None])[0][0]
    xm = field_many(F, qnormalize(p - h * uv)[None], a[None])[0][0]
    d = (xp - xm) / (2.0 * h)
    d = d - float(np.dot(d, p)) * p
    d = d - float(np.dot(d, x)) * x
    uq = uv - float(np.dot(uv, p)) * p
    uq = uq - float(np.dot(uq, x)) * x
    return SMPoint(p, x), KerAlphaVector(uq, d)


def E_membership_defect(F: FibrationMap, p, xi: KerAlphaVector, seed=None) -> float:
    """Distance of xi from the lifted perpendicular bundle at (p, X(p)).

    In the perpendicular frame the bundle is {(u, B u)}; the defect is the
    norm of xi_V - B xi_H in frame coordinates, zero exactly on lifts.
    """
    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    x = field_many(F, p[None], a[None])[0][0]
    _check_at(SMPoint(p, x), xi)
    from .geometry import _shape_from  # local import to keep module load light

    B, u1, u2, _ = _shape_from(F, p[None], x[None], a[None])
    vh = np.array([float(np.dot(xi.xi_h, u1[0])), float(np.dot(xi.xi_h, u2[0]))])
    vv = np.array([float(np.dot(xi.xi_v, u1[0])), float(np.dot(xi.xi_v, u2[0]))])
    return float(np.linalg.norm(vv - B[0] @ vh))


def _spiral_base(q: SMPoint):
    """Deterministic unit vector orthogonal to span{p, v} and its quarter turn."""
    for a in range(4):
        e = np.zeros(4)
        e[a] = 1.0
        r = e - float(np.dot(e, q.p)) * q.p - float(np.dot(e, q.v)) * q.v
        nr = float(np.linalg.norm(r))
        if nr >= 0.5:
            w = r / nr
            return w, cross3(q.p, q.v, w)
    raise DegenerateVariationError("no usable basis direction")  # pragma: no cover


def _factor_velocities(q: SMPoint, xi: KerAlphaVector, h: float = VARIATION_STEP):
    """First-order motion of the two plane factors along a kernel vector.

    Central differences of the factor pair of span(p_s, v_s) for the curve
    with derivative xi, each velocity projected tangent to its factor.
    """

    def factors(s):
        ps = qnormalize(q.p + s * xi.xi_h)
        vs = q.v + s * xi.xi_v
        vs = vs - float(np.dot(vs, ps)) * ps
        vs = vs / np.linalg.norm(vs)
        g = pair_from_plane(OrientedPlane(ps, vs))
        return g.m, g.n

    m_p, n_p = factors(h)
    m_m, n_m = factors(-h)
    m0, n0 = factors(0.0)
    dm = (m_p - m_m) / (2.0 * h)
    dn = (n_p - n_m) / (2.0 * h)
    dm = dm - float(np.dot(dm, m0)) * m0
    dn = dn - float(np.dot(dn, n0)) * n0
    return (m0, dm), (n0, dn)


@dataclass(frozen=True)
class ChiralityWitness:
    """Rotation senses of the two kernel structures on the plane factors.

    Factors are ordered by spiral class: the first entry is the sense on the
    factor moved by (w, +jw) spirals, the second on the factor moved by
    (w, -jw) spirals.  Senses are +1 for anti-clockwise and -1 for clockwise
    in the orientation convention fixed by sense = sign <c, b x a>.
    """

    i_action: tuple
    jj_action: tuple


def _sense(center, vel_before, vel_after) -> int:
    c = im3(center)
    a = im3(vel_before)
    b = im3(vel_after)
    val = float(np.dot(c, np.cross(b, a)))
    if abs(val) < 1e-8:
        raise DegenerateVariationError("rotation sense is degenerate")
    return 1 if val > 0 else -1


def chirality_witness(q: SMPoint) -> ChiralityWitness:
    """Measure how the kernel structures rotate the plane-factor tangents.

    Each spiral class (w, +jw) and (w, -jw) moves exactly one factor of the
    plane pair; for each class and each structure the witness compares the
    factor velocity before and after applying the structure and reports the
    rotation sense.
    """
    w, jw = _spiral_base(q)
    out = {}
    for name in ("J", "JJ"):
        senses = []
        for sgn in (1.0, -1.0):
            xi = KerAlphaVector(w, sgn * jw)
            (m0, dm), (n0, dn) = _factor_velocities(q, xi)
            nm, nn = float(np.linalg.norm(dm)), float(np.linalg.norm(dn))
            if max(nm, nn) < 1e-6 or min(nm, nn) > 1e-3 * max(nm, nn):
                raise DegenerateVariationError("spiral does not move a single factor")
            take_m = nm > nn
            axi = apply_acs(q, xi, name)
            (_, dmb), (_, dnb) = _factor_velocities(q, axi)
            if take_m:
                senses.append(_sense(m0, dm, dmb))
            else:
                senses.append(_sense(n0, dn, dnb))
        out[name] = tuple(senses)
    return ChiralityWitness(i_action=out["J"], jj_action=out["JJ"])
