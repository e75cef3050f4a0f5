"""Differential geometry of circle fields on the unit 3-sphere.

Covariant derivatives are central differences of 0-homogeneous ambient
extensions projected back to the tangent space; the flow direction is
differentiated along the exact great-circle fibre, so no integrator error
enters any reported residual.

Sign conventions for the 2-forms: with B the frame matrix of the shape
operator u -> D_u X (columns are images), the contact 2-form of lambda =
g(X, .) has frame matrix B - B^T, i.e. dlambda(u_i, u_j) = B_ij - B_ji, and
the numerical exterior derivative is oriented to match.  This is the same
orientation that makes the kernel pairing <xi_H, eta_V> - <xi_V, eta_H>
positive on (u, Du X) pairs of the standard constant-map field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fibration import FibrationMap, field_many, fibre_direction, fibre_samples, locate_fibre
from .quat import EPS4, TangentVector, qmul, qnormalize, rotor
from .errors import FrameError

H_SPATIAL = 1e-5   # step for covariant derivatives
H_FLOW = 1e-4      # step along the fibre for flow derivatives
H_ALT = 2e-5       # independent step for the Lie-derivative route

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class PerpFrame:
    """Base point, field value, and an oriented orthonormal frame of X-perp."""

    base: np.ndarray
    x: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


@dataclass(frozen=True, eq=False)
class ShapeOperator:
    """Frame matrix of u -> D_u X on X-perp, with its invariants."""

    frame: PerpFrame
    matrix: np.ndarray
    trace: float
    det: float
    trace_sq: float


@dataclass(frozen=True)
class DefectReport:
    """Named residuals of one covered point.

    lambda_residual is zero by construction: the field evaluator returns
    unit vectors, so the pairing of the field with its own 1-form is 1
    identically.  All other entries are measured.
    """

    nabla_xx: float
    lambda_residual: float
    reeb_residual: float
    contact_det: float
    div_x: float
    j_defect: float
    conf3: float
    conf4: float
    conf5: float
    key_residual: float
    dlambda_frame: float
    dlambda_numeric: float
    cross_check: float

    FIELDS = (
        "nabla_xx",
        "lambda_residual",
        "reeb_residual",
        "contact_det",
        "div_x",
        "j_defect",
        "conf3",
        "conf4",
        "conf5",
        "key_residual",
    )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def _normalize_rows(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _cross3_rows(p, v, u):
    return np.einsum("ijkl,...i,...j,...k->...l", EPS4, p, v, u)


def covariant_derivative(field, p, u, h: float = H_SPATIAL):
    """Covariant derivative of a tangent field along u at p.

    field maps sphere points (..., 4) to tangent vectors (or TangentVector);
    it is sampled at normalized points, realizing the 0-homogeneous ambient
    extension, and the central difference is projected to the tangent space.
    Linear in u.
    """
    p = np.asarray(p, dtype=float)
    if isinstance(u, TangentVector):
        if not np.allclose(u.base, p, atol=1e-10):
            raise FrameError("direction is not based at the given point")
        uv = u.vec
    else:
        uv = np.asarray(u, dtype=float)

    def _eval(q):
        out = field(q)
        return out.vec if isinstance(out, TangentVector) else np.asarray(out, dtype=float)

    xp = _eval(qnormalize(p + h * uv))
    xm = _eval(qnormalize(p - h * uv))
    d = (xp - xm) / (2.0 * h)
    d = d - float(np.dot(d, p)) * p
    return TangentVector(p, d)


def perp_frames(P, X):
    """Deterministic oriented frames of X-perp, batched.

    u1 is the normalized residual of the first standard basis vector not
    nearly parallel to span{p, X}; u2 closes a positively oriented triple
    (u1, u2, X), i.e. det[p, u1, u2, X] > 0.
    """
    P = np.atleast_2d(P)
    X = np.atleast_2d(X)
    cands = []
    for a in range(4):
        e = np.zeros(4)
        e[a] = 1.0
        r = e - _dot(e, P)[..., None] * P - _dot(e, X)[..., None] * X
        cands.append(r)
    cands = np.stack(cands, axis=1)  # (N, 4, 4)
    norms = np.linalg.norm(cands, axis=-1)
    idx = np.argmax(norms >= 0.5, axis=-1)
    u1 = cands[np.arange(P.shape[0]), idx]
    u1 = _normalize_rows(u1)
    u2 = _cross3_rows(P, X, u1)
    return u1, u2


def perp_frame(p, x) -> PerpFrame:
    u1, u2 = perp_frames(p[None], x[None])
    return PerpFrame(p, x, u1[0], u2[0])


def _shape_from(F, P, X, seeds, h=H_SPATIAL):
    """Frame matrix of the shape operator plus the raw ambient differences."""
    u1, u2 = perp_frames(P, X)
    raws = []
    tangs = []
    for u in (u1, u2):
        xp, _ = field_many(F, _normalize_rows(P + h * u), seeds)
        xm, _ = field_many(F, _normalize_rows(P - h * u), seeds)
        raw = (xp - xm) / (2.0 * h)
        raws.append(raw)
        tangs.append(raw - _dot(raw, P)[..., None] * P)
    n = P.shape[0]
    B = np.empty((n, 2, 2))
    for k, u in enumerate((u1, u2)):
        for l in range(2):
            B[:, k, l] = _dot(u, tangs[l])
    return B, u1, u2, raws


def _lam_pairing(Xval, pts, z):
    """g(X, Z~) at pts for the projected constant extension Z~ of z."""
    return _dot(Xval, z) - _dot(z, pts) * _dot(Xval, pts)


def _core(F: FibrationMap, P, seeds, h=H_SPATIAL, h_flow=H_FLOW, h_alt=H_ALT):
    """All per-point defect quantities for a batch of covered points."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    n = P.shape[0]
    X, A = field_many(F, P, seeds)
    direction = fibre_direction(F, A)

    B, u1, u2, _ = _shape_from(F, P, X, A, h)
    div_x = B[:, 0, 0] + B[:, 1, 1]
    B2 = np.einsum("nij,njk->nik", B, B)
    trace_sq = B2[:, 0, 0] + B2[:, 1, 1]
    j_defect = np.linalg.norm(B2 + np.eye(2), axis=(1, 2))
    conf3 = np.linalg.norm(np.einsum("ij,njk->nik", _J2, B) - np.einsum("nij,jk->nik", B, _J2), axis=(1, 2))
    sym = B + np.swapaxes(B, 1, 2)
    conf4 = np.linalg.norm(sym - div_x[:, None, None] * np.eye(2), axis=(1, 2))

    # numerical exterior derivative of lambda = g(X, .) and the Reeb pairing
    evals = {}
    vecs = {0: u1, 1: u2, 2: X}
    for key_dir, y in vecs.items():
        pts_p = _normalize_rows(P + h * y)
        pts_m = _normalize_rows(P - h * y)
        xp, _ = field_many(F, pts_p, A)
        xm, _ = field_many(F, pts_m, A)
        evals[key_dir] = (pts_p, xp, pts_m, xm)

    def lam_deriv(along, zvec):
        pts_p, xp, pts_m, xm = evals[along]
        return (_lam_pairing(xp, pts_p, zvec) - _lam_pairing(xm, pts_m, zvec)) / (2.0 * h)

    def dlam(i, j):
        return -(lam_deriv(i, vecs[j]) - lam_deriv(j, vecs[i]))

    dlam_frame = B[:, 0, 1] - B[:, 1, 0]
    dlam_num = dlam(0, 1)
    cross_check = np.abs(dlam_num - dlam_frame)
    reeb = np.maximum(np.abs(dlam(2, 0)), np.abs(dlam(2, 1)))
    contact_det = dlam_frame**2

    # geodesibility from the same flow-direction evaluations
    _, xp, _, xm = evals[2]
    nx = (xp - xm) / (2.0 * h)
    nx = nx - _dot(nx, P)[..., None] * P
    nabla_xx = np.linalg.norm(nx, axis=-1)

    # Lie derivative of the metric on X-perp, by an independent route:
    # L_X g(u_i, u_j) = X<U~_i, U~_j> + <D_{u_i} X, u_j> + <u_i, D_{u_j} X>
    # with projected constant extensions U~ (whose derivative along X vanishes
    # at the base point) and a separate difference step.
    raw_alt = []
    for u in (u1, u2):
        xp, _ = field_many(F, _normalize_rows(P + h_alt * u), A)
        xm, _ = field_many(F, _normalize_rows(P - h_alt * u), A)
        raw_alt.append((xp - xm) / (2.0 * h_alt))
    flow_p = qmul(rotor(direction, np.full(n, h_alt)), P)
    flow_m = qmul(rotor(direction, np.full(n, -h_alt)), P)

    def ext_pair(x, ui, uj):
        a = ui - _dot(ui, x)[..., None] * x
        b = uj - _dot(uj, x)[..., None] * x
        return _dot(a, b)

    lie = np.empty((n, 2, 2))
    us = (u1, u2)
    for i in range(2):
        for j in range(2):
            xdot = (ext_pair(flow_p, us[i], us[j]) - ext_pair(flow_m, us[i], us[j])) / (2.0 * h_alt)
            lie[:, i, j] = xdot + _dot(raw_alt[i], us[j]) + _dot(us[i], raw_alt[j])
    conf5 = np.linalg.norm(lie - div_x[:, None, None] * np.eye(2), axis=(1, 2))

    # flow derivative of div X along the exact fibre circle
    traces = []
    for sgn in (1.0, -1.0):
        Pf = qmul(rotor(direction, np.full(n, sgn * h_flow)), P)
        Xf = qmul(direction, Pf)
        Xf = _normalize_rows(Xf - _dot(Xf, Pf)[..., None] * Pf)
        Bf, _, _, _ = _shape_from(F, Pf, Xf, A, h)
        traces.append(Bf[:, 0, 0] + Bf[:, 1, 1])
    x_trace = (traces[0] - traces[1]) / (2.0 * h_flow)
    key_residual = np.abs(x_trace + 2.0 + trace_sq)

    return {
        "p": P,
        "x": X,
        "a": A,
        "u1": u1,
        "u2": u2,
        "B": B,
        "nabla_xx": nabla_xx,
        "lambda_residual": np.zeros(n),
        "reeb_residual": reeb,
        "contact_det": contact_det,
        "div_x": div_x,
        "j_defect": j_defect,
        "conf3": conf3,
        "conf4": conf4,
        "conf5": conf5,
        "key_residual": key_residual,
        "dlambda_frame": dlam_frame,
        "dlambda_numeric": dlam_num,
        "cross_check": cross_check,
    }


@dataclass(frozen=True, eq=False)
class DefectScan:
    """Batched defect quantities over a deterministic covered sample."""

    data: dict

    def __len__(self) -> int:
        return self.data["p"].shape[0]

    def max(self, field: str) -> float:
        return float(np.max(self.data[field]))

    def min(self, field: str) -> float:
        return float(np.min(self.data[field]))

    def array(self, field: str) -> np.ndarray:
        return self.data[field]

    def report(self, i: int) -> DefectReport:
        d = self.data
        return DefectReport(
            nabla_xx=float(d["nabla_xx"][i]),
            lambda_residual=float(d["lambda_residual"][i]),
            reeb_residual=float(d["reeb_residual"][i]),
            contact_det=float(d["contact_det"][i]),
            div_x=float(d["div_x"][i]),
            j_defect=float(d["j_defect"][i]),
            conf3=float(d["conf3"][i]),
            conf4=float(d["conf4"][i]),
            conf5=float(d["conf5"][i]),
            key_residual=float(d["key_residual"][i]),
            dlambda_frame=float(d["dlambda_frame"][i]),
            dlambda_numeric=float(d["dlambda_numeric"][i]),
            cross_check=float(d["cross_check"][i]),
        )

    def reports(self):
        return [self.report(i) for i in range(len(self))]


def defect_scan(F: FibrationMap, samples: int = 200, seed: int = 7) -> DefectScan:
    """Defect quantities over generated covered points (deterministic)."""
    gen = fibre_samples(F, samples, seed)
    data = _core(F, gen["p"], gen["m"])
    data["m"] = gen["m"]
    data["t"] = gen["t"]
    return DefectScan(data)


def _single(F: FibrationMap, p, seed=None):
    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    return _core(F, p[None], a[None])


def shape_operator(F: FibrationMap, p, seed=None) -> ShapeOperator:
    """Shape operator of the induced field at a covered point."""
    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    X, _ = field_many(F, p[None], a[None])
    B, u1, u2, _ = _shape_from(F, p[None], X, a[None])
    frame = PerpFrame(p, X[0], u1[0], u2[0])
    mat = B[0]
    return ShapeOperator(
        frame=frame,
        matrix=mat,
        trace=float(np.trace(mat)),
        det=float(np.linalg.det(mat)),
        trace_sq=float(np.trace(mat @ mat)),
    )


def apply_j(p, x, u) -> TangentVector:
    """Quarter turn of X-perp: u -> cross(p; x, u), positively oriented.

    Requires u orthogonal to x (both unit, tangent at p); the triple
    (u, ju, x) is then positively oriented and j squares to -identity.
    """
    p = np.asarray(p, dtype=float)
    xv = x.vec if isinstance(x, TangentVector) else np.asarray(x, dtype=float)
    uv = u.vec if isinstance(u, TangentVector) else np.asarray(u, dtype=float)
    if abs(float(np.dot(xv, uv))) > 1e-8:
        raise FrameError("u must be orthogonal to the field direction")
    return TangentVector(p, _cross3_rows(p, xv, uv))


@dataclass(frozen=True)
class ContactReport:
    """Contact-form diagnostics at one point."""

    lambda_x: float
    lambda_residual: float
    reeb_residual: float
    contact_det: float
    dlambda_frame: float
    dlambda_numeric: float
    cross_check: float


def contact_report(F: FibrationMap, p, seed=None) -> ContactReport:
    """Reeb and contact diagnostics of the induced field at p.

    The pairing of the field with its own 1-form is 1 by construction, so
    lambda_residual is 0; the 2-form is evaluated both from the shape-matrix
    identity and from the numerical exterior derivative, and their gap is
    reported as cross_check.
    """
    d = _single(F, p, seed)
    return ContactReport(
        lambda_x=1.0,
        lambda_residual=0.0,
        reeb_residual=float(d["reeb_residual"][0]),
        contact_det=float(d["contact_det"][0]),
        dlambda_frame=float(d["dlambda_frame"][0]),
        dlambda_numeric=float(d["dlambda_numeric"][0]),
        cross_check=float(d["cross_check"][0]),
    )


def complex_structure_defect(F: FibrationMap, p, seed=None) -> float:
    """Frobenius norm of B^2 + identity at a covered point."""
    d = _single(F, p, seed)
    return float(d["j_defect"][0])


def conformal_defect(F: FibrationMap, p, seed=None):
    """The three conformality residuals (commutator, symmetrized, Lie)."""
    d = _single(F, p, seed)
    return float(d["conf3"][0]), float(d["conf4"][0]), float(d["conf5"][0])


def key_formula_residual(F: FibrationMap, p, h_flow: float = H_FLOW, seed=None) -> float:
    """|X(trace B) + 2 + trace(B^2)| at a covered point."""
    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    d = _core(F, p[None], a[None], h_flow=h_flow)
    return float(d["key_residual"][0])


def defect_report(F: FibrationMap, p, seed=None) -> DefectReport:
    """Full defect report at one covered point."""
    d = _single(F, p, seed)
    return DefectScan(d).report(0)


def frame_orientation_det(frame: PerpFrame) -> float:
    """det[p, u1, u2, X]; positive for valid frames."""
    mat = np.stack([frame.base, frame.u1, frame.u2, frame.x], axis=-1)
    return float(np.linalg.det(mat))
