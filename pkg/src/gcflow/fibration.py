"""Graph maps between the two sphere factors and the circle fields they induce.

A fibration of (a region of) the unit 3-sphere by great circles is encoded
by a map F from one sphere factor of the plane Grassmannian to the other:
the fibres are the circles of the planes (m, F(m)).  This module evaluates
such maps through matched stereographic charts, differentiates them,
classifies them (constant / holomorphic / antiholomorphic / generic),
locates the fibre through a point by contraction iteration, and evaluates
the induced unit tangent field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BoundaryError,
    ConvergenceError,
    CoverageError,
    DomainError,
    SpecFormatError,
)
from .grassmann import plane_frames
from .quat import (
    from_im3,
    im3,
    imag_unit_quaternion,
    qconj,
    qmul,
    qnormalize,
    rotor,
)
from .sampling import golden_disk, golden_sphere

# The chart over the second factor is conjugated relative to the first, so a
# chart expression depending on z alone commutes with the flow-compatible
# rotations of both factors.  Calibrated end to end: the 0.5*z fixture must
# come out divergence-free and the 0.5*conj(z) fixture conformal.
RANGE_CHART_CONJUGATED = True

FD_STEP = 1e-5              # finite-difference step for map differentials
DOMAIN_ATOL = 1e-9          # slack allowed on the cap boundary
POLE_DENOM_MIN = 1e-7       # chart denominator below this counts as the pole
LOCATE_TOL = 1e-14          # default fixed-point residual target
LOCATE_MAX_ITER = 300
CLASSIFY_TOL = 1e-6


def chart_point(c, conjugated: bool) -> np.ndarray:
    """Stereographic chart from the pole k; optionally conjugated.

    c is a unit imaginary quaternion (..., 4); returns complex z with
    z = (c1 + i c2) / (1 - c3), conjugated when requested.  The pole maps to
    an infinite value, which callers treat as outside every chart domain.
    """
    c = np.asarray(c, dtype=float)
    denom = 1.0 - c[..., 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (c[..., 1] + 1j * c[..., 2]) / denom
    z = np.where(denom <= POLE_DENOM_MIN, np.inf + 0j, z)
    return np.conj(z) if conjugated else z


def chart_inverse(z, conjugated: bool) -> np.ndarray:
    """Inverse stereographic chart, returning unit imaginary quaternions."""
    z = np.asarray(z, dtype=complex)
    if conjugated:
        z = np.conj(z)
    d = np.abs(z) ** 2 + 1.0
    c3 = np.stack(
        [2.0 * z.real / d, 2.0 * z.imag / d, (np.abs(z) ** 2 - 1.0) / d],
        axis=-1,
    )
    return from_im3(c3)


def tangent_frame(c):
    """Deterministic orthonormal frame (t1, t2 = c x t1) tangent at c."""
    c3 = im3(np.asarray(c, dtype=float))
    axes = np.eye(3)
    scores = np.abs(c3 @ axes.T)
    idx = np.argmax(scores <= 0.9, axis=-1)
    ref = axes[idx]
    t1 = ref - np.sum(ref * c3, axis=-1, keepdims=True) * c3
    t1 = t1 / np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = np.cross(c3, t1)
    return from_im3(t1), from_im3(t2)


@dataclass(frozen=True)
class ChartSpec:
    """Fixed chart constants: pole k on both factors, second factor conjugated."""

    pole: tuple = (0.0, 0.0, 1.0)
    second_factor_conjugated: bool = RANGE_CHART_CONJUGATED


CHARTS = ChartSpec()


@dataclass(frozen=True, eq=False)
class FibrationMap:
    """A graph map between the sphere factors.

    kind is "constant" or "chart-map".  Chart maps are finite sums
    F_hat(z) = sum c_pq z^p conj(z)^q in the matched charts, over a cap
    |z| <= domain_radius or the full sphere (domain_radius None).  The
    transposed flag swaps the roles of the factors: the domain then lives on
    the second factor and values on the first.
    """

    kind: str
    value: np.ndarray | None = None
    coefficients: tuple = ()
    domain_radius: float | None = None
    transposed: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "chart-map"):
            raise SpecFormatError(f"unknown map kind {self.kind!r}")
        if self.kind == "constant":
            if self.value is None:
                raise SpecFormatError("constant maps need a value")
            object.__setattr__(self, "value", imag_unit_quaternion(self.value))
            object.__setattr__(self, "coefficients", ())
        else:
            coeffs = tuple(
                (int(p), int(q), complex(c)) for p, q, c in self.coefficients
            )
            if not coeffs:
                raise SpecFormatError("chart maps need at least one coefficient")
            if any(p < 0 or q < 0 for p, q, _ in coeffs):
                raise SpecFormatError("powers must be non-negative")
            object.__setattr__(self, "coefficients", coeffs)
        if self.domain_radius is not None and self.domain_radius <= 0:
            raise SpecFormatError("domain radius must be positive")

    @property
    def domain_conjugated(self) -> bool:
        return self.transposed and CHARTS.second_factor_conjugated

    @property
    def range_conjugated(self) -> bool:
        return (not self.transposed) and CHARTS.second_factor_conjugated

    def domain_center(self) -> np.ndarray:
        return chart_inverse(np.asarray(0.0 + 0.0j), self.domain_conjugated)


@dataclass(frozen=True)
class MapClass:
    """Classification verdict with its defect diagnostics."""

    verdict: str
    delta_hol: float
    delta_anti: float
    max_dilatation: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "delta_hol": self.delta_hol,
            "delta_anti": self.delta_anti,
            "max_dilatation": self.max_dilatation,
        }


def _poly(coefficients, z):
    out = np.zeros_like(z, dtype=complex)
    zb = np.conj(z)
    for p, q, c in coefficients:
        out = out + c * z**p * zb**q
    return out


def eval_many(F: FibrationMap, m):
    """Batched map evaluation; returns (values, inside_mask)."""
    m = np.asarray(m, dtype=float)
    if F.kind == "constant":
        vals = np.broadcast_to(F.value, m.shape).copy()
        return vals, np.ones(m.shape[:-1], dtype=bool)
    z = chart_point(m, F.domain_conjugated)
    if F.domain_radius is None:
        inside = np.isfinite(z)
    else:
        inside = np.isfinite(z) & (np.abs(z) <= F.domain_radius + DOMAIN_ATOL)
    zsafe = np.where(inside, z, 0.0)
    w = _poly(F.coefficients, zsafe)
    out = chart_inverse(w, F.range_conjugated)
    out[~inside] = np.nan
    return out, inside


def eval_map(F: FibrationMap, m) -> np.ndarray:
    """Value of the map at one domain point; raises DomainError outside."""
    out, inside = eval_many(F, np.asarray(m, dtype=float))
    if not np.all(inside):
        raise DomainError("point lies outside the map domain")
    return out


def _interior_guard(F: FibrationMap, m, h):
    z = chart_point(m, F.domain_conjugated)
    if not np.isfinite(z):
        raise BoundaryError("point is at the chart pole")
    if F.domain_radius is not None:
        stretch = 0.5 * (1.0 + abs(z) ** 2)
        if abs(z) > F.domain_radius - 4.0 * h * max(stretch, 1.0):
            raise BoundaryError("point is within a finite-difference step of the boundary")


def differential(F: FibrationMap, m, h: float = FD_STEP):
    """Differential in fixed orthonormal tangent frames, with singular values.

    Central differences of eval_map along the frame at m, expressed in the
    frame at F(m).  Returns (matrix, singular_values) with the singular
    values sorted in descending order.
    """
    m = imag_unit_quaternion(m)
    _interior_guard(F, m, h)
    t1, t2 = tangent_frame(m)
    n = eval_map(F, m)
    s1, s2 = tangent_frame(n)
    cols = []
    for t in (t1, t2):
        mp = qnormalize(np.cos(h) * m + np.sin(h) * t)
        mm = qnormalize(np.cos(h) * m - np.sin(h) * t)
        d = (eval_map(F, mp) - eval_map(F, mm)) / (2.0 * h)
        d = d - np.sum(d * n, axis=-1, keepdims=False) * n
        cols.append([float(np.dot(s1, d)), float(np.dot(s2, d))])
    mat = np.array(cols).T
    sing = np.linalg.svd(mat, compute_uv=False)
    return mat, np.sort(sing)[::-1]


def domain_samples(F: FibrationMap, count: int, seed: int = 0, shrink: float = 0.999):
    """Deterministic low-discrepancy samples of the (slightly shrunk) domain."""
    if F.domain_radius is None:
        pts = from_im3(golden_sphere(count, seed))
    else:
        z = golden_disk(count, F.domain_radius * shrink, seed)
        pts = chart_inverse(z, F.domain_conjugated)
    return pts


_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _slot_rotations(F: FibrationMap):
    """Frame matrices of the flow-compatible rotations on domain and range.

    On the first factor the rotation is u -> m x u (matrix +J2 in the frame
    (t1, t2 = m x t1)); on the second it is u -> -(n x u) (matrix -J2).
    """
    if F.transposed:
        return -_J2, _J2
    return _J2, -_J2


def classify_map(F: FibrationMap, samples: int = 200, tol: float = CLASSIFY_TOL) -> MapClass:
    """Classify a map as constant, holomorphic, antiholomorphic, or generic.

    delta_hol is the largest frame-norm of F_* R_dom - R_rng F_* over the
    sample; delta_anti of F_* R_dom + R_rng F_*; both use the chirality-aware
    rotations of the two factors.  Verdicts compare the defects against
    tol * (1 + max dilatation).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    pts = domain_samples(F, samples)
    r_dom, r_rng = _slot_rotations(F)
    d_hol = 0.0
    d_anti = 0.0
    max_dil = 0.0
    for k in range(pts.shape[0]):
        mat, sing = differential(F, pts[k])
        d_hol = max(d_hol, float(np.linalg.norm(mat @ r_dom - r_rng @ mat)))
        d_anti = max(d_anti, float(np.linalg.norm(mat @ r_dom + r_rng @ mat)))
        max_dil = max(max_dil, float(sing[0]))
    thr = tol * (1.0 + max_dil)
    if max_dil <= tol:
        verdict = "constant"
    elif d_hol <= thr and d_anti > thr:
        verdict = "i-holomorphic"
    elif d_anti <= thr and d_hol > thr:
        verdict = "i-antiholomorphic"
    else:
        verdict = "generic"
    return MapClass(verdict, d_hol, d_anti, max_dil)


def max_dilatation_scan(F: FibrationMap, samples: int = 200) -> float:
    """Largest sampled singular value of the differential over the domain."""
    pts = domain_samples(F, samples)
    out = 0.0
    for k in range(pts.shape[0]):
        _, sing = differential(F, pts[k])
        out = max(out, float(sing[0]))
    return out


def reference_seed(F: FibrationMap, p) -> np.ndarray:
    """Default fixed-point seed: the domain-center value conjugated to p."""
    p = np.asarray(p, dtype=float)
    n0 = eval_map(F, F.domain_center())
    rot = qconj(p) if F.transposed else p
    return qmul(qmul(rot, np.broadcast_to(n0, p.shape)), qconj(rot)).copy()


def _locate_many(F: FibrationMap, p, seed, max_iter=LOCATE_MAX_ITER, tol=LOCATE_TOL):
    """Batched contraction iteration for the domain point of the fibre through p.

    Iterates x -> rot(F(x)) where rot conjugates by p (or by conj(p) for
    transposed maps).  Returns (points, converged, inside, residuals).
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(seed, dtype=float).copy()
    x[..., 0] = 0.0
    rot = qconj(p) if F.transposed else p
    rotc = qconj(rot)
    inside = np.ones(p.shape[:-1], dtype=bool)
    resid = np.full(p.shape[:-1], np.inf)
    prev_max = np.inf
    for _ in range(max_iter):
        fx, ok = eval_many(F, x)
        inside &= ok
        x_new = qmul(qmul(rot, fx), rotc)
        x_new[..., 0] = 0.0
        x_new = qnormalize(np.where(ok[..., None], x_new, x))
        step = np.linalg.norm(x_new - x, axis=-1)
        resid = np.where(inside, step, np.inf)
        x = np.where(inside[..., None], x_new, x)
        cur_max = float(np.max(resid[inside])) if np.any(inside) else 0.0
        if cur_max <= tol:
            break
        if cur_max >= 0.97 * prev_max and cur_max <= 1e-11:
            break  # hit the floating-point floor
        prev_max = cur_max
    converged = inside & (resid <= max(tol, 1e-11))
    return x, converged, inside, resid


def locate_fibre(
    F: FibrationMap,
    p,
    max_iter: int = LOCATE_MAX_ITER,
    tol: float = LOCATE_TOL,
    seed=None,
    return_history: bool = False,
):
    """Domain point of the great-circle fibre through p.

    Solves a = rot_p(F(a)) by contraction iteration; the contraction factor
    is bounded by the map dilatation.  Raises CoverageError when iterates
    leave the domain and ConvergenceError when the residual target is not
    met within max_iter steps.
    """
    p = np.asarray(p, dtype=float)
    a = reference_seed(F, p) if seed is None else np.asarray(seed, dtype=float).copy()
    a[..., 0] = 0.0
    a = qnormalize(a)
    rot = qconj(p) if F.transposed else p
    rotc = qconj(rot)
    history = []
    for it in range(1, max_iter + 1):
        fa, ok = eval_many(F, a)
        if not np.all(ok):
            raise CoverageError("iteration left the map domain; point not covered")
        a_new = qmul(qmul(rot, fa), rotc)
        a_new[..., 0] = 0.0
        a_new = qnormalize(a_new)
        res = float(np.linalg.norm(a_new - a))
        history.append(res)
        a = a_new
        if res <= tol:
            break
    else:
        last = history[-1] if history else float("inf")
        raise ConvergenceError(
            f"no convergence to {tol} within {max_iter} iterations (last {last})"
        )
    if return_history:
        return a, history
    return a


def field_many(F: FibrationMap, p, seeds=None):
    """Batched unit tangent field evaluation; returns (X, domain_points).

    X(p) = a*p for the located domain point a; a itself parametrizes the
    fibre and doubles as a warm seed for nearby evaluations.
    """
    p = np.asarray(p, dtype=float)
    if seeds is None:
        seeds = reference_seed(F, p)
    a, converged, inside, _ = _locate_many(F, p, seeds)
    if not np.all(inside):
        raise CoverageError("some points are not covered by the fibration")
    if not np.all(converged):
        raise ConvergenceError("batched fibre location failed to converge")
    left = fibre_direction(F, a)
    x = qmul(left, p)
    x = x - np.sum(x * p, axis=-1, keepdims=True) * p
    x = qnormalize(x)
    return x, a


def fibre_direction(F: FibrationMap, a) -> np.ndarray:
    """Left-multiplier of the fibre circle for a located domain point."""
    if F.transposed:
        return eval_many(F, a)[0]
    return np.asarray(a, dtype=float)


def vector_field(F: FibrationMap, p, seed=None):
    """Unit tangent vector of the fibre through p, as a TangentVector."""
    from .quat import TangentVector

    p = np.asarray(p, dtype=float)
    a = locate_fibre(F, p, seed=seed)
    x = qmul(fibre_direction(F, a), p)
    x = x - float(np.dot(x, p)) * p
    x = x / np.linalg.norm(x)
    return TangentVector(p, x)


def graph_pair(F: FibrationMap, a):
    """(first factor, second factor) of the plane named by a domain point."""
    val = eval_many(F, np.asarray(a, dtype=float))[0]
    if F.transposed:
        return val, np.asarray(a, dtype=float)
    return np.asarray(a, dtype=float), val


def fibre_samples(F: FibrationMap, count: int, seed: int):
    """Deterministic covered sample points with their generating data.

    Domain points come from the low-discrepancy sequence, base points from
    the deterministic plane frames, and circle angles from a seeded uniform
    generator, so locate_fibre is guaranteed to converge with the generator
    seed.  Returns a dict with keys m, n, x0, t, p (m is the domain point).
    """
    from .sampling import angle_samples

    dom = domain_samples(F, count, seed=seed)
    val, inside = eval_many(F, dom)
    if not np.all(inside):
        raise CoverageError("domain sampler produced points outside the domain")
    first, second = (val, dom) if F.transposed else (dom, val)
    f1, _ = plane_frames(first, second)
    t = angle_samples(count, seed)
    p = qmul(rotor(first, t), f1)
    return {"m": dom, "first": first, "second": second, "x0": f1, "t": t, "p": p}


def sigma_conjugate(F: FibrationMap) -> FibrationMap:
    """Compose with the orientation-reversing chart conjugation of the range."""
    if F.kind == "constant":
        z = chart_point(F.value, F.range_conjugated)
        flipped = chart_inverse(np.conj(z), F.range_conjugated)
        return FibrationMap(
            kind="constant",
            value=flipped,
            domain_radius=F.domain_radius,
            transposed=F.transposed,
            name=f"sigma({F.name})" if F.name else "",
        )
    coeffs = tuple((q, p, complex(c).conjugate()) for p, q, c in F.coefficients)
    return FibrationMap(
        kind="chart-map",
        coefficients=coeffs,
        domain_radius=F.domain_radius,
        transposed=F.transposed,
        name=f"sigma({F.name})" if F.name else "",
    )


def parse_fibration_spec(source) -> FibrationMap:
    """Build a FibrationMap from a dict, a JSON string, or a file path."""
    if isinstance(source, FibrationMap):
        return source
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"invalid JSON in {source}: {exc}") from exc
    elif isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"invalid JSON spec: {exc}") from exc
    elif isinstance(source, dict):
        data = source
    else:
        raise SpecFormatError(f"cannot parse fibration spec from {type(source)!r}")
    if not isinstance(data, dict):
        raise SpecFormatError("fibration spec must be a JSON object")
    kind = data.get("kind")
    radius = data.get("domain_radius")
    transposed = bool(data.get("transposed", False))
    name = str(data.get("name", ""))
    try:
        if kind == "constant":
            value = np.asarray(data["value"], dtype=float)
            return FibrationMap(
                kind="constant",
                value=value,
                domain_radius=radius,
                transposed=transposed,
                name=name,
            )
        if kind == "chart-map":
            coeffs = tuple(
                (int(p), int(q), complex(re, imag))
                for p, q, re, imag in data["coefficients"]
            )
            return FibrationMap(
                kind="chart-map",
                coefficients=coeffs,
                domain_radius=radius,
                transposed=transposed,
                name=name,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed fibration spec: {exc}") from exc
    raise SpecFormatError(f"unknown map kind {kind!r}")


def fixture_dict() -> dict:
    """The shipped example maps, keyed by name."""
    return dict(FIXTURES)


FIXTURES = {
    "HOPF": FibrationMap(kind="constant", value=(1.0, 0.0, 0.0), name="HOPF"),
    "VOL05": FibrationMap(
        kind="chart-map",
        coefficients=((1, 0, 0.5 + 0j),),
        domain_radius=1.0,
        name="VOL05",
    ),
    "CONF05": FibrationMap(
        kind="chart-map",
        coefficients=((0, 1, 0.5 + 0j),),
        domain_radius=1.0,
        name="CONF05",
    ),
    "GEN": FibrationMap(
        kind="chart-map",
        coefficients=((1, 0, 0.3 + 0j), (0, 1, 0.1 + 0j)),
        domain_radius=1.0,
        name="GEN",
    ),
    "FULLANTI": FibrationMap(
        kind="chart-map",
        coefficients=((0, 2, 1.0 + 0j),),
        domain_radius=None,
        name="FULLANTI",
    ),
}

VALID_FIXTURES = ("HOPF", "VOL05", "CONF05", "GEN")
