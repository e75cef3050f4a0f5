"""Verification suites, fibration classification, and tabular export.

A suite is a list of named checks, each of which records the measured
value, the threshold, and whether passing the threshold was *expected*.
Negative controls are first class: a check can expect failure, and the
suite passes only when every observation matches its expectation.  Reports
are plain dicts rendered to JSON deterministically, so identical
configurations produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import fibration as fib
from . import flowlab as fl
from . import geometry as geo
from .conventions import conventions_hash
from .errors import GCFlowError, SpecFormatError
from .quat import qnormalize

DEFAULT_SAMPLES = 200
DEFAULT_FLOW_SAMPLES = 100
DEFAULT_SEED = 7

SUITES = ("prop-1", "prop-a", "lemma-key", "prop-2-5", "theorem-b", "flow", "all")

DEFAULT_TOLERANCES = {
    "geodesibility": 1e-6,
    "reeb": 1e-5,
    "contact_det": 0.1,
    "cross_check": 1e-5,
    "key": 1e-4,
    "div_small": 1e-5,
    "div_large": 1e-3,
    "j_defect_small": 1e-4,
    "j_defect_large": 1e-2,
    "conf_small": 1e-4,
    "conf_large": 1e-3,
    "comparability": 1e-8,
    "commutation": 1e-8,
    "e_invariance": 1e-6,
    "dalpha_invariance": 1e-10,
    "pullback": 1e-5,
    "non_lagrangian": 0.05,
    "classify": 1e-6,
    "dilatation_reject": 1e-3,
}

# Keys scaled by the "loose" tolerance profile (upper bounds only).
_PROFILE_SCALED = (
    "geodesibility",
    "reeb",
    "cross_check",
    "key",
    "div_small",
    "j_defect_small",
    "conf_small",
    "commutation",
    "e_invariance",
    "dalpha_invariance",
    "pullback",
)


def resolve_tolerances(overrides=None, profile: str = "default") -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if profile == "loose":
        for k in _PROFILE_SCALED:
            tol[k] *= 10.0
    elif profile != "default":
        raise SpecFormatError(f"unknown tolerance profile {profile!r}")
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise SpecFormatError(f"unknown tolerance key {k!r}")
        if not v > 0:
            raise SpecFormatError("tolerances must be positive")
        tol[k] = float(v)
    return tol


@dataclass(frozen=True)
class CheckRecord:
    """One named observation compared against a threshold."""

    name: str
    value: float
    threshold: float
    comparator: str
    expected_pass: bool = True

    @property
    def observed_pass(self) -> bool:
        if self.comparator == "<=":
            return self.value <= self.threshold
        if self.comparator == ">=":
            return self.value >= self.threshold
        if self.comparator == "<":
            return self.value < self.threshold
        if self.comparator == "==":
            return self.value == self.threshold
        raise ValueError(f"unknown comparator {self.comparator!r}")

    @property
    def passed(self) -> bool:
        return self.observed_pass == self.expected_pass

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "threshold": float(self.threshold),
            "comparator": self.comparator,
            "expected_pass": bool(self.expected_pass),
            "observed_pass": bool(self.observed_pass),
            "passed": bool(self.passed),
        }


@dataclass
class SuiteConfig:
    """Configuration of one verification run."""

    suite: str
    fixture: str | None = None
    spec_path: str | None = None
    samples: int = DEFAULT_SAMPLES
    flow_samples: int = DEFAULT_FLOW_SAMPLES
    seed: int = DEFAULT_SEED
    tolerances: dict = dc_field(default_factory=dict)
    profile: str = "default"
    out: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise SpecFormatError(f"unknown suite {self.suite!r}")
        if self.samples < 1 or self.flow_samples < 1:
            raise SpecFormatError("sample counts must be at least 1")


class _Workspace:
    """Per-run cache so repeated suites reuse scans and classifications."""

    def __init__(self, samples, seed, tol):
        self.samples = samples
        self.seed = seed
        self.tol = tol
        self._scans = {}
        self._classes = {}
        self._dil = {}

    def scan(self, name, F):
        if name not in self._scans:
            self._scans[name] = geo.defect_scan(F, self.samples, self.seed)
        return self._scans[name]

    def map_class(self, name, F):
        if name not in self._classes:
            self._classes[name] = fib.classify_map(F, self.samples, self.tol["classify"])
        return self._classes[name]

    def dilatation(self, name, F):
        if name not in self._dil:
            self._dil[name] = fib.max_dilatation_scan(F, self.samples)
        return self._dil[name]


def classify_field(scan: geo.DefectScan, tol: dict) -> str:
    """Field-side verdict from the defect scan maxima."""
    div_ok = float(np.max(np.abs(scan.array("div_x")))) <= tol["div_small"]
    conf_ok = (
        max(scan.max("conf3"), scan.max("conf4"), scan.max("conf5")) <= tol["conf_small"]
    )
    if div_ok and conf_ok:
        return "hopf"
    if div_ok:
        return "volume-preserving"
    if conf_ok:
        return "conformal"
    return "generic"


_MAP_TO_FIELD = {
    "constant": "hopf",
    "i-holomorphic": "volume-preserving",
    "i-antiholomorphic": "conformal",
    "generic": "generic",
}

_SIGMA_SWAP = {
    "constant": "constant",
    "i-holomorphic": "i-antiholomorphic",
    "i-antiholomorphic": "i-holomorphic",
    "generic": "generic",
}


def _resolve_map(config: SuiteConfig):
    if config.spec_path is not None:
        F = fib.parse_fibration_spec(config.spec_path)
        name = F.name or Path(config.spec_path).stem
        return name, F
    name = config.fixture or "HOPF"
    if name not in fib.FIXTURES:
        raise SpecFormatError(f"unknown fixture {name!r}")
    return name, fib.FIXTURES[name]


def classify_fibration(source, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                       tolerances: dict | None = None, workspace: _Workspace | None = None) -> dict:
    """Classify a map and the field it induces, cross-checking the verdicts.

    The map must pass the sampled dilatation bound; otherwise it is rejected
    with the diagnostic value and no field scan is attempted.  For accepted
    maps the map verdict, the field verdict, their agreement, and the
    chart-conjugation swap are all recorded.
    """
    tol = resolve_tolerances(tolerances)
    F = fib.parse_fibration_spec(source) if not isinstance(source, fib.FibrationMap) else source
    name = F.name or "spec"
    ws = workspace or _Workspace(samples, seed, tol)
    checks = []
    max_dil = ws.dilatation(name, F)
    valid = max_dil < 1.0
    checks.append(CheckRecord("dilatation-bound", max_dil, 1.0, "<"))
    result = {
        "target": name,
        "rejected": not valid,
        "max_dilatation": max_dil,
        "map_class": None,
        "field_class": None,
        "sigma_class": None,
        "provenance": {
            "conventions_sha256": conventions_hash(),
            "seed": seed,
            "samples": samples,
        },
    }
    if not valid:
        result["checks"] = [c.as_dict() for c in checks]
        result["overall_pass"] = False
        return result
    mc = ws.map_class(name, F)
    scan = ws.scan(name, F)
    fc = classify_field(scan, tol)
    agreement = 0.0 if _MAP_TO_FIELD[mc.verdict] == fc else 1.0
    checks.append(CheckRecord("verdict-agreement", agreement, 0.0, "<="))
    sigma = fib.sigma_conjugate(F)
    mc_sigma = fib.classify_map(sigma, samples, tol["classify"])
    swap_ok = 0.0 if mc_sigma.verdict == _SIGMA_SWAP[mc.verdict] else 1.0
    checks.append(CheckRecord("sigma-swap", swap_ok, 0.0, "<="))
    result["map_class"] = mc.as_dict()
    result["field_class"] = fc
    result["sigma_class"] = mc_sigma.as_dict()
    result["checks"] = [c.as_dict() for c in checks]
    result["overall_pass"] = all(c.passed for c in checks)
    return result


def _prop1_checks(scan, tol):
    return [
        CheckRecord("geodesibility-max", scan.max("nabla_xx"), tol["geodesibility"], "<="),
        CheckRecord("lambda-residual-max", scan.max("lambda_residual"), 0.0, "<="),
        CheckRecord("reeb-max", scan.max("reeb_residual"), tol["reeb"], "<="),
        CheckRecord("contact-det-min", scan.min("contact_det"), tol["contact_det"], ">="),
        CheckRecord("dlambda-cross-check-max", scan.max("cross_check"), tol["cross_check"], "<="),
    ]


def _lemma_key_checks(scan, tol):
    return [CheckRecord("key-residual-max", scan.max("key_residual"), tol["key"], "<=")]


def _prop_a_checks(scan, mc, tol):
    positive = mc.verdict in ("constant", "i-holomorphic")
    div_max = float(np.max(np.abs(scan.array("div_x"))))
    jdef_max = scan.max("j_defect")
    checks = [
        CheckRecord("div-small", div_max, tol["div_small"], "<=", expected_pass=positive),
        CheckRecord("j-defect-small", jdef_max, tol["j_defect_small"], "<=", expected_pass=positive),
    ]
    if not positive:
        joint = np.minimum(
            np.abs(scan.array("div_x")) / tol["div_large"],
            scan.array("j_defect") / tol["j_defect_large"],
        )
        checks.append(CheckRecord("joint-defect-witness", float(np.max(joint)), 1.0, ">="))
    return checks


def _prop25_checks(scan, mc, tol):
    positive = mc.verdict in ("constant", "i-antiholomorphic")
    checks = [
        CheckRecord("conf3-small", scan.max("conf3"), tol["conf_small"], "<=", expected_pass=positive),
        CheckRecord("conf4-small", scan.max("conf4"), tol["conf_small"], "<=", expected_pass=positive),
        CheckRecord("conf5-small", scan.max("conf5"), tol["conf_small"], "<=", expected_pass=positive),
    ]
    if not positive:
        joint = np.minimum(
            np.minimum(scan.array("conf3"), scan.array("conf4")), scan.array("conf5")
        ) / tol["conf_large"]
        checks.append(CheckRecord("joint-conf-witness", float(np.max(joint)), 1.0, ">="))
    worst = 0.0
    arrays = [scan.array("conf3"), scan.array("conf4"), scan.array("conf5")]
    for ai in range(3):
        for bi in range(3):
            if ai == bi:
                continue
            worst = max(
                worst,
                float(np.max(arrays[ai] - 5.0 * arrays[bi] - tol["comparability"])),
            )
    checks.append(CheckRecord("conf-comparability", worst, 0.0, "<="))
    return checks


def _flow_intrinsic_checks(tol, count, seed):
    rng = np.random.default_rng(seed)
    worst = {"J": 0.0, "JJ": 0.0}
    worst_dalpha = 0.0
    mismatches = 0
    witness_count = max(1, count // 2)
    for k in range(count):
        p = qnormalize(rng.normal(size=4))
        v = rng.normal(size=4)
        v = v - np.dot(v, p) * p
        v = v / np.linalg.norm(v)
        q = fl.SMPoint(p, v)
        xi = _random_ker(rng, q)
        eta = _random_ker(rng, q)
        t = rng.uniform(0.0, 2.0 * np.pi)
        for which in ("J", "JJ"):
            worst[which] = max(worst[which], fl.commutation_defect(q, xi, t, which))
        before = fl.dalpha(q, xi, eta)
        after = fl.dalpha(
            fl.geodesic_flow(q, t),
            fl.dflow_ker_alpha(q, xi, t),
            fl.dflow_ker_alpha(q, eta, t),
        )
        worst_dalpha = max(worst_dalpha, abs(after - before))
        if k < witness_count:
            wit = fl.chirality_witness(q)
            if wit.i_action != (1, -1) or wit.jj_action != (-1, -1):
                mismatches += 1
    return [
        CheckRecord("commutation-J-max", worst["J"], tol["commutation"], "<="),
        CheckRecord("commutation-JJ-max", worst["JJ"], tol["commutation"], "<="),
        CheckRecord("dalpha-invariance-max", worst_dalpha, tol["dalpha_invariance"], "<="),
        CheckRecord("chirality-table-mismatches", float(mismatches), 0.0, "<="),
    ]


def _random_ker(rng, q):
    out = []
    for _ in range(2):
        w = rng.normal(size=4)
        w = w - np.dot(w, q.p) * q.p - np.dot(w, q.v) * q.v
        out.append(w)
    return fl.KerAlphaVector(out[0], out[1])


def _flow_fixture_checks(F, scan, tol, count, seed):
    rng = np.random.default_rng(seed + 1)
    n = len(scan)
    take = min(count, n)
    idx = rng.choice(n, size=take, replace=False)
    worst_e = 0.0
    worst_pull = 0.0
    for i in idx:
        p = scan.array("p")[i]
        u1 = scan.array("u1")[i]
        u2 = scan.array("u2")[i]
        q, xi1 = fl.push_forward(F, p, u1, seed=scan.array("a")[i])
        _, xi2 = fl.push_forward(F, p, u2, seed=scan.array("a")[i])
        t = rng.uniform(0.0, 2.0 * np.pi)
        moved = fl.geodesic_flow(q, t)
        flowed = fl.dflow_ker_alpha(q, xi1, t)
        worst_e = max(
            worst_e, fl.E_membership_defect(F, moved.p, flowed, seed=scan.array("a")[i])
        )
        pull = abs(fl.dalpha(q, xi1, xi2) - scan.array("dlambda_numeric")[i])
        worst_pull = max(worst_pull, pull)
    non_lag = float(np.min(np.abs(scan.array("dlambda_frame"))))
    return [
        CheckRecord("e-invariance-max", worst_e, tol["e_invariance"], "<="),
        CheckRecord("pullback-max", worst_pull, tol["pullback"], "<="),
        CheckRecord("non-lagrangian-min", non_lag, tol["non_lagrangian"], ">="),
    ]


def _theorem_b_checks(ws, tol, names, samples, seed):
    checks = []
    hopf_fields = []
    for name in names:
        F = fib.FIXTURES[name]
        res = classify_fibration(F, samples, seed, dict(tol), workspace=ws)
        if name == "FULLANTI":
            checks.append(
                CheckRecord(
                    f"{name}/dilatation-bound", res["max_dilatation"], 1.0, "<", expected_pass=False
                )
            )
            checks.append(
                CheckRecord(
                    f"{name}/dilatation-witness",
                    res["max_dilatation"],
                    1.0 - tol["dilatation_reject"],
                    ">=",
                )
            )
            continue
        for c in res["checks"]:
            checks.append(
                CheckRecord(
                    f"{name}/{c['name']}",
                    c["value"],
                    c["threshold"],
                    c["comparator"],
                    c["expected_pass"],
                )
            )
        if res["field_class"] == "hopf":
            hopf_fields.append(name)
    if set(names) >= set(fib.VALID_FIXTURES):
        unique = 0.0 if hopf_fields == ["HOPF"] else 1.0
        checks.append(CheckRecord("unique-hopf", unique, 0.0, "<="))
    return checks


def run_verification_suite(config: SuiteConfig) -> dict:
    """Run one suite (or all of them) and return the structured report.

    The report is deterministic for a fixed (suite, target, samples, seed,
    tolerances) configuration; when config.out is set the JSON rendering is
    also written there.
    """
    tol = resolve_tolerances(config.tolerances, config.profile)
    ws = _Workspace(config.samples, config.seed, tol)
    checks = []
    details = {}

    if config.suite == "all":
        fixture_names = list(fib.VALID_FIXTURES)
        per_fixture_suites = ("prop-1", "lemma-key", "prop-a", "prop-2-5")
    else:
        per_fixture_suites = (config.suite,)
        if config.fixture is None and config.spec_path is None and config.suite in (
            "prop-1",
            "lemma-key",
            "prop-a",
            "prop-2-5",
        ):
            fixture_names = list(fib.VALID_FIXTURES)
        else:
            fixture_names = None

    def add(prefix, rows):
        for c in rows:
            checks.append(
                CheckRecord(
                    f"{prefix}/{c.name}" if prefix else c.name,
                    c.value,
                    c.threshold,
                    c.comparator,
                    c.expected_pass,
                )
            )

    def guarded(prefix, thunk):
        # a module error becomes a failing check; the suite keeps going
        try:
            add(prefix, thunk())
        except GCFlowError:
            checks.append(CheckRecord(f"{prefix}/error", float("inf"), 0.0, "<="))

    scan_suites = {"prop-1": _prop1_checks, "lemma-key": _lemma_key_checks}
    verdict_suites = {"prop-a": _prop_a_checks, "prop-2-5": _prop25_checks}

    if config.suite in ("prop-1", "lemma-key", "prop-a", "prop-2-5", "all"):
        if fixture_names is None:
            name, F = _resolve_map(config)
            targets = [(name, F)]
        else:
            targets = [(n, fib.FIXTURES[n]) for n in fixture_names]
        for name, F in targets:
            try:
                scan = ws.scan(name, F)
            except GCFlowError:
                checks.append(CheckRecord(f"{name}/scan-error", float("inf"), 0.0, "<="))
                continue
            details.setdefault(name, {})["field_class"] = classify_field(scan, tol)
            for suite in per_fixture_suites:
                if suite in scan_suites:
                    guarded(f"{name}/{suite}", lambda s=suite, sc=scan: scan_suites[s](sc, tol))
                elif suite in verdict_suites:
                    mc = ws.map_class(name, F)
                    details[name]["map_class"] = mc.as_dict()
                    guarded(
                        f"{name}/{suite}",
                        lambda s=suite, sc=scan, m=mc: verdict_suites[s](sc, m, tol),
                    )

    if config.suite in ("theorem-b", "all"):
        names = list(fib.FIXTURES) if config.fixture is None else [config.fixture]
        guarded(
            "theorem-b",
            lambda: _theorem_b_checks(ws, tol, names, config.samples, config.seed),
        )

    if config.suite in ("flow", "all"):
        guarded("flow", lambda: _flow_intrinsic_checks(tol, config.flow_samples, config.seed))
        flow_fixtures = (
            [config.fixture]
            if (config.fixture and config.suite == "flow")
            else list(fib.VALID_FIXTURES)
        )
        for name in flow_fixtures:
            F = fib.FIXTURES[name]
            guarded(
                f"flow/{name}",
                lambda fx=F, nm=name: _flow_fixture_checks(
                    fx, ws.scan(nm, fx), tol, 25, config.seed
                ),
            )

    report = {
        "suite": config.suite,
        "target": config.fixture or config.spec_path or "fixtures",
        "samples": config.samples,
        "flow_samples": config.flow_samples,
        "seed": config.seed,
        "tolerances": {k: float(v) for k, v in sorted(tol.items())},
        "provenance": {
            "conventions_sha256": conventions_hash(),
            "seed": config.seed,
            "samples": config.samples,
        },
        "details": details,
        "checks": [c.as_dict() for c in checks],
        "overall_pass": all(c.passed for c in checks),
    }
    if config.out:
        write_report(report, config.out)
    return report


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, path) -> None:
    Path(path).write_text(render_report(report))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_samples(F, grid: int, what: str, out, seed: int = DEFAULT_SEED) -> int:
    """Write a deterministic CSV of per-point data; returns the row count.

    what = "field": base point, field value, and the three headline defects;
    "graph": the two plane factors of each sampled fibre; "defects": the full
    defect report per point.  Floats carry 17 significant digits and a status
    column flags per-row failures.
    """
    if grid < 1:
        raise SpecFormatError("grid must be at least 1")
    F = fib.parse_fibration_spec(F) if not isinstance(F, fib.FibrationMap) else F
    gen = fib.fibre_samples(F, grid, seed)
    rows = []
    if what == "graph":
        header = ["m1", "m2", "m3", "n1", "n2", "n3", "status"]
        first, second = gen["first"], gen["second"]
        for i in range(grid):
            rows.append(
                [_fmt(v) for v in (*first[i, 1:], *second[i, 1:])] + ["ok"]
            )
    elif what in ("field", "defects"):
        if what == "field":
            header = [
                "p0", "p1", "p2", "p3",
                "X0", "X1", "X2", "X3",
                "divX", "J_defect", "conf4", "status",
            ]
            keys = ("div_x", "j_defect", "conf4")
        else:
            header = ["p0", "p1", "p2", "p3", *geo.DefectReport.FIELDS, "status"]
            keys = geo.DefectReport.FIELDS

        def row_from(p, x, values, status):
            cells = [_fmt(v) for v in p]
            if what == "field":
                cells += [_fmt(v) for v in x]
            cells += [_fmt(v) for v in values]
            return cells + [status]

        try:
            scan = geo.defect_scan(F, grid, seed)
        except GCFlowError:
            scan = None
        if scan is not None:
            p = scan.array("p")
            x = scan.array("x")
            for i in range(grid):
                vals = [scan.array(k)[i] for k in keys]
                rows.append(row_from(p[i], x[i], vals, "ok"))
        else:
            # flag failures row by row so one bad point cannot sink the table
            for i in range(grid):
                pi = gen["p"][i]
                try:
                    rep = geo.defect_report(F, pi, seed=gen["m"][i])
                    xi = fib.vector_field(F, pi, seed=gen["m"][i]).vec
                    vals = [rep.as_dict()[k] for k in keys]
                    rows.append(row_from(pi, xi, vals, "ok"))
                except GCFlowError as exc:
                    nan = float("nan")
                    rows.append(
                        row_from(pi, [nan] * 4, [nan] * len(keys), f"error:{type(exc).__name__}")
                    )
    else:
        raise SpecFormatError(f"unknown export kind {what!r}")
    text = ",".join(header) + "\n" + "\n".join(",".join(r) for r in rows) + "\n"
    Path(out).write_text(text)
    return len(rows)
