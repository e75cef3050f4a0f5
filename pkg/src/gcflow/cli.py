"""Command line front end: classify maps, run verification suites, export tables.

Exit codes: 0 when every check passed, 1 when any check failed, 2 for
configuration or parse errors.  The default tolerance profile can be set
with the environment variable GCFLOW_TOL_PROFILE ("default" or "loose");
individual --tol-* flags override single thresholds.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import fibration as fib
from .errors import GCFlowError, SpecFormatError
from .suites import (
    DEFAULT_FLOW_SAMPLES,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOLERANCES,
    SUITES,
    SuiteConfig,
    classify_fibration,
    export_samples,
    render_report,
    resolve_tolerances,
    run_verification_suite,
    write_report,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _add_common(p):
    p.add_argument("--fixture", choices=sorted(fib.FIXTURES), help="shipped example map")
    p.add_argument("--spec", help="path to a fibration spec file (JSON)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_tolerance_flags(p):
    for key in sorted(DEFAULT_TOLERANCES):
        flag = "--tol-" + key.replace("_", "-")
        p.add_argument(flag, type=float, dest=f"tol_{key}", default=None, metavar="X")


def _collect_tolerances(args) -> dict:
    out = {}
    for key in DEFAULT_TOLERANCES:
        val = getattr(args, f"tol_{key}", None)
        if val is not None:
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcflow",
        description="Great-circle flow laboratory on the unit 3-sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_classify = sub.add_parser("classify", help="classify a graph map and its field")
    _add_common(p_classify)
    _add_tolerance_flags(p_classify)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", choices=SUITES, default="all")
    p_verify.add_argument("--flow-samples", type=int, default=DEFAULT_FLOW_SAMPLES)
    _add_common(p_verify)
    _add_tolerance_flags(p_verify)

    p_export = sub.add_parser("export", help="export per-point samples as CSV")
    p_export.add_argument("--what", choices=("field", "graph", "defects"), required=True)
    p_export.add_argument("--grid", type=int, default=100)
    _add_common(p_export)
    return parser


def _resolve_source(args):
    if args.spec:
        return fib.parse_fibration_spec(args.spec)
    name = args.fixture or "HOPF"
    return fib.FIXTURES[name]


def _profile() -> str:
    return os.environ.get("GCFLOW_TOL_PROFILE", "default")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "classify":
            F = _resolve_source(args)
            tol = resolve_tolerances(_collect_tolerances(args), _profile())
            result = classify_fibration(F, args.samples, args.seed, tol)
            text = render_report(result)
            if args.out:
                write_report(result, args.out)
            else:
                sys.stdout.write(text)
            if result["rejected"]:
                print(f"REJECTED: sampled max dilatation {result['max_dilatation']:.6f} >= 1")
                return EXIT_FAIL
            print(f"map: {result['map_class']['verdict']}  field: {result['field_class']}")
            return EXIT_PASS if result["overall_pass"] else EXIT_FAIL

        if args.command == "verify":
            config = SuiteConfig(
                suite=args.suite,
                fixture=args.fixture,
                spec_path=args.spec,
                samples=args.samples,
                flow_samples=args.flow_samples,
                seed=args.seed,
                tolerances=_collect_tolerances(args),
                profile=_profile(),
                out=args.out,
            )
            report = run_verification_suite(config)
            if not args.out:
                sys.stdout.write(render_report(report))
            for check in report["checks"]:
                mark = "PASS" if check["passed"] else "FAIL"
                print(f"{mark} {check['name']}: {check['value']:.3e} {check['comparator']} {check['threshold']:.3e}")
            print("overall:", "PASS" if report["overall_pass"] else "FAIL")
            return EXIT_PASS if report["overall_pass"] else EXIT_FAIL

        if args.command == "export":
            F = _resolve_source(args)
            if not args.out:
                print("export requires --out", file=sys.stderr)
                return EXIT_CONFIG
            rows = export_samples(F, args.grid, args.what, args.out, args.seed)
            print(f"wrote {rows} rows to {args.out}")
            return EXIT_PASS
    except SpecFormatError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GCFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
