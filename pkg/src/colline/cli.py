"""Command-line front end: load maps, run classification or individual
checks, emit JSON reports and certificates, revalidate stored reports.

Exit codes: 0 = a verdict was produced (any verdict), 1 = usage or parse
error, 2 = internal invariant violation (a produced certificate failed its
own re-validation, or a stored report no longer re-checks).

Reports are deterministic for fixed argv and inputs except for the
``wall_time_ms`` field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

from . import __version__
from .dsl import parse_map_file
from .engine import (
    Certificate,
    Classification,
    additivity_certificate,
    classify_map,
    homogeneity_certificate,
    phi_consistency,
    shift_reduce,
)
from .errors import CollineError, MapParseError, ViolationError
from .field import Vector, format_vector, parse_scalar, parse_vector
from .predicates import (
    CheckOutcome,
    ProbeConfig,
    Witness,
    check_additivity,
    find_independence_witness,
    check_betweenness,
    check_homogeneity,
    check_line_image,
    check_line_injectivity,
    check_parallelism_preservation,
    check_ratio_preservation,
    check_scalar_monotone,
    check_scalar_multiplicative,
    check_zero_fixed,
    revalidate_witness,
)
from .zoo import MapHandle, from_source, make_dsl, parse_builtin

_CHECKS = {
    "homogeneity": lambda f, cfg: check_homogeneity(f, cfg),
    "additivity": lambda f, cfg: check_additivity(f, cfg),
    "zero": lambda f, cfg: check_zero_fixed(f),
    "line-image": lambda f, cfg: check_line_image(f, cfg),
    "line-injectivity": lambda f, cfg: check_line_injectivity(f, cfg),
    "ratio": lambda f, cfg: check_ratio_preservation(f, cfg),
    "parallelism": lambda f, cfg: check_parallelism_preservation(f, cfg),
    "betweenness-cor43": lambda f, cfg: check_betweenness(f, cfg, "cor43"),
    "betweenness-prop44": lambda f, cfg: check_betweenness(f, cfg, "prop44"),
    "scalar-mult": lambda f, cfg: check_scalar_multiplicative(f, cfg),
    "scalar-monotone": lambda f, cfg: check_scalar_monotone(f, cfg),
    "phi-consistency": lambda f, cfg: phi_consistency(f, cfg)[0],
}

_CERT_KINDS = ("homogeneity", "additivity")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--probes", type=int, default=500, help="probe budget per check")
    common.add_argument(
        "--seed", type=int, default=None,
        help="probe stream seed (default 0; COLLINE_SEED overrides the default)",
    )
    common.add_argument("--range", type=int, default=12, dest="range_",
                        help="bound on sampled numerators/denominators")
    common.add_argument("--params-per-line", type=int, default=5)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--builtin", help="builtin map spec, e.g. lemma23:m=2,n=2,e0=0,d0=(0,1)")
    source.add_argument("--map", dest="map_name", help="select one map from a multi-map file")

    def add_inputs(p):
        p.add_argument("inputs", nargs="*", help=".map files")

    parser = argparse.ArgumentParser(
        prog="colline",
        description="exact-rational verification laboratory for linear/affine structure of vector maps",
    )
    parser.add_argument("--revalidate", metavar="PATH",
                        help="re-check all witnesses and certificates stored in a report")
    sub = parser.add_subparsers(dest="command")

    p_classify = sub.add_parser("classify", parents=[common, source],
                                help="run the full classification pipeline")
    add_inputs(p_classify)
    p_classify.add_argument("--no-symbolic", action="store_true",
                            help="disable the exact structural fast path (test flag)")

    p_check = sub.add_parser("check", parents=[common, source], help="run one named check")
    p_check.add_argument("name", choices=sorted(_CHECKS), metavar="name",
                         help=f"one of: {', '.join(sorted(_CHECKS))}")
    add_inputs(p_check)

    p_certify = sub.add_parser("certify", parents=[common, source],
                               help="build one line-constellation certificate")
    p_certify.add_argument("kind", choices=_CERT_KINDS)
    add_inputs(p_certify)
    p_certify.add_argument("--a", dest="point_a", help="vector, e.g. (1, 0)")
    p_certify.add_argument("--b", dest="point_b", help="vector, e.g. (0, 1)")
    p_certify.add_argument("--r", dest="scale_r", default="2", help="scalar, e.g. 3 or 1/2")

    p_zoo = sub.add_parser("zoo", parents=[common, source],
                           help="describe a builtin map and sample a few evaluations")
    add_inputs(p_zoo)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("COLLINE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CollineError(f"COLLINE_SEED must be an integer, got {env!r}") from exc
    return 0


def _load_maps(args) -> list[MapHandle]:
    handles: list[MapHandle] = []
    if args.builtin:
        handles.append(parse_builtin(args.builtin))
    for path in args.inputs:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            specs = parse_map_file(text)
        except MapParseError as exc:
            raise CollineError(f"{path}:{exc.line}:{exc.col}: {exc.message}") from None
        handles.extend(make_dsl(spec) for spec in specs)
    if args.map_name is not None:
        handles = [h for h in handles if h.name == args.map_name]
        if not handles:
            raise CollineError(f"no map named {args.map_name!r} in the given inputs")
    if not handles:
        raise CollineError("no map given: pass a .map file or --builtin SPEC")
    return handles


def _config_echo(args, cfg: ProbeConfig) -> dict:
    echo = {
        "command": args.command,
        "probes": cfg.count,
        "seed": cfg.seed,
        "range": cfg.coordinate_range,
        "params_per_line": cfg.params_per_line,
        "format": args.format,
        "inputs": list(args.inputs),
        "builtin": args.builtin,
    }
    if args.command == "check":
        echo["check"] = args.name
    if args.command == "certify":
        echo["certify"] = args.kind
        echo["a"] = args.point_a
        echo["b"] = args.point_b
        echo["r"] = args.scale_r
    if args.command == "classify":
        echo["symbolic"] = not args.no_symbolic
    return echo


def _report_for_map(handle: MapHandle, args, cfg: ProbeConfig) -> dict:
    start = time.perf_counter()
    outcomes: list[CheckOutcome] = []
    certificates: list[Certificate] = []
    classification: Optional[Classification] = None
    extra: dict = {}

    if args.command == "classify":
        classification = classify_map(handle, cfg, use_symbolic=not args.no_symbolic)
        outcomes = list(classification.outcomes)
        certificates = list(classification.certificates)
    elif args.command == "check":
        outcomes = [_CHECKS[args.name](handle, cfg)]
    elif args.command == "certify":
        a = parse_vector(args.point_a) if args.point_a else Vector.basis(handle.m, 0)
        b = (
            parse_vector(args.point_b)
            if args.point_b
            else Vector.basis(handle.m, min(1, handle.m - 1))
        )
        try:
            if args.kind == "homogeneity":
                certificates = [homogeneity_certificate(handle, a, b, parse_scalar(args.scale_r))]
            else:
                ind = find_independence_witness(handle, cfg)
                certificates = [additivity_certificate(handle, a, b, ind)]
        except ViolationError as exc:
            outcomes = [
                CheckOutcome(f"certificate:{args.kind}", False, 1, exc.witness)
            ]
    elif args.command == "zoo":
        samples = []
        for i in range(handle.m):
            x = Vector.basis(handle.m, i)
            samples.append([format_vector(x), format_vector(handle(x))])
        zero = Vector.zero(handle.m)
        samples.append([format_vector(zero), format_vector(handle(zero))])
        extra["samples"] = samples

    wall_ms = (time.perf_counter() - start) * 1000.0
    report = {
        "tool": "colline",
        "version": __version__,
        "map": {
            "name": handle.name,
            "m": handle.m,
            "n": handle.n,
            "source": handle.source(),
        },
        "config": _config_echo(args, cfg),
        "outcomes": [o.to_json() for o in outcomes],
        "certificates": [c.to_json() for c in certificates],
        "classification": classification.to_json() if classification else None,
        **extra,
        "wall_time_ms": round(wall_ms, 3),
    }

    # paranoia gate: a certificate that does not re-validate is a bug, never a verdict
    scope_map = handle
    if classification is not None and classification.certificate_scope == "reduced":
        scope_map = shift_reduce(handle, classification.affine_base)
    for cert in certificates:
        failures = cert.validate(scope_map)
        if failures:
            raise _InternalInvariantError(
                f"certificate {cert.kind} failed self-validation: {failures[0]}"
            )
    return report


class _InternalInvariantError(Exception):
    pass


def _render_text(report: dict) -> str:
    lines = [
        f"colline {report['version']} — map {report['map']['name']}"
        f" ({report['map']['m']} -> {report['map']['n']})",
    ]
    for outcome in report["outcomes"]:
        mark = "PASS" if outcome["verdict"] == "pass" else "FAIL"
        lines.append(
            f"  [{mark}] {outcome['check']}"
            f" (probes={outcome['probes']}, skipped={outcome['skipped']})"
        )
        if outcome["witness"]:
            lines.append(f"         witness: {json.dumps(outcome['witness']['inputs'])}")
    for cert in report["certificates"]:
        lines.append(
            f"  certificate {cert['kind']}: {cert['conclusion']}"
            f" ({'holds' if cert['holds'] else 'FAILS'}, {len(cert['lines'])} lines)"
        )
        for cl in cert["lines"]:
            entry = f"    {cl['name']}: line {cl['origin']} dir {cl['direction']}"
            if cl["image_origin"] is not None:
                entry += f" -> line {cl['image_origin']} dir {cl['image_direction']}"
            lines.append(entry)
    cls = report.get("classification")
    if cls:
        lines.append(f"  verdict: {cls['verdict']}")
        for reason in cls["reasons"]:
            lines.append(f"    - {reason}")
    if "samples" in report:
        for x, y in report["samples"]:
            lines.append(f"  {x} -> {y}")
    lines.append(f"  wall time: {report['wall_time_ms']} ms")
    return "\n".join(lines) + "\n"


def _emit(payload, args) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        reports = payload if isinstance(payload, list) else [payload]
        text = "".join(_render_text(r) for r in reports)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _revalidate(path: str) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"colline: cannot load report {path}: {exc}", file=sys.stderr)
        return 1
    reports = payload if isinstance(payload, list) else [payload]
    failures: list[str] = []
    for report in reports:
        try:
            handle = from_source(report["map"]["source"])
        except (KeyError, CollineError, ValueError) as exc:
            failures.append(f"map reconstruction failed: {exc}")
            continue
        cls = report.get("classification") or {}
        reduced = None
        if cls.get("affine_base"):
            reduced = shift_reduce(handle, parse_vector(cls["affine_base"]))

        def target_for(check_name: str):
            if check_name.startswith("reduced:"):
                return reduced, check_name[len("reduced:"):]
            return handle, check_name

        for outcome in report.get("outcomes", []):
            if outcome.get("witness") is None:
                continue
            target, raw = target_for(outcome["check"])
            if target is None:
                failures.append(f"{outcome['check']}: no reduced map recorded")
                continue
            witness = Witness.from_json(raw, outcome["witness"])
            if not revalidate_witness(target, witness):
                failures.append(f"witness for {outcome['check']} no longer violates")
        if cls.get("witness"):
            target = reduced if cls.get("witness_scope") == "reduced" else handle
            witness = Witness.from_json(cls["witness"]["check"], cls["witness"])
            if target is None or not revalidate_witness(target, witness):
                failures.append("classification witness no longer violates")
        cert_target = reduced if cls.get("certificate_scope") == "reduced" else handle
        for cert_json in report.get("certificates", []):
            cert = Certificate.from_json(cert_json)
            cert_failures = cert.validate(cert_target)
            failures.extend(
                f"certificate {cert.kind}: {failure}" for failure in cert_failures
            )
    if failures:
        for failure in failures:
            print(f"colline: revalidation failed: {failure}", file=sys.stderr)
        return 2
    print(f"colline: all stored facts in {path} re-check")
    return 0


def run(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.revalidate:
        return _revalidate(args.revalidate)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = ProbeConfig(
            seed=_resolve_seed(args),
            count=args.probes,
            coordinate_range=args.range_,
            params_per_line=args.params_per_line,
        )
        handles = _load_maps(args)
        reports = [_report_for_map(h, args, cfg) for h in handles]
    except _InternalInvariantError as exc:
        print(f"colline: internal invariant violation: {exc}", file=sys.stderr)
        return 2
    except (CollineError, OSError, ValueError) as exc:
        print(f"colline: {exc}", file=sys.stderr)
        return 1
    _emit(reports[0] if len(reports) == 1 else reports, args)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
