"""Command-line surface.

Exit codes are a stable contract:
  0  success (verdicts are data, not failures)
  1  counterexample over the rationals, or engine/oracle inconsistency
  2  input error (unreadable or malformed widget file)
  3  theorem violation reported by the proof engine
  4  configuration or generation error (includes field-too-small)
"""

from __future__ import annotations

import argparse
import json
import sys

from . import checkers, engine, generators
from .errors import (ConfigError, ContractError, FieldTooSmallError,
                     GenerationError, InputError)
from .fields import RationalField, parse_field_spec
from .model import (VALID, LEGAL_SUBWIDGET_FOUND, THEOREM_VIOLATION,
                    Certificate, certificate_to_json_dict, parse_widget,
                    serialize_widget)

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_INPUT = 2
EXIT_VIOLATION = 3
EXIT_CONFIG = 4

SEARCH_WARN_N = 12

KIND_FLAGS = {
    "valid": "valid_planted",
    "legal-not-full": "legal_not_full",
    "full-not-legal": "full_not_legal",
    "uniform": "uniform_random",
    "valid-rejection": "valid_rejection",
}


def _load_widget(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"error: cannot read {path}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)
    try:
        return parse_widget(text)
    except InputError as e:
        print(f"error: {path}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _print_json(doc) -> None:
    print(json.dumps(doc, sort_keys=True))


def _describe_certificate(cert: Certificate) -> str:
    lines = [f"verdict: {cert.verdict}"]
    if cert.witness_section is not None:
        lines.append("witness section: " + "".join(cert.witness_section))
    if cert.subwidget is not None:
        lines.append("legal subwidget: pairs "
                     + " ".join(str(i) for i in cert.subwidget))
    if cert.trace is not None:
        lines.append(f"trace: {len(cert.trace)} step(s)")
    return "\n".join(lines)


def cmd_check(args) -> int:
    w = _load_widget(args.file)
    cert = checkers.is_valid(w)
    if args.json:
        _print_json(certificate_to_json_dict(cert))
    else:
        print(_describe_certificate(cert))
    return EXIT_OK


def cmd_find_subwidget(args) -> int:
    w = _load_widget(args.file)
    if w.n > SEARCH_WARN_N:
        print(f"warning: exponential search over {w.n} pairs "
              f"(2^{w.n} sections per subset)", file=sys.stderr)
    mode = "all" if args.all else "minimal"
    sels = checkers.find_legal_subwidget(w, mode)
    if args.json:
        _print_json({"mode": mode,
                     "legal_subwidgets": [list(s) for s in sels]})
    elif not sels:
        print("no legal subwidget")
    else:
        for s in sels:
            print("legal subwidget: pairs " + " ".join(str(i) for i in s))
    return EXIT_OK


def cmd_prove(args) -> int:
    w = _load_widget(args.file)
    try:
        cert = engine.extract_legal_subwidget(w)
    except FieldTooSmallError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    shown = cert if args.trace else Certificate(
        verdict=cert.verdict, witness_section=cert.witness_section,
        subwidget=cert.subwidget, trace=None)
    if args.json:
        _print_json(certificate_to_json_dict(shown))
    else:
        print(_describe_certificate(shown))
    if cert.verdict == THEOREM_VIOLATION:
        if isinstance(w.field, RationalField):
            print("theorem violation over the rationals: report this "
                  "instance", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


POSTCONDITIONS = {
    "valid_planted": "Valid (legal and full, with a planted legal subwidget)",
    "legal_not_full": "legal and not full",
    "full_not_legal": "full and not legal",
    "uniform_random": "none (uniform sample)",
    "valid_rejection": "Valid (accepted by rejection sampling)",
}


def cmd_gen(args) -> int:
    kind = KIND_FLAGS[args.kind]
    try:
        fld = parse_field_spec(args.field)
        cfg = generators.GenConfig(n=args.n, dim=args.dim, field=fld,
                                   kind=kind, sub_k=args.sub_k,
                                   bound=args.bound, seed=args.seed)
        w = generators.generate(cfg)
    except (ConfigError, GenerationError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    text = serialize_widget(w)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"wrote {args.output}")
        print(f"postcondition asserted: {POSTCONDITIONS[kind]}")
    else:
        sys.stdout.write(text)
        print(f"postcondition asserted: {POSTCONDITIONS[kind]}",
              file=sys.stderr)
    return EXIT_OK


def cmd_fuzz(args) -> int:
    try:
        fld = parse_field_spec(args.field)
        kinds = tuple(KIND_FLAGS[k] for k in args.kinds.split(","))
        cfg = generators.FuzzConfig(n_spec=args.n, dim_spec=args.dim,
                                    field=fld, bound=args.bound,
                                    seed=args.seed, kinds=kinds)
    except (ConfigError, InputError, KeyError) as e:
        print(f"error: bad fuzz configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report = generators.fuzz_theorem(cfg, args.trials)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(report.to_json())
    print(f"trials: {report.trials}  valid: {report.valid_count}  "
          f"theorem held: {report.theorem_holds_count}  "
          f"corollary agreements: {report.corollary_agreements}  "
          f"engine/oracle agreements: {report.engine_oracle_agreements}")
    if report.generation_errors:
        print(f"generation errors: {report.generation_errors}")
    if report.findings:
        print(f"FINDINGS: {len(report.findings)} finite-field divergence(s); "
              f"see report")
    if report.counterexamples:
        print(f"COUNTEREXAMPLES: {len(report.counterexamples)} over the "
              f"rationals; see report")
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def cmd_census(args) -> int:
    try:
        report = generators.census_gf(args.prime, args.n, args.dim,
                                      budget=args.budget)
    except (ConfigError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(json.dumps(report.to_json_dict(), sort_keys=True,
                               indent=2) + "\n")
    print(f"GF({report.prime}) n={report.n} dim={report.dim}: "
          f"total {report.total}, legal {report.legal}, full {report.full}, "
          f"valid {report.valid}, with legal subwidget "
          f"{report.valid_with_legal_subwidget}")
    if report.findings:
        print(f"FINDINGS: {report.theorem_violations} theorem violation(s) "
              f"across {len(report.findings)} class(es); see report")
    if report.engine_oracle_disagreements:
        print(f"engine/oracle disagreements: "
              f"{report.engine_oracle_disagreements}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widgetry",
        description="Exact verification of span conditions on widgets "
                    "(systems of point pairs).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide legal/full/valid with witnesses")
    p.add_argument("file")
    p.add_argument("--json", action="store_true",
                   help="print the certificate as JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("find-subwidget",
                       help="brute-force legal subwidget search")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--minimal", action="store_true",
                   help="stop at the smallest legal subwidget (default)")
    g.add_argument("--all", action="store_true",
                   help="list every legal subwidget")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_find_subwidget)

    p = sub.add_parser("prove",
                       help="run the constructive extraction procedure")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true",
                   help="embed the full step trace in the output")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("gen", help="generate a widget file")
    p.add_argument("--kind", choices=sorted(KIND_FLAGS), default="valid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--sub-k", type=int, default=None,
                   help="planted legal subwidget size (valid kind only)")
    p.add_argument("--field", default="rational",
                   help='"rational" or "gf:P"')
    p.add_argument("--bound", type=int, default=3,
                   help="rational coordinates are drawn from [-bound, bound]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fuzz", help="randomized theorem/corollary testing")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--n", default="2..6",
                   help='pair count or range, e.g. "4" or "2..6"')
    p.add_argument("--dim", default="n..n+2",
                   help='dimension range; may reference n, e.g. "n..n+2"')
    p.add_argument("--field", default="rational")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kinds", default=",".join(sorted(KIND_FLAGS)),
                   help="comma-separated generator kinds to cycle through")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("census",
                       help="exhaustive classification over GF(p)")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--budget", type=int, default=generators.ENUM_BUDGET,
                   help="refuse censuses larger than this many widgets")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_census)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
