"""Command-line front end.

Exit status is 0 on success, 1 for domain or validation errors and 2 for
input that does not parse.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import automaton as am
from . import decide, instruments, regex
from .semiring_core import (ARCTIC, CarrierError, Domain, DomainError, ExprSyntaxError, Kind,
                            SemiringSpec, UnsupportedError, ext, format_number)

EXIT_OK, EXIT_INVALID, EXIT_PARSE = 0, 1, 2

SEMIRINGS = {
    "arctic": SemiringSpec(Kind.ARCTIC, Domain.NONNEG),
    "arctic-real": SemiringSpec(Kind.ARCTIC, Domain.REAL),
    "tropical": SemiringSpec(Kind.TROPICAL, Domain.NONNEG),
}


class ParseFailure(Exception):
    """Input text that could not be parsed, with the file it came from."""


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _load_model(path: str) -> am.Wffa:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return am.from_document(doc)
    except ExprSyntaxError as exc:
        raise ParseFailure(f"{path}: {exc}") from None


def _load_regex(path: str) -> regex.Regex:
    try:
        return regex.parse_regex(_read(path).strip())
    except (regex.RegexSyntaxError, ExprSyntaxError) as exc:
        raise ParseFailure(f"{path}: {exc}") from None


def _load_scenarios(path: str, A: am.Wffa) -> instruments.ScenarioSet:
    try:
        return instruments.parse_scenarios(_read(path), A.alphabet, A.spec)
    except instruments.ScenarioSyntaxError as exc:
        raise ParseFailure(f"{path}: {exc}") from None


def _fmt(v, args) -> str:
    return format_number(v, args.decimal)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def cmd_eval(args, out) -> int:
    A = _load_model(args.model)
    scen = _load_scenarios(args.scenarios, A)

    def one(row):
        return am.behavior(A, row, args.engine)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            values = list(pool.map(one, scen.rows))
    else:
        values = [one(r) for r in scen.rows]
    for label, v in zip(scen.labels, values):
        out.write(f"{label or '<eps>'}\t{_fmt(v, args)}\n")
    return EXIT_OK


def cmd_compile(args, out) -> int:
    R = _load_regex(args.regex)
    out.write(am.dumps(regex.regex_to_wffa(SEMIRINGS[args.semiring], R)))
    return EXIT_OK


def cmd_toregex(args, out) -> int:
    out.write(regex.print_regex(regex.wffa_to_regex(_load_model(args.model))) + "\n")
    return EXIT_OK


def cmd_compose(args, out) -> int:
    models = [_load_model(p) for p in args.models]
    if args.op == "star":
        if len(models) != 1:
            raise ValueError("star takes exactly one model")
        out.write(am.dumps(am.op_star(models[0])))
        return EXIT_OK
    if len(models) < 2:
        raise ValueError(f"{args.op} needs at least two models")
    op = {"sum": am.op_sum, "hadamard": am.op_hadamard, "cauchy": am.op_cauchy}[args.op]
    acc = models[0]
    for B in models[1:]:
        acc = op(acc, B)
    out.write(am.dumps(acc))
    return EXIT_OK


def cmd_lower(args, out) -> int:
    out.write(am.dumps(am.lower_to_monomials(_load_model(args.model))))
    return EXIT_OK


def cmd_negate(args, out) -> int:
    A = _load_model(args.model)
    out.write(am.dumps(am.negate_to_tropical(am.lower_to_monomials(A))))
    return EXIT_OK


def cmd_support(args, out) -> int:
    nfa = decide.support_nfa(_load_model(args.model))
    out.write(f"support: {'empty' if nfa.is_empty() else 'nonempty'}\n")
    out.write(nfa.dump() + "\n")
    return EXIT_OK


def cmd_threshold(args, out) -> int:
    A = _load_model(args.model)
    iv = decide.make_interval(args.lo, args.hi)
    v = decide.threshold_gt(A, args.theta, iv)
    out.write(f"{'yes' if v.answer else 'no'}, sup = {_fmt(v.sup_value, args)}\n")
    out.write(f"reason: {v.reason.value}\n")
    if v.witness is not None:
        out.write(f"witness: {v.witness.render()}\n")
    return EXIT_OK


def _read_params(path: str) -> dict:
    try:
        return json.loads(_read(path), parse_float=str)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def cmd_duration(args, out) -> int:
    p = _read_params(args.params)
    missing = [k for k in ("coupon", "face", "spots") if k not in p]
    if missing:
        raise ValueError(f"parameter file lacks {', '.join(missing)}")
    bond = instruments.build_bond(p["coupon"], p["face"], 0)
    dur = instruments.effective_duration(bond, [str(s) for s in p["spots"]], args.delta)
    out.write(f"duration = {_fmt(dur, args)}\n")
    return EXIT_OK


def cmd_build(args, out) -> int:
    p = _read_params(args.params) if args.params else {}
    name = p.pop("instrument", args.instrument)
    if name not in instruments.BUILDERS:
        raise ValueError(f"unknown instrument {name!r}; choose from {', '.join(instruments.BUILDERS)}")
    out.write(am.dumps(instruments.BUILDERS[name](**p)))
    return EXIT_OK


def _validate_text(path: str, text: str) -> str:
    suffix = Path(path).suffix.lower()
    stripped = text.lstrip()
    if suffix in (".wffa", ".json") or stripped.startswith("{"):
        doc = json.loads(text, parse_float=str) if suffix == ".json" else None
        if doc is not None and doc.get("format") != "wffa":
            return f"ok: parameter file with keys {', '.join(sorted(doc))}"
        A = _load_model(path)
        return (f"ok: automaton over {A.spec.name()}, {A.n_states} states, "
                f"{len(A.transitions)} transitions")
    if suffix in (".wfre", ".re", ".regex"):
        R = _load_regex(path)
        return f"ok: regex of size {regex.regex_size(R)}, valid = {regex.validate(ARCTIC, R)}"
    try:
        scen = instruments.parse_scenarios(text)
    except instruments.ScenarioSyntaxError as exc:
        raise ParseFailure(f"{path}: {exc}") from None
    return f"ok: {len(scen)} scenarios over symbols {', '.join(scen.alphabet) or '(none)'}"


def cmd_validate(args, out) -> int:
    status = EXIT_OK
    for path in args.files:
        try:
            msg = _validate_text(path, _read(path))
        except json.JSONDecodeError as exc:
            msg, code = f"error: {path}: line {exc.lineno} column {exc.colno}: {exc.msg}", EXIT_PARSE
        except ParseFailure as exc:
            msg, code = f"error: {exc}", EXIT_PARSE
        except (ValueError, OSError) as exc:
            msg, code = f"error: {path}: {exc}", EXIT_INVALID
        else:
            code = EXIT_OK
        out.write(f"{path}: {msg}\n" if code == EXIT_OK else msg + "\n")
        status = max(status, code)
    return status


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _number(text: str):
    try:
        return ext(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _fraction(text: str) -> Fraction:
    v = _number(text)
    if not v.is_finite:
        raise argparse.ArgumentTypeError("expected a finite number")
    return v.value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finwffa", description="Weighted finance automata toolkit.")
    ap.add_argument("--decimal", type=int, default=None, metavar="N",
                    help="round printed values to N decimals")
    sub = ap.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("eval", help="evaluate a model on a scenario file")
    p.add_argument("model")
    p.add_argument("scenarios")
    p.add_argument("--engine", choices=("matrix", "brute"), default="matrix")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compile", help="regex file to automaton document")
    p.add_argument("regex")
    p.add_argument("--semiring", choices=sorted(SEMIRINGS), default="arctic")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("toregex", help="automaton document to regex text")
    p.add_argument("model")
    p.set_defaults(fn=cmd_toregex)

    p = sub.add_parser("compose", help="combine models")
    p.add_argument("--op", choices=("sum", "hadamard", "cauchy", "star"), required=True)
    p.add_argument("models", nargs="+")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("lower", help="rewrite weights as guarded affine terms")
    p.add_argument("model")
    p.set_defaults(fn=cmd_lower)

    p = sub.add_parser("negate", help="tropical model of the negated behaviour")
    p.add_argument("model")
    p.set_defaults(fn=cmd_negate)

    p = sub.add_parser("support", help="support emptiness and its symbol automaton")
    p.add_argument("model")
    p.set_defaults(fn=cmd_support)

    p = sub.add_parser("threshold", help="is some scenario strictly above theta")
    p.add_argument("model")
    p.add_argument("--theta", type=_fraction, required=True)
    p.add_argument("--lo", type=_fraction, default=Fraction(0))
    p.add_argument("--hi", type=_number, default=None)
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("duration", help="effective duration from a bond parameter file")
    p.add_argument("params")
    p.add_argument("--delta", type=_fraction, required=True)
    p.set_defaults(fn=cmd_duration)

    p = sub.add_parser("build", help="automaton document for a named instrument")
    p.add_argument("instrument", nargs="?", default=None)
    p.add_argument("--params", default=None, help="JSON file of builder keyword arguments")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("validate", help="check files and report diagnostics")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_validate)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out)
    except ParseFailure as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (DomainError, CarrierError, UnsupportedError, am.AutomatonError, am.PropernessError,
            regex.RegexError, ZeroDivisionError, ValueError, OSError, TypeError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
