"""Command-line front end: classify, correspond, check-equiv, translate-rule, eval."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fo
from .alba import NotSahlqvist, run
from .first_order import equiv_on_frames, st_complex, verify_correspondence
from .formula import free_symbols
from .fragment import Rejection, classify_sahlqvist, outline
from .pi2 import UnsupportedRule, reduce_rule, rule_from_json
from .semantics import (
    KripkeModel,
    Valuation,
    enumerate_frames,
    extension,
    frame_valid,
)
from .syntax import (
    ParseError,
    frame_from_json,
    frame_to_json,
    parse_fo,
    parse_formula,
    print_complex,
    print_fo,
    print_formula,
)

OK, REJECTED, INPUT_ERROR, SELF_CHECK_FAILED = 0, 1, 2, 3

COST_NOTE = """\
The self-check enumerates every frame up to --max-size worlds (2^(n*n) frames
of size n: 530 up to 3, 66066 up to 4) and, on each, every valuation of the
free variables; each propositional quantifier multiplies the work by 2^n.
Sizes above 4 are accepted but rarely finish.

exit codes: 0 success, 1 rejected by the fragment or rule checks,
2 input error, 3 self-check failure"""


class InputError(Exception):
    pass


class _Rejected(Exception):
    def __init__(self, payload: dict, text: str):
        super().__init__(text)
        self.payload = payload
        self.text = text


def _read_text(args) -> str:
    if args.file is not None:
        if args.input is not None:
            raise InputError("give the input inline or with --file, not both")
        try:
            return Path(args.file).read_text()
        except OSError as err:
            raise InputError(f"cannot read {args.file}: {err.strerror}") from None
    if args.input is None:
        raise InputError("missing input")
    return args.input


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: malformed JSON: {err}") from None


def _formula(text: str):
    try:
        return parse_formula(text)
    except ParseError as err:
        raise InputError(str(err)) from None


def _rejection(r: Rejection) -> _Rejected:
    return _Rejected(
        {"accepted": False, "reason": r.reason, "subterm": print_formula(r.subterm)},
        f"rejected: {r.reason}\n  at: {print_formula(r.subterm)}",
    )


def _check(args, phi, sentence) -> tuple[dict, list[str], bool]:
    if args.no_verify:
        return {"verified": None}, ["self-check skipped"], True
    res = verify_correspondence(phi, sentence, enumerate_frames(args.max_size))
    if res.equivalent:
        return (
            {"verified": True, "frames_checked": res.frames_checked},
            [f"verified on {res.frames_checked} frames"],
            True,
        )
    witness = frame_to_json(res.witness)
    return (
        {"verified": False, "frames_checked": res.frames_checked, "witness": witness},
        ["self-check FAILED on frame " + json.dumps(witness)],
        False,
    )


# ---------------------------------------------------------------- commands


def cmd_classify(args) -> tuple[dict, list[str], int]:
    phi = _formula(_read_text(args))
    d = classify_sahlqvist(phi)
    if isinstance(d, Rejection):
        raise _rejection(d)
    lines = outline(d)
    return {"accepted": True, "level": d.level, "outline": lines}, lines, OK


def cmd_correspond(args) -> tuple[dict, list[str], int]:
    phi = _formula(_read_text(args))
    try:
        res = run(phi)
    except NotSahlqvist as err:
        raise _rejection(err.rejection) from None
    sentence = st_complex(res.output)
    payload = {
        "formula": print_formula(phi),
        "level": res.level,
        "pure": print_complex(res.output),
        "correspondent": print_fo(sentence),
    }
    lines = [print_fo(sentence)]
    if args.trace:
        payload["trace"] = [s.to_json() for s in res.trace]
        if args.format == "text":
            lines.append(json.dumps(payload["trace"], indent=2))
    check, check_lines, ok = _check(args, phi, sentence)
    payload.update(check)
    return payload, lines + check_lines, OK if ok else SELF_CHECK_FAILED


def cmd_check_equiv(args) -> tuple[dict, list[str], int]:
    try:
        a, b = parse_fo(args.a), parse_fo(args.b)
    except ParseError as err:
        raise InputError(str(err)) from None
    for s in (a, b):
        fi, fp = fo.fo_free(s)
        if fi or fp:
            raise InputError(f"not a sentence: {print_fo(s)} has free variables {sorted(fi | fp)}")
    res = equiv_on_frames(a, b, args.max_size)
    payload = {"equivalent": res.equivalent, "frames_checked": res.frames_checked}
    if res.equivalent:
        return payload, [f"equivalent on all {res.frames_checked} frames"], OK
    payload["witness"] = frame_to_json(res.witness)
    return payload, ["not equivalent; witness frame:", json.dumps(payload["witness"])], OK


def cmd_translate_rule(args) -> tuple[dict, list[str], int]:
    try:
        rule = rule_from_json(_read_json(args.rule))
    except ParseError as err:
        raise InputError(str(err)) from None
    except ValueError as err:
        raise InputError(str(err)) from None
    try:
        red = reduce_rule(rule)
    except UnsupportedRule as err:
        raise _Rejected({"accepted": False, "reason": str(err)}, f"rejected: {err}") from None
    sentence = st_complex(red.output)
    payload = {
        "kind": rule.kind,
        "formula": print_formula(red.formula),
        "route": red.route,
        "pure": print_complex(red.output),
        "correspondent": print_fo(sentence),
        "departures": list(red.departures),
    }
    lines = [print_fo(sentence)]
    lines += [f"note: {d}" for d in red.departures]
    if args.trace:
        payload["trace"] = [s.to_json() for s in red.trace]
        if args.format == "text":
            lines.append(json.dumps(payload["trace"], indent=2))
    check, check_lines, ok = _check(args, red.formula, sentence)
    payload.update(check)
    return payload, lines + check_lines, OK if ok else SELF_CHECK_FAILED


def cmd_eval(args) -> tuple[dict, list[str], int]:
    phi = _formula(args.formula)
    obj = _read_json(args.frame)
    try:
        f = frame_from_json(obj)
        raw = obj.get("valuation")
        if raw is None:
            valid = frame_valid(f, phi)
            return {"valid": valid}, ["valid" if valid else "not valid"], OK
        if not isinstance(raw, dict):
            raise ValueError('"valuation" must map variables to world lists and nominals to worlds')
        props = {k: frozenset(v) for k, v in raw.items() if isinstance(v, list)}
        noms = {k: v for k, v in raw.items() if isinstance(v, str)}
        if len(props) + len(noms) != len(raw):
            raise ValueError('"valuation" values must be world lists or single worlds')
        m = KripkeModel(f, Valuation(props, noms))
    except ValueError as err:
        raise InputError(str(err)) from None
    fp, fn = free_symbols(phi)
    missing = sorted((fp - props.keys()) | (fn - noms.keys()))
    if missing:
        raise InputError(f"no value for {', '.join(missing)}")
    ext = extension(m, phi)
    members = [w for w in f.worlds if w in ext]
    payload = {"extension": members}
    lines = ["true at: " + (", ".join(members) if members else "(no world)")]
    if args.world is not None:
        if args.world not in f.index:
            raise InputError(f"unknown world {args.world!r}")
        payload["holds"] = args.world in ext
        lines.append(f"{args.world}: {'true' if args.world in ext else 'false'}")
    return payload, lines, OK


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sopml",
        description="Sahlqvist correspondence for second-order propositional modal logic.",
        epilog=COST_NOTE,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    sized = argparse.ArgumentParser(add_help=False)
    sized.add_argument("--max-size", type=int, default=3, metavar="N", help="largest frame checked (default 3)")
    checked = argparse.ArgumentParser(add_help=False, parents=[sized])
    checked.add_argument("--trace", action="store_true", help="include the rewrite trace")
    checked.add_argument("--no-verify", action="store_true", help="skip the semantic self-check")
    formula_in = argparse.ArgumentParser(add_help=False)
    formula_in.add_argument("input", nargs="?", help="formula text")
    formula_in.add_argument("--file", help="read the formula from a file")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", parents=[common, formula_in], help="Pi_n-Sahlqvist membership")
    p.set_defaults(run=cmd_classify)
    p = sub.add_parser("correspond", parents=[common, formula_in, checked], help="first-order correspondent",
                       epilog=COST_NOTE, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.set_defaults(run=cmd_correspond)
    p = sub.add_parser("check-equiv", parents=[common, sized], help="compare two FO sentences on small frames")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(run=cmd_check_equiv)
    p = sub.add_parser("translate-rule", parents=[common, checked], help="correspondent of a Pi_2-rule",
                       epilog=COST_NOTE, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("rule", help="rule JSON file, or - for stdin")
    p.set_defaults(run=cmd_translate_rule)
    p = sub.add_parser("eval", parents=[common], help="evaluate a formula on a frame file")
    p.add_argument("formula")
    p.add_argument("frame", help='frame JSON {"worlds", "edges", optional "valuation"}')
    p.add_argument("--world", help="report truth at this world (needs a valuation)")
    p.set_defaults(run=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    if getattr(args, "max_size", 1) < 1:
        print("error: --max-size must be at least 1", file=sys.stderr)
        return INPUT_ERROR
    if getattr(args, "max_size", 0) > 4:
        print(f"warning: --max-size {args.max_size}: frame enumeration grows as 2^(n*n)", file=sys.stderr)
    try:
        payload, lines, code = args.run(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return INPUT_ERROR
    except _Rejected as rej:
        payload, lines, code = rej.payload, [rej.text], REJECTED
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
