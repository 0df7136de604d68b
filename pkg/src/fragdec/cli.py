"""Command-line front end.

Exit codes: 0 definable or success, 1 not definable (or an equation fails),
2 reduced instance emitted, 3 invalid input, 4 guard cap exceeded,
5 file error, 64 bad arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .automata import Dfa, check_alphabet, parse_dfa_text, parse_regex
from .category import check_path_equation, derived_category, idempotents_category, parse_path_equations
from .decide import (ANALYSIS, DEFINABLE, FRAGMENT_NAMES, NOT_DEFINABLE, REDUCED, EvidenceReport,
                     analyze, decide, reduced_language)
from .errors import FragdecError, GuardExceeded
from .logic import (alternation_depth, decompose_D, evaluate, format_formula, letters_to_mod,
                    lift_moduli, mod_to_letters, parse_formula)
from .semigroup import (BUILTIN_IDENTITIES, DEFAULT_MAX_ASSIGNMENTS, DEFAULT_MAX_MONOID,
                        check_identity, parse_identity_file, syntactic_morphism)
from .stability import stability_index

EXIT_OK, EXIT_NO, EXIT_REDUCED = 0, 1, 2
EXIT_INPUT, EXIT_GUARD, EXIT_FILE, EXIT_USAGE = 3, 4, 5, 64

VERDICT_EXIT = {DEFINABLE: EXIT_OK, ANALYSIS: EXIT_OK, NOT_DEFINABLE: EXIT_NO, REDUCED: EXIT_REDUCED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _alphabet(text: str | None):
    if text is None:
        return None
    letters = text.split() if " " in text.strip() else list(text.strip())
    return check_alphabet(letters)


def _language_args(p: argparse.ArgumentParser, batch: bool = False) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--regex", help="regular expression")
    src.add_argument("--dfa", type=Path, help="DFA description file")
    if batch:
        src.add_argument("--batch", type=Path, help="file with one regex per line; NDJSON output")
    p.add_argument("--alphabet", help="letters, e.g. 'ab' or 'a b' (default: letters of the regex)")


def _caps(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-monoid", type=int, default=DEFAULT_MAX_MONOID,
                   help="cap on syntactic monoid size (default %(default)s)")
    p.add_argument("--max-assignments", type=int, default=DEFAULT_MAX_ASSIGNMENTS,
                   help="cap on enumerated assignments (default %(default)s)")


def _format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fragdec",
                     description="Decide first-order fragments with modular predicates for regular languages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="syntactic monoid, stability index and identities")
    _language_args(p, batch=True)
    _format(p)
    _caps(p)

    p = sub.add_parser("decide", help="decide membership in a fragment")
    _language_args(p, batch=True)
    p.add_argument("--fragment", required=True, help="one of: " + ", ".join(FRAGMENT_NAMES))
    p.add_argument("--k", type=int, help="level for indexed fragments")
    p.add_argument("--equations", type=Path, help="path-equation file for pluggable fragments")
    _format(p)
    _caps(p)

    p = sub.add_parser("reduce", help="emit the enriched language L_d (default d = stability index)")
    _language_args(p)
    p.add_argument("--modulus", type=int, help="modulus d (default: stability index)")
    _format(p)
    p.add_argument("--max-monoid", type=int, default=DEFAULT_MAX_MONOID)

    p = sub.add_parser("formula", help="formula utilities")
    fsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, text in (("eval", "evaluate on a word"), ("transform", "rewrite modular predicates"),
                       ("alternation", "count quantifier alternation blocks")):
        q = fsub.add_parser(name, help=text)
        src = q.add_mutually_exclusive_group(required=True)
        src.add_argument("--file", type=Path, help="formula file (prefix syntax)")
        src.add_argument("--formula", help="formula text")
        if name == "eval":
            q.add_argument("--word", required=True, help="word ('' for the empty word)")
        if name == "transform":
            q.add_argument("--op", required=True,
                           choices=("lift", "decompose", "mod-to-letters", "letters-to-mod"))
            q.add_argument("--modulus", type=int)
            q.add_argument("--alphabet")
        if name == "alternation":
            q.add_argument("--two-variable", action="store_true",
                           help="count blocks along branches (two-variable convention)")
        _format(q)

    p = sub.add_parser("check", help="check identities or path equations directly")
    csub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = csub.add_parser("identity", help="check an identity set on a syntactic algebra")
    _language_args(q)
    q.add_argument("--identities", required=True,
                   help="built-in name (" + ", ".join(BUILTIN_IDENTITIES) + ") or identity file")
    q.add_argument("--scope", choices=("monoid", "semigroup", "stable-monoid", "stable-semigroup"),
                   default="monoid")
    _format(q)
    _caps(q)
    q = csub.add_parser("path-equation", help="check path equations on a derived or idempotents' category")
    _language_args(q)
    q.add_argument("--equations", type=Path, required=True)
    q.add_argument("--category", choices=("derived", "idempotents"), default="derived")
    q.add_argument("--modulus", type=int, help="modulus of the derived category (default: stability index)")
    _format(q)
    _caps(q)
    return parser


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _load_language(args) -> Dfa:
    alphabet = _alphabet(args.alphabet)
    if args.regex is not None:
        return parse_regex(args.regex, alphabet)
    dfa = parse_dfa_text(_read(args.dfa))
    if alphabet is not None and tuple(alphabet) != dfa.alphabet:
        raise FragdecError(f"--alphabet {alphabet} disagrees with the DFA alphabet {dfa.alphabet}")
    return dfa


def _emit(out, payload, fmt: str, text: str) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(text + "\n")


def _report_out(out, report: EvidenceReport, fmt: str) -> int:
    if fmt == "json":
        out.write(report.to_json() + "\n")
    else:
        out.write(report.to_text() + "\n")
    return VERDICT_EXIT[report.verdict]


def _run_report(args, lang: Dfa) -> EvidenceReport:
    caps = dict(max_monoid=args.max_monoid, max_assignments=args.max_assignments)
    if args.command == "analyze":
        return analyze(lang, **caps)
    equations = parse_path_equations(_read(args.equations)) if args.equations else None
    return decide(lang, args.fragment, args.k, equations, **caps)


def _batch(args, out) -> int:
    alphabet = _alphabet(args.alphabet)
    status = EXIT_OK
    for lineno, raw in enumerate(_read(args.batch).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = _run_report(args, parse_regex(line, alphabet)).to_dict()
        except FragdecError as e:
            record = {"error": str(e), "kind": type(e).__name__}
            status = EXIT_INPUT
        record = {"line": lineno, "input": line, **record}
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
    return status


def _cmd_reduce(args, out) -> int:
    lang = _load_language(args)
    reduced, s = reduced_language(lang, args.modulus, args.max_monoid)
    d = args.modulus or s
    payload = {"stability_index": s, "modulus": d, "alphabet": list(reduced.alphabet),
               "states": reduced.state_count, "dfa": reduced.to_text()}
    _emit(out, payload, args.format, reduced.to_text().rstrip("\n"))
    return EXIT_REDUCED


def _load_formula(args):
    return parse_formula(_read(args.file) if args.file else args.formula)


def _cmd_formula(args, out) -> int:
    f = _load_formula(args)
    if args.action == "eval":
        word = list(args.word) if "@" not in args.word else args.word.split()
        value = evaluate(f, word)
        _emit(out, {"formula": format_formula(f), "word": args.word, "value": value},
              args.format, "true" if value else "false")
        return EXIT_OK
    if args.action == "alternation":
        depth = alternation_depth(f, two_variable=args.two_variable)
        _emit(out, {"formula": format_formula(f), "alternation_depth": depth}, args.format, str(depth))
        return EXIT_OK
    op = args.op
    if op == "lift":
        results = [lift_moduli(f, args.modulus)]
    elif op == "decompose":
        if args.modulus is None:
            raise UsageError("decompose needs --modulus")
        results = decompose_D(lift_moduli(f, args.modulus), args.modulus)
    elif op == "mod-to-letters":
        if args.modulus is None or args.alphabet is None:
            raise UsageError("mod-to-letters needs --modulus and --alphabet")
        results = [mod_to_letters(lift_moduli(f, args.modulus), args.modulus, _alphabet(args.alphabet))]
    else:
        if args.modulus is None:
            raise UsageError("letters-to-mod needs --modulus")
        results = [letters_to_mod(f, args.modulus)]
    texts = [format_formula(g) for g in results]
    _emit(out, {"op": op, "results": texts}, args.format, "\n".join(texts))
    return EXIT_OK


def _cmd_check(args, out) -> int:
    lang = _load_language(args)
    m = syntactic_morphism(lang, max_elements=args.max_monoid)
    if args.action == "identity":
        name = args.identities
        ids = BUILTIN_IDENTITIES.get(name) or parse_identity_file(_read(Path(name)), Path(name).stem)
        r = stability_index(m)
        scope = {"monoid": None, "semigroup": m.semigroup_part,
                 "stable-monoid": r.stable_monoid, "stable-semigroup": r.stable_semigroup}[args.scope]
        v = check_identity(m, ids, scope, args.max_assignments)
        payload = {"holds": v.holds, "identities": ids.name, "scope": args.scope}
        if not v.holds:
            lhs, rhs = v.equation
            payload["witness"] = {"equation": f"{lhs} = {rhs}",
                                  "assignment": {k: m.describe(x) for k, x in v.assignment.items()},
                                  "lhs": m.describe(v.lhs), "rhs": m.describe(v.rhs)}
        text = "holds" if v.holds else _failure_text(payload["witness"])
        _emit(out, payload, args.format, text)
        return EXIT_OK if v.holds else EXIT_NO

    equations = parse_path_equations(_read(args.equations))
    if args.category == "derived":
        d = args.modulus or stability_index(m).s
        c = derived_category(m, d)
    else:
        d = None
        c = idempotents_category(m, m.semigroup_part)
    payload = {"holds": True, "category": args.category, "modulus": d}
    for eq in equations:
        v = check_path_equation(c, eq, args.max_assignments)
        if not v.holds:
            payload["holds"] = False
            payload["witness"] = {"equation": str(eq),
                                  "objects": {p: c.object_labels[o] for p, o in v.objects.items()},
                                  "assignment": {k: m.describe(x) for k, x in v.edges.items()},
                                  "lhs": m.describe(v.lhs), "rhs": m.describe(v.rhs)}
            break
    text = "holds" if payload["holds"] else _failure_text(payload["witness"])
    _emit(out, payload, args.format, text)
    return EXIT_OK if payload["holds"] else EXIT_NO


def _failure_text(w: dict) -> str:
    lines = ["fails", f"equation: {w['equation']}"]
    if "objects" in w:
        lines.append("objects: " + ", ".join(f"{k}={v}" for k, v in w["objects"].items()))
    lines.append("assignment: " + ", ".join(f"{k}={v}" for k, v in w["assignment"].items()))
    lines.append(f"lhs = {w['lhs']}, rhs = {w['rhs']}")
    return "\n".join(lines)


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("analyze", "decide"):
            if args.batch is not None:
                return _batch(args, out)
            return _report_out(out, _run_report(args, _load_language(args)), args.format)
        if args.command == "reduce":
            return _cmd_reduce(args, out)
        if args.command == "formula":
            return _cmd_formula(args, out)
        return _cmd_check(args, out)
    except UsageError as e:
        parser.print_usage(err)
        err.write(f"{e}\n")
        return EXIT_USAGE
    except GuardExceeded as e:
        err.write(f"error: {e}\n")
        return EXIT_GUARD
    except OSError as e:
        err.write(f"error: {e}\n")
        return EXIT_FILE
    except (FragdecError, ValueError, KeyError) as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
