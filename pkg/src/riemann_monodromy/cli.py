"""Command-line front end.

Exit codes: 0 for an answer (including "not realizable"), 1 when the search
is exhausted or the numerics fail, 2 for malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import serialize as ser
from .continuation import DEFAULT_TOL, IntegrationError, integral_of_p, monodromy_of, plan_loops
from .equation import HypergeometricParams, fuchs_sum, indicial_exponents, satisfies_fuchs, build_equation
from .realize import SearchConfig, realize_riemann, realize_rsl
from .representation import DEFAULT_DIVISOR, classify, verdict_for
from .sl2z import EXACT_TOL, enumerate_family, sl2z_criterion

log = logging.getLogger("riemann_monodromy")

EXIT_OK, EXIT_UNRESOLVED, EXIT_BAD_INPUT = 0, 1, 2


class Unresolved(Exception):
    """The question was well-posed but we could not decide it."""


def _read_input(path: str | None):
    text = sys.stdin.read() if path in (None, "-") else open(path, encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ser.SchemaError(f"input is not JSON: {exc}") from exc


def _int_range(text: str) -> list[int]:
    """``"3"`` or an inclusive range ``"-4:4"``."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":", 1))
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or lo:hi, got {text!r}") from None


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def cmd_classify(args) -> dict:
    rep = ser.dec_rep(_read_input(args.input))
    cls = classify(rep)
    verdict = verdict_for(cls)
    return {"class": cls.tag, "scalar_indices": sorted(cls.scalar_indices),
            "diagonalizable_indices": sorted(cls.indices) if cls.tag == cls.INDECOMPOSABLE else [],
            "realizable": verdict.realizable, "theorem": verdict.theorem.value, "reason": verdict.detail}


def _config(args) -> SearchConfig:
    return SearchConfig(shear_bound=args.shear_bound, tol=args.tol if args.tol is not None else SearchConfig.tol)


def _witness_doc(w) -> dict:
    doc = ser.enc_witness(w)
    if w.refusal is None and not w.found:
        raise Unresolved(doc)
    return doc


def cmd_realize(args) -> dict:
    rep = ser.dec_rep(_read_input(args.input))
    return _witness_doc(realize_riemann(rep, _config(args)))


def cmd_rsl(args) -> dict:
    rep = ser.dec_rep(_read_input(args.input))
    try:
        w = realize_rsl(rep, _config(args))
    except ValueError as exc:
        raise ser.SchemaError(str(exc)) from exc
    return _witness_doc(w)


def _dump_paths(path: str, plan, record: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lp in plan.loops:
            pts = [z for piece in lp.pieces() for z in piece.sample()]
            fh.write(json.dumps({"kind": "polyline", "loop": lp.index + 1,
                                 "points": [ser.enc_complex(z) for z in pts]}, sort_keys=True) + "\n")
        for key in sorted(record, key=str):
            label = key + 1 if isinstance(key, int) else key
            fh.write(json.dumps({"kind": "steps", "loop": label,
                                 "z": [ser.enc_complex(z) for z in record[key]]}, sort_keys=True) + "\n")


def cmd_monodromy(args) -> dict:
    eq = ser.dec_equation(_read_input(args.input))
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    plan = plan_loops(eq.divisor)
    record = {} if args.dump_paths else None
    mono = monodromy_of(eq, plan, tol=tol, verify_infinity=args.verify_infinity, record=record)
    if args.dump_paths:
        _dump_paths(args.dump_paths, plan, record)
    doc = ser.enc_monodromy(mono)
    doc["equation"] = ser.enc_equation(eq)
    return doc


def cmd_hyp_check(args) -> dict:
    h = HypergeometricParams(args.alpha, args.beta, args.gamma)
    tol = args.tol if args.tol is not None else EXACT_TOL
    doc = ser.enc_sl2z(sl2z_criterion(h, tol))
    doc["params"] = ser.enc_hyp(h)
    return doc


def cmd_sl2z_family(args) -> dict:
    members = []
    for k in args.k:
        for l in args.l:
            m = enumerate_family(k, l)
            doc = ser.enc_member(m)
            doc["in_sl2z"] = sl2z_criterion(m.params, conjugator=False).in_sl2z
            members.append(doc)
    return {"members": members}


def cmd_fuchs(args) -> dict:
    doc = _read_input(args.input)
    table = ser.dec_exponents(doc["exponents"] if isinstance(doc, dict) else doc)
    divisor = ser.dec_divisor(doc["divisor"]) if isinstance(doc, dict) and "divisor" in doc else DEFAULT_DIVISOR
    out = {"fuchs_sum": ser.enc_complex(fuchs_sum(table)), "satisfies": satisfies_fuchs(table),
           "divisor": ser.enc_divisor(divisor)}
    if out["satisfies"]:
        eq = build_equation(divisor, table)
        out["equation"] = ser.enc_equation(eq)
        out["indicial"] = [[ser.enc_complex(r) for r in indicial_exponents(eq, divisor[i])] for i in range(3)]
    return out


COMMANDS = {
    "classify": cmd_classify,
    "realize": cmd_realize,
    "rsl": cmd_rsl,
    "monodromy": cmd_monodromy,
    "hyp-check": cmd_hyp_check,
    "sl2z-family": cmd_sl2z_family,
    "fuchs": cmd_fuchs,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="tolerance (module default when omitted)")
    common.add_argument("--shear-bound", type=_nonneg_int, default=SearchConfig.shear_bound)
    common.add_argument("--verify-infinity", action="store_true",
                        help="also integrate the loop around infinity in its own chart")
    common.add_argument("--dump-paths", metavar="FILE", help="write continuation paths as JSON lines")
    common.add_argument("--output", metavar="FILE", help="write the result here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="riemann-monodromy",
                                     description="Monodromy and realizability of Riemann equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "classify a representation and state whether it is realizable",
        "realize": "find a Riemann equation realizing a representation",
        "rsl": "find an equation y'' + q y = 0 realizing an SL(2) representation",
        "monodromy": "compute monodromy generators of an equation numerically",
        "fuchs": "check the Fuchs relation for an exponent table",
    }
    for name in ("classify", "realize", "rsl", "monodromy", "fuchs"):
        p = sub.add_parser(name, parents=[common], help=helps[name])
        p.add_argument("input", nargs="?", default="-", help="JSON input file, '-' for stdin")
    p = sub.add_parser("hyp-check", parents=[common], help="SL(2,C) / SL(2,Z) test for hypergeometric parameters")
    p.add_argument("--alpha", type=_complex_arg, required=True)
    p.add_argument("--beta", type=_complex_arg, required=True)
    p.add_argument("--gamma", type=_complex_arg, required=True)
    p = sub.add_parser("sl2z-family", parents=[common], help="hypergeometric equations with SL(2,Z) monodromy")
    p.add_argument("--k", type=_int_range, required=True,
                   help="integer or inclusive range lo:hi (write --k=-4:4 when lo is negative)")
    p.add_argument("--l", type=_int_range, required=True,
                   help="integer or inclusive range lo:hi (write --l=-2:2 when lo is negative)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    code = EXIT_OK
    try:
        doc = COMMANDS[args.command](args)
    except Unresolved as exc:
        doc, code = exc.args[0], EXIT_UNRESOLVED
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except (ser.SchemaError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    text = ser.dumps(doc) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
