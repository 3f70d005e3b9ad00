"""Command-line front end.

Exit codes: 0 all requested verdicts pass; 1 a verdict failed;
2 input error (bad file, schema, expression); 3 degeneracy (wrong growth
vector, pole or singular frame at a requested point).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    Cartan235Error,
    DegenerateFrameError,
    ExpressionSyntaxError,
    GrowthVectorError,
    ModelError,
    OrderError,
    PoleError,
    UnknownVariableError,
    ZeroDenominatorError,
)
from .models import BUILTIN_DOCS, ModelSpec, builtin_model, load_model, parse_rational
from .report import ReportBuilder, render

COMMANDS = ("check", "frame", "invariants", "tangential", "oracle", "cartan", "report")

_INPUT_ERRORS = (ModelError, ExpressionSyntaxError, UnknownVariableError, ZeroDenominatorError, OrderError)
_DEGENERACY_ERRORS = (GrowthVectorError, PoleError, DegenerateFrameError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cartan235",
        description="Exact invariants of (2,3,5) distributions by two independent pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} computation")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--model", help="path to a model JSON document")
        src.add_argument("--builtin", choices=sorted(BUILTIN_DOCS), help="use a bundled model")
        p.add_argument("--point", action="append", default=None,
                       help="override working points: 'q1,q2,q3,q4,q5;u4,u5' (repeatable)")
        p.add_argument("--order", type=int, default=None, help="curve-parameter jet order (default 12)")
        p.add_argument("--tau-order", type=int, default=None, help="transverse jet order (default 5)")
        p.add_argument("--base-degree", type=int, default=None, help="base-point jet degree (default order+2)")
        p.add_argument("--mode", choices=("adapted", "strongly-adapted"), default=None)
        p.add_argument("--output", default=None, help="write the JSON report to this path")
        p.add_argument("--format", choices=("json",), default="json")
        p.add_argument("--timings", action="store_true", help="include wall-clock timings (non-deterministic)")
    return parser


def _parse_point_option(model: ModelSpec, text: str):
    from .models import WorkingPoint

    try:
        qpart, _, upart = text.partition(";")
        qs = [parse_rational(v.strip()) for v in qpart.split(",")]
        us = [parse_rational(v.strip()) for v in upart.split(",")] if upart else [0, 1]
        if len(qs) != 5 or len(us) != 2:
            raise ModelError("point override needs 5 base and 2 fiber rationals")
    except ModelError:
        raise
    except Exception as exc:
        raise ModelError(f"bad --point value {text!r}") from exc
    base = {c: q for c, q in zip(model.coords, qs)}
    return WorkingPoint(base, (us[0], us[1]))


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        model = load_model(args.model) if args.model else builtin_model(args.builtin)
        if args.mode:
            model.mode = args.mode
        if args.point:
            model.points = [_parse_point_option(model, t) for t in args.point]
        overrides = {"t_order": args.order, "tau_order": args.tau_order, "base_degree": args.base_degree}
        builder = ReportBuilder(model, overrides, timings=args.timings)
        doc = getattr(builder, args.command if args.command != "report" else "full_report")()
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except _DEGENERACY_ERRORS as exc:
        message = str(exc)
        try:
            doc = json.loads(message)
            text = render(doc)
            _emit(text, args.output)
        except (json.JSONDecodeError, AttributeError):
            print(f"degeneracy: {message}", file=sys.stderr)
        return 3
    except Cartan235Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(doc)
    _emit(text, args.output)
    return 0 if doc.get("ok", False) else 1


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
