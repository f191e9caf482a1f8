"""Command-line entry points.

Exit codes: 0 success, 1 validation failure, 2 usage error (argparse
default), 3 analysis error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import access_sim, cache, ir, movement, service
from .symbolic import ExpressionError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_ANALYSIS = 3


def _parse_params(raw: str | None) -> dict:
    if not raw:
        return {}
    out = {}
    for part in raw.split(","):
        name, eq, value = part.partition("=")
        if not eq:
            raise argparse.ArgumentTypeError(f"expected name=value, got {part!r}")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"parameter {name!r} needs an integer")
    return out


def _parse_threshold(raw: str):
    if raw.lower() in ("inf", "infinite"):
        return math.inf
    try:
        return int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a line count or 'inf', got {raw!r}")


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(doc, out, indent=2, default=str)
        out.write("\n")
    else:
        out.write(service.render_text(doc))


def _error(message: str, fmt: str, out) -> None:
    if fmt == "json":
        json.dump({"error": message}, out)
        out.write("\n")
    else:
        out.write(f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moviz",
        description="Data-movement analysis for dataflow programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a program file and report diagnostics")
    p.add_argument("file")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("movement", help="symbolic movement metrics and heat positions")
    p.add_argument("file")
    p.add_argument("--params", type=_parse_params, default={})
    p.add_argument(
        "--scale", choices=("linear", "mean", "median", "histogram"), default="median"
    )
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("simulate", help="exact access trace and cache analysis")
    p.add_argument("file")
    p.add_argument("--params", type=_parse_params, default={})
    p.add_argument("--line-size", type=int, default=64)
    p.add_argument("--threshold", type=_parse_threshold, default=math.inf)
    p.add_argument("--max-events", type=int, default=access_sim.DEFAULT_EVENT_BUDGET)
    p.add_argument("--export-trace", metavar="PATH")
    p.add_argument("--trace-format", choices=("text", "binary"), default="text")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("serve", help="run the HTTP analysis service")
    p.add_argument("file")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", metavar="DIR", default=None,
                   help="serve a built web UI from this directory")
    return parser


def _load(path: str, fmt: str, out):
    try:
        with open(path) as f:
            doc = f.read()
    except OSError as exc:
        _error(str(exc), fmt, out)
        return None
    try:
        return ir.load_program(doc)
    except ir.ProgramFormatError as exc:
        _error(str(exc), fmt, out)
        return None
    except ir.ValidationError as exc:
        for d in exc.diagnostics:
            _error(f"{d.path}: {d.message}", fmt, out)
        return None


def cmd_validate(args, out) -> int:
    try:
        with open(args.file) as f:
            program = ir.parse_program(f.read())
    except OSError as exc:
        _error(str(exc), args.format, out)
        return EXIT_INVALID
    except ir.ProgramFormatError as exc:
        _error(str(exc), args.format, out)
        return EXIT_INVALID
    diagnostics = ir.validate(program)
    if args.format == "json":
        json.dump(
            {
                "program": program.name,
                "diagnostics": [
                    {"severity": d.severity, "path": d.path, "message": d.message}
                    for d in diagnostics
                ],
            },
            out,
        )
        out.write("\n")
    else:
        for d in diagnostics:
            out.write(f"{d.severity}: {d.path}: {d.message}\n")
        if not diagnostics:
            out.write(f"{program.name}: ok\n")
    failed = any(d.severity == "error" for d in diagnostics)
    return EXIT_INVALID if failed else EXIT_OK


def cmd_movement(args, out) -> int:
    program = _load(args.file, args.format, out)
    if program is None:
        return EXIT_INVALID
    session = service.AnalysisSession(program)
    try:
        session.set_params(args.params)
        report = service.global_report(session, args.scale)
    except (service.SessionError, movement.MetricError, ExpressionError) as exc:
        _error(str(exc), args.format, out)
        return EXIT_ANALYSIS
    _emit(report, args.format, out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    program = _load(args.file, args.format, out)
    if program is None:
        return EXIT_INVALID
    try:
        config = cache.CacheConfig(
            line_size=args.line_size, capacity_threshold=args.threshold
        )
        session = service.AnalysisSession(program, config=config)
        session.set_params(args.params)
        trace = session.trace(args.max_events)
        report = service.local_report(session)
    except (
        service.SessionError,
        access_sim.SimulationError,
        cache.CacheModelError,
        ExpressionError,
    ) as exc:
        _error(str(exc), args.format, out)
        return EXIT_ANALYSIS
    if args.export_trace:
        if args.trace_format == "binary":
            with open(args.export_trace, "wb") as f:
                access_sim.export_binary(trace, f)
        else:
            with open(args.export_trace, "w") as f:
                access_sim.export_text(trace, f)
    _emit(report, args.format, out)
    return EXIT_OK


def cmd_serve(args, out) -> int:
    import uvicorn

    program = _load(args.file, "text", out)
    if program is None:
        return EXIT_INVALID
    port = args.port
    if port is None:
        port = int(os.environ.get("MOVIZ_PORT", "8000"))
    session = service.AnalysisSession(program)
    app = service.create_app(session, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    handler = {
        "validate": cmd_validate,
        "movement": cmd_movement,
        "simulate": cmd_simulate,
        "serve": cmd_serve,
    }[args.command]
    return handler(args, out)


if __name__ == "__main__":
    sys.exit(main())
