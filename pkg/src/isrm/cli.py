"""Command-line interface.

Subcommands: validate, measure, assess, simulate, report. Exit codes:
0 success (and, for assess, all requirements met); 1 at least one
requirement violated; 2 invalid trace; 3 configuration error.
Diagnostics go to stderr; set ISRM_NO_COLOR to disable ANSI color in
tables.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import figures, report as report_mod
from .config import AnalysisConfig, load_analysis_config
from .errors import (
    ConfigError,
    DanglingMode,
    IllegalTransition,
    InvalidConfig,
    IsrmError,
    TraceParseError,
    UnknownMetric,
)
from .requirements import Verdict, assess_all, overall_verdict
from .simulate import SimulationConfig, generate_trace
from .trace import SpanOfInterest, parse_trace, serialize_trace, validate_transitions

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INVALID_TRACE = 2
EXIT_CONFIG_ERROR = 3

log = logging.getLogger("isrm")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isrm",
        description="In-service software dependability measurement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trace=True):
        p.add_argument("--config", type=Path, help="analysis config JSON")
        if trace:
            p.add_argument("--trace", type=Path, required=True, help="trace JSON Lines file")
        p.add_argument("--span-start", type=float, help="override span start (hours)")
        p.add_argument("--span-end", type=float, help="override span end (hours)")
        p.add_argument("--out", type=Path, help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--strict", action="store_true", help="reject unknown trace fields")

    p = sub.add_parser("validate", help="check a trace against the transition model")
    common(p)

    p = sub.add_parser("measure", help="compute the measurement report")
    common(p)

    p = sub.add_parser("assess", help="measure, then assess requirements")
    common(p)

    p = sub.add_parser("simulate", help="generate a trace from a simulation config")
    p.add_argument("--config", type=Path, required=True, help="simulation config JSON")
    p.add_argument("--out", type=Path, help="trace output path (default stdout)")
    p.add_argument("--ground-truth", type=Path, help="write realized parameters here")

    p = sub.add_parser("report", help="render tables/figures from a prior report JSON")
    p.add_argument("report_json", type=Path, help="output of `measure` or `assess`")
    p.add_argument("--out", type=Path, help="write the table here instead of stdout")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--csv", type=Path, help="also write a delimited metrics file")
    p.add_argument("--figures", type=Path, help="also render figures into this directory")

    return parser


def _resolve_span(args, config: AnalysisConfig | None) -> SpanOfInterest:
    start = args.span_start
    end = args.span_end
    if start is not None and end is not None:
        return SpanOfInterest.from_hours(start, end)
    if config is not None and config.span is not None:
        span = config.span
        if start is not None or end is not None:
            return SpanOfInterest.from_hours(
                start if start is not None else span.start.hours,
                end if end is not None else span.end.hours,
                span.label,
            )
        return span
    raise ConfigError("no span: give --span-start/--span-end or a span in the config")


def _load_config(args) -> AnalysisConfig | None:
    if args.config is None:
        return None
    return load_analysis_config(args.config)


def _read_trace(args, config: AnalysisConfig | None):
    span = _resolve_span(args, config)
    strict = args.strict or (config.options.strict_parse if config else True)
    with open(args.trace, "rb") as handle:
        events = parse_trace(handle, span, strict=strict)
    return validate_transitions(events, span), span


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _color_enabled() -> bool:
    return not os.environ.get("ISRM_NO_COLOR") and sys.stdout.isatty()


def _cmd_validate(args) -> int:
    config = _load_config(args)
    trace, span = _read_trace(args, config)
    summary = {
        "valid": True,
        "span": {"start_hours": span.start.hours, "end_hours": span.end.hours},
        "event_count": len(trace.events),
        "intervals": [
            {
                "mode": iv.mode.value,
                "start_hours": iv.start.hours,
                "end_hours": iv.end.hours,
            }
            for iv in trace.intervals
        ],
    }
    if args.format == "table":
        lines = [f"valid trace: {len(trace.events)} events"]
        lines += [
            f"  {iv.mode.value:<10} [{iv.start.hours:.6f}, {iv.end.hours:.6f})"
            for iv in trace.intervals
        ]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(report_mod.canonical_json(summary), args.out)
    return EXIT_OK


def _measure(args):
    config = _load_config(args)
    if config is None:
        config = load_analysis_config({})
    trace, _ = _read_trace(args, config)
    rep, samples = report_mod.assemble_report(trace, config)
    return config, rep, samples


def _cmd_measure(args) -> int:
    _, rep, _ = _measure(args)
    if args.format == "table":
        _emit(report_mod.render_table(rep, color=_color_enabled()), args.out)
    else:
        _emit(report_mod.canonical_json(rep), args.out)
    return EXIT_OK


def _cmd_assess(args) -> int:
    config, rep, samples = _measure(args)
    results = assess_all(rep, samples, list(config.requirements))
    verdict = overall_verdict(results)
    payload = {
        "report": rep,
        "assessments": report_mod.assessments_to_dicts(results),
        "verdict": verdict.value,
    }
    if config.traceability:
        payload["traceability"] = [
            {"id": r.id, "kind": r.kind.value, "text": r.text, "traces_to": list(r.traces_to)}
            for r in config.traceability
        ]
    if args.format == "table":
        _emit(
            report_mod.render_table(
                rep, payload["assessments"], color=_color_enabled()
            ),
            args.out,
        )
    else:
        _emit(report_mod.canonical_json(payload), args.out)
    return EXIT_VIOLATED if verdict is Verdict.VIOLATED else EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfig(f"simulation config not found: {args.config}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"simulation config is not valid JSON: {exc}") from None
    sim_config = SimulationConfig.from_dict(raw)
    events, truth = generate_trace(sim_config)
    _emit(serialize_trace(events), args.out)
    if args.ground_truth is not None:
        args.ground_truth.write_text(
            json.dumps(truth.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        document = json.loads(args.report_json.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"report file not found: {args.report_json}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("report must be a JSON object")
    rep = document.get("report", document)
    if "schema_version" not in rep:
        raise ConfigError("not a measurement report (missing schema_version)")
    assessments = document.get("assessments")

    if args.format == "json":
        _emit(report_mod.canonical_json(document), args.out)
    else:
        _emit(
            report_mod.render_table(rep, assessments, color=_color_enabled()),
            args.out,
        )
    if args.csv is not None:
        report_mod.write_csv(rep, args.csv, assessments)
    if args.figures is not None:
        written = figures.render_figures(rep, args.figures)
        log.info("wrote %d figure(s) to %s", len(written), args.figures)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "measure": _cmd_measure,
    "assess": _cmd_assess,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
}


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, dispatch, and map errors to exit codes."""
    logging.basicConfig(stream=sys.stderr, format="isrm: %(levelname)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (TraceParseError, IllegalTransition, DanglingMode) as exc:
        print(f"isrm: invalid trace: {exc}", file=sys.stderr)
        return EXIT_INVALID_TRACE
    except (ConfigError, InvalidConfig, UnknownMetric) as exc:
        print(f"isrm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except FileNotFoundError as exc:
        print(f"isrm: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except IsrmError as exc:
        print(f"isrm: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
