"""Measurement report assembly and rendering.

The report is a nested dict with a stable JSON schema: field names are
the operation outputs, durations are hours, and undefined statistics
are simply absent. `canonical_json` rounds every float to six decimals
and sorts keys, so identical inputs serialize byte-identically.

Alongside the report, assembly returns the raw per-occurrence samples
(inter-failure gaps, cycle durations, repair times, recovery durations)
that percentile and confidence assessments run on.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from . import measures
from .classification import collect_failures, countable_sets
from .config import AnalysisConfig
from .errors import InsufficientFailures
from .requirements import AssessmentResult, BoundType, Direction
from .trace import (
    Schedule,
    ValidatedTrace,
    downtime,
    in_service_invariant,
    removed_time,
    ticks_to_hours,
    uptime,
)

SCHEMA_VERSION = 1


def _round6(value):
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    return round(value, 6)


def _prune(node):
    """Drop None values and round floats, recursively."""
    if isinstance(node, dict):
        return {k: _prune(v) for k, v in node.items() if v is not None}
    if isinstance(node, (list, tuple)):
        return [_prune(v) for v in node]
    return _round6(node)


def canonical_json(document: dict) -> str:
    return json.dumps(_prune(document), sort_keys=True, indent=2) + "\n"


def _rel_hours(t, span) -> float:
    return ticks_to_hours(t.ticks - span.start.ticks)


def assemble_report(trace: ValidatedTrace, config: AnalysisConfig) -> tuple[dict, dict]:
    """Compute every measurement suite for one trace.

    Returns (report, samples): the serializable report and the raw
    sample lists keyed for bounded assessment (tbsf[n],
    support_cycle_times, times_to_repair, time_between_support,
    downtime_cycle_durations, recovery_durations).
    """
    span = trace.span
    span_hours = span.duration_hours
    failures, revealed = collect_failures(trace, config.triage_rules, list(config.classes))
    sets = countable_sets(failures, list(config.classes), span)
    cycles = measures.downtime_cycles(trace)
    complete = measures.complete_cycles(cycles)
    stats = measures.support_interval_stats(cycles)
    support = measures.supportability_suite(cycles)
    impairments = measures.extract_impairments(trace)
    recovery = measures.recoverability_suite(impairments, span_hours)

    samples: dict[str, list[float]] = {
        "support_cycle_times": support.support_cycle_times,
        "times_to_repair": stats.times_to_repair,
        "time_between_support": stats.time_between_support,
        "downtime_cycle_durations": [c.duration_hours for c in complete],
        "recovery_durations": [
            i.duration_hours
            for i in impairments
            if i.outcome is measures.ImpairmentOutcome.RECOVERED
        ],
    }

    reliability: dict[str, dict] = {}
    run_windows = _run_windows(trace)
    for spec in config.classes:
        fset = sets[spec.id]
        block: dict = {
            "class_name": spec.name,
            "severity_cutoff": spec.severity_cutoff.value if spec.severity_cutoff else None,
            "count": fset.count,
            "failure_times": [_rel_hours(t, span) for t in fset.times],
            "failure_intensity": measures.failure_intensity(fset, span_hours),
        }
        gaps: list[float] = []
        try:
            gaps = measures.time_between_failures(fset)
        except InsufficientFailures:
            pass
        samples[f"tbsf[{spec.id}]"] = gaps
        if gaps:
            gap_stats = measures.mtbsf(gaps, config.options.percentiles_to_report)
            block["tbsf"] = gaps
            block["mtbsf"] = gap_stats.mean
            block["median_tbsf"] = gap_stats.median
            if gap_stats.percentiles:
                block["tbsf_percentiles"] = {
                    f"{p:g}": v for p, v in sorted(gap_stats.percentiles.items())
                }
        if fset.count >= 1:
            block["estimated_mtbsf"] = measures.estimated_mtbsf_constant_intensity(
                fset.count, span_hours
            )
            block["laplace_u"] = measures.laplace_trend(
                [_rel_hours(t, span) for t in fset.times], span_hours
            )
        if config.options.mission_hours is not None:
            block["observed_reliability"] = measures.observed_reliability(
                block["failure_intensity"], config.options.mission_hours
            )
        mission = _mission_reliability(run_windows, fset)
        if mission is not None:
            block["mission_count"], block["failure_free_mission_fraction"] = mission
        reliability[str(spec.id)] = block

    mtbsf0 = reliability.get("0", {}).get("mtbsf")
    availability = measures.availability_suite(trace, cycles, mtbsf0)
    unplanned_hours = sum(
        c.duration_hours
        for c in cycles
        if c.tag is None or c.tag.schedule is Schedule.UNPLANNED
    )
    budgets = _availability_budgets(config, span_hours, unplanned_hours)

    report = {
        "schema_version": SCHEMA_VERSION,
        "span": {
            "label": span.label,
            "start_hours": ticks_to_hours(span.start.ticks),
            "end_hours": ticks_to_hours(span.end.ticks),
            "duration_hours": span_hours,
        },
        "time_accounting": {
            "uptime_hours": uptime(trace),
            "downtime_hours": downtime(trace),
            "removed_hours": removed_time(trace),
            "in_service_invariant": in_service_invariant(trace),
            "event_count": len(trace.events),
        },
        "reliability": reliability,
        "availability": {
            "in_service": availability.in_service,
            "operational": availability.operational,
            "inherent": availability.inherent,
            "achieved": availability.achieved,
            "unavailability": availability.unavailability,
            "downtime_cycle_count": len(complete),
            "incomplete_trailing_cycle": any(not c.complete for c in cycles),
            "mtbs_hours": stats.mean_time_between_support,
            "mean_downtime_hours": stats.mean_downtime,
            "repair_cycle_count": stats.repair_cycle_count,
            "mttr_hours": stats.mttr,
            "unplanned_downtime_hours": unplanned_hours,
            "budgets": budgets,
            "conventions": {
                "mttr": "full repair cycle duration, inoperable wait included",
                "inherent": "MTBSF against mean active corrective supporting time",
                "achieved": "uptime per downtime cycle against mean support cycle time",
            },
            "downtime_cycles": [
                {
                    "start_hours": _rel_hours(c.start, span),
                    "finish_hours": _rel_hours(c.finish, span),
                    "inoperable_hours": c.inoperable_hours,
                    "supporting_hours": c.supporting_hours,
                    "blocked_hours": c.blocked_hours,
                    "schedule": c.tag.schedule.value if c.tag else None,
                    "purpose": c.tag.purpose.value if c.tag else None,
                    "blockage": c.tag.blockage_label if c.tag else None,
                    "updates_applied": c.updates_applied,
                    "complete": c.complete,
                }
                for c in cycles
            ],
        },
        "supportability": {
            "cycle_count": support.cycle_count,
            "support_cycle_times": support.support_cycle_times,
            "span_support_cycle_time": support.span_support_cycle_time,
            "average_support_cycle_time": support.average_support_cycle_time,
            "support_cv": support.support_cv,
            "support_update_count": support.support_update_count,
            "slices": {
                "schedule": {k: {"times": v, "total": sum(v)} for k, v in sorted(support.by_schedule.items())},
                "purpose": {k: {"times": v, "total": sum(v)} for k, v in sorted(support.by_purpose.items())},
                "blockage": {k: {"times": v, "total": sum(v)} for k, v in sorted(support.by_blockage.items())},
            },
            "combinations": [
                {
                    "schedule": sched,
                    "purpose": purp,
                    "blockage": blk,
                    "times": times,
                    "total": sum(times),
                }
                for (sched, purp, blk), times in sorted(support.combinations.items())
            ],
        },
        "recoverability": {
            "impairment_count": recovery.impairment_count,
            "open_impairments": recovery.open_count,
            "mean_time_to_impairment_recovery": recovery.mean_time_to_impairment_recovery,
            "mean_data_lossage": recovery.mean_data_lossage,
            "mean_capability_lossage": recovery.mean_capability_lossage,
            "recovery_success_rate": recovery.recovery_success_rate,
            "recovery_failure_intensity": recovery.recovery_failure_intensity,
        },
        "revealed_requirements": [
            {
                "id": r.id,
                "created_at_hours": _rel_hours(r.created_at, span),
                "disposition": r.disposition.value,
                "text": r.text,
            }
            for r in revealed
        ],
    }
    return report, samples


def _availability_budgets(config: AnalysisConfig, span_hours, unplanned_hours) -> dict | None:
    """Downtime budgets from the strictest at_least hard availability requirement."""
    targets = [
        req.threshold
        for req in config.requirements
        if req.metric in ("availability_operational", "availability_in_service")
        and req.direction is Direction.AT_LEAST
        and req.bound.type is BoundType.HARD
    ]
    if not targets:
        return None
    budget = measures.downtime_budgets(max(targets), span_hours, unplanned_hours)
    return {
        "required_availability": max(targets),
        "unplanned_budget_hours": budget.unplanned_budget_hours,
        "preventative_budget_hours": budget.preventative_budget_hours,
    }


def _run_windows(trace: ValidatedTrace) -> list[tuple[int, int]]:
    """RUNNING interval tick windows, used for the mission reliability view."""
    from .trace import Mode

    return [
        (iv.start.ticks, iv.end.ticks)
        for iv in trace.intervals
        if iv.mode is Mode.RUNNING
    ]


def _mission_reliability(run_windows, fset) -> tuple[int, float] | None:
    """Fraction of runs free of countable failures, when the trace marks runs.

    A failure at a run's end tick belongs to that run (it is the event
    that terminated it), not to a run starting at the same instant.
    """
    if not run_windows:
        return None
    ticks = [t.ticks for t in fset.times]
    first_start = run_windows[0][0]
    clean = sum(
        1
        for lo, hi in run_windows
        if not any(lo < t <= hi or (t == lo == first_start) for t in ticks)
    )
    return len(run_windows), clean / len(run_windows)


# -- rendering ------------------------------------------------------------------


def format_duration(hours: float | None) -> str:
    """Adaptive rendering: minutes below one hour, days above 48 hours."""
    if hours is None:
        return "-"
    if abs(hours) < 1.0:
        return f"{hours * 60:.3f} min"
    if abs(hours) > 48.0:
        return f"{hours / 24:.3f} d"
    return f"{hours:.3f} h"


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class _Table:
    def __init__(self, title: str):
        self.title = title
        self.rows: list[tuple[str, str]] = []

    def add(self, label: str, value):
        self.rows.append((label, value if isinstance(value, str) else _fmt(value)))

    def render(self) -> str:
        width = max((len(label) for label, _ in self.rows), default=0)
        lines = [self.title, "-" * len(self.title)]
        lines += [f"{label.ljust(width)}  {value}" for label, value in self.rows]
        return "\n".join(lines)


_GREEN = "\x1b[32m"
_RED = "\x1b[31m"
_YELLOW = "\x1b[33m"
_RESET = "\x1b[0m"


def _verdict_text(verdict: str, color: bool) -> str:
    if not color:
        return verdict.upper()
    tint = {"met": _GREEN, "violated": _RED}.get(verdict, _YELLOW)
    return f"{tint}{verdict.upper()}{_RESET}"


def render_table(report: dict, assessments: list[dict] | None = None, *, color: bool = False) -> str:
    """Aligned plain-text tables for a report and optional assessment results."""
    sections: list[str] = []

    span = report.get("span", {})
    acct = report.get("time_accounting", {})
    t = _Table(f"Span {span.get('label') or ''} "
               f"[{_fmt(span.get('start_hours'))}h, {_fmt(span.get('end_hours'))}h)".strip())
    t.add("duration", format_duration(span.get("duration_hours")))
    t.add("uptime", format_duration(acct.get("uptime_hours")))
    t.add("downtime", format_duration(acct.get("downtime_hours")))
    t.add("removed", format_duration(acct.get("removed_hours")))
    t.add("in-service invariant", acct.get("in_service_invariant"))
    sections.append(t.render())

    for cid, block in sorted(report.get("reliability", {}).items(), key=lambda kv: int(kv[0])):
        t = _Table(f"Reliability class {cid} ({block.get('class_name', '?')})")
        t.add("severity cut-off", block.get("severity_cutoff") or "none")
        t.add("countable failures", block.get("count"))
        t.add("failure intensity (/h)", block.get("failure_intensity"))
        t.add("MTBSF", format_duration(block.get("mtbsf")))
        t.add("median TBSF", format_duration(block.get("median_tbsf")))
        t.add("estimated MTBSF", format_duration(block.get("estimated_mtbsf")))
        t.add("Laplace u", block.get("laplace_u"))
        if "observed_reliability" in block:
            t.add("observed reliability", block.get("observed_reliability"))
        if "mission_count" in block:
            t.add("runs observed", block.get("mission_count"))
            t.add("failure-free run fraction", block.get("failure_free_mission_fraction"))
        sections.append(t.render())

    av = report.get("availability", {})
    t = _Table("Availability")
    t.add("in-service", av.get("in_service"))
    t.add("operational", av.get("operational"))
    t.add("inherent", av.get("inherent"))
    t.add("achieved", av.get("achieved"))
    t.add("unavailability", av.get("unavailability"))
    t.add("downtime cycles", av.get("downtime_cycle_count"))
    t.add("MTBS", format_duration(av.get("mtbs_hours")))
    t.add("mean downtime", format_duration(av.get("mean_downtime_hours")))
    t.add("repair cycles", av.get("repair_cycle_count"))
    t.add("MTTR", format_duration(av.get("mttr_hours")))
    t.add("unplanned downtime", format_duration(av.get("unplanned_downtime_hours")))
    if av.get("budgets"):
        t.add("unplanned budget", format_duration(av["budgets"].get("unplanned_budget_hours")))
        t.add("preventative budget", format_duration(av["budgets"].get("preventative_budget_hours")))
    sections.append(t.render())

    sup = report.get("supportability", {})
    t = _Table("Supportability")
    t.add("support cycles", sup.get("cycle_count"))
    t.add("total support time", format_duration(sup.get("span_support_cycle_time")))
    t.add("average cycle time", format_duration(sup.get("average_support_cycle_time")))
    t.add("coefficient of variation", sup.get("support_cv"))
    t.add("updates applied", sup.get("support_update_count"))
    for combo in sup.get("combinations", []):
        label = f"  {combo['schedule']}/{combo['purpose']}/{combo['blockage']}"
        t.add(label, f"{len(combo['times'])} cycle(s), {format_duration(combo['total'])}")
    sections.append(t.render())

    rec = report.get("recoverability", {})
    t = _Table("Recoverability")
    t.add("impairments", rec.get("impairment_count"))
    t.add("open at span end", rec.get("open_impairments"))
    t.add("MTTIR", format_duration(rec.get("mean_time_to_impairment_recovery")))
    t.add("mean data lossage", rec.get("mean_data_lossage"))
    t.add("mean capability lossage", rec.get("mean_capability_lossage"))
    t.add("recovery success rate", rec.get("recovery_success_rate"))
    t.add("recovery failure intensity (/h)", rec.get("recovery_failure_intensity"))
    sections.append(t.render())

    revealed = report.get("revealed_requirements", [])
    if revealed:
        t = _Table("Revealed requirements")
        for r in revealed:
            t.add(r["id"], f"[{r['disposition']}] at {_fmt(r['created_at_hours'])}h: {r['text']}")
        sections.append(t.render())

    if assessments is not None:
        t = _Table("Requirement assessment")
        for a in assessments:
            verdict = _verdict_text(a["verdict"], color)
            t.add(
                f"{a['requirement_id']} ({a['metric']})",
                f"{verdict}  observed={_fmt(a.get('observed'))} "
                f"threshold={_fmt(a.get('threshold'))}  {a.get('evidence', '')}",
            )
        sections.append(t.render())

    return "\n\n".join(sections) + "\n"


def assessments_to_dicts(results: list[AssessmentResult]) -> list[dict]:
    return [
        {
            "requirement_id": r.requirement_id,
            "metric": r.metric,
            "verdict": r.verdict.value,
            "observed": r.observed,
            "threshold": r.threshold,
            "evidence": r.evidence,
        }
        for r in results
    ]


def flatten_metrics(report: dict) -> list[tuple[str, object]]:
    """Scalar metrics as (dotted key, value) rows, reliability classes indexed."""
    rows: list[tuple[str, object]] = []

    def walk(node, prefix):
        if isinstance(node, dict):
            for k, v in sorted(node.items()):
                walk(v, f"{prefix}.{k}" if prefix else k)
        elif isinstance(node, (int, float, bool, str)):
            rows.append((prefix, node))

    for section in ("span", "time_accounting", "availability", "supportability", "recoverability"):
        node = dict(report.get(section, {}))
        node.pop("downtime_cycles", None)
        node.pop("combinations", None)
        node.pop("slices", None)
        node.pop("support_cycle_times", None)
        node.pop("conventions", None)
        walk(node, section)
    for cid, block in sorted(report.get("reliability", {}).items(), key=lambda kv: int(kv[0])):
        node = dict(block)
        node.pop("failure_times", None)
        node.pop("tbsf", None)
        walk(node, f"reliability[{cid}]")
    return rows


def write_csv(report: dict, path: Path, assessments: list[dict] | None = None):
    """Delimited export: one metric per row, assessments appended when present."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        for key, value in flatten_metrics(report):
            writer.writerow([key, _round6(value)])
        if assessments:
            writer.writerow([])
            writer.writerow(["requirement", "verdict"])
            for a in assessments:
                writer.writerow([a["requirement_id"], a["verdict"]])
