"""Analysis configuration: span, class specs, triage rules, requirements, options.

The config file is JSON. Every validation problem raises ConfigError
with a path-like message; the CLI maps these to exit code 3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .classification import (
    CANONICAL_CLASS_NAMES,
    MatchRule,
    ReliabilityClassSpec,
    TriageOutcome,
    TriageRule,
    TriageRuleSet,
    default_universal_class,
)
from .errors import ConfigError, InvalidThreshold, UnitMismatch
from .requirements import (
    Bound,
    BoundType,
    DependabilityRequirement,
    Direction,
    RequirementKind,
    TraceabilityRequirement,
)
from .trace import EventKind, Severity, SpanOfInterest

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnalysisOptions:
    strict_parse: bool = True
    percentiles_to_report: tuple[float, ...] = ()
    mission_hours: float | None = None


@dataclass(frozen=True)
class AnalysisConfig:
    span: SpanOfInterest | None
    classes: tuple[ReliabilityClassSpec, ...]
    triage_rules: TriageRuleSet
    requirements: tuple[DependabilityRequirement, ...]
    traceability: tuple[TraceabilityRequirement, ...] = ()
    options: AnalysisOptions = field(default_factory=AnalysisOptions)


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def _severity(raw, where: str) -> Severity | None:
    if raw is None:
        return None
    try:
        return Severity(raw)
    except ValueError:
        raise ConfigError(f"{where}: unknown severity {raw!r}") from None


def _event_kind(raw, where: str) -> EventKind | None:
    if raw is None:
        return None
    try:
        return EventKind(raw)
    except ValueError:
        raise ConfigError(f"{where}: unknown event kind {raw!r}") from None


def _parse_class(raw: dict, where: str) -> ReliabilityClassSpec:
    _require(isinstance(raw, dict), f"{where}: class spec must be an object")
    _require("id" in raw, f"{where}: class spec needs an id")
    cid = raw["id"]
    _require(isinstance(cid, int) and cid >= 0, f"{where}: class id must be a non-negative integer")
    name = raw.get("name") or CANONICAL_CLASS_NAMES.get(cid)
    _require(bool(name), f"{where}: user-defined class {cid} needs a name")
    rules = []
    for i, r in enumerate(raw.get("match_rules") or []):
        rw = f"{where}.match_rules[{i}]"
        _require(isinstance(r, dict), f"{rw}: rule must be an object")
        unknown = set(r) - {"hint", "kind", "description_matches", "min_severity"}
        _require(not unknown, f"{rw}: unknown fields {sorted(unknown)}")
        rules.append(
            MatchRule(
                hint=r.get("hint"),
                kind=_event_kind(r.get("kind"), rw),
                description_matches=r.get("description_matches"),
                min_severity=_severity(r.get("min_severity"), rw),
            )
        )
    try:
        return ReliabilityClassSpec(
            id=cid,
            name=name,
            severity_cutoff=_severity(raw.get("severity_cutoff"), where),
            match_rules=tuple(rules),
            threshold=raw.get("threshold"),
            observation_strategy=raw.get("observation_strategy") or "",
            monitored_behaviors=raw.get("monitored_behaviors") or "",
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_triage_rule(raw: dict, where: str) -> TriageRule:
    _require(isinstance(raw, dict), f"{where}: triage rule must be an object")
    _require("outcome" in raw, f"{where}: triage rule needs an outcome")
    try:
        outcome = TriageOutcome(raw["outcome"])
    except ValueError:
        raise ConfigError(f"{where}: unknown outcome {raw['outcome']!r}") from None
    failure_kind = _event_kind(raw.get("failure_kind"), where) or EventKind.NTF
    return TriageRule(
        outcome=outcome,
        kind=_event_kind(raw.get("kind"), where),
        description_matches=raw.get("description_matches"),
        severity=_severity(raw.get("severity"), where),
        classes=tuple(raw.get("classes") or ()),
        failure_kind=failure_kind,
        requirement_text=raw.get("requirement_text") or "",
    )


def _parse_bound(raw, where: str) -> Bound:
    if raw is None or raw == "hard" or raw == {"type": "hard"}:
        return Bound.hard()
    _require(isinstance(raw, dict) and "type" in raw, f"{where}: bound must be an object with a type")
    try:
        btype = BoundType(raw["type"])
        if btype is BoundType.PERCENTILE:
            return Bound.percentile(float(raw["p"]))
        if btype is BoundType.CONFIDENCE:
            return Bound.confidence(float(raw["level"]))
        return Bound.hard()
    except (KeyError, TypeError, ValueError, InvalidThreshold) as exc:
        raise ConfigError(f"{where}: bad bound: {exc}") from None


def _parse_requirement(raw: dict, where: str):
    _require(isinstance(raw, dict), f"{where}: requirement must be an object")
    _require("id" in raw, f"{where}: requirement needs an id")
    kind = RequirementKind(raw.get("kind", "dependability"))
    if kind is not RequirementKind.DEPENDABILITY:
        return TraceabilityRequirement(
            id=str(raw["id"]),
            kind=kind,
            text=raw.get("text") or "",
            traces_to=tuple(raw.get("traces_to") or ()),
        )
    for key in ("metric", "direction", "threshold"):
        _require(key in raw, f"{where}: dependability requirement needs {key!r}")
    try:
        return DependabilityRequirement(
            id=str(raw["id"]),
            metric=raw["metric"],
            direction=Direction(raw["direction"]),
            threshold=float(raw["threshold"]),
            bound=_parse_bound(raw.get("bound"), where),
            units=raw.get("units"),
            traces_to=tuple(raw.get("traces_to") or ()),
            text=raw.get("text") or "",
        )
    except (InvalidThreshold, UnitMismatch, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_analysis_config(source: str | Path | dict) -> AnalysisConfig:
    """Load and validate an analysis config from a path or a decoded object."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {source}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        raw = source
    _require(isinstance(raw, dict), "config must be a JSON object")

    version = raw.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version}")

    span = None
    if raw.get("span") is not None:
        s = raw["span"]
        _require(
            isinstance(s, dict) and "start" in s and "end" in s,
            "span must be an object with start and end hours",
        )
        try:
            span = SpanOfInterest.from_hours(s["start"], s["end"], s.get("label", ""))
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"span: {exc}") from None

    classes = [
        _parse_class(c, f"classes[{i}]") for i, c in enumerate(raw.get("classes") or [])
    ]
    ids = [c.id for c in classes]
    _require(len(ids) == len(set(ids)), "class ids must be unique")
    if 0 not in ids:
        classes.insert(0, default_universal_class())

    rules = [
        _parse_triage_rule(r, f"triage_rules[{i}]")
        for i, r in enumerate(raw.get("triage_rules") or [])
    ]
    if not any(r.is_default() for r in rules):
        rules.append(TriageRule(outcome=TriageOutcome.NOMINAL_ACCEPTABLE))
    rule_set = TriageRuleSet(rules=tuple(rules))

    deps: list[DependabilityRequirement] = []
    traceability: list[TraceabilityRequirement] = []
    for i, r in enumerate(raw.get("requirements") or []):
        parsed = _parse_requirement(r, f"requirements[{i}]")
        if isinstance(parsed, DependabilityRequirement):
            deps.append(parsed)
        else:
            traceability.append(parsed)
    req_ids = [r.id for r in deps] + [r.id for r in traceability]
    _require(len(req_ids) == len(set(req_ids)), "requirement ids must be unique")
    for spec in classes:
        if spec.threshold is not None:
            _require(
                spec.threshold in req_ids,
                f"class {spec.id} references unknown requirement {spec.threshold!r}",
            )

    opts = raw.get("options") or {}
    _require(isinstance(opts, dict), "options must be an object")
    unknown = set(opts) - {"strict_parse", "percentiles_to_report", "mission_hours"}
    _require(not unknown, f"options: unknown fields {sorted(unknown)}")
    percentiles = tuple(float(p) for p in opts.get("percentiles_to_report") or ())
    _require(
        all(0.0 <= p <= 1.0 for p in percentiles),
        "options.percentiles_to_report must lie in [0, 1]",
    )
    mission = opts.get("mission_hours")
    if mission is not None:
        mission = float(mission)
        _require(mission > 0, "options.mission_hours must be positive")

    unknown_top = set(raw) - {
        "schema_version",
        "span",
        "classes",
        "triage_rules",
        "requirements",
        "options",
    }
    _require(not unknown_top, f"unknown config fields {sorted(unknown_top)}")

    return AnalysisConfig(
        span=span,
        classes=tuple(sorted(classes, key=lambda c: c.id)),
        triage_rules=rule_set,
        requirements=tuple(deps),
        traceability=tuple(traceability),
        options=AnalysisOptions(
            strict_parse=bool(opts.get("strict_parse", True)),
            percentiles_to_report=percentiles,
            mission_hours=mission,
        ),
    )
