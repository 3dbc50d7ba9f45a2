"""Failure triage and reliability-class assignment.

Observed behaviors (OBS/NRR) are triaged by an ordered, first-match
rule set into nominal/anomalous outcomes; detrimental anomalies and
unacceptable nominal behavior become failures, and every anomaly also
yields a revealed requirement. Failures, whether triaged or explicit
failure events, are then assigned to reliability classes and filtered
per class by severity cut-off into countable failure sets.

Class 0 is the universal class and subsumes all others. Classes 1-5 are
the canonical safety, security, functionality, performance, and
utilization classes; ids above 5 are user-defined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import NoMatchingRule
from .trace import (
    FAILURE_KINDS,
    OBSERVATION_KINDS,
    EventKind,
    Severity,
    SpanOfInterest,
    Timestamp,
    TraceEvent,
    ValidatedTrace,
)

CANONICAL_CLASS_NAMES = {
    0: "universal",
    1: "safety",
    2: "security",
    3: "functionality",
    4: "performance",
    5: "utilization",
}

DEFAULT_TRIAGED_SEVERITY = Severity.MODERATE


@dataclass(frozen=True)
class MatchRule:
    """One classification predicate; absent conditions are wildcards, present ones are ANDed."""

    hint: str | None = None
    kind: EventKind | None = None
    description_matches: str | None = None
    min_severity: Severity | None = None

    def matches(self, failure: "Failure") -> bool:
        if self.hint is not None and self.hint not in failure.hints:
            return False
        if self.kind is not None and failure.origin_kind is not self.kind:
            return False
        if self.description_matches is not None and not re.search(
            self.description_matches, failure.description
        ):
            return False
        if self.min_severity is not None and not failure.severity.at_least(self.min_severity):
            return False
        return True


@dataclass(frozen=True)
class ReliabilityClassSpec:
    """Configuration of one reliability class.

    An absent severity cut-off means all failures of the class count.
    `threshold` optionally names the dependability requirement that
    bounds this class's failure intensity.
    """

    id: int
    name: str
    severity_cutoff: Severity | None = None
    match_rules: tuple[MatchRule, ...] = ()
    threshold: str | None = None
    observation_strategy: str = ""
    monitored_behaviors: str = ""

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("class id must be >= 0")
        canonical = CANONICAL_CLASS_NAMES.get(self.id)
        if canonical is not None and self.name != canonical:
            raise ValueError(
                f"class id {self.id} is reserved for {canonical!r}, got {self.name!r}"
            )


def default_universal_class() -> ReliabilityClassSpec:
    return ReliabilityClassSpec(id=0, name="universal")


class FailureSource(str, Enum):
    EXPLICIT_EVENT = "explicit_event"
    TRIAGED_ANOMALY = "triaged_anomaly"
    TRIAGED_NOMINAL = "triaged_nominal"


@dataclass(frozen=True)
class Failure:
    """A countable-candidate failure occurrence."""

    time: Timestamp
    origin_kind: EventKind
    severity: Severity
    source: FailureSource
    classes: frozenset[int] = frozenset({0})
    hints: tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self):
        if self.origin_kind not in FAILURE_KINDS:
            raise ValueError(f"origin_kind must be a failure kind, got {self.origin_kind}")
        if 0 not in self.classes:
            raise ValueError("class 0 (universal) must be in every failure's class set")


class TriageOutcome(str, Enum):
    NOMINAL_ACCEPTABLE = "nominal_acceptable"
    NOMINAL_UNACCEPTABLE = "nominal_unacceptable"
    ANOMALOUS_BENIGN = "anomalous_benign"
    ANOMALOUS_DETRIMENTAL = "anomalous_detrimental"


class RequirementDisposition(str, Enum):
    PROHIBITS_BEHAVIOR = "prohibits_behavior"
    PERMITS_BEHAVIOR = "permits_behavior"


@dataclass(frozen=True)
class RevealedRequirement:
    """A requirement recognized after the fact from an unanticipated behavior."""

    id: str
    created_at: Timestamp
    origin_event: TraceEvent
    disposition: RequirementDisposition
    text: str


@dataclass(frozen=True)
class TriageRule:
    """First-match rule: predicate over an observation plus the assigned outcome.

    A rule with no predicate fields is a default (catch-all) rule.
    Rules may assign severity, class hints, and the failure kind the
    triaged behavior is recorded as (NTF unless the rule says otherwise).
    """

    outcome: TriageOutcome
    kind: EventKind | None = None
    description_matches: str | None = None
    severity: Severity | None = None
    classes: tuple[str, ...] = ()
    failure_kind: EventKind = EventKind.NTF
    requirement_text: str = ""

    def is_default(self) -> bool:
        return self.kind is None and self.description_matches is None

    def matches(self, observation: TraceEvent) -> bool:
        if self.kind is not None and observation.kind is not self.kind:
            return False
        if self.description_matches is not None and not re.search(
            self.description_matches, observation.description
        ):
            return False
        return True


@dataclass(frozen=True)
class TriageRuleSet:
    """Ordered rules; the first matching rule wins.

    A well-formed set ends in a default (catch-all) rule; config loading
    guarantees one, so NoMatchingRule only fires if it was removed.
    """

    rules: tuple[TriageRule, ...]

    @property
    def has_default(self) -> bool:
        return any(r.is_default() for r in self.rules)

    @classmethod
    def accept_all(cls) -> "TriageRuleSet":
        return cls(rules=(TriageRule(outcome=TriageOutcome.NOMINAL_ACCEPTABLE),))

    def first_match(self, observation: TraceEvent) -> TriageRule:
        for rule in self.rules:
            if rule.matches(observation):
                return rule
        raise NoMatchingRule(
            f"no triage rule matched observation at t={observation.t}"
        )


@dataclass(frozen=True)
class CountableFailureSet:
    """Per-class failures surviving the severity cut-off, with occurrence times."""

    class_id: int
    span: SpanOfInterest
    times: tuple[Timestamp, ...]

    def __post_init__(self):
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("failure times must be sorted non-decreasing")

    @property
    def count(self) -> int:
        return len(self.times)


def triage(
    observation: TraceEvent,
    rules: TriageRuleSet,
    seq: int = 0,
) -> tuple[Failure | None, RevealedRequirement | None]:
    """Triage one OBS/NRR observation.

    Unacceptable nominal behavior and detrimental anomalies are
    failures; any anomaly, benign or detrimental, reveals a requirement
    (permitting or prohibiting the behavior). `seq` numbers the revealed
    requirement id.
    """
    if observation.kind not in OBSERVATION_KINDS:
        raise ValueError(f"triage applies to OBS/NRR events, got {observation.kind}")
    rule = rules.first_match(observation)

    failure = None
    if rule.outcome in (TriageOutcome.NOMINAL_UNACCEPTABLE, TriageOutcome.ANOMALOUS_DETRIMENTAL):
        source = (
            FailureSource.TRIAGED_NOMINAL
            if rule.outcome is TriageOutcome.NOMINAL_UNACCEPTABLE
            else FailureSource.TRIAGED_ANOMALY
        )
        failure = Failure(
            time=observation.t,
            origin_kind=rule.failure_kind,
            severity=rule.severity or observation.severity or DEFAULT_TRIAGED_SEVERITY,
            source=source,
            hints=observation.class_hints + rule.classes,
            description=observation.description,
        )

    requirement = None
    if rule.outcome in (TriageOutcome.ANOMALOUS_BENIGN, TriageOutcome.ANOMALOUS_DETRIMENTAL):
        permits = rule.outcome is TriageOutcome.ANOMALOUS_BENIGN
        requirement = RevealedRequirement(
            id=f"RR-{seq:04d}",
            created_at=observation.t,
            origin_event=observation,
            disposition=(
                RequirementDisposition.PERMITS_BEHAVIOR
                if permits
                else RequirementDisposition.PROHIBITS_BEHAVIOR
            ),
            text=rule.requirement_text or observation.description or "unanticipated behavior",
        )
    return failure, requirement


def _hint_ids(hints: tuple[str, ...], specs: list[ReliabilityClassSpec]) -> set[int]:
    by_name = {spec.name.lower(): spec.id for spec in specs}
    ids = set()
    for hint in hints:
        token = hint.strip().lower()
        if token.isdigit() and any(spec.id == int(token) for spec in specs):
            ids.add(int(token))
        elif token in by_name:
            ids.add(by_name[token])
    return ids


def classify(failure: Failure, specs: list[ReliabilityClassSpec]) -> Failure:
    """Populate the failure's class set: universal plus every class that claims it.

    A class claims a failure when a class hint names it directly or any
    of its match rules accepts the failure. Multiple membership is
    preserved: one behavior can violate several requirements.
    """
    if not any(spec.id == 0 for spec in specs):
        raise ValueError("class specs must include the universal class (id 0)")
    classes = {0} | _hint_ids(failure.hints, specs)
    for spec in specs:
        if spec.id in classes:
            continue
        if any(rule.matches(failure) for rule in spec.match_rules):
            classes.add(spec.id)
    return replace(failure, classes=frozenset(classes))


def collect_failures(
    trace: ValidatedTrace,
    rules: TriageRuleSet,
    specs: list[ReliabilityClassSpec],
) -> tuple[list[Failure], list[RevealedRequirement]]:
    """Run the full pipeline over a trace: explicit failures, triage, classification."""
    failures: list[Failure] = []
    revealed: list[RevealedRequirement] = []
    seq = 1
    for ev in trace.events:
        if ev.kind in FAILURE_KINDS:
            failures.append(
                Failure(
                    time=ev.t,
                    origin_kind=ev.kind,
                    severity=ev.severity or DEFAULT_TRIAGED_SEVERITY,
                    source=FailureSource.EXPLICIT_EVENT,
                    hints=ev.class_hints,
                    description=ev.description,
                )
            )
        elif ev.kind in OBSERVATION_KINDS:
            failure, requirement = triage(ev, rules, seq=seq)
            if failure is not None:
                failures.append(failure)
            if requirement is not None:
                revealed.append(requirement)
                seq += 1
    classified = [classify(f, specs) for f in failures]
    return classified, revealed


def countable_sets(
    failures: list[Failure],
    specs: list[ReliabilityClassSpec],
    span: SpanOfInterest,
) -> dict[int, CountableFailureSet]:
    """Per-class sets from already-classified failures, after cut-off filtering."""
    result: dict[int, CountableFailureSet] = {}
    for spec in specs:
        times = [
            f.time
            for f in failures
            if spec.id in f.classes
            and (spec.severity_cutoff is None or f.severity.at_least(spec.severity_cutoff))
        ]
        times.sort()
        result[spec.id] = CountableFailureSet(class_id=spec.id, span=span, times=tuple(times))
    return result


def countable_failures(
    trace: ValidatedTrace,
    rules: TriageRuleSet,
    specs: list[ReliabilityClassSpec],
) -> dict[int, CountableFailureSet]:
    """Per-class countable failure sets after severity cut-off filtering.

    A failure's time appears in every class it belongs to whose cut-off
    it meets; a class with no cut-off counts all its failures. Data
    failures during REMOVED intervals remain countable.
    """
    failures, _ = collect_failures(trace, rules, specs)
    return countable_sets(failures, specs, trace.span)
