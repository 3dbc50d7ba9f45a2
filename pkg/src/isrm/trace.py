"""Operational trace model: timing, event vocabulary, parsing, mode replay.

Timestamps are span-relative decimal hours held as integer micro-hour
ticks, so sums of interval lengths are exact and the in-service
partition (uptime + downtime + removed = span) holds without tolerance.

The wire format is JSON Lines, one event object per line, `t` a JSON
number in hours. Mode intervals are derived by replaying events against
the legal transition table; spans are half-open [start, end), and an
interval still open at span end is clipped there.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_EVEN
from enum import Enum
from typing import IO, Iterable, Iterator, Union

from .errors import (
    DanglingMode,
    EventOutsideSpan,
    IllegalTransition,
    MalformedRecord,
    MissingConditionalField,
    NonMonotoneTimestamp,
)

log = logging.getLogger(__name__)

TICKS_PER_HOUR = 1_000_000
_TICK = Decimal(1) / Decimal(TICKS_PER_HOUR)


def hours_to_ticks(value: Union[int, float, str, Decimal]) -> int:
    """Convert decimal hours to integer micro-hour ticks (half-even at the resolution limit)."""
    if isinstance(value, float):
        value = Decimal(repr(value))
    elif not isinstance(value, Decimal):
        value = Decimal(value)
    return int(value.quantize(_TICK, rounding=ROUND_HALF_EVEN) * TICKS_PER_HOUR)


def ticks_to_hours(ticks: int) -> float:
    return ticks / TICKS_PER_HOUR


def format_hours(ticks: int) -> str:
    """Fixed six-decimal rendering, exact for any tick count."""
    return format(Decimal(ticks) * _TICK, "f")


@dataclass(frozen=True, order=True)
class Timestamp:
    """A non-negative instant in span-relative hours, at micro-hour resolution."""

    ticks: int

    def __post_init__(self):
        if not isinstance(self.ticks, int):
            raise TypeError(f"ticks must be int, got {type(self.ticks).__name__}")
        if self.ticks < 0:
            raise ValueError(f"timestamp must be non-negative, got {self.ticks} ticks")

    @classmethod
    def from_hours(cls, value: Union[int, float, str, Decimal]) -> "Timestamp":
        return cls(hours_to_ticks(value))

    @property
    def hours(self) -> float:
        return ticks_to_hours(self.ticks)

    def __str__(self) -> str:
        return f"{format_hours(self.ticks)}h"


@dataclass(frozen=True)
class SpanOfInterest:
    """Half-open observation window [start, end)."""

    start: Timestamp
    end: Timestamp
    label: str = ""

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"span end {self.end} must exceed start {self.start}")

    @classmethod
    def from_hours(cls, start, end, label: str = "") -> "SpanOfInterest":
        return cls(Timestamp.from_hours(start), Timestamp.from_hours(end), label)

    @property
    def duration_ticks(self) -> int:
        return self.end.ticks - self.start.ticks

    @property
    def duration_hours(self) -> float:
        return ticks_to_hours(self.duration_ticks)

    def contains(self, t: Timestamp) -> bool:
        return self.start <= t < self.end


class Mode(str, Enum):
    READY = "READY"
    RUNNING = "RUNNING"
    INOPERABLE = "INOPERABLE"
    SUPPORTING = "SUPPORTING"
    BLOCKED = "BLOCKED"
    REMOVED = "REMOVED"


UPTIME_MODES = frozenset({Mode.READY, Mode.RUNNING})
DOWNTIME_MODES = frozenset({Mode.INOPERABLE, Mode.SUPPORTING, Mode.BLOCKED})
IN_SERVICE_MODES = frozenset(m for m in Mode if m is not Mode.REMOVED)


class EventKind(str, Enum):
    ISS = "ISS"  # in-service start
    RST = "RST"  # run start
    NRR = "NRR"  # normal run response
    NRT = "NRT"  # normal run termination
    TF = "TF"    # terminal failure
    NTF = "NTF"  # non-terminal failure
    STK = "STK"  # stack failure
    OPF = "OPF"  # operational failure
    DF = "DF"    # data failure
    SS = "SS"    # support start
    SC = "SC"    # support complete
    BS = "BS"    # blockage start
    BE = "BE"    # blockage end
    RMV = "RMV"  # removed
    IST = "IST"  # impairment start
    IRC = "IRC"  # impairment recovered
    IRF = "IRF"  # impairment recovery failed
    OBS = "OBS"  # generic observation


FAILURE_KINDS = frozenset({EventKind.TF, EventKind.NTF, EventKind.STK, EventKind.OPF, EventKind.DF})
DISPOSITION_KINDS = frozenset({EventKind.TF, EventKind.STK, EventKind.OPF})
IMPAIRMENT_KINDS = frozenset({EventKind.IST, EventKind.IRC, EventKind.IRF})
OBSERVATION_KINDS = frozenset({EventKind.OBS, EventKind.NRR})


class Disposition(str, Enum):
    RESTART = "restart"
    INOPERABLE = "inoperable"


class Severity(str, Enum):
    """Detriment ranking, extreme > high > moderate > minimal."""

    EXTREME = "extreme"
    HIGH = "high"
    MODERATE = "moderate"
    MINIMAL = "minimal"

    @property
    def rank(self) -> int:
        return _SEVERITY_RANK[self]

    def at_least(self, cutoff: "Severity") -> bool:
        return self.rank >= cutoff.rank


_SEVERITY_RANK = {
    Severity.MINIMAL: 0,
    Severity.MODERATE: 1,
    Severity.HIGH: 2,
    Severity.EXTREME: 3,
}


class Schedule(str, Enum):
    PLANNED = "planned"
    UNPLANNED = "unplanned"


class Purpose(str, Enum):
    ADAPTIVE = "adaptive"
    ADDITIVE = "additive"
    CORRECTIVE = "corrective"
    EMERGENCY = "emergency"
    PERFECTIVE = "perfective"
    PREVENTATIVE = "preventative"


class BlockageKind(str, Enum):
    ADMINISTRATIVE = "administrative"
    TECHNICAL = "technical"
    LOGISTIC = "logistic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class SupportTag:
    """Schedule and purpose declared on a support-start event."""

    schedule: Schedule
    purpose: Purpose


@dataclass(frozen=True)
class TraceEvent:
    """One timestamped occurrence in an operational log.

    Conditional fields are tied to the event kind: `disposition` for
    TF/STK/OPF, `support_tag` for SS, `blockage_kind` for BS, and
    `impairment_id` for IST/IRC/IRF; construction rejects both missing
    and misplaced conditionals.
    """

    t: Timestamp
    kind: EventKind
    disposition: Disposition | None = None
    severity: Severity | None = None
    class_hints: tuple[str, ...] = ()
    support_tag: SupportTag | None = None
    blockage_kind: BlockageKind | None = None
    updates_applied: int | None = None
    data_lossage: float | None = None
    capability_lossage: float | None = None
    impairment_id: str | None = None
    description: str = ""

    def __post_init__(self):
        k = self.kind
        if (self.disposition is not None) != (k in DISPOSITION_KINDS):
            raise ValueError(
                f"{k.value}: disposition must be present iff kind is one of TF/STK/OPF"
            )
        if (self.support_tag is not None) != (k is EventKind.SS):
            raise ValueError(f"{k.value}: support_tag must be present iff kind is SS")
        if (self.blockage_kind is not None) != (k is EventKind.BS):
            raise ValueError(f"{k.value}: blockage_kind must be present iff kind is BS")
        if (self.impairment_id is not None) != (k in IMPAIRMENT_KINDS):
            raise ValueError(
                f"{k.value}: impairment_id must be present iff kind is one of IST/IRC/IRF"
            )
        if self.updates_applied is not None:
            if k is not EventKind.SC:
                raise ValueError(f"{k.value}: updates_applied only applies to SC")
            if isinstance(self.updates_applied, bool) or not isinstance(self.updates_applied, int):
                raise ValueError("updates_applied must be an integer")
            if self.updates_applied < 0:
                raise ValueError("updates_applied must be non-negative")
        if self.data_lossage is not None and self.data_lossage < 0:
            raise ValueError("data_lossage must be non-negative")
        if self.capability_lossage is not None and not 0.0 <= self.capability_lossage <= 1.0:
            raise ValueError("capability_lossage must lie in [0, 1]")


@dataclass(frozen=True)
class ModeInterval:
    mode: Mode
    start: Timestamp
    end: Timestamp

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"interval end {self.end} precedes start {self.start}")

    @property
    def duration_ticks(self) -> int:
        return self.end.ticks - self.start.ticks

    @property
    def duration_hours(self) -> float:
        return ticks_to_hours(self.duration_ticks)


@dataclass(frozen=True)
class ValidatedTrace:
    """An ISRM-legal event sequence with its derived mode intervals.

    Intervals tile [span.start, span.end) exactly: consecutive intervals
    abut, the first starts at span.start, and the last ends at span.end.
    """

    span: SpanOfInterest
    events: tuple[TraceEvent, ...]
    intervals: tuple[ModeInterval, ...]


# -- legal transition table ---------------------------------------------------

# Mode -> kinds legal in that mode. Kinds absent from a mode's set raise
# IllegalTransition. ISS is only legal pre-service and so appears nowhere.
_NO_CHANGE_IN_SERVICE = frozenset(
    {EventKind.DF, EventKind.OBS, EventKind.IST, EventKind.IRC, EventKind.IRF}
)

LEGAL_KINDS: dict[Mode, frozenset[EventKind]] = {
    Mode.READY: frozenset(
        {EventKind.RST, EventKind.STK, EventKind.OPF, EventKind.SS, EventKind.RMV}
    )
    | _NO_CHANGE_IN_SERVICE,
    Mode.RUNNING: frozenset(
        {
            EventKind.NRR,
            EventKind.NRT,
            EventKind.TF,
            EventKind.NTF,
            EventKind.STK,
            EventKind.OPF,
        }
    )
    | _NO_CHANGE_IN_SERVICE,
    Mode.INOPERABLE: frozenset({EventKind.SS}) | _NO_CHANGE_IN_SERVICE,
    Mode.SUPPORTING: frozenset({EventKind.SC, EventKind.BS}) | _NO_CHANGE_IN_SERVICE,
    Mode.BLOCKED: frozenset({EventKind.BE}) | _NO_CHANGE_IN_SERVICE,
    Mode.REMOVED: frozenset({EventKind.DF}),
}


def is_legal(mode: Mode, kind: EventKind) -> bool:
    return kind in LEGAL_KINDS[mode]


def _next_mode(mode: Mode, event: TraceEvent) -> Mode:
    """Target mode after a legal event; same mode for no-change events."""
    k = event.kind
    if k in DISPOSITION_KINDS:
        if event.disposition is Disposition.RESTART:
            return Mode.READY
        return Mode.INOPERABLE
    return {
        EventKind.RST: Mode.RUNNING,
        EventKind.NRT: Mode.READY,
        EventKind.SS: Mode.SUPPORTING,
        EventKind.SC: Mode.READY,
        EventKind.BS: Mode.BLOCKED,
        EventKind.BE: Mode.SUPPORTING,
        EventKind.RMV: Mode.REMOVED,
    }.get(k, mode)


def validate_transitions(
    events: Iterable[TraceEvent],
    span: SpanOfInterest,
    *,
    require_complete: bool = False,
) -> ValidatedTrace:
    """Replay events against the transition table and derive mode intervals.

    The sequence must open with ISS at span.start: the six-mode
    vocabulary has no symbol for in-span pre-service time, so the tiling
    invariant forces in-service to begin with the span. The trailing
    interval is clipped at span.end; with `require_complete`, ending in
    a downtime mode raises DanglingMode instead.
    """
    events = tuple(events)
    if not events:
        raise DanglingMode("span contains no in-service activity (no ISS event)")

    prev_t: Timestamp | None = None
    for ev in events:
        if not span.contains(ev.t):
            raise EventOutsideSpan(
                f"event {ev.kind.value} at t={ev.t} outside span [{span.start}, {span.end})"
            )
        if prev_t is not None and ev.t < prev_t:
            raise NonMonotoneTimestamp(f"event at t={ev.t} precedes previous t={prev_t}")
        prev_t = ev.t

    first = events[0]
    if first.kind is not EventKind.ISS:
        raise IllegalTransition(first, "pre-service", "the first event must be ISS")
    if first.t != span.start:
        raise IllegalTransition(
            first, "pre-service", f"ISS must occur at span start {span.start}"
        )

    intervals: list[ModeInterval] = []
    mode = Mode.READY
    mode_since = span.start
    for ev in events[1:]:
        if ev.kind is EventKind.ISS:
            raise IllegalTransition(ev, mode, "already in service")
        if not is_legal(mode, ev.kind):
            raise IllegalTransition(ev, mode)
        nxt = _next_mode(mode, ev)
        if nxt is not mode:
            if ev.t > mode_since:
                intervals.append(ModeInterval(mode, mode_since, ev.t))
            mode = nxt
            mode_since = ev.t

    if require_complete and mode in DOWNTIME_MODES:
        raise DanglingMode(f"span ends inside {mode.value}")
    if span.end > mode_since:
        intervals.append(ModeInterval(mode, mode_since, span.end))

    return ValidatedTrace(span=span, events=events, intervals=tuple(intervals))


def _sum_ticks(trace: ValidatedTrace, modes: frozenset[Mode]) -> int:
    return sum(iv.duration_ticks for iv in trace.intervals if iv.mode in modes)


def uptime_ticks(trace: ValidatedTrace) -> int:
    return _sum_ticks(trace, UPTIME_MODES)


def downtime_ticks(trace: ValidatedTrace) -> int:
    return _sum_ticks(trace, DOWNTIME_MODES)


def removed_ticks(trace: ValidatedTrace) -> int:
    return _sum_ticks(trace, frozenset({Mode.REMOVED}))


def uptime(trace: ValidatedTrace) -> float:
    """Hours spent READY or RUNNING."""
    return ticks_to_hours(uptime_ticks(trace))


def downtime(trace: ValidatedTrace) -> float:
    """Hours spent INOPERABLE, SUPPORTING, or BLOCKED. REMOVED time is reported separately."""
    return ticks_to_hours(downtime_ticks(trace))


def removed_time(trace: ValidatedTrace) -> float:
    return ticks_to_hours(removed_ticks(trace))


def in_service_invariant(trace: ValidatedTrace) -> bool:
    """uptime + downtime + removed time = span duration, exact at tick resolution."""
    total = uptime_ticks(trace) + downtime_ticks(trace) + removed_ticks(trace)
    return total == trace.span.duration_ticks


# -- JSON Lines wire format ---------------------------------------------------

_KNOWN_FIELDS = frozenset(
    {
        "t",
        "kind",
        "disposition",
        "severity",
        "class_hints",
        "support_tag",
        "blockage_kind",
        "updates_applied",
        "data_lossage",
        "capability_lossage",
        "impairment_id",
        "description",
    }
)

_CONDITIONAL_FIELDS = {
    "disposition": DISPOSITION_KINDS,
    "support_tag": frozenset({EventKind.SS}),
    "blockage_kind": frozenset({EventKind.BS}),
    "impairment_id": IMPAIRMENT_KINDS,
}


def event_to_dict(event: TraceEvent) -> dict:
    d: dict = {"t": float(Decimal(format_hours(event.t.ticks))), "kind": event.kind.value}
    if event.disposition is not None:
        d["disposition"] = event.disposition.value
    if event.severity is not None:
        d["severity"] = event.severity.value
    if event.class_hints:
        d["class_hints"] = list(event.class_hints)
    if event.support_tag is not None:
        d["support_tag"] = {
            "schedule": event.support_tag.schedule.value,
            "purpose": event.support_tag.purpose.value,
        }
    if event.blockage_kind is not None:
        d["blockage_kind"] = event.blockage_kind.value
    if event.updates_applied is not None:
        d["updates_applied"] = event.updates_applied
    if event.data_lossage is not None:
        d["data_lossage"] = round(event.data_lossage, 6)
    if event.capability_lossage is not None:
        d["capability_lossage"] = round(event.capability_lossage, 6)
    if event.impairment_id is not None:
        d["impairment_id"] = event.impairment_id
    if event.description:
        d["description"] = event.description
    return d


def _enum_value(enum_cls, raw, field_name: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise ValueError(f"{field_name} must be one of {allowed}, got {raw!r}") from None


def event_from_dict(record: dict, *, strict: bool = True) -> TraceEvent:
    """Build a TraceEvent from a decoded JSON object (ValueError on bad fields)."""
    unknown = set(record) - _KNOWN_FIELDS
    if unknown:
        if strict:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        log.warning("ignoring unknown trace fields %s", sorted(unknown))
        record = {k: v for k, v in record.items() if k in _KNOWN_FIELDS}

    if "t" not in record or "kind" not in record:
        raise ValueError("record requires 't' and 'kind'")
    if isinstance(record["t"], bool) or not isinstance(record["t"], (int, float, Decimal)):
        raise ValueError(f"t must be a number, got {record['t']!r}")
    kind = _enum_value(EventKind, record["kind"], "kind")

    severity = None
    if record.get("severity") is not None:
        severity = _enum_value(Severity, record["severity"], "severity")
    disposition = None
    if record.get("disposition") is not None:
        disposition = _enum_value(Disposition, record["disposition"], "disposition")
    blockage = None
    if record.get("blockage_kind") is not None:
        blockage = _enum_value(BlockageKind, record["blockage_kind"], "blockage_kind")
    tag = None
    if record.get("support_tag") is not None:
        raw_tag = record["support_tag"]
        if not isinstance(raw_tag, dict) or set(raw_tag) != {"schedule", "purpose"}:
            raise ValueError("support_tag must be an object with schedule and purpose")
        tag = SupportTag(
            schedule=_enum_value(Schedule, raw_tag["schedule"], "support_tag.schedule"),
            purpose=_enum_value(Purpose, raw_tag["purpose"], "support_tag.purpose"),
        )
    hints = record.get("class_hints") or ()
    if not isinstance(hints, (list, tuple)):
        raise ValueError("class_hints must be a list")

    return TraceEvent(
        t=Timestamp.from_hours(record["t"]),
        kind=kind,
        disposition=disposition,
        severity=severity,
        class_hints=tuple(str(h) for h in hints),
        support_tag=tag,
        blockage_kind=blockage,
        updates_applied=record.get("updates_applied"),
        data_lossage=float(record["data_lossage"]) if record.get("data_lossage") is not None else None,
        capability_lossage=(
            float(record["capability_lossage"])
            if record.get("capability_lossage") is not None
            else None
        ),
        impairment_id=record.get("impairment_id"),
        description=record.get("description") or "",
    )


def serialize_event(event: TraceEvent) -> str:
    return json.dumps(event_to_dict(event), sort_keys=True)


def serialize_trace(events: Iterable[TraceEvent]) -> str:
    """Render events as JSON Lines text (trailing newline included)."""
    return "".join(serialize_event(ev) + "\n" for ev in events)


def _iter_lines(stream) -> Iterator[str]:
    if isinstance(stream, (bytes, str)):
        text = stream.decode("utf-8") if isinstance(stream, bytes) else stream
        yield from text.splitlines()
        return
    for line in stream:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def parse_trace(
    stream: Union[IO[bytes], IO[str], bytes, str, Iterable[bytes], Iterable[str]],
    span: SpanOfInterest,
    *,
    strict: bool = True,
) -> list[TraceEvent]:
    """Parse a JSON Lines trace stream into time-ordered events.

    Input must already be non-decreasing in t; timestamps are read as
    exact decimals and quantized to the micro-hour resolution. Blank
    lines are skipped. Unknown fields are rejected when strict,
    otherwise ignored with a warning.
    """
    events: list[TraceEvent] = []
    prev_ticks: int | None = None
    for line_no, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc.msg}", line_no) from None
        if not isinstance(record, dict):
            raise MalformedRecord("record must be a JSON object", line_no)

        raw_t = record.get("t")
        if raw_t is None or isinstance(raw_t, bool) or not isinstance(raw_t, (int, Decimal)):
            raise MalformedRecord(f"t must be a number, got {raw_t!r}", line_no)
        ticks = hours_to_ticks(raw_t)
        if ticks < span.start.ticks or ticks >= span.end.ticks:
            raise EventOutsideSpan(
                f"t={raw_t} outside span [{span.start}, {span.end})", line_no
            )
        if prev_ticks is not None and ticks < prev_ticks:
            raise NonMonotoneTimestamp(f"t={raw_t} decreases", line_no)
        prev_ticks = ticks

        try:
            event = event_from_dict(record, strict=strict)
        except ValueError as exc:
            kind = record.get("kind")
            missing = _missing_conditional(record, kind)
            if missing:
                raise MissingConditionalField(
                    f"{kind}: field {missing!r} is required", line_no
                ) from None
            raise MalformedRecord(str(exc), line_no) from None
        events.append(event)
    return events


def _missing_conditional(record: dict, kind) -> str | None:
    try:
        k = EventKind(kind)
    except (ValueError, TypeError):
        return None
    for field_name, kinds in _CONDITIONAL_FIELDS.items():
        if k in kinds and record.get(field_name) is None:
            return field_name
    return None
