"""Exception hierarchy shared across the package.

Parse errors carry the one-based line number of the offending record.
Validation errors carry enough context to name the event and the mode
it was rejected in.
"""

from __future__ import annotations


class IsrmError(Exception):
    """Base class for all errors raised by this package."""


# -- trace parsing -----------------------------------------------------------


class TraceParseError(IsrmError):
    """A record in a trace stream could not be accepted."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MalformedRecord(TraceParseError):
    """Record is not valid JSON, has bad field values, or carries a field its kind forbids."""


class NonMonotoneTimestamp(TraceParseError):
    """Record timestamp decreases relative to the previous record."""


class EventOutsideSpan(TraceParseError):
    """Record timestamp falls outside the half-open span of interest."""


class MissingConditionalField(TraceParseError):
    """Record omits a field that its event kind requires."""


# -- trace validation --------------------------------------------------------


class IllegalTransition(IsrmError):
    """An event is not permitted in the mode the replay reached."""

    def __init__(self, event, mode, detail: str = ""):
        self.event = event
        self.mode = mode
        msg = f"event {event.kind.value} at t={event.t} is illegal in mode {mode}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DanglingMode(IsrmError):
    """The span ends inside a downtime mode and the caller demanded completion."""


class ImpairmentPairingError(IsrmError):
    """An impairment recovery event has no matching open impairment."""


# -- measures ----------------------------------------------------------------


class ZeroSpan(IsrmError):
    """An observation span of zero or negative duration."""


class InsufficientFailures(IsrmError):
    """Fewer failure occurrences than the statistic needs."""


class EmptyInput(IsrmError):
    """A mean or trend statistic was asked of an empty sample."""


class ZeroCount(IsrmError):
    """Estimated MTBSF is undefined with zero countable failures."""


class InsufficientCycles(IsrmError):
    """Fewer downtime cycles than the statistic needs."""


class InvalidThreshold(IsrmError):
    """A requirement threshold outside its admissible range."""


# -- classification ----------------------------------------------------------


class NoMatchingRule(IsrmError):
    """No triage rule matched; the rule set lacks a default rule."""


# -- requirements ------------------------------------------------------------


class UnitMismatch(IsrmError):
    """A requirement's declared units do not match its metric."""


class UnknownMetric(IsrmError):
    """A requirement references a metric the report does not define."""

    def __init__(self, requirement_id: str, metric: str):
        self.requirement_id = requirement_id
        self.metric = metric
        super().__init__(f"requirement {requirement_id}: unknown metric {metric!r}")


# -- configuration / simulation ----------------------------------------------


class ConfigError(IsrmError):
    """Analysis configuration file is invalid."""


class InvalidConfig(IsrmError):
    """Simulation configuration is invalid."""
