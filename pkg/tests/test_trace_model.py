"""Trace parsing, transition validation, and the time partition."""

from __future__ import annotations

import pytest

from isrm.errors import (
    DanglingMode,
    EventOutsideSpan,
    IllegalTransition,
    MalformedRecord,
    MissingConditionalField,
    NonMonotoneTimestamp,
)
from isrm.simulate import SimulationConfig, generate_trace
from isrm.trace import (
    LEGAL_KINDS,
    BlockageKind,
    Disposition,
    EventKind,
    Mode,
    ModeInterval,
    Purpose,
    Schedule,
    Severity,
    SpanOfInterest,
    SupportTag,
    Timestamp,
    TraceEvent,
    ValidatedTrace,
    downtime,
    in_service_invariant,
    is_legal,
    parse_trace,
    removed_time,
    serialize_trace,
    uptime,
    validate_transitions,
)

from conftest import ev, random_sim_config


SPAN = SpanOfInterest.from_hours(0, 100)


# -- parsing -------------------------------------------------------------------


def test_parse_single_record_round_trip():
    line = '{"t":40.0,"kind":"TF","disposition":"inoperable","severity":"high"}\n'
    events = parse_trace(line, SPAN)
    assert events == [
        ev(40, "TF", disposition=Disposition.INOPERABLE, severity=Severity.HIGH)
    ]
    assert parse_trace(serialize_trace(events), SPAN) == events


def test_parse_empty_stream():
    assert parse_trace("", SPAN) == []
    assert parse_trace(b"\n\n", SPAN) == []


def test_parse_negative_timestamp_is_outside_span():
    with pytest.raises(EventOutsideSpan):
        parse_trace('{"t":-1,"kind":"OBS"}', SPAN)


def test_parse_event_at_or_past_span_end_rejected():
    with pytest.raises(EventOutsideSpan):
        parse_trace('{"t":100.0,"kind":"OBS"}', SPAN)


def test_parse_non_monotone_rejected_with_line_number():
    text = '{"t":5,"kind":"ISS"}\n{"t":4,"kind":"OBS"}\n'
    with pytest.raises(NonMonotoneTimestamp) as exc:
        parse_trace(text, SPAN)
    assert exc.value.line_no == 2


def test_parse_equal_timestamps_accepted():
    text = '{"t":5,"kind":"ISS"}\n{"t":5,"kind":"OBS"}\n'
    assert len(parse_trace(text, SPAN)) == 2


def test_parse_missing_conditional_field():
    with pytest.raises(MissingConditionalField):
        parse_trace('{"t":1,"kind":"TF"}', SPAN)
    with pytest.raises(MissingConditionalField):
        parse_trace('{"t":1,"kind":"SS"}', SPAN)
    with pytest.raises(MissingConditionalField):
        parse_trace('{"t":1,"kind":"BS"}', SPAN)
    with pytest.raises(MissingConditionalField):
        parse_trace('{"t":1,"kind":"IST"}', SPAN)


def test_parse_misplaced_conditional_field_is_malformed():
    with pytest.raises(MalformedRecord):
        parse_trace('{"t":1,"kind":"OBS","disposition":"restart"}', SPAN)


def test_parse_unknown_field_strictness(caplog):
    line = '{"t":1,"kind":"OBS","wat":1}'
    with pytest.raises(MalformedRecord):
        parse_trace(line, SPAN, strict=True)
    with caplog.at_level("WARNING"):
        events = parse_trace(line, SPAN, strict=False)
    assert len(events) == 1
    assert "wat" in caplog.text


def test_parse_bad_json_and_bad_enum():
    with pytest.raises(MalformedRecord):
        parse_trace("{nope", SPAN)
    with pytest.raises(MalformedRecord):
        parse_trace('{"t":1,"kind":"XYZ"}', SPAN)
    with pytest.raises(MalformedRecord):
        parse_trace('[1,2]', SPAN)


def test_parse_serialize_round_trip_simulated_traces():
    for seed in range(20):
        config = SimulationConfig(
            span_hours=200.0,
            class_rates={0: 0.05},
            fraction_terminal=0.5,
            impairment_rate=0.02,
            data_failure_rate=0.01,
            seed=seed,
        )
        events, _ = generate_trace(config)
        span = SpanOfInterest.from_hours(0, config.span_hours)
        assert parse_trace(serialize_trace(events), span) == list(events)


def test_timestamp_resolution_quantization():
    events = parse_trace('{"t":0.0000014,"kind":"ISS"}', SPAN)
    assert events[0].t.ticks == 1  # half-even at the sixth decimal


# -- transition validation ------------------------------------------------------


def test_t100_interval_replay(t100):
    expected = [
        (Mode.READY, 0, 10),
        (Mode.RUNNING, 10, 40),
        (Mode.INOPERABLE, 40, 42),
        (Mode.SUPPORTING, 42, 45),
        (Mode.READY, 45, 50),
        (Mode.RUNNING, 50, 80),
        (Mode.READY, 80, 90),
        (Mode.SUPPORTING, 90, 95),
        (Mode.READY, 95, 100),
    ]
    got = [(iv.mode, iv.start.hours, iv.end.hours) for iv in t100.intervals]
    assert got == [(m, float(a), float(b)) for m, a, b in expected]


def test_single_iss_spans_ready():
    trace = validate_transitions([ev(0, "ISS")], SPAN)
    assert [(iv.mode, iv.start.hours, iv.end.hours) for iv in trace.intervals] == [
        (Mode.READY, 0.0, 100.0)
    ]


def test_ss_while_running_is_illegal():
    events = [
        ev(0, "ISS"),
        ev(1, "RST"),
        ev(5, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.PREVENTATIVE)),
    ]
    with pytest.raises(IllegalTransition):
        validate_transitions(events, SPAN)


def test_sc_without_open_ss_is_illegal():
    with pytest.raises(IllegalTransition):
        validate_transitions([ev(0, "ISS"), ev(1, "SC")], SPAN)


def test_be_without_open_bs_is_illegal():
    events = [
        ev(0, "ISS"),
        ev(1, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.ADAPTIVE)),
        ev(2, "BE"),
    ]
    with pytest.raises(IllegalTransition):
        validate_transitions(events, SPAN)


def test_first_event_must_be_iss_at_span_start():
    with pytest.raises(IllegalTransition):
        validate_transitions([ev(5, "ISS")], SPAN)
    with pytest.raises(IllegalTransition):
        validate_transitions([ev(0, "OBS")], SPAN)
    with pytest.raises(DanglingMode):
        validate_transitions([], SPAN)


def test_second_iss_is_illegal():
    with pytest.raises(IllegalTransition):
        validate_transitions([ev(0, "ISS"), ev(1, "ISS")], SPAN)


def test_restart_disposition_returns_to_ready():
    events = [
        ev(0, "ISS"),
        ev(1, "RST"),
        ev(2, "TF", disposition=Disposition.RESTART, severity=Severity.HIGH),
        ev(3, "RST"),
    ]
    trace = validate_transitions(events, SPAN)
    modes = [iv.mode for iv in trace.intervals]
    assert modes == [Mode.READY, Mode.RUNNING, Mode.READY, Mode.RUNNING]


def test_require_complete_flags_open_downtime():
    events = [
        ev(0, "ISS"),
        ev(1, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.PREVENTATIVE)),
    ]
    trace = validate_transitions(events, SPAN)  # default policy: clip
    assert trace.intervals[-1].mode is Mode.SUPPORTING
    with pytest.raises(DanglingMode):
        validate_transitions(events, SPAN, require_complete=True)


def _event_for(kind: EventKind) -> TraceEvent:
    kwargs = {}
    if kind in (EventKind.TF, EventKind.STK, EventKind.OPF):
        kwargs["disposition"] = Disposition.INOPERABLE
    elif kind is EventKind.SS:
        kwargs["support_tag"] = SupportTag(Schedule.UNPLANNED, Purpose.CORRECTIVE)
    elif kind is EventKind.BS:
        kwargs["blockage_kind"] = BlockageKind.TECHNICAL
    elif kind in (EventKind.IST, EventKind.IRC, EventKind.IRF):
        kwargs["impairment_id"] = "imp-1"
    return ev(50, kind.value, **kwargs)


_MODE_PREFIX = {
    Mode.READY: [ev(0, "ISS")],
    Mode.RUNNING: [ev(0, "ISS"), ev(1, "RST")],
    Mode.INOPERABLE: [
        ev(0, "ISS"),
        ev(1, "RST"),
        ev(2, "TF", disposition=Disposition.INOPERABLE, severity=Severity.HIGH),
    ],
    Mode.SUPPORTING: [
        ev(0, "ISS"),
        ev(1, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.ADAPTIVE)),
    ],
    Mode.BLOCKED: [
        ev(0, "ISS"),
        ev(1, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.ADAPTIVE)),
        ev(2, "BS", blockage_kind=BlockageKind.LOGISTIC),
    ],
    Mode.REMOVED: [ev(0, "ISS"), ev(1, "RMV")],
}


@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("kind", list(EventKind))
def test_transition_table_exhaustive(mode, kind):
    """Every (mode, kind) pair: legal pairs replay, the complement raises."""
    if kind is EventKind.ISS:
        legal = False  # only legal pre-service
    else:
        legal = is_legal(mode, kind)
    prefix = _MODE_PREFIX[mode]
    events = prefix + [_event_for(kind)]
    if legal:
        trace = validate_transitions(events, SPAN)
        assert in_service_invariant(trace)
    else:
        with pytest.raises(IllegalTransition):
            validate_transitions(events, SPAN)


def test_legal_pair_counts():
    # sanity over the 6x18 table: ISS is nowhere legal, DF is legal everywhere
    assert all(EventKind.ISS not in kinds for kinds in LEGAL_KINDS.values())
    assert all(EventKind.DF in kinds for kinds in LEGAL_KINDS.values())
    assert LEGAL_KINDS[Mode.REMOVED] == frozenset({EventKind.DF})


# -- time partition --------------------------------------------------------------


def test_uptime_downtime_t100(t100):
    assert uptime(t100) == 90.0
    assert downtime(t100) == 10.0
    assert removed_time(t100) == 0.0
    assert in_service_invariant(t100)


def test_all_ready_trace():
    trace = validate_transitions([ev(0, "ISS")], SPAN)
    assert uptime(trace) == 100.0
    assert downtime(trace) == 0.0


def test_supporting_whole_span_counts_zero_uptime():
    events = [
        ev(0, "ISS"),
        ev(0, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.ADDITIVE)),
    ]
    trace = validate_transitions(events, SPAN)
    assert uptime(trace) == 0.0
    assert downtime(trace) == 100.0


def test_blocked_time_counts_as_downtime():
    events = [
        ev(0, "ISS"),
        ev(40, "SS", support_tag=SupportTag(Schedule.UNPLANNED, Purpose.CORRECTIVE)),
        ev(50, "BS", blockage_kind=BlockageKind.EXTERNAL),
        ev(60, "BE"),
        ev(65, "SC"),
    ]
    trace = validate_transitions(events, SPAN)
    assert downtime(trace) == 25.0  # 10 supporting + 10 blocked + 5 supporting
    assert uptime(trace) == 75.0


def test_removed_time_outside_partition():
    events = [ev(0, "ISS"), ev(60, "RMV"), ev(80, "DF", severity=Severity.HIGH)]
    trace = validate_transitions(events, SPAN)
    assert uptime(trace) == 60.0
    assert downtime(trace) == 0.0
    assert removed_time(trace) == 40.0
    assert in_service_invariant(trace)


def test_invariant_fails_on_injected_gap(t100):
    intervals = list(t100.intervals)
    # shrink one interval by an hour, leaving a hole in the tiling
    iv = intervals[1]
    intervals[1] = ModeInterval(iv.mode, iv.start, Timestamp(iv.end.ticks - 3_600_000))
    broken = ValidatedTrace(span=t100.span, events=t100.events, intervals=tuple(intervals))
    assert not in_service_invariant(broken)


def test_tiling_property_simulated():
    import numpy as np

    rng = np.random.default_rng(2024)
    for seed in range(50):
        config = random_sim_config(rng, seed)
        events, _ = generate_trace(config)
        span = SpanOfInterest.from_hours(0, config.span_hours)
        trace = validate_transitions(events, span)
        assert trace.intervals[0].start == span.start
        assert trace.intervals[-1].end == span.end
        for a, b in zip(trace.intervals, trace.intervals[1:]):
            assert a.end == b.start
        assert in_service_invariant(trace)


def test_replay_reproduces_intervals(t100):
    again = validate_transitions(t100.events, t100.span)
    assert again.intervals == t100.intervals


# -- domain type invariants -------------------------------------------------------


def test_timestamp_rejects_negative():
    with pytest.raises(ValueError):
        Timestamp(-1)


def test_span_rejects_empty():
    with pytest.raises(ValueError):
        SpanOfInterest.from_hours(5, 5)


def test_event_conditional_invariants():
    with pytest.raises(ValueError):
        TraceEvent(t=Timestamp(0), kind=EventKind.TF)  # missing disposition
    with pytest.raises(ValueError):
        TraceEvent(t=Timestamp(0), kind=EventKind.NRT, disposition=Disposition.RESTART)
    with pytest.raises(ValueError):
        TraceEvent(t=Timestamp(0), kind=EventKind.OBS, capability_lossage=1.5)
