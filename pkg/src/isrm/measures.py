"""Dependability measurements over validated traces and countable failure sets.

Reliability: failure intensity (count/T), times between failures, MTBSF
with median and percentiles, the constant-intensity MTBSF estimate T/n,
observed reliability exp(-lambda*tau), and the Laplace trend statistic

    u = (sum(t_i)/n - T/2) / (T * sqrt(1/(12 n)))

with u > 0 indicating failures clustering late (deteriorating) and
u < 0 early (improving).

Availability: downtime cycle extraction with per-mode time split,
support interval statistics (MTBS, mean downtime, MTTR over repair
cycles), the in-service/inherent/achieved/operational availability
suite, and downtime budgets from an availability threshold.

Supportability: support cycle times (SC - SS), schedule/purpose/blockage
slices, totals, mean, and coefficient of variation (sample standard
deviation over mean).

Recoverability: impairment pairing and MTTIR, mean lossage, recovery
success rate, and recovery failure intensity.

Statistics that are undefined on the data (a mean of nothing, a CV of
one cycle) are returned as None, never as fabricated zeros; the scalar
operations raise instead.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from enum import Enum

from .classification import CountableFailureSet
from .errors import (
    EmptyInput,
    ImpairmentPairingError,
    InsufficientFailures,
    InvalidThreshold,
    ZeroCount,
    ZeroSpan,
)
from .trace import (
    BlockageKind,
    EventKind,
    Mode,
    Purpose,
    Schedule,
    Timestamp,
    TraceEvent,
    UPTIME_MODES,
    ValidatedTrace,
    downtime_ticks,
    ticks_to_hours,
    uptime_ticks,
)

REPAIR_PURPOSES = frozenset({Purpose.CORRECTIVE, Purpose.EMERGENCY})


# -- reliability ---------------------------------------------------------------


def failure_intensity(failures: CountableFailureSet, span_hours: float) -> float:
    """Countable failures per hour over the observation span."""
    if span_hours <= 0:
        raise ZeroSpan(f"span duration must be positive, got {span_hours}")
    return failures.count / span_hours


def time_between_failures(failures: CountableFailureSet) -> list[float]:
    """Gaps between consecutive failure times, in hours.

    The span-start-to-first and last-to-span-end gaps are excluded:
    only gaps between consecutive occurrences count.
    """
    if failures.count < 2:
        raise InsufficientFailures(
            f"need at least 2 failures for gaps, got {failures.count}"
        )
    times = failures.times
    return [
        ticks_to_hours(b.ticks - a.ticks) for a, b in zip(times, times[1:])
    ]


@dataclass(frozen=True)
class MtbsfStats:
    mean: float
    median: float
    percentiles: dict[float, float] = field(default_factory=dict)


def mtbsf(gaps: list[float], percentiles: tuple[float, ...] = ()) -> MtbsfStats:
    """Mean time between software failures: the arithmetic mean of the gaps,
    regardless of each failure's immediate effect. Also reports the median
    and any requested gap percentiles (linear interpolation).
    """
    if not gaps:
        raise EmptyInput("MTBSF requires at least one inter-failure gap")
    pct = {p: _percentile(gaps, p) for p in percentiles}
    return MtbsfStats(
        mean=statistics.fmean(gaps), median=statistics.median(gaps), percentiles=pct
    )


def _percentile(values: list[float], p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"percentile must lie in [0, 1], got {p}")
    ordered = sorted(values)
    if len(ordered) == 1:
        return ordered[0]
    pos = p * (len(ordered) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return ordered[lo]
    return ordered[lo] + (pos - lo) * (ordered[hi] - ordered[lo])


def estimated_mtbsf_constant_intensity(count: int, span_hours: float) -> float:
    """T/n: the MTBSF estimate under a constant failure intensity (1/lambda-hat)."""
    if span_hours <= 0:
        raise ZeroSpan(f"span duration must be positive, got {span_hours}")
    if count < 1:
        raise ZeroCount("estimated MTBSF requires at least one countable failure")
    return span_hours / count


def observed_reliability(lambda_hat: float, tau_hours: float) -> float:
    """Probability of zero countable failures over a mission of length tau
    under constant intensity: exp(-lambda_hat * tau)."""
    if lambda_hat < 0:
        raise ValueError(f"failure intensity must be non-negative, got {lambda_hat}")
    if tau_hours < 0:
        raise ValueError(f"mission duration must be non-negative, got {tau_hours}")
    return math.exp(-lambda_hat * tau_hours)


def laplace_trend(times: list[float], span_hours: float) -> float:
    """Laplace trend statistic for failure times within [0, T]."""
    if not times:
        raise EmptyInput("Laplace trend requires at least one failure time")
    if span_hours <= 0:
        raise ZeroSpan(f"span duration must be positive, got {span_hours}")
    if any(t < 0 or t > span_hours for t in times):
        raise ValueError("failure times must lie within [0, T]")
    n = len(times)
    return (statistics.fmean(times) - span_hours / 2) / (
        span_hours * math.sqrt(1.0 / (12 * n))
    )


# -- downtime cycles -----------------------------------------------------------


@dataclass(frozen=True)
class SupportActionTag:
    """Schedule x purpose x blockage slice coordinates of a downtime cycle."""

    schedule: Schedule
    purpose: Purpose
    blockage: BlockageKind | None  # None encodes the no-blockage slice

    @property
    def blockage_label(self) -> str:
        return self.blockage.value if self.blockage is not None else "none"


@dataclass(frozen=True)
class DowntimeCycle:
    """One maximal excursion from uptime into downtime and back to READY.

    A cycle still open at span end is flagged incomplete: it is excluded
    from cycle statistics but its time still counts as downtime.
    """

    start: Timestamp
    finish: Timestamp
    inoperable_hours: float
    supporting_hours: float
    blocked_hours: float
    tag: SupportActionTag | None
    updates_applied: int = 0
    ss_time: Timestamp | None = None
    complete: bool = True

    @property
    def duration_hours(self) -> float:
        return ticks_to_hours(self.finish.ticks - self.start.ticks)

    @property
    def support_cycle_hours(self) -> float:
        """Active support time SC - SS: supporting plus blocked, no inoperable wait."""
        return self.supporting_hours + self.blocked_hours


def downtime_cycles(trace: ValidatedTrace) -> list[DowntimeCycle]:
    """Extract downtime cycles from a trace's mode intervals and SS/SC/BS events.

    The only exit from the downtime modes is SC back to READY, so any
    cycle followed by another interval is complete; only a cycle clipped
    by span end is incomplete.
    """
    ss_by_time = {ev.t.ticks: ev for ev in trace.events if ev.kind is EventKind.SS}
    sc_by_time = {ev.t.ticks: ev for ev in trace.events if ev.kind is EventKind.SC}
    bs_by_time = {ev.t.ticks: ev for ev in trace.events if ev.kind is EventKind.BS}

    cycles: list[DowntimeCycle] = []
    open_cycle: dict | None = None

    def close(finish: Timestamp, complete: bool):
        nonlocal open_cycle
        c, open_cycle = open_cycle, None
        tag = None
        if c["schedule"] is not None:
            tag = SupportActionTag(
                schedule=c["schedule"], purpose=c["purpose"], blockage=c["blockage"]
            )
        sc = sc_by_time.get(finish.ticks) if complete else None
        cycles.append(
            DowntimeCycle(
                start=c["start"],
                finish=finish,
                inoperable_hours=ticks_to_hours(c["inoperable"]),
                supporting_hours=ticks_to_hours(c["supporting"]),
                blocked_hours=ticks_to_hours(c["blocked"]),
                tag=tag,
                updates_applied=(sc.updates_applied or 0) if sc is not None else 0,
                ss_time=c["ss_time"],
                complete=complete,
            )
        )

    for interval in trace.intervals:
        if interval.mode in UPTIME_MODES or interval.mode is Mode.REMOVED:
            if open_cycle is not None:
                close(interval.start, complete=True)
            continue
        if open_cycle is None:
            open_cycle = {
                "start": interval.start,
                "inoperable": 0,
                "supporting": 0,
                "blocked": 0,
                "schedule": None,
                "purpose": None,
                "blockage": None,
                "ss_time": None,
            }
        if interval.mode is Mode.INOPERABLE:
            open_cycle["inoperable"] += interval.duration_ticks
        elif interval.mode is Mode.SUPPORTING:
            open_cycle["supporting"] += interval.duration_ticks
            ss = ss_by_time.get(interval.start.ticks)
            if ss is not None and open_cycle["schedule"] is None:
                open_cycle["schedule"] = ss.support_tag.schedule
                open_cycle["purpose"] = ss.support_tag.purpose
                open_cycle["ss_time"] = ss.t
        elif interval.mode is Mode.BLOCKED:
            open_cycle["blocked"] += interval.duration_ticks
            bs = bs_by_time.get(interval.start.ticks)
            if bs is not None and open_cycle["blockage"] is None:
                open_cycle["blockage"] = bs.blockage_kind

    if open_cycle is not None:
        close(trace.span.end, complete=False)
    return cycles


def complete_cycles(cycles: list[DowntimeCycle]) -> list[DowntimeCycle]:
    return [c for c in cycles if c.complete]


# -- availability ---------------------------------------------------------------


@dataclass(frozen=True)
class SupportIntervalStats:
    time_between_support: list[float]
    mean_time_between_support: float | None
    mean_downtime: float | None
    repair_cycle_count: int
    times_to_repair: list[float]
    mttr: float | None


def support_interval_stats(cycles: list[DowntimeCycle]) -> SupportIntervalStats:
    """Support interval statistics over complete downtime cycles.

    Time between support is the gap between consecutive SS times; repair
    cycles are those tagged corrective or emergency, and time to repair
    is the full cycle duration including any inoperable wait.
    """
    done = complete_cycles(cycles)
    ss_times = [c.ss_time for c in done if c.ss_time is not None]
    tbs = [
        ticks_to_hours(b.ticks - a.ticks) for a, b in zip(ss_times, ss_times[1:])
    ]
    repair = [c for c in done if c.tag is not None and c.tag.purpose in REPAIR_PURPOSES]
    ttr = [c.duration_hours for c in repair]
    return SupportIntervalStats(
        time_between_support=tbs,
        mean_time_between_support=statistics.fmean(tbs) if tbs else None,
        mean_downtime=statistics.fmean([c.duration_hours for c in done]) if done else None,
        repair_cycle_count=len(repair),
        times_to_repair=ttr,
        mttr=statistics.fmean(ttr) if ttr else None,
    )


@dataclass(frozen=True)
class AvailabilitySuite:
    in_service: float | None
    inherent: float | None
    achieved: float | None
    operational: float | None
    unavailability: float | None


def availability_suite(
    trace: ValidatedTrace,
    cycles: list[DowntimeCycle],
    mtbsf_hours: float | None,
) -> AvailabilitySuite:
    """The four availability figures plus unavailability.

    In-service (= operational) availability is the uptime fraction of
    uptime + downtime; REMOVED time sits outside the partition. Inherent
    availability pits MTBSF against the mean active corrective
    supporting time; achieved availability pits MTBM (uptime per
    downtime cycle) against the mean support cycle time. Components
    whose inputs are undefined come back as None.
    """
    up = uptime_ticks(trace)
    down = downtime_ticks(trace)
    in_service = up / (up + down) if up + down > 0 else None

    done = complete_cycles(cycles)
    corrective_supporting = [
        c.supporting_hours
        for c in done
        if c.tag is not None and c.tag.purpose in REPAIR_PURPOSES
    ]
    inherent = None
    if mtbsf_hours is not None and corrective_supporting:
        active_repair = statistics.fmean(corrective_supporting)
        inherent = mtbsf_hours / (mtbsf_hours + active_repair)

    achieved = None
    if done:
        mtbm = ticks_to_hours(up) / len(done)
        mean_maintenance = statistics.fmean([c.support_cycle_hours for c in done])
        achieved = mtbm / (mtbm + mean_maintenance)

    return AvailabilitySuite(
        in_service=in_service,
        inherent=inherent,
        achieved=achieved,
        operational=in_service,
        unavailability=1.0 - in_service if in_service is not None else None,
    )


def mean_operational_availability(per_span_values: list[float]) -> float:
    """Arithmetic mean of per-span operational availability."""
    if not per_span_values:
        raise EmptyInput("mean operational availability requires at least one span")
    return statistics.fmean(per_span_values)


@dataclass(frozen=True)
class DowntimeBudgets:
    unplanned_budget_hours: float
    preventative_budget_hours: float


def downtime_budgets(
    a_required: float, span_hours: float, expected_unplanned_hours: float = 0.0
) -> DowntimeBudgets:
    """Downtime allowances implied by an availability threshold.

    Total allowed downtime is (1 - A) * span; the unplanned budget is
    that total, and preventative maintenance may use whatever the
    expected unplanned downtime leaves over.
    """
    if not 0.0 < a_required <= 1.0:
        raise InvalidThreshold(f"availability threshold must lie in (0, 1], got {a_required}")
    if span_hours <= 0:
        raise ZeroSpan(f"span duration must be positive, got {span_hours}")
    if expected_unplanned_hours < 0:
        raise ValueError("expected unplanned downtime must be non-negative")
    total = (1.0 - a_required) * span_hours
    return DowntimeBudgets(
        unplanned_budget_hours=total,
        preventative_budget_hours=max(0.0, total - expected_unplanned_hours),
    )


# -- supportability --------------------------------------------------------------


@dataclass(frozen=True)
class SupportabilitySuite:
    cycle_count: int
    support_cycle_times: list[float]
    span_support_cycle_time: float
    average_support_cycle_time: float | None
    support_cv: float | None
    support_update_count: int
    by_schedule: dict[str, list[float]]
    by_purpose: dict[str, list[float]]
    by_blockage: dict[str, list[float]]
    combinations: dict[tuple[str, str, str], list[float]]


def slice_times(
    cycles: list[DowntimeCycle],
    schedule: Schedule | None = None,
    purpose: Purpose | None = None,
    blockage: BlockageKind | None | str = "any",
) -> list[float]:
    """Support cycle times of the complete cycles matching a slice projection.

    Pass `blockage=None` to select the no-blockage slice; the default
    "any" leaves the blockage dimension unconstrained.
    """
    out = []
    for c in complete_cycles(cycles):
        if c.tag is None:
            continue
        if schedule is not None and c.tag.schedule is not schedule:
            continue
        if purpose is not None and c.tag.purpose is not purpose:
            continue
        if blockage != "any" and c.tag.blockage is not blockage:
            continue
        out.append(c.support_cycle_hours)
    return out


def supportability_suite(cycles: list[DowntimeCycle]) -> SupportabilitySuite:
    """Support cycle statistics with every observed schedule/purpose/blockage slice."""
    done = [c for c in complete_cycles(cycles) if c.tag is not None]
    times = [c.support_cycle_hours for c in done]
    mean = statistics.fmean(times) if times else None
    cv = None
    if len(times) >= 2 and mean:
        cv = statistics.stdev(times) / mean

    by_schedule: dict[str, list[float]] = {}
    by_purpose: dict[str, list[float]] = {}
    by_blockage: dict[str, list[float]] = {}
    combos: dict[tuple[str, str, str], list[float]] = {}
    for c in done:
        t = c.support_cycle_hours
        by_schedule.setdefault(c.tag.schedule.value, []).append(t)
        by_purpose.setdefault(c.tag.purpose.value, []).append(t)
        by_blockage.setdefault(c.tag.blockage_label, []).append(t)
        combos.setdefault(
            (c.tag.schedule.value, c.tag.purpose.value, c.tag.blockage_label), []
        ).append(t)

    return SupportabilitySuite(
        cycle_count=len(done),
        support_cycle_times=times,
        span_support_cycle_time=sum(times),
        average_support_cycle_time=mean,
        support_cv=cv,
        support_update_count=sum(c.updates_applied for c in done),
        by_schedule=by_schedule,
        by_purpose=by_purpose,
        by_blockage=by_blockage,
        combinations=combos,
    )


# -- recoverability ---------------------------------------------------------------


class ImpairmentOutcome(str, Enum):
    RECOVERED = "recovered"
    FAILED = "failed"
    OPEN = "open"


@dataclass(frozen=True)
class ImpairmentRecord:
    """One impairment episode: a degradation and how (whether) it resolved."""

    id: str
    start: Timestamp
    end: Timestamp | None
    outcome: ImpairmentOutcome
    data_lossage: float = 0.0
    capability_lossage: float = 0.0

    def __post_init__(self):
        closed = self.outcome is not ImpairmentOutcome.OPEN
        if closed and (self.end is None or self.end < self.start):
            raise ValueError("a closed impairment needs end >= start")
        if not closed and self.end is not None:
            raise ValueError("an open impairment has no end")

    @property
    def duration_hours(self) -> float | None:
        if self.end is None:
            return None
        return ticks_to_hours(self.end.ticks - self.start.ticks)


def extract_impairments(trace: ValidatedTrace) -> list[ImpairmentRecord]:
    """Pair IST events with their IRC/IRF closures by impairment id.

    Impairments still open at span end come back with outcome OPEN.
    An IRC/IRF without a matching open IST, or a second IST reusing an
    open id, is a trace defect.
    """
    open_by_id: dict[str, TraceEvent] = {}
    records: list[ImpairmentRecord] = []
    for ev in trace.events:
        if ev.kind is EventKind.IST:
            if ev.impairment_id in open_by_id:
                raise ImpairmentPairingError(
                    f"impairment {ev.impairment_id!r} restarted at t={ev.t} while still open"
                )
            open_by_id[ev.impairment_id] = ev
        elif ev.kind in (EventKind.IRC, EventKind.IRF):
            start = open_by_id.pop(ev.impairment_id, None)
            if start is None:
                raise ImpairmentPairingError(
                    f"impairment {ev.impairment_id!r} closed at t={ev.t} without a start"
                )
            records.append(
                ImpairmentRecord(
                    id=ev.impairment_id,
                    start=start.t,
                    end=ev.t,
                    outcome=(
                        ImpairmentOutcome.RECOVERED
                        if ev.kind is EventKind.IRC
                        else ImpairmentOutcome.FAILED
                    ),
                    data_lossage=ev.data_lossage or 0.0,
                    capability_lossage=ev.capability_lossage or 0.0,
                )
            )
    for ev in open_by_id.values():
        records.append(
            ImpairmentRecord(
                id=ev.impairment_id, start=ev.t, end=None, outcome=ImpairmentOutcome.OPEN
            )
        )
    records.sort(key=lambda r: r.start)
    return records


@dataclass(frozen=True)
class RecoverabilitySuite:
    impairment_count: int
    open_count: int
    mean_time_to_impairment_recovery: float | None
    mean_data_lossage: float | None
    mean_capability_lossage: float | None
    recovery_success_rate: float | None
    recovery_failure_intensity: float | None


def recoverability_suite(
    impairments: list[ImpairmentRecord], span_hours: float
) -> RecoverabilitySuite:
    """Recovery effectiveness over closed impairments.

    Open impairments are excluded from every mean and rate and reported
    only as a count. Lossage means run over all closed impairments,
    recovered or not; MTTIR runs over recovered ones only.
    """
    if span_hours <= 0:
        raise ZeroSpan(f"span duration must be positive, got {span_hours}")
    closed = [i for i in impairments if i.outcome is not ImpairmentOutcome.OPEN]
    recovered = [i for i in closed if i.outcome is ImpairmentOutcome.RECOVERED]
    failed = [i for i in closed if i.outcome is ImpairmentOutcome.FAILED]
    return RecoverabilitySuite(
        impairment_count=len(impairments),
        open_count=len(impairments) - len(closed),
        mean_time_to_impairment_recovery=(
            statistics.fmean([i.duration_hours for i in recovered]) if recovered else None
        ),
        mean_data_lossage=(
            statistics.fmean([i.data_lossage for i in closed]) if closed else None
        ),
        mean_capability_lossage=(
            statistics.fmean([i.capability_lossage for i in closed]) if closed else None
        ),
        recovery_success_rate=(len(recovered) / len(closed)) if closed else None,
        recovery_failure_intensity=(len(failed) / span_hours) if closed else None,
    )
