"""Seeded Monte Carlo generator of transition-legal operational traces.

Failure occurrences follow homogeneous Poisson processes: per-class
intensities apply during RUNNING time, while data failures (and
impairments) run over the whole span. Support cycle durations,
inoperable waits, blockages, and recovery durations draw from
configurable fixed/exponential/lognormal distributions.

Randomness comes from the counter-based Philox generator with one
independent substream per concern, so identical (config, seed) pairs
produce byte-identical traces and adding activity in one stream never
perturbs another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .trace import (
    BlockageKind,
    Disposition,
    EventKind,
    Purpose,
    Schedule,
    Severity,
    SupportTag,
    Timestamp,
    TraceEvent,
    hours_to_ticks,
)

_STREAMS = (
    "failures",
    "failure_attrs",
    "support",
    "blockage",
    "impairments",
    "data_failures",
)


@dataclass(frozen=True)
class DistributionSpec:
    """A duration distribution: fixed(value), exponential(mean), or lognormal(mu, sigma)."""

    dist: str
    value: float = 0.0
    mean: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.dist not in ("fixed", "exponential", "lognormal"):
            raise InvalidConfig(f"unknown distribution {self.dist!r}")
        if self.dist == "fixed" and self.value < 0:
            raise InvalidConfig("fixed duration must be non-negative")
        if self.dist == "exponential" and self.mean <= 0:
            raise InvalidConfig("exponential mean must be positive")
        if self.dist == "lognormal" and self.sigma < 0:
            raise InvalidConfig("lognormal sigma must be non-negative")

    @classmethod
    def from_dict(cls, raw: dict) -> "DistributionSpec":
        if not isinstance(raw, dict) or "dist" not in raw:
            raise InvalidConfig(f"distribution spec must be an object with 'dist', got {raw!r}")
        return cls(**raw)

    @classmethod
    def fixed(cls, value: float) -> "DistributionSpec":
        return cls("fixed", value=value)

    def draw(self, rng: np.random.Generator) -> float:
        if self.dist == "fixed":
            return self.value
        if self.dist == "exponential":
            return float(rng.exponential(self.mean))
        return float(rng.lognormal(self.mu, self.sigma))


@dataclass(frozen=True)
class PlannedMaintenance:
    period_hours: float
    duration: DistributionSpec
    purpose: Purpose = Purpose.PREVENTATIVE

    def __post_init__(self):
        if self.period_hours <= 0:
            raise InvalidConfig("planned maintenance period must be positive")


@dataclass(frozen=True)
class SimulationConfig:
    """Ground-truth parameters for one generated trace."""

    span_hours: float
    class_rates: dict[int, float] = field(default_factory=dict)
    data_failure_rate: float = 0.0
    fraction_terminal: float = 0.0
    fraction_restartable: float = 0.5
    inoperable_delay: DistributionSpec = field(default_factory=lambda: DistributionSpec.fixed(0.0))
    support_duration: DistributionSpec = field(default_factory=lambda: DistributionSpec.fixed(1.0))
    planned_maintenance: PlannedMaintenance | None = None
    blockage_probability: float = 0.0
    blockage_duration: DistributionSpec = field(default_factory=lambda: DistributionSpec.fixed(0.5))
    impairment_rate: float = 0.0
    recovery_success_probability: float = 1.0
    recovery_duration: DistributionSpec = field(default_factory=lambda: DistributionSpec.fixed(0.1))
    severity_mix: dict[Severity, float] = field(
        default_factory=lambda: {
            Severity.EXTREME: 0.05,
            Severity.HIGH: 0.20,
            Severity.MODERATE: 0.50,
            Severity.MINIMAL: 0.25,
        }
    )
    seed: int = 0

    def __post_init__(self):
        if self.span_hours <= 0:
            raise InvalidConfig("span must be positive")
        for cid, rate in self.class_rates.items():
            if cid < 0 or rate < 0:
                raise InvalidConfig(f"class rate ({cid}: {rate}) must be non-negative")
        for name in ("data_failure_rate", "impairment_rate"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be non-negative")
        for name in (
            "fraction_terminal",
            "fraction_restartable",
            "blockage_probability",
            "recovery_success_probability",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {v}")
        if self.severity_mix:
            total = sum(self.severity_mix.values())
            if any(w < 0 for w in self.severity_mix.values()) or not math.isclose(
                total, 1.0, rel_tol=1e-9
            ):
                raise InvalidConfig("severity_mix weights must be non-negative and sum to 1")
        if not -(2**63) <= self.seed < 2**64:
            raise InvalidConfig("seed must fit in 64 bits")

    @classmethod
    def from_dict(cls, raw: dict) -> "SimulationConfig":
        if not isinstance(raw, dict):
            raise InvalidConfig("simulation config must be a JSON object")
        raw = dict(raw)
        version = raw.pop("schema_version", 1)
        if version != 1:
            raise InvalidConfig(f"unsupported schema_version {version}")
        known = {
            "span_hours",
            "class_rates",
            "data_failure_rate",
            "fraction_terminal",
            "fraction_restartable",
            "inoperable_delay",
            "support_duration",
            "planned_maintenance",
            "blockage_probability",
            "blockage_duration",
            "impairment_rate",
            "recovery_success_probability",
            "recovery_duration",
            "severity_mix",
            "seed",
        }
        unknown = set(raw) - known
        if unknown:
            raise InvalidConfig(f"unknown simulation config fields {sorted(unknown)}")
        kwargs = dict(raw)
        try:
            if "class_rates" in kwargs:
                kwargs["class_rates"] = {
                    int(k): float(v) for k, v in kwargs["class_rates"].items()
                }
            for key in ("inoperable_delay", "support_duration", "blockage_duration", "recovery_duration"):
                if key in kwargs:
                    kwargs[key] = DistributionSpec.from_dict(kwargs[key])
            if kwargs.get("planned_maintenance") is not None:
                pm = kwargs["planned_maintenance"]
                kwargs["planned_maintenance"] = PlannedMaintenance(
                    period_hours=float(pm["period_hours"]),
                    duration=DistributionSpec.from_dict(pm["duration"]),
                    purpose=Purpose(pm.get("purpose", "preventative")),
                )
            if "severity_mix" in kwargs:
                kwargs["severity_mix"] = {
                    Severity(k): float(v) for k, v in kwargs["severity_mix"].items()
                }
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad simulation config: {exc}") from None
        return cls(**kwargs)


@dataclass
class GroundTruth:
    """Realized parameters and event counts behind a generated trace."""

    seed: int
    span_hours: float
    configured_rates: dict[int, float]
    failure_counts: dict[int, int] = field(default_factory=dict)
    total_failures: int = 0
    data_failures: int = 0
    support_cycles: int = 0
    planned_cycles: int = 0
    impairments: int = 0
    impairments_recovered: int = 0

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "span_hours": self.span_hours,
            "configured_rates": {str(k): v for k, v in sorted(self.configured_rates.items())},
            "failure_counts": {str(k): v for k, v in sorted(self.failure_counts.items())},
            "total_failures": self.total_failures,
            "data_failures": self.data_failures,
            "support_cycles": self.support_cycles,
            "planned_cycles": self.planned_cycles,
            "impairments": self.impairments,
            "impairments_recovered": self.impairments_recovered,
        }


_SEVERITY_ORDERED = (Severity.EXTREME, Severity.HIGH, Severity.MODERATE, Severity.MINIMAL)
_BLOCKAGE_KINDS = tuple(BlockageKind)


class _Emitter:
    """Collects events in micro-hour ticks, keeping within-stream order on ties."""

    def __init__(self, span_ticks: int):
        self.span_ticks = span_ticks
        self._events: list[tuple[int, int, TraceEvent]] = []
        self._seq = 0

    def emit(self, ticks: int, **kwargs) -> bool:
        if ticks >= self.span_ticks:
            return False
        self._events.append((ticks, self._seq, TraceEvent(t=Timestamp(ticks), **kwargs)))
        self._seq += 1
        return True

    def sorted_events(self) -> list[TraceEvent]:
        return [ev for _, _, ev in sorted(self._events, key=lambda item: (item[0], item[1]))]


def generate_trace(config: SimulationConfig) -> tuple[list[TraceEvent], GroundTruth]:
    """Generate one legal trace plus its ground truth.

    The machine timeline (runs, failures, support cycles, planned
    maintenance) is produced first; data failures and impairments are
    overlaid afterwards, which is safe because neither changes mode.
    """
    streams = {
        name: np.random.Generator(np.random.Philox(child))
        for name, child in zip(
            _STREAMS, np.random.SeedSequence(config.seed).spawn(len(_STREAMS))
        )
    }
    span_ticks = hours_to_ticks(config.span_hours)
    emitter = _Emitter(span_ticks)
    truth = GroundTruth(
        seed=config.seed,
        span_hours=config.span_hours,
        configured_rates=dict(config.class_rates),
        failure_counts={cid: 0 for cid in config.class_rates},
    )

    _generate_machine_timeline(config, streams, emitter, truth)
    _overlay_data_failures(config, streams["data_failures"], emitter, truth)
    _overlay_impairments(config, streams["impairments"], emitter, truth)

    events = emitter.sorted_events()
    truth.total_failures = sum(truth.failure_counts.values()) + truth.data_failures
    return events, truth


def _draw_severity(config: SimulationConfig, rng: np.random.Generator) -> Severity:
    weights = [config.severity_mix.get(s, 0.0) for s in _SEVERITY_ORDERED]
    idx = int(rng.choice(len(_SEVERITY_ORDERED), p=weights))
    return _SEVERITY_ORDERED[idx]


def _class_hints(cid: int) -> tuple[str, ...]:
    return (str(cid),) if cid != 0 else ()


def _generate_machine_timeline(config, streams, emitter, truth):
    failures_rng = streams["failures"]
    attrs_rng = streams["failure_attrs"]
    support_rng = streams["support"]
    blockage_rng = streams["blockage"]

    rates = {cid: r for cid, r in config.class_rates.items() if r > 0}
    total_rate = sum(rates.values())
    class_ids = sorted(rates)
    class_probs = [rates[cid] / total_rate for cid in class_ids] if total_rate else []

    pm = config.planned_maintenance
    next_planned = pm.period_hours if pm is not None else math.inf

    emitter.emit(0, kind=EventKind.ISS)
    now = 0.0

    def start_run(t: float):
        emitter.emit(hours_to_ticks(t), kind=EventKind.RST)

    def support_cycle(t: float, schedule: Schedule, purpose: Purpose) -> float:
        """Emit SS [BS/BE] SC starting at t; returns the time support completes."""
        tag = SupportTag(schedule=schedule, purpose=purpose)
        if not emitter.emit(hours_to_ticks(t), kind=EventKind.SS, support_tag=tag):
            return math.inf
        duration = config.support_duration.draw(support_rng)
        finish = t + duration
        if float(blockage_rng.random()) < config.blockage_probability:
            offset = float(blockage_rng.random()) * duration
            blocked_for = config.blockage_duration.draw(blockage_rng)
            kind = _BLOCKAGE_KINDS[int(blockage_rng.choice(len(_BLOCKAGE_KINDS)))]
            bs_at = t + offset
            emitter.emit(hours_to_ticks(bs_at), kind=EventKind.BS, blockage_kind=kind)
            emitter.emit(hours_to_ticks(bs_at + blocked_for), kind=EventKind.BE)
            finish += blocked_for
        completed = emitter.emit(
            hours_to_ticks(finish),
            kind=EventKind.SC,
            updates_applied=int(support_rng.integers(0, 3)),
        )
        truth.support_cycles += 1
        if schedule is Schedule.PLANNED:
            truth.planned_cycles += 1
        return finish if completed else math.inf

    start_run(0.0)
    while now < config.span_hours:
        dt = (
            float(failures_rng.exponential(1.0 / total_rate))
            if total_rate > 0
            else math.inf
        )
        t_fail = now + dt
        if next_planned < t_fail:
            # wind down the run and take the planned maintenance window;
            # a window that came due during downtime runs late, and the
            # late run covers any occurrences it overlapped
            t = max(next_planned, now)
            if t >= config.span_hours:
                break
            while next_planned <= t:
                next_planned += pm.period_hours
            emitter.emit(hours_to_ticks(t), kind=EventKind.NRT)
            finish = support_cycle(t, Schedule.PLANNED, pm.purpose)
            if finish >= config.span_hours:
                break
            now = finish
            start_run(now)
            continue
        if t_fail >= config.span_hours:
            break
        now = t_fail

        cid = class_ids[int(attrs_rng.choice(len(class_ids), p=class_probs))]
        severity = _draw_severity(config, attrs_rng)
        terminal = float(attrs_rng.random()) < config.fraction_terminal
        if not terminal:
            if emitter.emit(
                hours_to_ticks(now),
                kind=EventKind.NTF,
                severity=severity,
                class_hints=_class_hints(cid),
            ):
                truth.failure_counts[cid] += 1
            continue

        restartable = float(attrs_rng.random()) < config.fraction_restartable
        disposition = Disposition.RESTART if restartable else Disposition.INOPERABLE
        if not emitter.emit(
            hours_to_ticks(now),
            kind=EventKind.TF,
            disposition=disposition,
            severity=severity,
            class_hints=_class_hints(cid),
        ):
            break
        truth.failure_counts[cid] += 1
        if restartable:
            start_run(now)
            continue
        wait = config.inoperable_delay.draw(support_rng)
        ss_at = now + wait
        if ss_at >= config.span_hours:
            break
        finish = support_cycle(ss_at, Schedule.UNPLANNED, Purpose.CORRECTIVE)
        if finish >= config.span_hours:
            break
        now = finish
        start_run(now)


def _overlay_data_failures(config, rng, emitter, truth):
    if config.data_failure_rate <= 0:
        return
    t = 0.0
    while True:
        t += float(rng.exponential(1.0 / config.data_failure_rate))
        if t >= config.span_hours:
            return
        if emitter.emit(
            hours_to_ticks(t),
            kind=EventKind.DF,
            severity=_draw_severity(config, rng),
        ):
            truth.data_failures += 1


def _overlay_impairments(config, rng, emitter, truth):
    if config.impairment_rate <= 0:
        return
    t = 0.0
    n = 0
    while True:
        t += float(rng.exponential(1.0 / config.impairment_rate))
        if t >= config.span_hours:
            return
        n += 1
        imp_id = f"imp-{n:04d}"
        if not emitter.emit(hours_to_ticks(t), kind=EventKind.IST, impairment_id=imp_id):
            return
        truth.impairments += 1
        recovered = float(rng.random()) < config.recovery_success_probability
        end = t + config.recovery_duration.draw(rng)
        emitted = emitter.emit(
            hours_to_ticks(end),
            kind=EventKind.IRC if recovered else EventKind.IRF,
            impairment_id=imp_id,
            data_lossage=round(float(rng.exponential(1.0)), 6),
            capability_lossage=round(float(rng.random()), 6),
        )
        if emitted and recovered:
            truth.impairments_recovered += 1
