"""Shared fixtures: the hand-derived T100 trace and config builders."""

from __future__ import annotations

import numpy as np
import pytest

from isrm.config import load_analysis_config
from isrm.simulate import DistributionSpec, PlannedMaintenance, SimulationConfig
from isrm.trace import (
    Disposition,
    EventKind,
    Purpose,
    Schedule,
    Severity,
    SpanOfInterest,
    SupportTag,
    Timestamp,
    TraceEvent,
    validate_transitions,
)


def ev(hours, kind, **kwargs) -> TraceEvent:
    return TraceEvent(t=Timestamp.from_hours(hours), kind=EventKind(kind), **kwargs)


def t100_events() -> list[TraceEvent]:
    """Two runs, a corrective cycle after a terminal failure, a planned cycle.

    Hand replay gives intervals READY[0,10] RUNNING[10,40] INOPERABLE[40,42]
    SUPPORTING[42,45] READY[45,50] RUNNING[50,80] READY[80,90]
    SUPPORTING[90,95] READY[95,100]; failures at 40 (TF, high) and
    70 (NTF, moderate).
    """
    return [
        ev(0, "ISS"),
        ev(10, "RST"),
        ev(40, "TF", disposition=Disposition.INOPERABLE, severity=Severity.HIGH),
        ev(42, "SS", support_tag=SupportTag(Schedule.UNPLANNED, Purpose.CORRECTIVE)),
        ev(45, "SC", updates_applied=1),
        ev(50, "RST"),
        ev(70, "NTF", severity=Severity.MODERATE),
        ev(80, "NRT"),
        ev(90, "SS", support_tag=SupportTag(Schedule.PLANNED, Purpose.PREVENTATIVE)),
        ev(95, "SC", updates_applied=2),
    ]


@pytest.fixture
def t100_span() -> SpanOfInterest:
    return SpanOfInterest.from_hours(0, 100, "T100")


@pytest.fixture
def t100(t100_span):
    return validate_transitions(t100_events(), t100_span)


@pytest.fixture
def t100_config():
    return load_analysis_config(
        {
            "span": {"start": 0, "end": 100, "label": "T100"},
            "classes": [{"id": 0, "severity_cutoff": "moderate"}],
        }
    )


def random_sim_config(rng: np.random.Generator, seed: int) -> SimulationConfig:
    """A structurally varied but always-valid simulation config."""
    span = float(rng.uniform(20.0, 300.0))
    rates = {0: float(rng.uniform(0.0, 0.1))}
    if rng.random() < 0.5:
        rates[int(rng.integers(1, 6))] = float(rng.uniform(0.0, 0.05))
    dists = [
        DistributionSpec.fixed(float(rng.uniform(0.1, 3.0))),
        DistributionSpec("exponential", mean=float(rng.uniform(0.2, 3.0))),
        DistributionSpec("lognormal", mu=float(rng.uniform(-1.0, 0.5)), sigma=0.5),
    ]
    maintenance = None
    if rng.random() < 0.5:
        maintenance = PlannedMaintenance(
            period_hours=float(rng.uniform(20.0, 100.0)),
            duration=dists[int(rng.integers(0, 3))],
            purpose=Purpose.PREVENTATIVE if rng.random() < 0.7 else Purpose.PERFECTIVE,
        )
    return SimulationConfig(
        span_hours=span,
        class_rates=rates,
        data_failure_rate=float(rng.uniform(0.0, 0.01)),
        fraction_terminal=float(rng.uniform(0.0, 1.0)),
        fraction_restartable=float(rng.uniform(0.0, 1.0)),
        inoperable_delay=dists[int(rng.integers(0, 3))],
        support_duration=dists[int(rng.integers(0, 3))],
        planned_maintenance=maintenance,
        blockage_probability=float(rng.uniform(0.0, 0.5)),
        blockage_duration=dists[int(rng.integers(0, 3))],
        impairment_rate=float(rng.uniform(0.0, 0.05)),
        recovery_success_probability=float(rng.uniform(0.0, 1.0)),
        recovery_duration=dists[int(rng.integers(0, 3))],
        seed=seed,
    )
