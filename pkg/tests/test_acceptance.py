"""Acceptance gate: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

from __future__ import annotations

import statistics
import time

import numpy as np
import pytest

from isrm.classification import (
    CANONICAL_CLASS_NAMES,
    Failure,
    FailureSource,
    ReliabilityClassSpec,
    TriageRuleSet,
    classify,
    countable_failures,
    countable_sets,
)
from isrm.config import load_analysis_config
from isrm.errors import InvalidThreshold
from isrm.measures import downtime_budgets, laplace_trend, mtbsf
from isrm.report import assemble_report
from isrm.requirements import (
    Bound,
    DependabilityRequirement,
    Direction,
    Verdict,
    assess_percentile,
    chi_square_quantile,
    mtbsf_confidence_lower_bound,
)
from isrm.simulate import SimulationConfig, generate_trace
from isrm.trace import (
    EventKind,
    Severity,
    SpanOfInterest,
    Timestamp,
    in_service_invariant,
    validate_transitions,
)

from conftest import random_sim_config, t100_events


def _report(n: int, message: str, started: float):
    print(f"[criterion {n}] PASS - {message} ({time.time() - started:.1f}s)")


def test_criterion_1_downtime_budget_reproduction():
    started = time.time()
    five_minutes_hours = 5.0 / 60.0
    a = 1.0 - five_minutes_hours / 8760.0
    budget = downtime_budgets(a, 8760.0)
    minutes = budget.unplanned_budget_hours * 60.0
    assert abs(minutes - 5.0) / 5.0 < 1e-6

    budget = downtime_budgets(0.99999, 8760.0)
    minutes = budget.unplanned_budget_hours * 60.0
    assert abs(minutes - 5.256) / 5.256 < 1e-6
    _report(1, "unplanned budgets 5.000 min and 5.256 min within 1e-6 relative", started)


def test_criterion_2_fixture_oracle_t100():
    started = time.time()
    span = SpanOfInterest.from_hours(0, 100, "T100")
    trace = validate_transitions(t100_events(), span)

    moderate = load_analysis_config(
        {"span": {"start": 0, "end": 100}, "classes": [{"id": 0, "severity_cutoff": "moderate"}]}
    )
    report, _ = assemble_report(trace, moderate)
    rel = report["reliability"]["0"]
    av = report["availability"]
    sup = report["supportability"]

    assert av["in_service"] == 0.900
    assert rel["failure_intensity"] == 0.02
    assert rel["mtbsf"] == 30.0
    assert rel["estimated_mtbsf"] == 50.0
    assert abs(rel["laplace_u"] - 0.24495) < 1e-4
    assert av["mtbs_hours"] == 48.0
    assert av["mean_downtime_hours"] == 5.0
    assert abs(sup["support_cv"] - 0.35355) < 1e-5
    assert abs(av["inherent"] - 0.90909) < 1e-5
    assert abs(av["achieved"] - 0.91837) < 1e-5

    high = load_analysis_config(
        {"span": {"start": 0, "end": 100}, "classes": [{"id": 0, "severity_cutoff": "high"}]}
    )
    report_high, _ = assemble_report(trace, high)
    assert report_high["reliability"]["0"]["failure_intensity"] == 0.01
    _report(2, "all eleven hand-derived T100 values reproduced", started)


def test_criterion_3_in_service_invariant_over_1000_traces():
    started = time.time()
    rng = np.random.default_rng(31_337)
    for seed in range(1000):
        config = random_sim_config(rng, seed)
        events, _ = generate_trace(config)
        span = SpanOfInterest.from_hours(0, config.span_hours)
        trace = validate_transitions(events, span)  # zero transition errors
        assert in_service_invariant(trace)
    _report(3, "1000 simulated traces validate with the exact time partition", started)


def test_criterion_4_estimator_recovery():
    started = time.time()
    lam, span_hours, seeds = 0.02, 50_000.0, 200
    span = SpanOfInterest.from_hours(0, span_hours)
    spec = [ReliabilityClassSpec(id=0, name="universal")]
    rules = TriageRuleSet.accept_all()
    ok = 0
    for seed in range(seeds):
        config = SimulationConfig(
            span_hours=span_hours, class_rates={0: lam}, fraction_terminal=0.0, seed=seed
        )
        events, _ = generate_trace(config)
        trace = validate_transitions(events, span)
        fset = countable_failures(trace, rules, spec)[0]
        lam_hat = fset.count / span_hours
        est = span_hours / fset.count
        if abs(lam_hat - lam) / lam <= 0.10 and abs(est - 1.0 / lam) / (1.0 / lam) <= 0.10:
            ok += 1
    fraction = ok / seeds
    assert fraction >= 0.95
    _report(4, f"lambda and MTBSF estimates within 10% for {fraction:.1%} of {seeds} seeds", started)


def test_criterion_5_laplace_calibration_and_trend_detection():
    started = time.time()
    span_hours, lam, seeds = 2000.0, 0.02, 1000
    span = SpanOfInterest.from_hours(0, span_hours)
    spec = [ReliabilityClassSpec(id=0, name="universal")]
    rules = TriageRuleSet.accept_all()

    inside = 0
    usable = 0
    for seed in range(seeds):
        config = SimulationConfig(
            span_hours=span_hours, class_rates={0: lam}, fraction_terminal=0.0, seed=seed
        )
        events, _ = generate_trace(config)
        trace = validate_transitions(events, span)
        fset = countable_failures(trace, rules, spec)[0]
        if fset.count == 0:
            continue
        usable += 1
        u = laplace_trend([t.hours for t in fset.times], span_hours)
        if abs(u) <= 1.96:
            inside += 1
    coverage = inside / usable
    assert 0.90 <= coverage <= 0.99

    # inject a late-life intensity doubling: rate lam over [0, T/2), 2*lam after
    rng = np.random.default_rng(5)
    T, base = 1000.0, 0.06
    medians = []
    for _ in range(seeds):
        n1 = rng.poisson(base * T / 2)
        n2 = rng.poisson(2 * base * T / 2)
        times = np.concatenate(
            [rng.uniform(0, T / 2, n1), rng.uniform(T / 2, T, n2)]
        )
        if times.size == 0:
            continue
        medians.append(laplace_trend(sorted(times.tolist()), T))
    median_u = statistics.median(medians)
    assert median_u > 2.0
    _report(
        5,
        f"|u|<=1.96 for {coverage:.1%} of stationary seeds; doubling drives median u to {median_u:.2f}",
        started,
    )


def test_criterion_6_chi_square_oracle():
    started = time.time()
    assert abs(chi_square_quantile(0.95, 20) - 31.410) < 1e-3
    assert abs(chi_square_quantile(0.95, 6) - 12.592) < 1e-3
    bound = mtbsf_confidence_lower_bound([220.0] * 10, 0.95)
    assert abs(bound - 140.08) < 0.1
    _report(6, f"table quantiles matched; n=10 mean-220 lower bound {bound:.2f} h", started)


def test_criterion_7_percentile_equals_brute_force():
    started = time.time()
    rng = np.random.default_rng(77)
    for i in range(1000):
        n = int(rng.integers(1, 80))
        samples = rng.uniform(0.0, 300.0, n).tolist()
        threshold = float(rng.uniform(0.0, 300.0))
        p = float(rng.uniform(0.01, 0.99))
        req = DependabilityRequirement(
            id=f"P{i}",
            metric="mtbsf[0]",
            direction=Direction.AT_LEAST,
            threshold=threshold,
            bound=Bound.percentile(p),
        )
        brute = (sum(1 for s in samples if s >= threshold) / n) >= p
        verdict = assess_percentile(samples, req).verdict
        assert verdict is (Verdict.MET if brute else Verdict.VIOLATED)
    _report(7, "1000 random sample sets agree exactly with brute-force counting", started)


def test_criterion_8_multiclass_counting_and_cutoff_monotonicity():
    started = time.time()
    specs = [
        ReliabilityClassSpec(id=i, name=CANONICAL_CLASS_NAMES[i]) for i in range(6)
    ]
    failure = Failure(
        time=Timestamp.from_hours(10),
        origin_kind=EventKind.NTF,
        severity=Severity.HIGH,
        source=FailureSource.EXPLICIT_EVENT,
        hints=("safety", "security"),
    )
    classified = classify(failure, specs)
    span = SpanOfInterest.from_hours(0, 100)
    sets = countable_sets([classified], specs, span)
    for cid in (0, 1, 2):
        assert sets[cid].count == 1
    for cid in (3, 4, 5):
        assert sets[cid].count == 0

    rng = np.random.default_rng(88)
    order = [None, Severity.MINIMAL, Severity.MODERATE, Severity.HIGH, Severity.EXTREME]
    severities = list(Severity)
    for _ in range(200):
        failures = [
            classify(
                Failure(
                    time=Timestamp.from_hours(float(rng.uniform(0, 100))),
                    origin_kind=EventKind.NTF,
                    severity=severities[int(rng.integers(0, 4))],
                    source=FailureSource.EXPLICIT_EVENT,
                ),
                specs[:1],
            )
            for _ in range(int(rng.integers(0, 30)))
        ]
        counts = [
            countable_sets(
                failures,
                [ReliabilityClassSpec(id=0, name="universal", severity_cutoff=c)],
                span,
            )[0].count
            for c in order
        ]
        assert counts == sorted(counts, reverse=True)
    _report(8, "multi-class membership exact; raising a cut-off never raises a count", started)


def test_criterion_9_mean_versus_median_and_bounded_thresholds():
    started = time.time()
    gaps = [96.0] * 12 + [1000.0] * 3  # skewed: a few huge gaps prop up the mean
    stats = mtbsf(gaps)
    assert stats.mean > 2 * stats.median

    threshold = 100.0
    # a bare mean bound would accept this data set outright
    assert stats.mean >= threshold
    # the bounded assessor sees 12 of 15 occurrences under the threshold
    req = DependabilityRequirement(
        id="R-mtbsf",
        metric="mtbsf[0]",
        direction=Direction.AT_LEAST,
        threshold=threshold,
        bound=Bound.percentile(0.95),
    )
    assert assess_percentile(gaps, req).verdict is Verdict.VIOLATED
    # and the requirement model refuses a bare mean bound on a mean-time metric
    with pytest.raises(InvalidThreshold):
        DependabilityRequirement(
            id="R-bare",
            metric="mtbsf[0]",
            direction=Direction.AT_LEAST,
            threshold=threshold,
        )
    _report(
        9,
        f"mean {stats.mean:.1f} h vs median {stats.median:.1f} h; percentile assessor flags what a bare mean hides",
        started,
    )
