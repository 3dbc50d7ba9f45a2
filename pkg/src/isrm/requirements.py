"""Dependability requirements and the threshold assessment engine.

A dependability requirement binds a report metric to a threshold with a
direction and a bound. Hard bounds compare the observed scalar
directly; mean-time metrics must instead carry a percentile or
confidence bound, which is assessed against the per-occurrence samples
behind the mean:

* percentile(p): met iff the fraction of samples at or above the
  threshold is at least p (nonparametric, empirical counting);
* confidence(level): met iff the one-sided lower confidence bound of
  the mean, 2*sum(samples) / chi2(level, 2n) under an exponential
  inter-occurrence assumption, is at or above the threshold.

All comparisons are inclusive. A metric that is undefined on the data
yields an indeterminate verdict, never a fabricated pass or fail.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from scipy import stats as _sstats

from .errors import EmptyInput, InvalidThreshold, UnitMismatch, UnknownMetric


class RequirementKind(str, Enum):
    OUTCOME = "outcome"
    CAPABILITY = "capability"
    REVEALED = "revealed"
    DEPENDABILITY = "dependability"


class Direction(str, Enum):
    AT_MOST = "at_most"
    AT_LEAST = "at_least"


class BoundType(str, Enum):
    HARD = "hard"
    PERCENTILE = "percentile"
    CONFIDENCE = "confidence"


@dataclass(frozen=True)
class Bound:
    type: BoundType
    p: float | None = None       # percentile fraction, in (0, 1)
    level: float | None = None   # confidence level, in (0, 1)

    def __post_init__(self):
        if self.type is BoundType.PERCENTILE:
            if self.p is None or not 0.0 < self.p < 1.0:
                raise InvalidThreshold(f"percentile p must lie in (0, 1), got {self.p}")
        elif self.type is BoundType.CONFIDENCE:
            if self.level is None or not 0.0 < self.level < 1.0:
                raise InvalidThreshold(
                    f"confidence level must lie in (0, 1), got {self.level}"
                )

    @classmethod
    def hard(cls) -> "Bound":
        return cls(BoundType.HARD)

    @classmethod
    def percentile(cls, p: float) -> "Bound":
        return cls(BoundType.PERCENTILE, p=p)

    @classmethod
    def confidence(cls, level: float) -> "Bound":
        return cls(BoundType.CONFIDENCE, level=level)


class Verdict(str, Enum):
    MET = "met"
    VIOLATED = "violated"
    INDETERMINATE = "indeterminate"


# Metric registry: canonical units, whether the name takes a [class] index,
# where the scalar lives in the report, and which sample list backs
# bounded assessment. Mean-time metrics may not use hard bounds.
@dataclass(frozen=True)
class MetricInfo:
    units: str
    indexed: bool = False
    report_path: tuple[str, ...] | None = None
    samples_key: str | None = None
    mean_time: bool = False


METRICS: dict[str, MetricInfo] = {
    "failure_intensity": MetricInfo("per_hour", indexed=True, report_path=("reliability", "failure_intensity")),
    "failure_count": MetricInfo("count", indexed=True, report_path=("reliability", "count")),
    "mtbsf": MetricInfo("hours", indexed=True, report_path=("reliability", "mtbsf"), samples_key="tbsf", mean_time=True),
    "estimated_mtbsf": MetricInfo("hours", indexed=True, report_path=("reliability", "estimated_mtbsf"), samples_key="tbsf", mean_time=True),
    "observed_reliability": MetricInfo("probability", indexed=True, report_path=("reliability", "observed_reliability")),
    "laplace_u": MetricInfo("dimensionless", indexed=True, report_path=("reliability", "laplace_u")),
    "tbsf": MetricInfo("hours", indexed=True, samples_key="tbsf"),
    "availability_in_service": MetricInfo("probability", report_path=("availability", "in_service")),
    "availability_operational": MetricInfo("probability", report_path=("availability", "operational")),
    "availability_inherent": MetricInfo("probability", report_path=("availability", "inherent")),
    "availability_achieved": MetricInfo("probability", report_path=("availability", "achieved")),
    "unavailability": MetricInfo("probability", report_path=("availability", "unavailability")),
    "uptime": MetricInfo("hours", report_path=("time_accounting", "uptime_hours")),
    "downtime": MetricInfo("hours", report_path=("time_accounting", "downtime_hours")),
    "removed_time": MetricInfo("hours", report_path=("time_accounting", "removed_hours")),
    "unplanned_downtime": MetricInfo("hours", report_path=("availability", "unplanned_downtime_hours")),
    "mtbs": MetricInfo("hours", report_path=("availability", "mtbs_hours"), samples_key="time_between_support", mean_time=True),
    "mean_downtime": MetricInfo("hours", report_path=("availability", "mean_downtime_hours"), samples_key="downtime_cycle_durations", mean_time=True),
    "mttr": MetricInfo("hours", report_path=("availability", "mttr_hours"), samples_key="times_to_repair", mean_time=True),
    "repair_cycle_count": MetricInfo("count", report_path=("availability", "repair_cycle_count")),
    "cycle_count": MetricInfo("count", report_path=("supportability", "cycle_count")),
    "average_support_cycle_time": MetricInfo("hours", report_path=("supportability", "average_support_cycle_time"), samples_key="support_cycle_times", mean_time=True),
    "span_support_cycle_time": MetricInfo("hours", report_path=("supportability", "span_support_cycle_time")),
    "support_cv": MetricInfo("dimensionless", report_path=("supportability", "support_cv")),
    "support_update_count": MetricInfo("count", report_path=("supportability", "support_update_count")),
    "mttir": MetricInfo("hours", report_path=("recoverability", "mean_time_to_impairment_recovery"), samples_key="recovery_durations", mean_time=True),
    "mean_data_lossage": MetricInfo("user_units", report_path=("recoverability", "mean_data_lossage")),
    "mean_capability_lossage": MetricInfo("fraction", report_path=("recoverability", "mean_capability_lossage")),
    "recovery_success_rate": MetricInfo("probability", report_path=("recoverability", "recovery_success_rate")),
    "recovery_failure_intensity": MetricInfo("per_hour", report_path=("recoverability", "recovery_failure_intensity")),
}

_METRIC_RE = re.compile(r"^([a-z_]+)(?:\[(\d+)\])?$")


def parse_metric(ref: str) -> tuple[str, int | None]:
    """Split a metric reference like failure_intensity[0] into (name, class index)."""
    m = _METRIC_RE.match(ref)
    if not m:
        raise ValueError(f"malformed metric reference {ref!r}")
    name, idx = m.group(1), m.group(2)
    info = METRICS.get(name)
    if info is None:
        raise ValueError(f"unknown metric {name!r}")
    if info.indexed and idx is None:
        raise ValueError(f"metric {name!r} needs a [class] index")
    if not info.indexed and idx is not None:
        raise ValueError(f"metric {name!r} does not take a class index")
    return name, int(idx) if idx is not None else None


@dataclass(frozen=True)
class DependabilityRequirement:
    """A bounded threshold on one report metric."""

    id: str
    metric: str
    direction: Direction
    threshold: float
    bound: Bound = field(default_factory=Bound.hard)
    units: str | None = None
    traces_to: tuple[str, ...] = ()
    text: str = ""

    def __post_init__(self):
        name, _ = parse_metric(self.metric)
        info = METRICS[name]
        if info.mean_time and self.bound.type is BoundType.HARD:
            raise InvalidThreshold(
                f"{self.id}: mean-time metric {name!r} must carry a percentile "
                "or confidence bound, not a bare mean"
            )
        if self.bound.type is not BoundType.HARD and self.direction is not Direction.AT_LEAST:
            raise InvalidThreshold(
                f"{self.id}: percentile/confidence bounds apply to at_least requirements"
            )
        if self.units is not None and self.units != info.units:
            raise UnitMismatch(
                f"{self.id}: metric {name!r} is measured in {info.units}, got {self.units!r}"
            )


@dataclass(frozen=True)
class TraceabilityRequirement:
    """An outcome, capability, or revealed requirement held for traceability only."""

    id: str
    kind: RequirementKind
    text: str
    traces_to: tuple[str, ...] = ()


@dataclass(frozen=True)
class AssessmentResult:
    requirement_id: str
    metric: str
    verdict: Verdict
    observed: float | None
    threshold: float
    evidence: str


def chi_square_quantile(q: float, dof: int) -> float:
    """Quantile of the chi-square distribution with `dof` degrees of freedom."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {q}")
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    return float(_sstats.chi2.ppf(q, dof))


def mtbsf_confidence_lower_bound(gaps: list[float], level: float) -> float:
    """One-sided lower confidence bound for the mean inter-failure time.

    Assumes exponentially distributed gaps, under which 2*lambda*sum(gaps)
    is chi-square with 2n degrees of freedom; the bound is
    2*sum(gaps) / chi2(level, 2n).
    """
    if not gaps:
        raise EmptyInput("confidence bound requires at least one gap")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return 2.0 * sum(gaps) / chi_square_quantile(level, 2 * len(gaps))


def _compare(observed: float, direction: Direction, threshold: float) -> bool:
    if direction is Direction.AT_MOST:
        return observed <= threshold
    return observed >= threshold


def assess_hard(observed: float, req: DependabilityRequirement) -> AssessmentResult:
    """Inclusive comparison of an observed scalar against a hard threshold."""
    met = _compare(observed, req.direction, req.threshold)
    op = "<=" if req.direction is Direction.AT_MOST else ">="
    return AssessmentResult(
        requirement_id=req.id,
        metric=req.metric,
        verdict=Verdict.MET if met else Verdict.VIOLATED,
        observed=observed,
        threshold=req.threshold,
        evidence=f"observed {observed:.6g} {op} {req.threshold:.6g}: {met} (hard bound)",
    )


def assess_percentile(samples: list[float], req: DependabilityRequirement) -> AssessmentResult:
    """Nonparametric percentile assessment over per-occurrence samples.

    Met iff at least fraction p of the samples are at or above the
    threshold; with no samples the requirement is indeterminate.
    """
    p = req.bound.p
    if not samples:
        return AssessmentResult(
            requirement_id=req.id,
            metric=req.metric,
            verdict=Verdict.INDETERMINATE,
            observed=None,
            threshold=req.threshold,
            evidence="no samples: percentile undefined on this data",
        )
    satisfied = sum(1 for s in samples if s >= req.threshold)
    frac = satisfied / len(samples)
    met = frac >= p
    return AssessmentResult(
        requirement_id=req.id,
        metric=req.metric,
        verdict=Verdict.MET if met else Verdict.VIOLATED,
        observed=frac,
        threshold=req.threshold,
        evidence=(
            f"{satisfied}/{len(samples)} = {frac:.4f} of samples >= {req.threshold:.6g}; "
            f"required fraction {p:.4f}"
        ),
    )


def assess_confidence(samples: list[float], req: DependabilityRequirement) -> AssessmentResult:
    """Chi-square lower-confidence-bound assessment of a mean-time metric."""
    level = req.bound.level
    if not samples:
        return AssessmentResult(
            requirement_id=req.id,
            metric=req.metric,
            verdict=Verdict.INDETERMINATE,
            observed=None,
            threshold=req.threshold,
            evidence="no samples: confidence bound undefined on this data",
        )
    bound = mtbsf_confidence_lower_bound(samples, level)
    met = bound >= req.threshold
    n = len(samples)
    return AssessmentResult(
        requirement_id=req.id,
        metric=req.metric,
        verdict=Verdict.MET if met else Verdict.VIOLATED,
        observed=bound,
        threshold=req.threshold,
        evidence=(
            f"one-sided {level:.0%} lower bound {bound:.4f} h = "
            f"2*{sum(samples):.4f}/chi2({level}, {2 * n}) over n={n} samples, "
            f"exponential inter-occurrence assumption; threshold {req.threshold:.6g}"
        ),
    )


def _resolve_scalar(report: dict, name: str, index: int | None):
    info = METRICS[name]
    if info.report_path is None:
        return None
    section, key = info.report_path
    node = report.get(section, {})
    if info.indexed:
        node = node.get(str(index), {})
    return node.get(key)


def _resolve_samples(samples: dict, name: str, index: int | None) -> list[float]:
    info = METRICS[name]
    key = info.samples_key
    if key is None:
        return []
    if info.indexed:
        key = f"{key}[{index}]"
    return list(samples.get(key, []))


def assess_all(
    report: dict,
    samples: dict,
    reqs: list[DependabilityRequirement],
) -> list[AssessmentResult]:
    """Assess every requirement against a measurement report and its raw samples.

    Results come back in requirement order; a metric name the registry
    does not know raises UnknownMetric, while a known metric undefined
    on this data yields an indeterminate result.
    """
    results: list[AssessmentResult] = []
    for req in reqs:
        try:
            name, index = parse_metric(req.metric)
        except ValueError:
            raise UnknownMetric(req.id, req.metric) from None
        if req.bound.type is BoundType.PERCENTILE:
            results.append(assess_percentile(_resolve_samples(samples, name, index), req))
        elif req.bound.type is BoundType.CONFIDENCE:
            results.append(assess_confidence(_resolve_samples(samples, name, index), req))
        else:
            observed = _resolve_scalar(report, name, index)
            if observed is None:
                results.append(
                    AssessmentResult(
                        requirement_id=req.id,
                        metric=req.metric,
                        verdict=Verdict.INDETERMINATE,
                        observed=None,
                        threshold=req.threshold,
                        evidence=f"metric {req.metric} is undefined on this data",
                    )
                )
            else:
                results.append(assess_hard(float(observed), req))
    return results


def overall_verdict(results: list[AssessmentResult]) -> Verdict:
    """Fold of individual verdicts: any violation dominates; none means met."""
    if any(r.verdict is Verdict.VIOLATED for r in results):
        return Verdict.VIOLATED
    return Verdict.MET
