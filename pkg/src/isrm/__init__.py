"""In-service software dependability measurement.

Validates operational event traces against the in-service reference
model's mode/event vocabulary, classifies failures into reliability
classes, computes reliability, availability, supportability, and
recoverability measurements, and assesses them against bounded
dependability requirement thresholds.
"""

from .classification import (
    CountableFailureSet,
    Failure,
    FailureSource,
    MatchRule,
    ReliabilityClassSpec,
    RevealedRequirement,
    TriageOutcome,
    TriageRule,
    TriageRuleSet,
    classify,
    countable_failures,
    triage,
)
from .config import AnalysisConfig, AnalysisOptions, load_analysis_config
from .measures import (
    AvailabilitySuite,
    DowntimeBudgets,
    DowntimeCycle,
    ImpairmentOutcome,
    ImpairmentRecord,
    MtbsfStats,
    RecoverabilitySuite,
    SupportActionTag,
    SupportabilitySuite,
    SupportIntervalStats,
    availability_suite,
    downtime_budgets,
    downtime_cycles,
    estimated_mtbsf_constant_intensity,
    extract_impairments,
    failure_intensity,
    laplace_trend,
    mean_operational_availability,
    mtbsf,
    observed_reliability,
    recoverability_suite,
    support_interval_stats,
    supportability_suite,
    time_between_failures,
)
from .report import assemble_report, canonical_json, render_table
from .requirements import (
    AssessmentResult,
    Bound,
    BoundType,
    DependabilityRequirement,
    Direction,
    RequirementKind,
    Verdict,
    assess_all,
    assess_hard,
    assess_percentile,
    chi_square_quantile,
    mtbsf_confidence_lower_bound,
    overall_verdict,
)
from .simulate import DistributionSpec, GroundTruth, SimulationConfig, generate_trace
from .trace import (
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
    parse_trace,
    removed_time,
    serialize_trace,
    uptime,
    validate_transitions,
)

__version__ = "0.1.0"
