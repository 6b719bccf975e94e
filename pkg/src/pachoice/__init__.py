"""Typed preferential-attachment graphs with a choice-based edge step.

Simulator, exact small-state oracles, closed-form regime predictions and
ensemble experiment tooling for the growth process in which each step adds
one typed vertex with m weight-proportional edges, then k extra edges whose
targets are chosen as the highest-degree member of a d-sample drawn within
the source vertex's type.
"""

from .errors import (
    BadCounts,
    BadProbs,
    BadSampleSize,
    BetaOutOfRange,
    DomainError,
    DuplicateVertex,
    EmptyIndex,
    InsufficientData,
    NoCandidate,
    NonpositiveWeight,
    NotCritical,
    NotSupercritical,
    PAChoiceError,
    TooLargeForOracle,
    UnknownVertex,
)
from .experiments import (
    AggregateStats,
    HubStats,
    RegimeEstimate,
    SweepResult,
    aggregate_regime_statistics,
    derive_run_seed,
    estimate_regime_statistic,
    hub_report,
    leadership_changes_after,
    run_summary,
    sweep,
)
from .model import (
    EdgeWeighting,
    GraphState,
    ModelParams,
    StepOutcome,
    draw_type,
    initial_state,
    new_params,
)
from .oracle import (
    MonteCarloStep,
    StepExpectation,
    expectation_oracle,
    monte_carlo_step,
    pair_outcome_distribution,
)
from .process import (
    GeometricSchedule,
    RunConfig,
    do_step,
    resolve_checkpoints,
    run,
    run_reference,
)
from .sampler import WeightIndex
from .theory import (
    Regime,
    TheorySummary,
    classify_regime,
    critical_constant,
    drift,
    drift_slope,
    extrapolate_limit,
    mean_field_limit,
    mean_field_trajectory,
    regime_parameter,
    solve_fixed_point,
    type_drift,
)
from .trajectory import (
    CheckpointRow,
    Trajectory,
    load_trajectory,
    params_from_dict,
    params_to_dict,
    save_trajectory,
    trajectory_csv_bytes,
)

__version__ = "0.1.0"
