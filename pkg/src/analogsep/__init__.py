"""Numerical laboratory for exact separation of mixed discrete-continuous signals.

The package generates block sources whose coordinates are atoms with some
probability and continuous draws otherwise, measures them with random linear
maps, and recovers them by exhaustive search over generalized support
patterns.  Exact finite-size oracles (binomial convolutions, closed-form
small-ball constants) back every Monte Carlo experiment, and a box-counting
estimator ties the observed phase transitions to the information dimension
of the source.
"""

from .boxdim import (
    DimensionEstimate,
    ScaleSpec,
    covering_number,
    estimate_dimension,
    mixed_rate,
)
from .concentration import (
    BoundGrid,
    BoundReport,
    ball_volume,
    check_small_ball_bound,
    default_bound_grid,
    empirical_small_ball_prob,
    mixed_transversality,
    small_ball_constant,
    sparse_transversality,
    write_bound_reports_csv,
)
from .experiments import (
    ExperimentConfig,
    ExperimentRecord,
    SweepCell,
    emit_results,
    predict_error_floor,
    predict_success,
    run_phase_sweep,
    run_single_trial,
    trial_streams,
)
from .measure import (
    EnsembleA,
    MeasurementSystem,
    RankDeficiencyError,
    build_A,
    build_B,
    load_matrix_csv,
    measure,
    numerical_rank,
    sample_ball_uniform,
    save_matrix_csv,
)
from .separator import (
    BACKEND,
    DEFAULT_BUDGET,
    BudgetExceededError,
    CandidateSet,
    SeparationOutcome,
    SeparatorTolerances,
    enumerate_solutions,
    enumeration_size,
    separate,
    solve_on_pattern,
)
from .sources import (
    ContinuousLaw,
    MixedSourceSpec,
    SourceVector,
    SpecError,
    generalized_support,
    sample_source,
    split_point,
    support_cap,
    support_size_distribution,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # sources
    "ContinuousLaw", "MixedSourceSpec", "SourceVector", "SpecError",
    "generalized_support", "sample_source", "split_point", "support_cap",
    "support_size_distribution", "validate_spec",
    # measurement
    "EnsembleA", "MeasurementSystem", "RankDeficiencyError", "build_A",
    "build_B", "load_matrix_csv", "measure", "numerical_rank",
    "sample_ball_uniform", "save_matrix_csv",
    # separator
    "BACKEND", "DEFAULT_BUDGET", "BudgetExceededError", "CandidateSet",
    "SeparationOutcome", "SeparatorTolerances", "enumerate_solutions",
    "enumeration_size", "separate", "solve_on_pattern",
    # dimension
    "DimensionEstimate", "ScaleSpec", "covering_number", "estimate_dimension",
    "mixed_rate",
    # concentration and transversality
    "BoundGrid", "BoundReport", "ball_volume", "check_small_ball_bound",
    "default_bound_grid", "empirical_small_ball_prob", "mixed_transversality",
    "small_ball_constant", "sparse_transversality", "write_bound_reports_csv",
    # experiments
    "ExperimentConfig", "ExperimentRecord", "SweepCell", "emit_results",
    "predict_error_floor", "predict_success", "run_phase_sweep",
    "run_single_trial", "trial_streams",
]
