"""Topological-ordering recovery and sparse DAG estimation from covariances.

The package turns a covariance matrix (population or estimated) into a
variable ordering by greedily minimizing the Euclidean norm of the Cholesky
diagonal, checks the weak-majorization condition that makes that ordering
identify the true DAG, and recovers sparse edge weights with an l1-penalized
triangular-factor fit. A simulation and evaluation harness plus a CLI sit on
top.
"""

from .bivariate import BivariateDecision, conditional_variance, decide_bivariate
from .cscs import (
    CscsConfig,
    EdgeSet,
    cscs_fit,
    cscs_objective,
    default_lambda,
    default_tau,
    edges_from_factor,
    edges_from_precision_factor,
    lambda_grid,
    lambda_max,
    select_lambda,
    support_diagnostics,
    threshold_factor,
)
from .errors import (
    CholordError,
    DataError,
    DegenerateColumnWarning,
    DimensionMismatch,
    Diverged,
    DowndateBreaksPD,
    EmptyGrid,
    IndexOutOfRange,
    InvalidRange,
    LengthMismatch,
    NoEdges,
    NonNumericData,
    NotPositiveDefinite,
    NotSorted,
    NumericalError,
    SingularFactor,
    TooFewRows,
    TooFewSamples,
    TooLarge,
    WindowTooLarge,
)
from .linalg import (
    chol_append_row,
    chol_downdate_rank1,
    cholesky,
    dichol,
    sample_covariance,
    triangular_solve,
    validate_covariance,
)
from .major import (
    MajorizationReport,
    TTransform,
    apply_t_transform,
    check_majorization,
    majorization_table,
    prefix_check,
    schur_criterion,
    weakly_majorizes,
)
from .metrics import MetricsReport, compare_graphs, is_topological, varsortability
from .ordering import (
    OrderStats,
    benchmark_order,
    debias_constants,
    debiased_cholesky,
    exhaustive_order,
    greedy_order,
    greedy_order_with_stats,
    loglog_slope,
)
from .pipeline import ReplicateResult, fit_edges, rolling_windows, structure_recovery_replicate
from .sem import (
    Dataset,
    NoiseSpec,
    Ordering,
    WeightedDag,
    make_bivariate,
    make_scenario,
    population_covariance,
    random_dag,
    sample_sem,
    scenario_noise,
)

__version__ = "0.1.0"
