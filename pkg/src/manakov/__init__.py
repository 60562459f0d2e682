"""Stochastic Manakov system: coupled NLS equations with multiplicative
gradient noise, integrated by unitary Cayley propagators.

Public surface: spatial model (grids, fields, soliton, nonlinearities),
reproducible Brownian paths, the step propagator with FD and spectral
backends, five time-stepping schemes with a trajectory driver, discrete
norms, and the experiment drivers behind the `manakov` CLI.
"""
from ._version import __version__
from .errors import (
    BackendBoundaryMismatch,
    BadFactor,
    BlowUp,
    ConfigError,
    DegenerateFit,
    DegenerateGrid,
    IncompatibleTimelines,
    InvalidRadius,
    ManakovError,
    NoConvergence,
    NonDivisibleDomain,
    NumericalFailure,
    SingularPivot,
)
from .model import (
    Boundary,
    FieldState,
    Grid,
    SolitonParams,
    cubic_nonlinearity,
    gaussian_initial_condition,
    make_grid,
    pauli_combination,
    smooth_cutoff,
    soliton_initial_condition,
    truncated_nonlinearity,
)
from .noise import (
    BrownianPath,
    NoiseConfig,
    coarsen,
    load_path,
    sample_path,
    save_path,
    scaled_chi,
)
from .blocktridiag import (
    BlockTridiagonalMatrix,
    factorize,
    invert2,
    matvec,
    solve,
    to_dense,
)
from .propagator import (
    Backend,
    StepOperator,
    apply_cayley,
    apply_generator,
    assemble,
    compose_apply,
)
from .integrators import (
    CUBIC,
    FixedPointConfig,
    NO_NONLINEARITY,
    Nonlinearity,
    SchemeId,
    Trajectory,
    TrajectoryState,
    nonlinear_phase_flow,
    run_trajectory,
    step_cn,
    step_lt,
    step_modexp,
    step_relax,
    step_sexp,
)
from .observables import (
    ErrorReport,
    error_vs_reference,
    first_difference,
    h1_norm,
    h1_norm_squared,
    intensities,
    l2_norm,
)
from .experiments import (
    ConservationConfig,
    ConservationResult,
    ConvergenceStudyConfig,
    CSV_COLUMNS,
    EvolutionConfig,
    EvolutionResult,
    FitResult,
    ResultRecord,
    StrongConvergenceResult,
    WorkPrecisionConfig,
    WorkPrecisionResult,
    fit_slope,
    read_records_csv,
    run_conservation,
    run_evolution,
    run_strong_convergence,
    run_work_precision,
    strip_timing_columns,
    time_at_error,
    write_conservation_csv,
    write_evolution_csv,
    write_records_csv,
    write_records_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
