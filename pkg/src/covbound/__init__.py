"""Certified bounds on the covariance ambiguity of bandlimited signals.

A zero-mean wide-sense-stationary signal whose power concentrates on a
known frequency band, and whose covariance sequence is observed only on
the integer lags ``-n..n``, is not pinned down at fractional lags.  This
package computes a sharp worst-case radius for that ambiguity: for each
real lag it bounds how far two covariance functions consistent with the
same data can drift apart, certifies the bound with an explicit dual
measure, and (for the comparison) computes by linear programming the
exact two-sided envelope the bound is tested against.

Frequencies are in cycles per sample throughout, so a band is a subset
of [-1/2, 1/2] and integer lags are the sampling grid.
"""

from .core import (
    DEFAULT_GRID_STEP,
    REAL_COEFF_RTOL,
    BadStep,
    ComplexMeasure,
    DiscreteMeasurePair,
    EmptyBand,
    FrequencyBand,
    FrequencyGrid,
    GridMismatch,
    MalformedInterval,
    ProblemSpec,
    TrigPolynomial,
    covariance_at,
    discretize,
    eval_kernel,
    eval_poly,
    make_band,
    trig_basis,
)
from .conic import (
    ConeDims,
    Infeasible,
    LinearProgram,
    LpSolution,
    MinimaxProblem,
    MinimaxSolution,
    SolveDiagnostics,
    SolverConfig,
    Status,
    Unbounded,
    solve_lp,
    solve_minimax,
)
from .bound import (
    BoundReport,
    DegenerateZeroResidual,
    dual_bound,
    extract_support,
    upper_bound,
)
from .exact import (
    DEFAULT_NUM_PHASES,
    PhaseSweepResult,
    cross_tolerance,
    gap,
    phase_sweep,
    sharpness_tolerance,
    solve_fixed_phase,
)
from .analysis import (
    SHIFT_PROBES,
    CheckStatus,
    DiagnosticCheck,
    DiagnosticsReport,
    RefinementReport,
    SweepCurve,
    diagnostics_battery,
    refinement_study,
    sweep_tau,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GRID_STEP",
    "DEFAULT_NUM_PHASES",
    "REAL_COEFF_RTOL",
    "SHIFT_PROBES",
    "BadStep",
    "BoundReport",
    "CheckStatus",
    "ComplexMeasure",
    "ConeDims",
    "DegenerateZeroResidual",
    "DiagnosticCheck",
    "DiagnosticsReport",
    "DiscreteMeasurePair",
    "EmptyBand",
    "FrequencyBand",
    "FrequencyGrid",
    "GridMismatch",
    "Infeasible",
    "LinearProgram",
    "LpSolution",
    "MalformedInterval",
    "MinimaxProblem",
    "MinimaxSolution",
    "PhaseSweepResult",
    "ProblemSpec",
    "RefinementReport",
    "SolveDiagnostics",
    "SolverConfig",
    "Status",
    "SweepCurve",
    "TrigPolynomial",
    "Unbounded",
    "covariance_at",
    "cross_tolerance",
    "diagnostics_battery",
    "discretize",
    "dual_bound",
    "eval_kernel",
    "eval_poly",
    "extract_support",
    "gap",
    "make_band",
    "phase_sweep",
    "refinement_study",
    "sharpness_tolerance",
    "solve_fixed_phase",
    "solve_lp",
    "solve_minimax",
    "sweep_tau",
    "upper_bound",
    "__version__",
]
