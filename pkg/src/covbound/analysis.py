"""Experiment orchestration: lag sweeps, diagnostics, refinement studies.

Everything here drives the bound and pair engines over many instances
and assembles plain-data reports: curves of the bound (and optionally
the constructive lower bound and their gap) against the query lag,
a battery of structural self-checks on one instance, and discretization
refinement ladders.  No plotting; the CLI serializes these objects and
external tooling draws them.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import enum
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .bound import DegenerateZeroResidual, upper_bound
from .conic import SolverConfig
from .core import (
    DEFAULT_GRID_STEP,
    REAL_COEFF_RTOL,
    FrequencyBand,
    FrequencyGrid,
    ProblemSpec,
    discretize,
    eval_kernel,
)
from .exact import DEFAULT_NUM_PHASES, phase_sweep

__all__ = [
    "SHIFT_PROBES",
    "SweepCurve",
    "sweep_tau",
    "CheckStatus",
    "DiagnosticCheck",
    "DiagnosticsReport",
    "diagnostics_battery",
    "RefinementReport",
    "refinement_study",
]

# Band-center offsets probed by the shift-invariance diagnostic.
SHIFT_PROBES = (0.05, 0.1, 0.2)

_SHIFT_TOL = 2e-6
_MOMENT_TOL = 1e-6
_TV_TOL = 1e-6
_ALIGN_TOL = 1e-6
_SYMMETRIZATION_RTOL = 1e-4
_DUALITY_TOL = 1e-6
_REFINEMENT_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class SweepCurve:
    """Bound (and optional pair/gap) values over a lag grid.

    ``bound_values`` and friends hold ``None`` where the corresponding
    solve failed; entries are never fabricated.  ``metadata`` carries
    the grid step, phase count, solver configuration and a creation
    timestamp, enough to regenerate the curve exactly.
    """

    band: FrequencyBand
    n: int
    sigma2: float
    tau_values: "tuple[float, ...]"
    bound_values: "tuple[float | None, ...]"
    exact_values: "tuple[float | None, ...] | None"
    gap_values: "tuple[float | None, ...] | None"
    metadata: dict

    def __post_init__(self):
        m = len(self.tau_values)
        for name in ("bound_values", "exact_values", "gap_values"):
            col = getattr(self, name)
            if col is not None and len(col) != m:
                raise ValueError(f"{name} must align with tau_values")


def _sweep_point(
    band: FrequencyBand,
    n: int,
    sigma2: float,
    tau: float,
    step: float,
    num_phases: int,
    include_exact: bool,
    cfg: SolverConfig | None,
) -> "tuple[float | None, float | None, float | None]":
    spec = ProblemSpec(band, n, float(tau), sigma2)
    grid = discretize(band, step)
    try:
        bound_value = upper_bound(spec, grid, cfg).bound
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        return None, None, None
    if not include_exact:
        return bound_value, None, None
    try:
        swept = phase_sweep(spec, grid, num_phases, cfg).value
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        return bound_value, None, None
    return bound_value, swept, bound_value - swept


def sweep_tau(
    band: FrequencyBand,
    n: int,
    sigma2: float,
    tau_range: "tuple[float, float]",
    num_tau: int,
    include_exact: bool = False,
    cfg: SolverConfig | None = None,
    *,
    step: float = DEFAULT_GRID_STEP,
    num_phases: int = DEFAULT_NUM_PHASES,
    jobs: int = 1,
) -> SweepCurve:
    """Evaluate the bound on a uniform lag grid, endpoints included.

    With ``include_exact`` every lag additionally runs a phase sweep and
    the curve carries the lower-bound and gap columns.  Lags whose solve
    raises are recorded as ``None`` and the sweep continues.  ``jobs``
    beyond one fans the (independent, deterministic) per-lag solves out
    to worker processes; assembly order is by lag index either way.
    """
    lo, hi = float(tau_range[0]), float(tau_range[1])
    if hi < lo:
        raise ValueError("tau_range must satisfy lo <= hi")
    if num_tau < 2:
        raise ValueError("num_tau must be at least 2")
    taus = np.linspace(lo, hi, num_tau)
    args = [
        (band, n, sigma2, float(t), step, num_phases, include_exact, cfg)
        for t in taus
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point_star, args))
    else:
        rows = [_sweep_point(*a) for a in args]
    bounds, exacts, gaps = zip(*rows)
    metadata = {
        "grid_step": step,
        "num_phases": num_phases if include_exact else None,
        "solver": dataclasses.asdict(cfg or SolverConfig()),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    return SweepCurve(
        band=band,
        n=n,
        sigma2=sigma2,
        tau_values=tuple(float(t) for t in taus),
        bound_values=bounds,
        exact_values=exacts if include_exact else None,
        gap_values=gaps if include_exact else None,
        metadata=metadata,
    )


def _sweep_point_star(args):
    return _sweep_point(*args)


class CheckStatus(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not applicable"


@dataclass(frozen=True)
class DiagnosticCheck:
    name: str
    status: CheckStatus
    measured: float | None
    tolerance: float | None
    detail: str = ""


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    """Pass/fail battery over one bound instance."""

    spec: ProblemSpec
    checks: "tuple[DiagnosticCheck, ...]"

    def passed(self) -> bool:
        return all(c.status is not CheckStatus.FAIL for c in self.checks)

    def __getitem__(self, name: str) -> DiagnosticCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name, ok, measured, tol, detail=""):
    status = CheckStatus.PASS if ok else CheckStatus.FAIL
    return DiagnosticCheck(name, status, float(measured), tol, detail)


def _not_applicable(name, detail):
    return DiagnosticCheck(name, CheckStatus.NOT_APPLICABLE, None, None, detail)


def diagnostics_battery(
    spec: ProblemSpec, grid: FrequencyGrid, cfg: SolverConfig | None = None
) -> DiagnosticsReport:
    """Structural self-checks on one instance, reported not raised.

    Symmetric bands additionally get the real-coefficient, extremal-set
    symmetry and certificate symmetrization checks; on asymmetric bands
    those are marked not applicable (the guarantees require the mirror
    symmetry, and reflection does not even map the grid to itself).
    """
    rep = upper_bound(spec, grid, cfg)
    scale = 2.0 * spec.sigma2
    t_star = rep.bound / scale
    symmetric = (
        spec.band.is_symmetric() and grid.reflection_permutation() is not None
    )
    checks: "list[DiagnosticCheck]" = []

    coeffs = rep.q0.coeffs
    if symmetric:
        cmax = float(np.max(np.abs(coeffs)))
        imax = float(np.max(np.abs(coeffs.imag))) / (1.0 + cmax)
        checks.append(_check("real coefficients", imax <= REAL_COEFF_RTOL,
                             imax, REAL_COEFF_RTOL))
    else:
        checks.append(_not_applicable("real coefficients", "band not symmetric"))

    if not symmetric:
        checks.append(_not_applicable("extremal set symmetry", "band not symmetric"))
    elif isinstance(rep.omega, DegenerateZeroResidual):
        checks.append(_not_applicable("extremal set symmetry", "zero residual"))
    else:
        om = np.sort(np.asarray(rep.omega))
        miss = float(np.max(np.abs(om + om[::-1])))
        checks.append(_check("extremal set symmetry", miss <= grid.step * (1 + 1e-9),
                             miss, grid.step))

    moments = float(np.max(np.abs(rep.psi0.moment(spec.lags))))
    checks.append(_check("annihilator membership", moments <= _MOMENT_TOL,
                         moments, _MOMENT_TOL))

    tv = rep.psi0.tv_norm()
    checks.append(_check("certificate norm", tv <= 1.0 + _TV_TOL, tv, 1.0 + _TV_TOL))

    if symmetric:
        asym = rep.psi0.weights - rep.psi0.conj_reflect().weights
        resid = 0.5 * float(np.abs(asym).sum())
        budget = _SYMMETRIZATION_RTOL * max(tv, 1e-12)
        checks.append(_check("certificate symmetrization", resid <= budget,
                             resid, budget))
    else:
        checks.append(_not_applicable("certificate symmetrization",
                                      "band not symmetric"))

    align = float(np.real(np.sum(
        eval_kernel(spec.tau, grid.points) * rep.psi0.weights)))
    short = t_star - align
    checks.append(_check("alignment", short <= _ALIGN_TOL, short, _ALIGN_TOL))

    worst_shift = 0.0
    for dtheta in SHIFT_PROBES:
        moved = spec.band.shifted(dtheta)
        moved_rep = upper_bound(
            ProblemSpec(moved, spec.n, spec.tau, spec.sigma2),
            discretize(moved, grid.step),
            cfg,
        )
        worst_shift = max(worst_shift, abs(moved_rep.bound - rep.bound))
    shift_budget = _SHIFT_TOL * spec.sigma2
    checks.append(_check("shift invariance", worst_shift <= shift_budget,
                         worst_shift, shift_budget,
                         detail=f"probes {SHIFT_PROBES}"))

    gap = abs(rep.duality_gap) / scale
    checks.append(_check("duality gap", gap <= _DUALITY_TOL, gap, _DUALITY_TOL))

    return DiagnosticsReport(spec=spec, checks=tuple(checks))


@dataclass(frozen=True, eq=False)
class RefinementReport:
    """Bound and sweep values on a discretization refinement ladder.

    ``bound_values[i]`` belongs to ``grid_steps[i]``;
    ``sweep_values[i][j]`` to ``(grid_steps[i], phase_counts[j])``.
    ``stable`` is the grid-refinement verdict: successive bound and
    sweep deltas all within ``tolerance``.  Phase-doubling deltas are
    reported separately since their budget is different (they should be
    tiny and essentially one-sided).
    """

    spec: ProblemSpec
    grid_steps: "tuple[float, ...]"
    phase_counts: "tuple[int, ...]"
    bound_values: "tuple[float, ...]"
    sweep_values: "tuple[tuple[float, ...], ...] | None"
    bound_deltas: "tuple[float, ...]"
    sweep_deltas: "tuple[float, ...]"
    phase_deltas: "tuple[float, ...]"
    tolerance: float
    stable: bool


def refinement_study(
    spec: ProblemSpec,
    cfg: SolverConfig | None = None,
    *,
    step: float = DEFAULT_GRID_STEP,
    num_phases: int = DEFAULT_NUM_PHASES,
    include_exact: bool = True,
    tolerance: float = _REFINEMENT_TOL,
) -> RefinementReport:
    """Quantify discretization error by halving the knobs twice.

    Runs the bound at grid steps ``step``, ``step/2`` and ``step/4`` and
    (optionally) the phase sweep at each grid with ``num_phases`` and
    ``2 * num_phases`` phases, then reports successive deltas.
    """
    steps = (step, step / 2.0, step / 4.0)
    phases = (num_phases, 2 * num_phases)
    bounds: "list[float]" = []
    sweeps: "list[tuple[float, ...]]" = []
    for s in steps:
        grid = discretize(spec.band, s)
        bounds.append(upper_bound(spec, grid, cfg).bound)
        if include_exact:
            sweeps.append(tuple(
                phase_sweep(spec, grid, p, cfg).value for p in phases
            ))
    bound_deltas = tuple(
        abs(bounds[i + 1] - bounds[i]) for i in range(len(steps) - 1)
    )
    if include_exact:
        sweep_deltas = tuple(
            abs(sweeps[i + 1][0] - sweeps[i][0]) for i in range(len(steps) - 1)
        )
        phase_deltas = tuple(row[1] - row[0] for row in sweeps)
    else:
        sweep_deltas = ()
        phase_deltas = ()
    stable = all(d <= tolerance for d in bound_deltas) and all(
        d <= tolerance for d in sweep_deltas
    )
    return RefinementReport(
        spec=spec,
        grid_steps=steps,
        phase_counts=phases if include_exact else (),
        bound_values=tuple(bounds),
        sweep_values=tuple(sweeps) if include_exact else None,
        bound_deltas=bound_deltas,
        sweep_deltas=sweep_deltas,
        phase_deltas=phase_deltas,
        tolerance=tolerance,
        stable=stable,
    )
