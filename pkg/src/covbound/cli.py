"""Command-line front end: parse a run configuration, solve, serialize.

Subcommands
-----------
bound     one lag, minimax upper bound, JSON report
exact     one lag, phase-swept constructive lower bound, JSON report
gap       one lag, both engines on a shared grid, JSON report
sweep     a lag grid, CSV or JSON curve
diagnose  structural self-check battery on one instance, JSON report

Output is deterministic by construction: no timestamps, keys sorted,
CSV numbers at 12 significant digits.  Every file embeds the resolved
configuration, so a result is reproducible from its own header.  Exit
codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import diagnostics_battery, sweep_tau
from .bound import DegenerateZeroResidual, upper_bound
from .conic import Infeasible, SolveDiagnostics, SolverConfig, Unbounded
from .core import (
    DEFAULT_GRID_STEP,
    DiscreteMeasurePair,
    FrequencyBand,
    ProblemSpec,
    discretize,
    make_band,
)
from .exact import DEFAULT_NUM_PHASES, phase_sweep

__all__ = ["RunConfig", "ConfigError", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_DEFAULT_NUM_TAU = 141
_ATOM_CUTOFF = 1e-12


class ConfigError(ValueError):
    """Raised for a malformed or incomplete run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters, after config-file merge.

    ``band_intervals`` holds the intervals as given on the command
    line; the merged band is carried separately since merging is a
    normalization step worth surfacing in output metadata.
    """

    command: str
    band_intervals: "tuple[tuple[float, float], ...]"
    n: int
    sigma2: float
    tau: "float | None"
    tau_range: "tuple[float, float] | None"
    num_tau: int
    step: float
    num_phases: int
    tol: float
    include_exact: bool
    fmt: str
    output: "str | None"
    jobs: "int | None"


_CONFIG_KEYS = (
    "band_intervals", "n", "sigma2", "tau", "tau_range", "num_tau",
    "step", "num_phases", "tol", "include_exact", "format", "output",
    "jobs",
)


def _parse_interval(text: str) -> "tuple[float, float]":
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ConfigError(f"band interval {text!r} is not of the form lo:hi")
    try:
        return float(lo), float(hi)
    except ValueError:
        raise ConfigError(f"band interval {text!r} has non-numeric endpoints")


def _expand_band_tokens(argv: "list[str]") -> "list[str]":
    """Rewrite ``--band -0.3:0.3`` as ``--band=-0.3:0.3``.

    argparse treats a leading dash as an option prefix unless the token
    parses as a bare negative number, which an interval never does.
    """
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--band":
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append("--band=" + nxt)
        else:
            out.append(tok)
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band", action="append", metavar="LO:HI",
                   help="frequency interval in cycles/sample; repeat for unions")
    p.add_argument("--n", type=int, help="largest pinned integer lag")
    p.add_argument("--sigma2", type=float, help="signal power (default 1)")
    p.add_argument("--step", type=float,
                   help=f"frequency grid step (default {DEFAULT_GRID_STEP})")
    p.add_argument("--tol", type=float, help="solver tolerance (default 1e-8)")
    p.add_argument("--config", metavar="PATH",
                   help="JSON file of RunConfig fields; flags override it")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covbound",
        description="Bound covariance uncertainty of bandlimited signals "
                    "pinned on integer lags.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="minimax upper bound at one lag")
    _add_common(p)
    p.add_argument("--tau", type=float, help="query lag")

    p = sub.add_parser("exact", help="phase-swept lower bound at one lag")
    _add_common(p)
    p.add_argument("--tau", type=float, help="query lag")
    p.add_argument("--phases", type=int,
                   help=f"phase count (default {DEFAULT_NUM_PHASES})")

    p = sub.add_parser("gap", help="upper bound minus lower bound at one lag")
    _add_common(p)
    p.add_argument("--tau", type=float, help="query lag")
    p.add_argument("--phases", type=int,
                   help=f"phase count (default {DEFAULT_NUM_PHASES})")

    p = sub.add_parser("sweep", help="bound curve over a lag grid")
    _add_common(p)
    p.add_argument("--tau-range", metavar="LO:HI", help="lag interval")
    p.add_argument("--points", type=int,
                   help=f"lag count, endpoints included (default {_DEFAULT_NUM_TAU})")
    p.add_argument("--exact", action="store_const", const=True, default=None,
                   help="also run the phase sweep at every lag")
    p.add_argument("--phases", type=int,
                   help=f"phase count with --exact (default {DEFAULT_NUM_PHASES})")
    p.add_argument("--format", choices=("csv", "json"), dest="fmt",
                   help="curve serialization (default csv)")
    p.add_argument("--jobs", type=int,
                   help="worker processes (default: all processors)")

    p = sub.add_parser("diagnose", help="self-check battery at one lag")
    _add_common(p)
    p.add_argument("--tau", type=float, help="query lag")

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flags over config-file values over defaults, then validate."""
    file_vals: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_vals = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(file_vals, dict):
            raise ConfigError("config file must hold a JSON object")
        for key in file_vals:
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in file_vals and file_vals[key] is not None:
            return file_vals[key]
        return default

    raw_band = args.band
    if raw_band is not None:
        intervals = tuple(_parse_interval(t) for t in raw_band)
    elif file_vals.get("band_intervals"):
        try:
            intervals = tuple(
                (float(lo), float(hi)) for lo, hi in file_vals["band_intervals"]
            )
        except (TypeError, ValueError):
            raise ConfigError("band_intervals must be a list of [lo, hi] pairs")
    else:
        raise ConfigError("no band given (use --band LO:HI)")

    n = pick(args.n, "n", None)
    if n is None:
        raise ConfigError("no pinned-lag degree given (use --n)")
    tau = pick(getattr(args, "tau", None), "tau", None)
    tau_range = pick(getattr(args, "tau_range", None), "tau_range", None)
    if isinstance(tau_range, str):
        tau_range = _parse_interval(tau_range)
    elif tau_range is not None:
        try:
            tau_range = (float(tau_range[0]), float(tau_range[1]))
        except (TypeError, ValueError, IndexError):
            raise ConfigError("tau_range must be lo:hi or a [lo, hi] pair")

    command = args.command
    if command == "sweep":
        if tau_range is None:
            raise ConfigError("sweep needs --tau-range LO:HI")
    elif tau is None:
        raise ConfigError(f"{command} needs --tau")

    rc = RunConfig(
        command=command,
        band_intervals=intervals,
        n=int(n),
        sigma2=float(pick(args.sigma2, "sigma2", 1.0)),
        tau=None if tau is None else float(tau),
        tau_range=tau_range,
        num_tau=int(pick(getattr(args, "points", None), "num_tau",
                         _DEFAULT_NUM_TAU)),
        step=float(pick(args.step, "step", DEFAULT_GRID_STEP)),
        num_phases=int(pick(getattr(args, "phases", None), "num_phases",
                            DEFAULT_NUM_PHASES)),
        tol=float(pick(args.tol, "tol", SolverConfig().tol)),
        include_exact=bool(pick(getattr(args, "exact", None), "include_exact",
                                False)),
        fmt=str(pick(getattr(args, "fmt", None), "format",
                     "csv" if command == "sweep" else "json")),
        output=pick(args.output, "output", None),
        jobs=pick(getattr(args, "jobs", None), "jobs", None),
    )
    _validate(rc)
    return rc


def _validate(rc: RunConfig) -> None:
    """Reject anything that would not form a well-posed problem."""
    try:
        band = make_band(rc.band_intervals)
        probe_tau = rc.tau if rc.tau is not None else rc.tau_range[0]
        ProblemSpec(band, rc.n, probe_tau, rc.sigma2)
        discretize(band, rc.step)
        SolverConfig(tol=rc.tol)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if rc.command == "sweep" and rc.num_tau < 2:
        raise ConfigError("sweep needs at least 2 points")
    if rc.num_phases < 1:
        raise ConfigError("phase count must be at least 1")
    if rc.command != "sweep" and rc.fmt != "json":
        raise ConfigError(f"{rc.command} reports are JSON-only")
    if rc.fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {rc.fmt!r}")
    if rc.jobs is not None and int(rc.jobs) < 1:
        raise ConfigError("jobs must be at least 1")


def _band_of(rc: RunConfig) -> FrequencyBand:
    return make_band(rc.band_intervals)


def _config_payload(rc: RunConfig, band: FrequencyBand) -> dict:
    given = tuple(sorted(rc.band_intervals))
    merged = band.intervals != given
    out = {
        "band_intervals": [list(iv) for iv in band.intervals],
        "band_intervals_input": [list(iv) for iv in rc.band_intervals],
        "merged_overlapping_bands": merged,
        "n": rc.n,
        "sigma2": rc.sigma2,
        "grid_step": rc.step,
        "solver_tol": rc.tol,
    }
    if rc.command == "sweep":
        out["tau_range"] = list(rc.tau_range)
        out["num_tau"] = rc.num_tau
        out["include_exact"] = rc.include_exact
        if rc.include_exact:
            out["num_phases"] = rc.num_phases
    else:
        out["tau"] = rc.tau
        if rc.command in ("exact", "gap"):
            out["num_phases"] = rc.num_phases
    return out


def _diag_payload(diag: SolveDiagnostics) -> dict:
    return {
        "iterations": int(diag.iterations),
        "primal_residual": float(diag.primal_residual),
        "dual_residual": float(diag.dual_residual),
        "rel_gap": float(diag.rel_gap),
        "status": diag.status.value,
    }


def _omega_payload(omega) -> "list[float] | None":
    if isinstance(omega, DegenerateZeroResidual):
        return None
    return [float(w) for w in omega]


def _atoms(pair: DiscreteMeasurePair) -> dict:
    theta = pair.grid.points
    cutoff = _ATOM_CUTOFF * max(pair.total_mass(), 1.0)
    out = {}
    for name, weights in (("mu_atoms", pair.mu_weights),
                          ("nu_atoms", pair.nu_weights)):
        keep = np.flatnonzero(weights > cutoff)
        out[name] = [[float(theta[i]), float(weights[i])] for i in keep]
    return out


def _run_bound(rc: RunConfig, band: FrequencyBand, cfg: SolverConfig) -> dict:
    spec = ProblemSpec(band, rc.n, rc.tau, rc.sigma2)
    rep = upper_bound(spec, discretize(band, rc.step), cfg)
    return {
        "bound": float(rep.bound),
        "coefficients": [[float(c.real), float(c.imag)] for c in rep.q0.coeffs],
        "omega": _omega_payload(rep.omega),
        "duality_gap": float(rep.duality_gap),
        "diagnostics": _diag_payload(rep.diag),
        "config": _config_payload(rc, band),
    }


def _run_exact(rc: RunConfig, band: FrequencyBand, cfg: SolverConfig) -> dict:
    spec = ProblemSpec(band, rc.n, rc.tau, rc.sigma2)
    swept = phase_sweep(spec, discretize(band, rc.step), rc.num_phases, cfg)
    payload = {
        "value": float(swept.value),
        "phi0": [float(swept.phi0.real), float(swept.phi0.imag)],
        "total_mass": float(swept.pair0.total_mass()),
        "diagnostics": _diag_payload(swept.diag),
        "config": _config_payload(rc, band),
    }
    payload.update(_atoms(swept.pair0))
    return payload


def _run_gap(rc: RunConfig, band: FrequencyBand, cfg: SolverConfig) -> dict:
    spec = ProblemSpec(band, rc.n, rc.tau, rc.sigma2)
    grid = discretize(band, rc.step)
    rep = upper_bound(spec, grid, cfg)
    swept = phase_sweep(spec, grid, rc.num_phases, cfg)
    return {
        "bound": float(rep.bound),
        "exact": float(swept.value),
        "gap": float(rep.bound - swept.value),
        "diagnostics": {"bound": _diag_payload(rep.diag),
                        "sweep": _diag_payload(swept.diag)},
        "config": _config_payload(rc, band),
    }


def _run_diagnose(rc: RunConfig, band: FrequencyBand, cfg: SolverConfig) -> dict:
    spec = ProblemSpec(band, rc.n, rc.tau, rc.sigma2)
    report = diagnostics_battery(spec, discretize(band, rc.step), cfg)
    return {
        "passed": report.passed(),
        "checks": [
            {
                "name": c.name,
                "status": c.status.value,
                "measured": c.measured,
                "tolerance": c.tolerance,
                "detail": c.detail,
            }
            for c in report.checks
        ],
        "config": _config_payload(rc, band),
    }


def _run_sweep(rc: RunConfig, band: FrequencyBand, cfg: SolverConfig):
    jobs = rc.jobs if rc.jobs is not None else (os.cpu_count() or 1)
    curve = sweep_tau(
        band, rc.n, rc.sigma2, rc.tau_range, rc.num_tau,
        include_exact=rc.include_exact, cfg=cfg,
        step=rc.step, num_phases=rc.num_phases, jobs=int(jobs),
    )
    cfgdict = _config_payload(rc, band)
    if rc.fmt == "json":
        return {
            "tau": list(curve.tau_values),
            "bound": list(curve.bound_values),
            "exact": None if curve.exact_values is None
                     else list(curve.exact_values),
            "gap": None if curve.gap_values is None
                   else list(curve.gap_values),
            "config": cfgdict,
        }
    return _curve_csv(curve, cfgdict)


def _fmt12(x: "float | None") -> str:
    return "" if x is None else format(float(x), ".12g")


def _curve_csv(curve, cfgdict: dict) -> str:
    lines = [
        f"# {key}: {json.dumps(cfgdict[key], sort_keys=True)}"
        for key in sorted(cfgdict)
    ]
    if curve.exact_values is None:
        lines.append("tau,bound")
        for t, b in zip(curve.tau_values, curve.bound_values):
            lines.append(f"{_fmt12(t)},{_fmt12(b)}")
    else:
        lines.append("tau,bound,exact,gap")
        rows = zip(curve.tau_values, curve.bound_values,
                   curve.exact_values, curve.gap_values)
        for t, b, e, g in rows:
            lines.append(f"{_fmt12(t)},{_fmt12(b)},{_fmt12(e)},{_fmt12(g)}")
    return "\n".join(lines) + "\n"


_RUNNERS = {
    "bound": _run_bound,
    "exact": _run_exact,
    "gap": _run_gap,
    "sweep": _run_sweep,
    "diagnose": _run_diagnose,
}


def _emit(text: str, path: "str | None") -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_error(kind: str, exc: BaseException) -> None:
    obj = {"error": {"kind": kind, "message": str(exc)}}
    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")


def main(argv: "list[str] | None" = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_band_tokens(list(argv)))
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return EXIT_CONFIG if code not in (0,) else EXIT_OK
    try:
        rc = _resolve(args)
        band = _band_of(rc)
        cfg = SolverConfig(tol=rc.tol)
    except ConfigError as exc:
        _emit_error("config", exc)
        return EXIT_CONFIG
    try:
        result = _RUNNERS[rc.command](rc, band, cfg)
    except (Infeasible, Unbounded, np.linalg.LinAlgError,
            ArithmeticError, ValueError) as exc:
        _emit_error("solver", exc)
        return EXIT_SOLVER
    if isinstance(result, dict):
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    else:
        text = result
    try:
        _emit(text, rc.output)
    except OSError as exc:
        _emit_error("config", exc)
        return EXIT_CONFIG
    return EXIT_OK
