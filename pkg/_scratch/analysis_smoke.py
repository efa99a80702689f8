"""Smoke-test analysis.py: small sweep, two batteries, tiny refinement."""

import sys, time

sys.path.insert(0, "/root/pkg/_scratch")
from load import load

core = load("core")
analysis = load("analysis")

band = core.make_band([(-0.3, 0.3)])
split = core.make_band([(-0.3, -0.1), (0.05, 0.3)])

t0 = time.time()
curve = analysis.sweep_tau(band, 3, 1.0, (0.0, 7.0), 15, include_exact=False)
print(f"sweep 15pts {time.time()-t0:.2f}s")
for tau, b in zip(curve.tau_values, curve.bound_values):
    print(f"  tau={tau:5.2f}  bound={b}")
print("metadata:", {k: v for k, v in curve.metadata.items() if k != "solver"})

t0 = time.time()
rep = analysis.diagnostics_battery(
    core.ProblemSpec(band, 5, 4.7), core.discretize(band, 5e-4))
print(f"\nbattery interval n5 tau4.7 {time.time()-t0:.2f}s passed={rep.passed()}")
for c in rep.checks:
    print(f"  {c.name:28s} {c.status.value:15s} measured={c.measured} tol={c.tolerance}")

t0 = time.time()
rep2 = analysis.diagnostics_battery(
    core.ProblemSpec(split, 3, 1.5), core.discretize(split, 5e-4))
print(f"\nbattery split n3 tau1.5 {time.time()-t0:.2f}s passed={rep2.passed()}")
for c in rep2.checks:
    print(f"  {c.name:28s} {c.status.value:15s} measured={c.measured} tol={c.tolerance}")

t0 = time.time()
ref = analysis.refinement_study(
    core.ProblemSpec(band, 3, 1.5), step=4e-3, num_phases=60)
print(f"\nrefinement {time.time()-t0:.2f}s stable={ref.stable}")
print("  bounds:", ref.bound_values)
print("  bound_deltas:", ref.bound_deltas)
print("  sweeps:", ref.sweep_values)
print("  sweep_deltas:", ref.sweep_deltas, "phase_deltas:", ref.phase_deltas)
