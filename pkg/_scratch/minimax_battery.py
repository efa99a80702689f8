"""Minimax anchors: frozen t* values, duality gaps, dual-weight checks."""

import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/_scratch")
from load import load

core = load("core")
conic = load("conic")

CASES = [
    # (band intervals, n, tau, frozen t*)  -- dual-cross-checked values
    ((( -0.3, 0.3),), 0, 0.5, 0.8090169943749475),
    ((( -0.3, 0.3),), 3, 0.5, 0.0055558289155866),
    ((( -0.3, 0.3),), 3, 7.0, 1.0000000020218325),
    ((( -0.3, 0.3),), 5, 0.5, 0.0002985437906688),
    ((( -0.3, 0.3),), 5, 4.7, 0.0050556444675698),
    ((( -0.3, -0.1), (0.05, 0.3)), 3, 1.5, 0.0075796629237363),
    ((( -0.3, -0.1), (0.05, 0.3)), 3, 3.3, 0.0525433682555391),
    ((( -0.3, -0.1), (0.05, 0.3)), 3, 7.0, 0.9421715949780408),
    ((( -0.3, -0.1), (0.05, 0.3)), 5, 6.3, 0.1826046460743279),
    ((( -0.3, -0.1), (0.05, 0.3)), 5, 7.0, 0.3785482624164037),
]

worst_gap = 0.0
worst_tv = 0.0
worst_ann = 0.0
bad = 0
for intervals, n, tau, frozen in CASES:
    band = core.make_band(intervals)
    grid = core.discretize(band, 5e-4)
    theta = grid.points
    basis = core.trig_basis(theta, n)
    targets = np.exp(2j * np.pi * theta * tau)
    real_only = band.is_symmetric()
    prob = conic.MinimaxProblem(targets, basis, real_coefficients_only=real_only)
    t0 = time.perf_counter()
    sol = conic.solve_minimax(prob)
    dt = 1e3 * (time.perf_counter() - t0)
    psi = sol.dual_weights
    tv = float(np.sum(np.abs(psi)))
    align = float(np.real(targets @ psi))
    gap = sol.t_star - align
    ann = float(np.max(np.abs(psi @ basis.conj()))) if n > 0 else float(
        abs(np.sum(psi * np.conj(basis[:, 0])))
    )
    rel = abs(sol.t_star - frozen) / max(frozen, 1e-12)
    ok = rel < 5e-6
    bad += not ok
    worst_gap = max(worst_gap, gap)
    worst_tv = max(worst_tv, tv - 1.0)
    worst_ann = max(worst_ann, ann)
    print(
        f"n={n} tau={tau:4.1f} bands={len(intervals)} t*={sol.t_star:.10f} "
        f"rel={rel:8.1e} gap={gap:9.2e} tv-1={tv - 1:9.2e} ann={ann:9.2e} "
        f"{sol.diag.status.name.lower():8s} it={sol.diag.iterations} {dt:6.1f}ms "
        f"{'ok' if ok else 'MISMATCH'}"
    )

print(f"\nworst gap {worst_gap:.2e}  worst tv excess {worst_tv:.2e}  "
      f"worst annihilation {worst_ann:.2e}  mismatches {bad}")
