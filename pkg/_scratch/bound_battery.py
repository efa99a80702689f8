"""Criterion-5/6 prototype: 20 specs, duality gap + certificate checks."""

import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/_scratch")
from load import load

core = load("core")
conic = load("conic")
bound = load("bound")

BANDS = {
    "interval": ((-0.3, 0.3),),
    "split": ((-0.3, -0.1), (0.05, 0.3)),
}

worst = {"gap": 0.0, "mom": 0.0, "tv": 0.0, "align": 0.0}
t0 = time.perf_counter()
for bname, intervals in BANDS.items():
    band = core.make_band(intervals)
    grid = core.discretize(band, 5e-4)
    for n in (3, 5):
        for tau in (0.5, 1.5, 3.3, 4.7, 7.0):
            spec = core.ProblemSpec(band, n, tau)
            t1 = time.perf_counter()
            rep = bound.upper_bound(spec, grid)
            dt = 1e3 * (time.perf_counter() - t1)
            t_star = rep.bound / (2 * spec.sigma2)
            gap = rep.duality_gap / (2 * spec.sigma2)
            psi = rep.psi0
            mom = float(np.max(np.abs(psi.moment(spec.lags))))
            tv = psi.tv_norm()
            align = float(np.real(np.sum(
                core.eval_kernel(tau, grid.points) * psi.weights)))
            short = align - (t_star - 1e-6)  # must be >= 0
            sym_ok = ""
            if band.is_symmetric() and not isinstance(rep.omega, bound.DegenerateZeroResidual):
                om = np.array(rep.omega)
                refl = np.sort(-om)
                sym_ok = f" omsym={np.max(np.abs(np.sort(om) - refl)):.1e}"
                assert rep.q0.is_real_coefficient()
            worst["gap"] = max(worst["gap"], abs(gap))
            worst["mom"] = max(worst["mom"], mom)
            worst["tv"] = max(worst["tv"], tv - 1.0)
            worst["align"] = min(worst.get("align", 0.0), short)
            nom = len(rep.omega) if isinstance(rep.omega, list) else "deg"
            print(
                f"{bname:8s} n={n} tau={tau:3.1f} t*={t_star:.9f} |gap|={abs(gap):8.1e} "
                f"mom={mom:8.1e} tv-1={tv - 1:9.1e} alignslack={short:9.1e} "
                f"|omega|={nom} {rep.diag.status.name.lower():8s} {dt:6.0f}ms{sym_ok}"
            )
print(f"\ntotal {time.perf_counter() - t0:.1f}s  worst |gap| {worst['gap']:.2e}  "
      f"worst moment {worst['mom']:.2e}  worst tv excess {worst['tv']:.2e}  "
      f"worst align slack {worst['align']:.2e}")
