"""Dense vs structured KKT on a TV-ball SOCP with moment equality rows."""

import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/_scratch")
from load import load

conic = load("conic")

rng = np.random.default_rng(7)
m = 40
theta = np.linspace(-0.3, 0.3, m)
g = np.exp(2j * np.pi * theta * 0.5)

# variables: per grid point (r_j, a_j, b_j) with (a,b) the real/imag parts
# of a complex weight, |psi_j| <= r_j.  maximize Re sum conj(g_j) psi_j
# subject to sum r_j <= 1 and two moment equality rows.
n = 3 * m
c = np.zeros(n)
c[1::3] = -np.real(g)
c[2::3] = +np.imag(g)   # maximize Re(conj(g) psi) = a*Re g + b*Im g -> min -that

u = np.zeros(n)
u[0::3] = 1.0

A = np.zeros((2, n))
A[0, 1::3] = 1.0          # sum a_j = 0
A[1, 2::3] = 1.0          # sum b_j = 0
b = np.zeros(2)

h = np.zeros(1 + n)
h[0] = 1.0
dims = conic.ConeDims(nonneg=1, soc=(3,) * m)

Gdense = np.zeros((1 + n, n))
Gdense[0] = u
Gdense[1:] = -np.eye(n)

cfg = conic.SolverConfig(verbose="-v" in sys.argv)

t0 = time.perf_counter()
sol_d = conic.solve_cone_program(c, Gdense, h, dims, A=A, b=b, cfg=cfg)
t1 = time.perf_counter()

op = conic.RowPlusNegIdentityOperator(u)
kkt = conic.BlockDiagPlusRankOneKKT(u, dims, A=A)
t2 = time.perf_counter()
sol_b = conic.solve_cone_program(c, op, h, dims, A=A, b=b, cfg=cfg, kkt=kkt)
t3 = time.perf_counter()

for tag, sol, dt in (("dense", sol_d, t1 - t0), ("block", sol_b, t3 - t2)):
    print(
        f"socp {tag} {sol.diag.status.name.lower()} "
        f"{sol.primal_objective:.12f} it={sol.diag.iterations} "
        f"pres={sol.diag.primal_residual:.2e} dres={sol.diag.dual_residual:.2e} "
        f"relgap={sol.diag.rel_gap:.2e} {1e3 * dt:.1f}ms"
    )
print("x diff", np.max(np.abs(sol_d.x - sol_b.x)))
print("obj diff", abs(sol_d.primal_objective - sol_b.primal_objective))
