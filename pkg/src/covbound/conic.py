"""Dense conic solvers for the bound computations.

One primal-dual interior-point core solves programs of the form

    minimize    c'x
    subject to  A x = b
                G x + s = h,    s in K,

where K is a product of a nonnegative orthant and second-order cones.
The core runs on the homogeneous self-dual embedding with Nesterov-Todd
scaling and a Mehrotra predictor-corrector, so infeasibility and
unboundedness come out as certificates rather than divergence.  Two
front ends cover everything the package needs: :func:`solve_minimax`
(sup-norm fit over a complex basis, one 3-dimensional quadratic cone per
sample) and :func:`solve_lp` (standard-form LP on the nonnegative
orthant through the same core).

The Newton systems are reduced to normal equations over the variable
block; a strategy object performs that solve so callers with structured
constraint matrices can avoid forming dense systems.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "Infeasible",
    "Unbounded",
    "Status",
    "SolverConfig",
    "SolveDiagnostics",
    "ConeDims",
    "ConeSolution",
    "DenseNormalKKT",
    "BlockDiagPlusRankOneKKT",
    "RowPlusNegIdentityOperator",
    "solve_cone_program",
    "MinimaxProblem",
    "MinimaxSolution",
    "solve_minimax",
    "LinearProgram",
    "LpSolution",
    "solve_lp",
]


class Infeasible(RuntimeError):
    """The constraints admit no solution (certified by a dual ray)."""


class Unbounded(RuntimeError):
    """The objective diverges along a feasible ray."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolverConfig:
    """Interior-point stopping rules.

    ``tol`` bounds the scaled primal/dual residuals and the relative
    duality gap; ``abstol`` accepts near-zero objectives where a relative
    gap is meaningless.  ``step_fraction`` is the fraction of the step to
    the cone boundary actually taken.
    """

    tol: float = 1e-8
    abstol: float = 1e-9
    max_iter: int = 200
    step_fraction: float = 0.98
    verbose: bool = False

    def __post_init__(self):
        if not (0 < self.tol < 1) or not (0 < self.abstol < 1):
            raise ValueError("tolerances must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (0 < self.step_fraction < 1):
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class SolveDiagnostics:
    """Per-solve convergence record.

    ``status == Status.OPTIMAL`` implies the residuals and relative gap
    are below the configured tolerances.  For infeasible or unbounded
    outcomes the residual fields report the certificate quality instead.
    """

    iterations: int
    primal_residual: float
    dual_residual: float
    rel_gap: float
    status: Status


@dataclass(frozen=True)
class ConeDims:
    """Cone layout: leading orthant block, then second-order cones."""

    nonneg: int = 0
    soc: tuple[int, ...] = ()

    def __post_init__(self):
        if self.nonneg < 0:
            raise ValueError("nonneg dimension must be >= 0")
        if any(d < 2 for d in self.soc):
            raise ValueError("second-order cones need dimension >= 2")

    @property
    def total(self) -> int:
        return self.nonneg + sum(self.soc)


# ---------------------------------------------------------------------------
# cone block layout and Jordan-algebra primitives
# ---------------------------------------------------------------------------

class _Blocks:
    """Vectorized cone arithmetic on flat (orthant ++ soc-groups) vectors."""

    def __init__(self, dims: ConeDims):
        self.l = dims.nonneg
        groups: list[tuple[int, int, int]] = []  # (d, start, count)
        pos = self.l
        socs = dims.soc
        i = 0
        while i < len(socs):
            d = socs[i]
            j = i
            while j < len(socs) and socs[j] == d:
                j += 1
            groups.append((d, pos, j - i))
            pos += d * (j - i)
            i = j
        self.groups = groups
        self.dim = pos
        self.degree = self.l + len(socs)

    def views(self, v: np.ndarray):
        for d, start, count in self.groups:
            yield v[start : start + d * count].reshape(count, d)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[: self.l] = 1.0
        for d, start, count in self.groups:
            e[start : start + d * count : d] = 1.0
        return e

    def min_eig(self, v: np.ndarray) -> float:
        vals = [v[: self.l].min()] if self.l else []
        for blk in self.views(v):
            vals.append(float((blk[:, 0] - np.linalg.norm(blk[:, 1:], axis=1)).min()))
        return min(vals) if vals else math.inf

    def jordan_mul(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim)
        out[: self.l] = u[: self.l] * v[: self.l]
        for (d, start, count), ub, vb in zip(self.groups, self.views(u), self.views(v)):
            ob = out[start : start + d * count].reshape(count, d)
            ob[:, 0] = np.einsum("cd,cd->c", ub, vb)
            ob[:, 1:] = ub[:, :1] * vb[:, 1:] + vb[:, :1] * ub[:, 1:]
        return out

    def arrow_solve(self, u: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Solve ``u o x = r`` blockwise (u in the cone interior)."""
        out = np.empty(self.dim)
        out[: self.l] = r[: self.l] / u[: self.l]
        for (d, start, count), ub, rb in zip(self.groups, self.views(u), self.views(r)):
            det = ub[:, 0] ** 2 - np.einsum("cd,cd->c", ub[:, 1:], ub[:, 1:])
            x0 = (ub[:, 0] * rb[:, 0] - np.einsum("cd,cd->c", ub[:, 1:], rb[:, 1:])) / det
            ob = out[start : start + d * count].reshape(count, d)
            ob[:, 0] = x0
            ob[:, 1:] = (rb[:, 1:] - x0[:, None] * ub[:, 1:]) / ub[:, :1]
        return out

    def max_step(self, v: np.ndarray, dv: np.ndarray) -> float:
        """sup {alpha >= 0 : v + alpha*dv in K} for interior v."""
        alpha = math.inf
        if self.l:
            neg = dv[: self.l] < 0
            if np.any(neg):
                alpha = float((-v[: self.l][neg] / dv[: self.l][neg]).min())
        for vb, db in zip(self.views(v), self.views(dv)):
            a = db[:, 0] ** 2 - np.einsum("cd,cd->c", db[:, 1:], db[:, 1:])
            bq = 2.0 * (vb[:, 0] * db[:, 0] - np.einsum("cd,cd->c", vb[:, 1:], db[:, 1:]))
            cq = vb[:, 0] ** 2 - np.einsum("cd,cd->c", vb[:, 1:], vb[:, 1:])
            # smallest positive root of a t^2 + b t + c = 0 (c > 0 at an
            # interior point), stable Vieta pairing q/a and c/q
            disc = bq * bq - 4.0 * a * cq
            sqrt_disc = np.sqrt(np.maximum(disc, 0.0))
            qq = -0.5 * (bq + np.where(bq >= 0, 1.0, -1.0) * sqrt_disc)
            with np.errstate(invalid="ignore", divide="ignore"):
                r1 = qq / np.where(a != 0, a, 1.0)
                r2 = cq / np.where(qq != 0, qq, 1.0)
            real = disc >= 0
            r1 = np.where(real & (a != 0) & (r1 > 0), r1, np.inf)
            r2 = np.where(real & (qq != 0) & (r2 > 0), r2, np.inf)
            step = min(r1.min(initial=np.inf), r2.min(initial=np.inf))
            if step < alpha:
                alpha = float(step)
        return alpha


def _soc_spectral(u: np.ndarray, fn) -> np.ndarray:
    """Apply the spectral function ``fn`` to SOC blocks (count, d)."""
    nrm = np.linalg.norm(u[:, 1:], axis=1)
    lmin = u[:, 0] - nrm
    lmax = u[:, 0] + nrm
    if np.any(lmin <= 0):
        raise np.linalg.LinAlgError("cone variable left the interior")
    fmin = fn(lmin)
    fmax = fn(lmax)
    out = np.empty_like(u)
    out[:, 0] = 0.5 * (fmax + fmin)
    scale = np.where(nrm > 0, 0.5 * (fmax - fmin) / np.where(nrm > 0, nrm, 1.0), 0.0)
    out[:, 1:] = scale[:, None] * u[:, 1:]
    return out


def _soc_inv(u: np.ndarray) -> np.ndarray:
    det = u[:, 0] ** 2 - np.einsum("cd,cd->c", u[:, 1:], u[:, 1:])
    out = np.empty_like(u)
    out[:, 0] = u[:, 0] / det
    out[:, 1:] = -u[:, 1:] / det[:, None]
    return out


def _soc_quad_rep(u: np.ndarray) -> np.ndarray:
    """Quadratic representation P(u) = 2 u u' - det(u) J, shape (count,d,d)."""
    det = u[:, 0] ** 2 - np.einsum("cd,cd->c", u[:, 1:], u[:, 1:])
    P = 2.0 * u[:, :, None] * u[:, None, :]
    d = u.shape[1]
    P[:, 0, 0] -= det
    idx = np.arange(1, d)
    P[:, idx, idx] += det[:, None]
    return P


class _SocScaling(NamedTuple):
    W: np.ndarray      # P(w^{1/2})
    Winv: np.ndarray   # P(w^{-1/2})
    Pw: np.ndarray     # P(w) = W @ W
    Pwinv: np.ndarray  # P(w^{-1})


class _Scaling:
    """Nesterov-Todd scaling: symmetric W with W z = W^{-1} s = lambda."""

    def __init__(self, blocks: _Blocks, orth_w2: np.ndarray, soc: list[_SocScaling], lam: np.ndarray):
        self.blocks = blocks
        self.orth_w2 = orth_w2
        self.soc = soc
        self.lam = lam

    @classmethod
    def identity(cls, blocks: _Blocks) -> "_Scaling":
        soc = []
        for d, _, count in blocks.groups:
            eye = np.broadcast_to(np.eye(d), (count, d, d)).copy()
            soc.append(_SocScaling(eye, eye.copy(), eye.copy(), eye.copy()))
        return cls(blocks, np.ones(blocks.l), soc, blocks.identity())

    @classmethod
    def compute(cls, blocks: _Blocks, s: np.ndarray, z: np.ndarray) -> "_Scaling":
        l = blocks.l
        if np.any(s[:l] <= 0) or np.any(z[:l] <= 0):
            raise np.linalg.LinAlgError("orthant variable left the interior")
        orth_w2 = s[:l] / z[:l]
        lam = np.empty(blocks.dim)
        lam[:l] = np.sqrt(s[:l] * z[:l])
        soc = []
        for (d, start, count), sb, zb in zip(blocks.groups, blocks.views(s), blocks.views(z)):
            s_half = _soc_spectral(sb, np.sqrt)
            Ps_half = _soc_quad_rep(s_half)
            t = np.einsum("cij,cj->ci", Ps_half, zb)
            t_mhalf = _soc_spectral(t, lambda v: 1.0 / np.sqrt(v))
            w = np.einsum("cij,cj->ci", Ps_half, t_mhalf)
            w_half = _soc_spectral(w, np.sqrt)
            W = _soc_quad_rep(w_half)
            Winv = _soc_quad_rep(_soc_inv(w_half))
            group = _SocScaling(W, Winv, _soc_quad_rep(w), _soc_quad_rep(_soc_inv(w)))
            soc.append(group)
            lam[start : start + d * count] = np.einsum("cij,cj->ci", W, zb).ravel()
        return cls(blocks, orth_w2, soc, lam)

    def _apply(self, v: np.ndarray, orth_fac: np.ndarray, field: int) -> np.ndarray:
        out = np.empty(self.blocks.dim)
        l = self.blocks.l
        out[:l] = v[:l] * orth_fac
        for (d, start, count), g, vb in zip(self.blocks.groups, self.soc, self.blocks.views(v)):
            mats = g[field]
            out[start : start + d * count] = np.einsum("cij,cj->ci", mats, vb).ravel()
        return out

    def apply_W(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, np.sqrt(self.orth_w2), 0)

    def apply_Winv(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, 1.0 / np.sqrt(self.orth_w2), 1)

    def apply_W2(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, self.orth_w2, 2)

    def apply_W2inv(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, 1.0 / self.orth_w2, 3)

    def dense_w2(self) -> np.ndarray:
        """Materialize W W' as a dense matrix (small problems only)."""
        m = self.blocks.dim
        out = np.zeros((m, m))
        l = self.blocks.l
        out[np.arange(l), np.arange(l)] = self.orth_w2
        for (d, start, count), g in zip(self.blocks.groups, self.soc):
            for j in range(count):
                lo = start + j * d
                out[lo : lo + d, lo : lo + d] = g.Pw[j]
        return out

    def dense_winv(self) -> np.ndarray:
        """Materialize W^{-1} as a dense matrix (small problems only)."""
        m = self.blocks.dim
        out = np.zeros((m, m))
        l = self.blocks.l
        out[np.arange(l), np.arange(l)] = 1.0 / np.sqrt(self.orth_w2)
        for (d, start, count), g in zip(self.blocks.groups, self.soc):
            for j in range(count):
                lo = start + j * d
                out[lo : lo + d, lo : lo + d] = g.Winv[j]
        return out


# ---------------------------------------------------------------------------
# KKT strategies
# ---------------------------------------------------------------------------

def _with_refinement(raw, matvec, rmatvec, A: np.ndarray | None, sc: _Scaling):
    """Wrap a reduced-KKT solve with iterative refinement.

    The normal-equations reduction squares the scaling's condition
    number, which wrecks direction accuracy once the barrier parameter
    is small; one or two refinement rounds against the unreduced system
    restore it at the cost of cheap matvecs.
    """

    def residual(ux, uy, uz, bx, by, bz):
        r1 = bx - rmatvec(uz)
        if A is not None:
            r1 = r1 - A.T @ uy
            r2 = by - A @ ux
        else:
            r2 = by
        r3 = bz - matvec(ux) + sc.apply_W2(uz)
        err = max(
            float(np.linalg.norm(r1)),
            float(np.linalg.norm(r2)) if r2.size else 0.0,
            float(np.linalg.norm(r3)),
        )
        return r1, r2, r3, err

    def solve(bx: np.ndarray, by: np.ndarray, bz: np.ndarray):
        ux, uy, uz = raw(bx, by, bz)
        scale = 1.0 + max(
            float(np.linalg.norm(bx)),
            float(np.linalg.norm(by)) if by.size else 0.0,
            float(np.linalg.norm(bz)),
        )
        r1, r2, r3, err = residual(ux, uy, uz, bx, by, bz)
        for _ in range(10):
            if err <= 1e-13 * scale:
                break
            cx, cy, cz = raw(r1, r2, r3)
            nx_, ny_, nz_ = ux + cx, uy + cy, uz + cz
            n1, n2, n3, nerr = residual(nx_, ny_, nz_, bx, by, bz)
            if nerr >= err:
                # refinement no longer contracts; keep the better iterate
                break
            stalled = nerr > 0.25 * err
            ux, uy, uz = nx_, ny_, nz_
            r1, r2, r3, err = n1, n2, n3, nerr
            if stalled:
                break
        # let callers spot directions the factorization could not deliver
        solve.rel_err = max(solve.rel_err, err / scale)
        return ux, uy, uz

    solve.rel_err = 0.0
    return solve


def _chol_solver(H: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Cholesky solve with an escalating diagonal ridge as fallback."""
    scale = max(float(np.trace(H)) / max(H.shape[0], 1), 1e-300)
    ridge = 0.0
    for _ in range(8):
        try:
            L = np.linalg.cholesky(H + ridge * np.eye(H.shape[0]))
            break
        except np.linalg.LinAlgError:
            ridge = max(ridge * 100.0, 1e-14 * scale)
    else:
        raise np.linalg.LinAlgError("normal-equations matrix is not positive definite")

    def solve(rhs: np.ndarray) -> np.ndarray:
        y = np.linalg.solve(L, rhs)
        return np.linalg.solve(L.T, y)

    return solve


class DenseNormalKKT:
    """Semi-normal-equations KKT solve over the variable block.

    QR-factors the scaled matrix ``W^{-1} G`` each iteration, so the
    reduced system ``G' (W W')^{-1} G`` is solved without ever forming
    it; combined with refinement this keeps directions accurate down to
    tiny barrier parameters.  Suits problems whose variable dimension is
    small while the cone dimension may be large.  Equality constraints
    are handled through a Schur complement.
    """

    def __init__(self, G: np.ndarray, dims: ConeDims, A: np.ndarray | None = None):
        blocks = _Blocks(dims)
        G = np.asarray(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != blocks.dim:
            raise ValueError("G must be a dense (cone x variable) matrix")
        self.G = G
        self.blocks = blocks
        self.A = None if A is None or A.shape[0] == 0 else np.asarray(A, dtype=float)
        self.Go = G[: blocks.l]
        self.Gs = [
            G[start : start + d * count].reshape(count, d, G.shape[1])
            for d, start, count in blocks.groups
        ]

    def _w2inv(self, v: np.ndarray, sc: _Scaling) -> np.ndarray:
        return sc.apply_W2inv(v)

    def factor(self, sc: _Scaling):
        nx = self.G.shape[1]
        parts = []
        if self.blocks.l:
            parts.append(self.Go / np.sqrt(sc.orth_w2)[:, None])
        for Gs_g, g in zip(self.Gs, sc.soc):
            parts.append(np.einsum("cij,cjn->cin", g.Winv, Gs_g).reshape(-1, nx))
        scaled = parts[0] if len(parts) == 1 else np.vstack(parts)
        R = np.linalg.qr(scaled, mode="r")
        if np.min(np.abs(np.diag(R))) <= 1e-14 * np.max(np.abs(np.diag(R))):
            raise np.linalg.LinAlgError("scaled constraint matrix is rank deficient")

        def hsolve(f: np.ndarray) -> np.ndarray:
            return np.linalg.solve(R, np.linalg.solve(R.T, f))

        A = self.A
        if A is not None:
            HinvAT = np.column_stack([hsolve(A[i]) for i in range(A.shape[0])])
            msolve = _chol_solver(A @ HinvAT)

        def raw(bx: np.ndarray, by: np.ndarray, bz: np.ndarray):
            f = bx + self.G.T @ self._w2inv(bz, sc)
            if A is None:
                ux = hsolve(f)
                uy = np.zeros(0)
            else:
                t = hsolve(f)
                uy = msolve(A @ t - by)
                ux = t - hsolve(A.T @ uy)
            uz = self._w2inv(self.G @ ux - bz, sc)
            return ux, uy, uz

        return _with_refinement(raw, lambda v: self.G @ v, lambda v: self.G.T @ v, A, sc)


class RowPlusNegIdentityOperator:
    """The matrix ``[coupling'; -I]`` applied without materialization."""

    def __init__(self, coupling: np.ndarray):
        self.coupling = np.asarray(coupling, dtype=float)
        n = self.coupling.size
        self.shape = (n + 1, n)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(self.shape[0])
        out[0] = self.coupling @ x
        out[1:] = -x
        return out

    def rmatvec(self, z: np.ndarray) -> np.ndarray:
        return self.coupling * z[0] - z[1:]


class BlockDiagPlusRankOneKKT:
    """Structured KKT solve for ``G = [coupling'; -I]`` cone blocks.

    Applies when the cone is one orthant row followed by uniform
    second-order cones partitioning the variables, so that
    ``H = blockdiag(P(w_j)^{-1}) + coupling coupling'/sigma``.  The solve
    costs O(variables) per right-hand side through a bordered
    factorization over the coupling row and the equality rows.
    """

    def __init__(self, coupling: np.ndarray, dims: ConeDims, A: np.ndarray | None = None):
        blocks = _Blocks(dims)
        if blocks.l != 1 or len(blocks.groups) != 1:
            raise ValueError("layout must be one orthant row plus one SOC group")
        d, _, count = blocks.groups[0]
        coupling = np.asarray(coupling, dtype=float)
        if coupling.size != d * count:
            raise ValueError("coupling length must equal the SOC variable count")
        self.u = coupling
        self.d = d
        self.count = count
        self.A = None if A is None or A.shape[0] == 0 else np.asarray(A, dtype=float)
        if self.A is not None:
            p = self.A.shape[0]
            # per-point (d x p) slices of A'
            self.Ablk = np.ascontiguousarray(
                self.A.reshape(p, count, d).transpose(1, 2, 0)
            )

    def factor(self, sc: _Scaling):
        sigma0 = float(sc.orth_w2[0])
        soc = sc.soc[0]
        Whalf, Winvhalf = soc.W, soc.Winv
        d, count = self.d, self.count
        ublk = self.u.reshape(count, d)
        A = self.A
        p = 0 if A is None else A.shape[0]

        def wmul(t: np.ndarray) -> np.ndarray:
            return np.einsum("cij,cj->ci", Whalf, t.reshape(count, d)).ravel()

        def winv(t: np.ndarray) -> np.ndarray:
            return np.einsum("cij,cj->ci", Winvhalf, t.reshape(count, d)).ravel()

        # Work in the half-scaled variable xt = W^{-1} x with W = P(w^{1/2}),
        # so every operator application costs only one power of the scaling's
        # condition number; applying P(w) itself squares it, which stops the
        # refinement loop from contracting near the barrier floor.  The
        # bordered system over (u'x / sigma0, equality multipliers) is
        # invariant under the substitution and equals the Gram matrix of
        # [W [u, A']; sqrt(sigma0) e0'], so one QR factors it in semi-normal
        # form without the cancellation an explicit Schur assembly suffers.
        cols = np.empty((count, d, p + 1))
        cols[:, :, 0] = ublk
        if self.A is not None:
            cols[:, :, 1:] = self.Ablk
        stacked = np.empty((count * d + 1, p + 1))
        stacked[:-1] = np.einsum("cij,cjp->cip", Whalf, cols).reshape(-1, p + 1)
        stacked[-1] = 0.0
        stacked[-1, 0] = math.sqrt(sigma0)
        uscaled = stacked[:-1, 0].copy()
        Ascaled = stacked[:-1, 1:].copy()
        R = np.linalg.qr(stacked, mode="r")
        rdiag = np.abs(np.diag(R))
        if np.min(rdiag) <= 1e-14 * np.max(rdiag):
            raise np.linalg.LinAlgError("bordered system is rank deficient")

        def bigsolve(rhs: np.ndarray) -> np.ndarray:
            # corrected semi-normal equations: the triangular solves alone
            # carry the Gram matrix's squared condition number, refining
            # against the exactly-applicable product stacked'(stacked v)
            # brings the error back to first order
            t = np.linalg.solve(R, np.linalg.solve(R.T, rhs))
            r = rhs - stacked.T @ (stacked @ t)
            rnorm = float(np.linalg.norm(r))
            for _ in range(3):
                if not math.isfinite(rnorm) or rnorm <= 1e-15 * float(np.linalg.norm(rhs)):
                    break
                tn = t + np.linalg.solve(R, np.linalg.solve(R.T, r))
                rn = rhs - stacked.T @ (stacked @ tn)
                rnnorm = float(np.linalg.norm(rn))
                if not math.isfinite(rnnorm) or rnnorm >= rnorm:
                    break
                t, r, rnorm = tn, rn, rnnorm
            return t

        def raw(bx: np.ndarray, by: np.ndarray, bz: np.ndarray):
            bzs = winv(bz[1:])
            ft = wmul(bx) + uscaled * (bz[0] / sigma0) - bzs
            rhs = np.empty(p + 1)
            rhs[0] = uscaled @ ft
            if A is not None:
                rhs[1:] = Ascaled.T @ ft - by
            ty = bigsolve(rhs)
            uy = ty[1:]
            xt = ft - uscaled * ty[0]
            if A is not None:
                xt = xt - Ascaled @ uy
            ux = wmul(xt)
            uz = np.empty(1 + d * count)
            uz[0] = (uscaled @ xt - bz[0]) / sigma0
            uz[1:] = -winv(xt + bzs)
            return ux, uy, uz

        op = RowPlusNegIdentityOperator(self.u)
        return _with_refinement(raw, op.matvec, op.rmatvec, A, sc)


class AugmentedKKT:
    """LU solve of the scaled (variable, equality, cone) KKT system.

    The cone block of the raw augmented matrix holds -W W', whose entries
    span the square of the scaling's condition number and swamp the rest
    of the matrix near the optimum.  Substituting ztilde = W z turns that
    block into -I and replaces G with W^{-1} G, so the factored matrix
    only carries half-power scaling and iterative refinement contracts.
    The dense factor costs (variables + rows)^3, which restricts this
    strategy to small problems; the endgame polish runs on exactly those.
    """

    def __init__(self, G: np.ndarray, dims: ConeDims, A: np.ndarray | None = None):
        blocks = _Blocks(dims)
        G = np.asarray(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != blocks.dim:
            raise ValueError("G must be a dense (cone x variable) matrix")
        self.G = G
        self.blocks = blocks
        self.A = None if A is None or A.shape[0] == 0 else np.asarray(A, dtype=float)

    def factor(self, sc: _Scaling):
        m, nx = self.G.shape
        p = 0 if self.A is None else self.A.shape[0]
        Ghat = sc.dense_winv() @ self.G
        M = np.zeros((nx + p + m, nx + p + m))
        if p:
            M[:nx, nx:nx + p] = self.A.T
            M[nx:nx + p, :nx] = self.A
        M[:nx, nx + p:] = Ghat.T
        M[nx + p:, :nx] = Ghat
        M[nx + p:, nx + p:] = -np.eye(m)
        Minv = np.linalg.inv(M)

        def solve(bx: np.ndarray, by: np.ndarray, bz: np.ndarray):
            rhs = np.concatenate([bx, by, sc.apply_Winv(bz)])
            u = Minv @ rhs
            r = rhs - M @ u
            err = float(np.linalg.norm(r))
            for _ in range(4):
                un = u + Minv @ r
                rn = rhs - M @ un
                nerr = float(np.linalg.norm(rn))
                if not math.isfinite(nerr) or nerr >= err:
                    break
                u, r, err = un, rn, nerr
            solve.rel_err = max(
                solve.rel_err, err / (1.0 + float(np.linalg.norm(rhs)))
            )
            return u[:nx], u[nx:nx + p], sc.apply_Winv(u[nx + p:])

        solve.rel_err = 0.0
        return solve


# ---------------------------------------------------------------------------
# homogeneous self-dual interior-point core
# ---------------------------------------------------------------------------

class _DenseOperator:
    def __init__(self, G: np.ndarray):
        self.G = np.asarray(G, dtype=float)
        self.shape = self.G.shape

    def matvec(self, x):
        return self.G @ x

    def rmatvec(self, z):
        return self.G.T @ z


@dataclass(frozen=True, eq=False)
class ConeSolution:
    """Scaled solution (or certificate) of a cone program."""

    status: Status
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    s: np.ndarray
    primal_objective: float
    dual_objective: float
    diag: SolveDiagnostics


def _shift_into_cone(blocks: _Blocks, v: np.ndarray) -> np.ndarray:
    me = blocks.min_eig(v)
    if me > 0:
        return v
    return v + (1.0 - me) * blocks.identity()


def solve_cone_program(
    c: np.ndarray,
    G,
    h: np.ndarray,
    dims: ConeDims,
    A: np.ndarray | None = None,
    b: np.ndarray | None = None,
    cfg: SolverConfig | None = None,
    kkt=None,
) -> ConeSolution:
    """Solve ``min c'x  s.t.  A x = b, G x + s = h, s in K``.

    ``G`` may be a dense array or any object with ``shape``, ``matvec``
    and ``rmatvec``; in the latter case a matching ``kkt`` strategy must
    be supplied.  Infeasible and unbounded problems are reported through
    ``status`` together with the normalized certificate in ``(y, z)`` or
    ``(x, s)`` respectively.
    """
    cfg = cfg or SolverConfig()
    blocks = _Blocks(dims)
    Gop = G if hasattr(G, "matvec") else _DenseOperator(G)
    m, nx = Gop.shape
    c = np.asarray(c, dtype=float)
    h = np.asarray(h, dtype=float)
    if m != blocks.dim or h.size != m or c.size != nx:
        raise ValueError("inconsistent cone program dimensions")
    has_eq = A is not None and A.shape[0] > 0
    A_ = np.asarray(A, dtype=float) if has_eq else None
    bvec = np.asarray(b, dtype=float) if has_eq else np.zeros(0)
    if has_eq and (A_.shape[1] != nx or bvec.size != A_.shape[0]):
        raise ValueError("inconsistent equality block dimensions")
    if kkt is None:
        if not isinstance(G, np.ndarray):
            raise ValueError("a kkt strategy is required for operator G")
        kkt = DenseNormalKKT(G, dims, A_)

    norm_c = 1.0 + float(np.linalg.norm(c))
    norm_h = 1.0 + float(np.linalg.norm(h))
    norm_b = 1.0 + float(np.linalg.norm(bvec))

    # initial point from two least-squares solves at identity scaling
    f_id = kkt.factor(_Scaling.identity(blocks))
    x, _, uz = f_id(np.zeros(nx), bvec, h)
    s = _shift_into_cone(blocks, -uz)
    x2, y, z2 = f_id(-c, np.zeros_like(bvec), np.zeros(m))
    del x2
    z = _shift_into_cone(blocks, z2)
    tau, kappa = 1.0, 1.0

    e = blocks.identity()
    zeros_y = np.zeros(0)
    best: tuple[float, tuple] | None = None
    iterations = 0

    for iterations in range(1, cfg.max_iter + 1):
        Gz = Gop.rmatvec(z)
        Aty = A_.T @ y if has_eq else 0.0
        Gx = Gop.matvec(x)
        hresx = Gz + Aty + c * tau
        hresz = Gx + s - h * tau
        hresy = (A_ @ x - bvec * tau) if has_eq else zeros_y
        cx = float(c @ x)
        hz = float(h @ z)
        by = float(bvec @ y) if has_eq else 0.0
        hrestau = kappa + cx + by + hz

        szdot = float(s @ z)
        gapq = szdot + tau * kappa
        mu = gapq / (blocks.degree + 1)

        pcost = cx / tau
        dcost = -(by + hz) / tau
        agap = szdot / (tau * tau)
        relgap = agap / max(1.0, abs(pcost), abs(dcost))
        pres = float(np.linalg.norm(hresz)) / (tau * norm_h)
        if has_eq:
            pres = max(pres, float(np.linalg.norm(hresy)) / (tau * norm_b))
        dres = float(np.linalg.norm(hresx)) / (tau * norm_c)

        if cfg.verbose:
            print(
                f"it {iterations:3d}  pres {pres:9.2e}  dres {dres:9.2e}  "
                f"relgap {relgap:9.2e}  mu {mu:9.2e}  tau {tau:9.2e}  kappa {kappa:9.2e}"
            )
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, (x / tau, y / tau, z / tau, s / tau, pres, dres, relgap, pcost, dcost))

        if pres <= cfg.tol and dres <= cfg.tol and (agap <= cfg.abstol or relgap <= cfg.tol):
            diag = SolveDiagnostics(iterations, pres, dres, relgap, Status.OPTIMAL)
            return ConeSolution(
                Status.OPTIMAL, x / tau, y / tau, z / tau, s / tau, pcost, dcost, diag
            )

        infeas_val = -(hz + by)
        if infeas_val > 0:
            pinfres = float(np.linalg.norm(np.asarray(Gz + Aty))) / (norm_c * infeas_val)
            if pinfres <= cfg.tol:
                diag = SolveDiagnostics(iterations, pinfres, pinfres, 0.0, Status.INFEASIBLE)
                return ConeSolution(
                    Status.INFEASIBLE,
                    x / tau,
                    y / infeas_val,
                    z / infeas_val,
                    s / tau,
                    math.nan,
                    math.nan,
                    diag,
                )
        if -cx > 0:
            dnum = float(np.linalg.norm(Gx + s))
            if has_eq:
                dnum = max(dnum, float(np.linalg.norm(hresy + bvec * tau)))
            dinfres = dnum / (max(norm_h, norm_b) * (-cx))
            if dinfres <= cfg.tol:
                diag = SolveDiagnostics(iterations, dinfres, dinfres, 0.0, Status.UNBOUNDED)
                return ConeSolution(
                    Status.UNBOUNDED,
                    x / (-cx),
                    y / tau,
                    z / tau,
                    s / (-cx),
                    math.nan,
                    math.nan,
                    diag,
                )

        try:
            sc = _Scaling.compute(blocks, s, z)
            f_w = kkt.factor(sc)
        except np.linalg.LinAlgError:
            if cfg.verbose:
                print("  stop: scaling or factorization breakdown")
            break
        lam = sc.lam
        lam_sq = blocks.jordan_mul(lam, lam)

        vx, vy, vz = f_w(-c, bvec, h)
        # c'vx + b'vy + h'vz collapses to -|W vz|^2 for an exact KKT
        # solve; the collapsed form avoids catastrophic cancellation and
        # keeps the sign certain
        w_vz = sc.apply_W(vz)
        dden = -float(w_vz @ w_vz) - kappa / tau
        if not math.isfinite(dden):
            if cfg.verbose:
                print("  stop: degenerate step denominator")
            break

        def newton(w_rs, rkappa, eta):
            ux, uy, uz_ = f_w(
                -eta * hresx,
                -eta * hresy if has_eq else zeros_y,
                -eta * hresz - w_rs,
            )
            num = (
                -eta * hrestau
                - float(c @ ux + (bvec @ uy if has_eq else 0.0) + h @ uz_)
                - rkappa / tau
            )
            dtau = num / dden
            dx = ux + dtau * vx
            dy = uy + dtau * vy
            dz = uz_ + dtau * vz
            # evaluate ds from the feasibility row it has to satisfy;
            # the algebraically equal form W(rs) - W^2 dz amplifies
            # solve error through W^2 once blocks approach the boundary
            ds = -eta * hresz + h * dtau - Gop.matvec(dx)
            dkappa = (rkappa - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        # predictor; its scaled residual W(arrow(lam) \ (-lam o lam))
        # collapses to -W lam = -s exactly
        dxa, dya, dza, dsa, dtaua, dkappaa = newton(-s, -tau * kappa, 1.0)
        amax = min(blocks.max_step(s, dsa), blocks.max_step(z, dza))
        if dtaua < 0:
            amax = min(amax, -tau / dtaua)
        if dkappaa < 0:
            amax = min(amax, -kappa / dkappaa)
        alpha_aff = min(1.0, amax)
        gap_aff = (
            float((s + alpha_aff * dsa) @ (z + alpha_aff * dza))
            + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)
        )
        sigma = min(1.0, max(0.0, gap_aff / gapq)) ** 3

        # corrector
        corr = blocks.jordan_mul(sc.apply_Winv(dsa), sc.apply_W(dza))
        ds_target = sigma * mu * e - lam_sq - corr
        rkappa = sigma * mu - tau * kappa - dtaua * dkappaa
        w_rs = sc.apply_W(blocks.arrow_solve(lam, ds_target))
        dx, dy, dz, ds, dtau, dkappa = newton(w_rs, rkappa, 1.0 - sigma)
        amax = min(blocks.max_step(s, ds), blocks.max_step(z, dz))
        if dtau < 0:
            amax = min(amax, -tau / dtau)
        if dkappa < 0:
            amax = min(amax, -kappa / dkappa)
        alpha = min(1.0, cfg.step_fraction * amax)
        direrr = getattr(f_w, "rel_err", 0.0)
        if cfg.verbose:
            print(f"  sigma {sigma:9.2e}  alpha {alpha:9.2e}  direrr {direrr:9.2e}")
        if direrr > 1e-2:
            # refinement stopped contracting; taking such a step would
            # corrupt the iterate, so settle for the best one seen
            if cfg.verbose:
                print("  stop: direction accuracy lost")
            break
        if not math.isfinite(alpha) or alpha <= 1e-12:
            if cfg.verbose:
                print("  stop: vanishing step")
            break

        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa

    xb, yb, zb, sb, pres_b, dres_b, relgap_b, pcost_b, dcost_b = best[1]
    diag = SolveDiagnostics(iterations, pres_b, dres_b, relgap_b, Status.MAX_ITER)
    return ConeSolution(Status.MAX_ITER, xb, yb, zb, sb, pcost_b, dcost_b, diag)


# ---------------------------------------------------------------------------
# minimax front end
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MinimaxProblem:
    """Discrete sup-norm fit: choose coefficients minimizing
    ``max_j |targets[j] - (basis @ coeffs)[j]|``.

    ``basis`` is complex with an odd number of columns (degree-n lag
    kernels).  With ``real_coefficients_only`` the coefficients range
    over the reals, which is lossless for conjugate-symmetric data.
    """

    targets: np.ndarray
    basis: np.ndarray
    real_coefficients_only: bool = False

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=complex)
        basis = np.asarray(self.basis, dtype=complex)
        if targets.ndim != 1 or targets.size == 0:
            raise ValueError("targets must be a nonempty vector")
        if basis.ndim != 2 or basis.shape[0] != targets.size:
            raise ValueError("basis rows must match targets")
        if basis.shape[1] % 2 != 1:
            raise ValueError("basis must have an odd number of columns")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "basis", basis)
        targets.setflags(write=False)
        basis.setflags(write=False)


class MinimaxSolution(NamedTuple):
    t_star: float
    coeffs: np.ndarray
    dual_weights: np.ndarray
    diag: SolveDiagnostics


def _minimax_cone_data(problem: MinimaxProblem):
    m = problem.targets.size
    ncol = problem.basis.shape[1]
    if problem.real_coefficients_only:
        b_re = problem.basis.real
        b_im = problem.basis.imag
    else:
        b_re = np.hstack([problem.basis.real, -problem.basis.imag])
        b_im = np.hstack([problem.basis.imag, problem.basis.real])
    nx = 1 + b_re.shape[1]
    G = np.zeros((3 * m, nx))
    G[0::3, 0] = -1.0
    G[1::3, 1:] = b_re
    G[2::3, 1:] = b_im
    h = np.zeros(3 * m)
    h[1::3] = problem.targets.real
    h[2::3] = problem.targets.imag
    c = np.zeros(nx)
    c[0] = 1.0
    return c, G, h, ConeDims(0, (3,) * m), ncol


def _run_minimax(problem: MinimaxProblem, cfg: SolverConfig, augmented: bool) -> MinimaxSolution:
    c, G, h, dims, ncol = _minimax_cone_data(problem)
    kkt = AugmentedKKT(G, dims) if augmented else None
    sol = solve_cone_program(c, G, h, dims, cfg=cfg, kkt=kkt)
    if sol.status in (Status.INFEASIBLE, Status.UNBOUNDED):
        # cannot happen for a well-posed epigraph problem
        raise RuntimeError(f"minimax solve reported {sol.status.value}")
    if problem.real_coefficients_only:
        coeffs = sol.x[1:].astype(complex)
    else:
        coeffs = sol.x[1 : 1 + ncol] + 1j * sol.x[1 + ncol :]
    zb = sol.z.reshape(-1, 3)
    dual_weights = -zb[:, 1] + 1j * zb[:, 2]
    t_star = float(np.abs(problem.targets - problem.basis @ coeffs).max())
    return MinimaxSolution(t_star, coeffs, dual_weights, sol.diag)


def _run_reps(mask: np.ndarray, mag: np.ndarray) -> list[int]:
    """Maximizer of ``mag`` within each contiguous run of ``mask``.

    One representative per run keeps the restricted problem
    nondegenerate: adjacent grid nodes carry near-duplicate rows, and
    duplicated actives stall the subsolve exactly like the full-grid
    smear does.  A run hiding two genuine peaks loses one here, but the
    exchange loop reinstates it from the violation scan.
    """
    idx = np.flatnonzero(mask)
    reps: list[int] = []
    run_start = 0
    for i in range(1, idx.size + 1):
        if i == idx.size or idx[i] != idx[i - 1] + 1:
            run = idx[run_start:i]
            reps.append(int(run[np.argmax(mag[run])]))
            run_start = i
    return reps


def _polish_minimax(
    problem: MinimaxProblem, cfg: SolverConfig, first: MinimaxSolution
) -> MinimaxSolution | None:
    """Re-solve on the near-active points with the unreduced KKT.

    The full-grid solve localizes the extremal points but its reduced
    Newton systems hit a conditioning wall near the boundary.  The tiny
    restricted problem solves to near machine accuracy; an exchange
    round guards against a missed extremal point.  Returns None when no
    certified improvement was found.
    """
    targets, basis = problem.targets, problem.basis
    mag = np.abs(targets - basis @ first.coeffs)
    t_hat = float(mag.max())
    if t_hat <= 1e-14:
        return None
    cand = mag >= (1.0 - 1e-3) * t_hat
    wmag = np.abs(first.dual_weights)
    if wmag.max() > 0:
        cand |= wmag >= 1e-6 * wmag.max()
    # at most two representatives per contiguous run: longer runs of
    # near-duplicate actives make the restricted problem as degenerate
    # as the full one
    sel = set(_run_reps(cand, mag))
    sel.add(int(mag.argmax()))
    params = basis.shape[1] * (1 if problem.real_coefficients_only else 2)
    cap = 3 * (params + 1) + 40
    sub_cfg = SolverConfig(
        tol=min(cfg.tol, 1e-10),
        abstol=min(cfg.abstol, 1e-12),
        max_iter=max(cfg.max_iter, 100),
        step_fraction=cfg.step_fraction,
    )
    iters = first.diag.iterations
    best: MinimaxSolution | None = None
    for _ in range(6):
        idx = np.array(sorted(sel), dtype=int)
        if idx.size > cap:
            break
        sub = MinimaxProblem(targets[idx], basis[idx], problem.real_coefficients_only)
        try:
            subsol = _run_minimax(sub, sub_cfg, augmented=True)
        except (RuntimeError, np.linalg.LinAlgError):
            break
        iters += subsol.diag.iterations
        mag = np.abs(targets - basis @ subsol.coeffs)
        t_full = float(mag.max())
        improved = best is None or t_full < best.t_star
        if improved:
            weights = np.zeros(targets.size, dtype=complex)
            weights[idx] = subsol.dual_weights
            diag = SolveDiagnostics(
                iters,
                subsol.diag.primal_residual,
                subsol.diag.dual_residual,
                subsol.diag.rel_gap,
                subsol.diag.status,
            )
            best = MinimaxSolution(t_full, subsol.coeffs, weights, diag)
        # the restricted optimum lower-bounds the full one, so matching
        # values certify optimality on the whole grid -- provided the
        # subsolve converged, otherwise its value proves nothing
        if (
            subsol.diag.rel_gap <= 1e-8
            and t_full <= subsol.t_star * (1.0 + 1e-9) + 1e-12
        ):
            return best
        if not improved:
            break
        # exchange: keep everything that carries dual weight, add thinned
        # violators
        sel = set(idx[np.abs(subsol.dual_weights) > 1e-8].tolist())
        sel.update(_run_reps(mag > subsol.t_star * (1.0 + 1e-12), mag))
        sel.add(int(mag.argmax()))
    # no certified round: the exact sup-norm readout still makes the best
    # round's coefficients a sound (if uncertified) improvement
    if best is not None and best.t_star < first.t_star:
        return MinimaxSolution(
            best.t_star,
            best.coeffs,
            best.dual_weights,
            SolveDiagnostics(
                iters,
                best.diag.primal_residual,
                best.diag.dual_residual,
                best.diag.rel_gap,
                first.diag.status,
            ),
        )
    return None


def solve_minimax(
    problem: MinimaxProblem, cfg: SolverConfig | None = None, polish: bool = True
) -> MinimaxSolution:
    """Solve a :class:`MinimaxProblem` through the interior-point core.

    The epigraph form ``min t  s.t.  |r_j| <= t`` places one
    3-dimensional quadratic cone per sample.  ``t_star`` is always the
    exact sup-norm of the returned residual, so it upper-bounds the true
    discrete optimum.  The ``dual_weights`` are read off the cone
    multipliers; they have total variation at most ``1 + tol``,
    annihilate the basis columns (their real pairing for a
    real-restricted solve) and align with the residual:
    ``Re sum_j targets[j] * dual_weights[j] >= t_star - tol``.

    ``polish`` re-solves on the detected extremal points with an
    unreduced KKT factorization, which certifies the value to roughly
    1e-9 relative even when the full-grid solve stalls earlier.
    """
    cfg = cfg or SolverConfig()
    sol = _run_minimax(problem, cfg, augmented=False)
    if polish:
        polished = _polish_minimax(problem, cfg, sol)
        if polished is not None:
            sol = polished
    return sol


# ---------------------------------------------------------------------------
# linear-program front end
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Standard-form LP: maximize ``c @ x`` over ``A x = b, x >= 0``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or c.ndim != 1 or b.ndim != 1:
            raise ValueError("need 2-d A and 1-d b, c")
        if A.shape != (b.size, c.size):
            raise ValueError("A must be (len(b), len(c))")
        if b.size == 0 or c.size == 0:
            raise ValueError("empty linear program")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        c.setflags(write=False)
        A.setflags(write=False)
        b.setflags(write=False)


class LpSolution(NamedTuple):
    value: float
    x: np.ndarray
    diag: SolveDiagnostics


def solve_lp(problem: LinearProgram, cfg: SolverConfig | None = None) -> LpSolution:
    """Solve a :class:`LinearProgram` through the interior-point core.

    The core works on the inequality form over the equality multipliers,
    whose variable dimension is the (small) row count; the LP solution is
    recovered from the orthant multipliers.  ``x`` satisfies
    ``x >= 0`` exactly and ``|A x - b| <= tol * (1 + max|b|)``.

    Raises
    ------
    Infeasible
        If no nonnegative solution of ``A x = b`` exists.
    Unbounded
        If the objective grows without bound along a feasible ray.
    """
    cfg = cfg or SolverConfig()
    A, b, c = problem.A, problem.b, problem.c
    sol = solve_cone_program(
        -b, A.T.copy(), -c, ConeDims(nonneg=c.size), cfg=cfg
    )
    if sol.status == Status.UNBOUNDED:
        # a ray certifies that no y satisfies A'y <= -c: the LP has no
        # feasible point
        raise Infeasible("equality system admits no nonnegative solution")
    if sol.status == Status.INFEASIBLE:
        # the certificate z is a feasible ray with c @ z > 0
        raise Unbounded("objective is unbounded above on the feasible set")
    x = np.maximum(sol.z, 0.0)
    return LpSolution(float(c @ x), x, sol.diag)
