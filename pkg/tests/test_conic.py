"""Solver-layer contracts: LP front end, minimax front end, certificates.

The reference values here come from independent oracles computed inside
the tests: vertex enumeration for small LPs and dense 1-D/2-D grid
search for constant minimax fits.
"""

import itertools

import numpy as np
import pytest

import covbound as cb


# ---------------------------------------------------------------------------
# linear programs
# ---------------------------------------------------------------------------

def test_lp_known_optimum():
    # max x1 + 2 x2 with x1 + x2 + slack = 1
    lp = cb.LinearProgram(c=[1.0, 2.0, 0.0],
                          A=[[1.0, 1.0, 1.0]],
                          b=[1.0])
    sol = cb.solve_lp(lp)
    assert sol.value == pytest.approx(2.0, abs=1e-8)
    assert np.all(sol.x >= 0)
    np.testing.assert_allclose(lp.A @ sol.x, lp.b, atol=1e-8)
    assert sol.diag.status is cb.Status.OPTIMAL


def test_lp_infeasible_raises():
    lp = cb.LinearProgram(c=[1.0, 1.0], A=[[1.0, 1.0]], b=[-1.0])
    with pytest.raises(cb.Infeasible):
        cb.solve_lp(lp)


def test_lp_unbounded_raises():
    lp = cb.LinearProgram(c=[1.0, 0.0], A=[[1.0, -1.0]], b=[0.0])
    with pytest.raises(cb.Unbounded):
        cb.solve_lp(lp)


def test_lp_shape_validation():
    with pytest.raises(ValueError):
        cb.LinearProgram(c=[1.0], A=[[1.0, 2.0]], b=[1.0])
    with pytest.raises(ValueError):
        cb.LinearProgram(c=[], A=np.zeros((1, 0)), b=[1.0])


def _vertex_enumeration_max(c, A, b):
    """Brute-force LP optimum over basic feasible solutions."""
    m, n = A.shape
    best = None
    for cols in itertools.combinations(range(n), m):
        sub = A[:, cols]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        xb = np.linalg.solve(sub, b)
        if xb.min() < -1e-9:
            continue
        val = float(c[list(cols)] @ xb)
        if best is None or val > best: best = val
    return best


@pytest.mark.parametrize("seed", range(12))
def test_lp_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    # bounded by construction: the first row fixes the coordinate sum
    A = np.vstack([np.ones(5), rng.normal(size=(2, 5))])
    x_feas = rng.uniform(0.5, 1.5, size=5)
    b = A @ x_feas
    c = rng.normal(size=5)
    lp = cb.LinearProgram(c=c, A=A, b=b)
    # a 1e-8 match needs headroom over the comparison tolerance
    sol = cb.solve_lp(lp, cb.SolverConfig(tol=1e-10, abstol=1e-12))
    oracle = _vertex_enumeration_max(c, A, b)
    assert oracle is not None
    assert sol.value == pytest.approx(oracle, abs=1e-8)


def test_lp_is_deterministic():
    rng = np.random.default_rng(42)
    A = np.vstack([np.ones(6), rng.normal(size=(2, 6))])
    b = A @ rng.uniform(0.5, 1.5, size=6)
    c = rng.normal(size=6)
    lp = cb.LinearProgram(c=c, A=A, b=b)
    first = cb.solve_lp(lp)
    second = cb.solve_lp(lp)
    assert first.value == second.value
    assert np.array_equal(first.x, second.x)


# ---------------------------------------------------------------------------
# minimax fits
# ---------------------------------------------------------------------------

def _constant_fit_value(targets, real_only):
    """Grid search for min_c max_j |targets[j] - c|, refined twice.

    The objective is 1-Lipschitz in c, so the final grid pitch bounds
    the oracle error; two refinement stages push it below 1e-4.
    """
    lo = min(targets.real.min(), targets.imag.min()) - 1.0
    hi = max(targets.real.max(), targets.imag.max()) + 1.0
    center, radius = 0.5 * (lo + hi) + 0j, 0.5 * (hi - lo)
    best = None
    for _ in range(3):
        axis = np.linspace(-radius, radius, 201)
        if real_only:
            cand = center.real + axis + 0j
        else:
            re, im = np.meshgrid(axis, axis)
            cand = center + (re + 1j * im).ravel()
        dist = np.abs(targets[None, :] - cand[:, None]).max(axis=1)
        k = int(dist.argmin())
        best, center = float(dist[k]), cand[k]
        radius = 4.0 * (2.0 * radius / 200)
    return best


@pytest.mark.parametrize("seed,real_only", [(0, False), (1, False),
                                            (2, True), (3, True)])
def test_minimax_constant_fit_matches_grid_search(seed, real_only):
    rng = np.random.default_rng(seed)
    targets = rng.normal(size=9) + 1j * rng.normal(size=9)
    if real_only:
        # conjugate-symmetric data keeps the real restriction lossless
        targets = np.concatenate([np.conj(targets[::-1]), [0.2 + 0j], targets])
    problem = cb.MinimaxProblem(targets, np.ones((targets.size, 1)),
                                real_coefficients_only=real_only)
    sol = cb.solve_minimax(problem)
    oracle = _constant_fit_value(targets, real_only)
    assert sol.t_star == pytest.approx(oracle, abs=1e-3)
    # t_star is always the exact sup-norm of the returned residual
    resid = np.abs(targets - problem.basis @ sol.coeffs)
    assert float(resid.max()) == sol.t_star


def test_minimax_two_point_analytic():
    # best constant for two points is their midpoint
    targets = np.array([1.0 + 0j, -1.0 + 0j])
    sol = cb.solve_minimax(cb.MinimaxProblem(targets, np.ones((2, 1))))
    assert sol.t_star == pytest.approx(1.0, abs=1e-9)
    assert abs(sol.coeffs[0]) <= 1e-8


def _trig_instance(seed, n, m, real_only):
    rng = np.random.default_rng(seed)
    theta = np.sort(rng.uniform(-0.4, 0.4, size=m))
    basis = np.exp(2j * np.pi * np.outer(theta, np.arange(-n, n + 1)))
    targets = np.exp(2j * np.pi * theta * (n + 0.7))
    if real_only:
        theta = np.sort(np.concatenate([-theta, theta]))
        basis = np.exp(2j * np.pi * np.outer(theta, np.arange(-n, n + 1)))
        targets = np.exp(2j * np.pi * theta * (n + 0.7))
    return cb.MinimaxProblem(targets, basis, real_coefficients_only=real_only)


@pytest.mark.parametrize("seed,real_only", [(5, False), (6, True)])
def test_minimax_certificate_properties(seed, real_only):
    problem = _trig_instance(seed, n=2, m=80, real_only=real_only)
    sol = cb.solve_minimax(problem)
    w = sol.dual_weights
    tol = 1e-6
    assert float(np.abs(w).sum()) <= 1.0 + tol
    pair_cols = w @ problem.basis
    if real_only:
        assert float(np.abs(pair_cols.real).max()) <= tol
    else:
        assert float(np.abs(pair_cols).max()) <= tol
    align = float(np.real(problem.targets @ w))
    assert align >= sol.t_star - tol
    # weak duality: the pairing never exceeds the sup-norm value
    assert align <= sol.t_star + tol


def test_minimax_validation():
    with pytest.raises(ValueError):
        cb.MinimaxProblem(np.zeros(0), np.zeros((0, 1)))
    with pytest.raises(ValueError):
        cb.MinimaxProblem(np.zeros(3), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        cb.MinimaxProblem(np.zeros(3), np.zeros((3, 2)))


def test_minimax_iteration_cap_is_reported():
    problem = _trig_instance(9, n=3, m=200, real_only=False)
    cfg = cb.SolverConfig(max_iter=3)
    sol = cb.solve_minimax(problem, cfg, polish=False)
    assert sol.diag.iterations <= 3
    assert sol.diag.status in (cb.Status.OPTIMAL, cb.Status.MAX_ITER)
    # the reported value is still the exact sup-norm of its residual
    resid = np.abs(problem.targets - problem.basis @ sol.coeffs)
    assert sol.t_star == float(resid.max())


def test_solver_config_validation():
    with pytest.raises(ValueError):
        cb.SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        cb.SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        cb.SolverConfig(step_fraction=1.5)
