"""Upper-bound engine: anchors, certificates, degenerate paths.

The anchor values were produced by this package at the default grid and
cross-checked against the independent dual program to below 1e-9; they
guard against regressions, not against the solver's own conventions.
"""

import numpy as np
import pytest

import covbound as cb

INTERVAL = ((-0.3, 0.3),)
SPLIT = ((-0.3, -0.1), (0.05, 0.3))

# (band intervals, n, tau) -> bound / (2 sigma2) at step 5e-4
ANCHORS = [
    (INTERVAL, 0, 0.5, 0.8090169943749475),
    (INTERVAL, 3, 0.5, 0.0055558289155866),
    (INTERVAL, 3, 7.0, 1.0000000020218325),
    (INTERVAL, 5, 0.5, 0.0002985437906688),
    (INTERVAL, 5, 4.7, 0.0050556444675698),
    (SPLIT, 3, 1.5, 0.0075796629237363),
    (SPLIT, 3, 3.3, 0.0525433682555391),
    (SPLIT, 3, 7.0, 0.9421715949780408),
    (SPLIT, 5, 6.3, 0.1826046460743279),
    (SPLIT, 5, 7.0, 0.3785482624164037),
]


def _solve(intervals, n, tau, sigma2=1.0, step=cb.DEFAULT_GRID_STEP):
    band = cb.make_band(intervals)
    spec = cb.ProblemSpec(band, n, tau, sigma2)
    grid = cb.discretize(band, step)
    return spec, grid, cb.upper_bound(spec, grid)


@pytest.mark.parametrize("intervals,n,tau,t_star", ANCHORS)
def test_anchor_values(intervals, n, tau, t_star):
    spec, grid, rep = _solve(intervals, n, tau)
    assert rep.bound / (2.0 * spec.sigma2) == pytest.approx(t_star, abs=1e-8)
    assert abs(rep.duality_gap) <= 1e-6 * 2.0 * spec.sigma2


def test_integer_lag_short_circuit():
    spec, grid, rep = _solve(INTERVAL, 3, 2.0)
    assert rep.bound == 0.0
    assert rep.duality_gap == 0.0
    assert isinstance(rep.omega, cb.DegenerateZeroResidual)
    assert rep.psi0.tv_norm() == 0.0
    # q0 is exactly the lag-2 kernel
    assert rep.q0.coefficient(2) == 1.0
    np.testing.assert_array_equal(np.delete(rep.q0.coeffs, 2 + 3), 0.0)


def test_integer_lag_outside_pin_range_is_not_zero():
    spec, grid, rep = _solve(INTERVAL, 3, 4.0)
    assert rep.bound > 0.1


def test_grid_mismatch_rejected():
    band = cb.make_band([(-0.3, 0.3)])
    other = cb.discretize(cb.make_band([(-0.2, 0.2)]), 1e-3)
    with pytest.raises(cb.GridMismatch):
        cb.upper_bound(cb.ProblemSpec(band, 3, 1.5), other)


def test_bound_scales_linearly_in_power():
    _, _, base = _solve(INTERVAL, 3, 1.5, sigma2=1.0, step=2e-3)
    _, _, scaled = _solve(INTERVAL, 3, 1.5, sigma2=2.5, step=2e-3)
    assert scaled.bound == pytest.approx(2.5 * base.bound, rel=1e-12)


def test_bound_is_even_in_tau():
    _, _, plus = _solve(INTERVAL, 3, 2.6, step=1e-3)
    _, _, minus = _solve(INTERVAL, 3, -2.6, step=1e-3)
    assert plus.bound == pytest.approx(minus.bound, abs=1e-9)


def test_symmetric_band_certificate_structure():
    spec, grid, rep = _solve(INTERVAL, 3, 1.5)
    assert rep.q0.is_real_coefficient()
    # psi0 is a fixed point of conjugate reflection
    np.testing.assert_allclose(rep.psi0.weights,
                               rep.psi0.conj_reflect().weights, atol=1e-12)
    # annihilation, unit ball, alignment
    assert float(np.abs(rep.psi0.moment(spec.lags)).max()) <= 1e-6
    assert rep.psi0.tv_norm() <= 1.0 + 1e-6
    g = cb.eval_kernel(spec.tau, grid.points)
    align = float(np.real(np.sum(g * rep.psi0.weights)))
    assert align >= rep.bound / (2.0 * spec.sigma2) - 1e-6


def test_omega_lies_in_band_and_matches_extraction():
    spec, grid, rep = _solve(SPLIT, 3, 3.3)
    assert not isinstance(rep.omega, cb.DegenerateZeroResidual)
    band = spec.band
    for w in rep.omega:
        assert band.contains(w, atol=1e-12)
    again = cb.extract_support(rep.q0, spec, grid)
    np.testing.assert_allclose(again, rep.omega, atol=1e-12)
    # enough alternation points to pin 2n+1 real parameters
    assert len(rep.omega) >= 2


def test_extract_support_degenerate_marker():
    band = cb.make_band(INTERVAL)
    spec = cb.ProblemSpec(band, 3, 1.0)
    grid = cb.discretize(band, 1e-3)
    q0 = cb.TrigPolynomial.from_lag(1, 3)
    out = cb.extract_support(q0, spec, grid)
    assert isinstance(out, cb.DegenerateZeroResidual)


@pytest.mark.parametrize("intervals,n,tau", [(INTERVAL, 3, 0.5),
                                             (SPLIT, 5, 6.3)])
def test_dual_bound_agrees(intervals, n, tau):
    band = cb.make_band(intervals)
    spec = cb.ProblemSpec(band, n, tau)
    grid = cb.discretize(band, cb.DEFAULT_GRID_STEP)
    rep = cb.upper_bound(spec, grid)
    value, psi, diag = cb.dual_bound(spec, grid)
    assert value == pytest.approx(rep.bound / 2.0, abs=1e-6)
    assert psi.tv_norm() <= 1.0 + 1e-6


def test_n0_analytic_oracle():
    # with no pinned lags the fit is a single constant; for a symmetric
    # interval [-b, b] the target arc has half-angle a = 2*pi*b*tau and
    # the best constant sits at cos(a), giving value sin(a) for a <=
    # pi/2 and 1 beyond
    for b, tau in [(0.3, 0.5), (0.25, 0.4), (0.2, 1.7)]:
        a = 2.0 * np.pi * b * tau
        expected = 1.0 if a >= np.pi / 2 else np.sin(a)
        _, _, rep = _solve(((-b, b),), 0, tau)
        assert rep.bound / 2.0 == pytest.approx(expected, abs=2e-7)


def test_bound_caps_at_twice_power():
    for tau in (6.0, 6.5, 7.0):
        _, _, rep = _solve(INTERVAL, 3, tau)
        assert rep.bound <= 2.0 + 1e-6


def test_reports_are_deterministic():
    _, _, first = _solve(SPLIT, 3, 3.3, step=1e-3)
    _, _, second = _solve(SPLIT, 3, 3.3, step=1e-3)
    assert first.bound == second.bound
    assert np.array_equal(first.psi0.weights, second.psi0.weights)
