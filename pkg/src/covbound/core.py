"""Domain types for band structures, frequency grids, trigonometric
polynomials and discrete spectral measures.

Frequencies are expressed in cycles per sample throughout, so the complex
lag kernel at lag ``tau`` is ``exp(2j*pi*theta*tau)`` and the integer-lag
kernels with ``|k| <= n`` span the trigonometric polynomials of degree
``n``.  All container types are immutable once constructed and safe to
share across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmptyBand",
    "MalformedInterval",
    "BadStep",
    "GridMismatch",
    "FrequencyBand",
    "FrequencyGrid",
    "ProblemSpec",
    "TrigPolynomial",
    "DiscreteMeasurePair",
    "ComplexMeasure",
    "make_band",
    "discretize",
    "eval_kernel",
    "eval_poly",
    "trig_basis",
    "covariance_at",
    "DEFAULT_GRID_STEP",
    "REAL_COEFF_RTOL",
]

# Default grid spacing: 1/2000 of a cycle.
DEFAULT_GRID_STEP = 5e-4

# A polynomial counts as real-coefficient when max|Im| <= rtol*(1 + max|coeff|).
REAL_COEFF_RTOL = 1e-6

# Absolute tolerance used when testing a band for mirror symmetry.
_SYMMETRY_ATOL = 1e-12


class EmptyBand(ValueError):
    """Raised when a band would contain no intervals."""


class MalformedInterval(ValueError):
    """Raised for an interval with lo > hi or non-finite endpoints."""


class BadStep(ValueError):
    """Raised for a non-positive or non-finite grid step."""


class GridMismatch(ValueError):
    """Raised when a grid was built for a different band than the spec."""


# ---------------------------------------------------------------------------
# bands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyBand:
    """Finite union of closed frequency intervals, sorted and disjoint.

    Instances should be built through :func:`make_band`, which validates,
    sorts and merges the raw intervals.  Intervals may have zero length
    (isolated spectral lines).
    """

    intervals: tuple[tuple[float, float], ...]

    def total_length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, theta: float, atol: float = 0.0) -> bool:
        return any(lo - atol <= theta <= hi + atol for lo, hi in self.intervals)

    def is_symmetric(self, atol: float = _SYMMETRY_ATOL) -> bool:
        """True when the band is invariant under theta -> -theta."""
        ivs = self.intervals
        k = len(ivs)
        for i in range(k):
            lo, hi = ivs[i]
            mlo, mhi = ivs[k - 1 - i]
            if abs(lo + mhi) > atol or abs(hi + mlo) > atol:
                return False
        return True

    def shifted(self, dtheta: float) -> "FrequencyBand":
        """Translate every interval by ``dtheta``."""
        if not math.isfinite(dtheta):
            raise MalformedInterval("shift must be finite")
        return FrequencyBand(
            tuple((lo + dtheta, hi + dtheta) for lo, hi in self.intervals)
        )


def make_band(intervals) -> FrequencyBand:
    """Build a :class:`FrequencyBand` from ``(lo, hi)`` pairs.

    Intervals are validated, sorted by left endpoint and merged whenever
    they overlap or touch (the intervals are closed).  Zero-length
    intervals are allowed.

    Raises
    ------
    EmptyBand
        If no intervals are given.
    MalformedInterval
        If any pair has ``lo > hi`` or a non-finite endpoint.
    """
    pairs = [(float(lo), float(hi)) for lo, hi in intervals]
    if not pairs:
        raise EmptyBand("a band needs at least one interval")
    for lo, hi in pairs:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise MalformedInterval(f"non-finite interval ({lo}, {hi})")
        if lo > hi:
            raise MalformedInterval(f"interval ({lo}, {hi}) has lo > hi")
    pairs.sort()
    merged = [pairs[0]]
    for lo, hi in pairs[1:]:
        plo, phi = merged[-1]
        if lo <= phi:  # closed intervals: touching endpoints merge
            merged[-1] = (plo, max(phi, hi))
        else:
            merged.append((lo, hi))
    return FrequencyBand(tuple(merged))


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Sorted sample points covering a band, interval by interval.

    Attributes
    ----------
    band : FrequencyBand
        The band the grid discretizes.
    points : ndarray
        Strictly increasing frequencies; every interval contributes its
        endpoints.  The array is read-only.
    step : float
        Requested spacing; actual spacing never exceeds it (up to
        roundoff).
    interval_slices : tuple of (start, stop)
        Half-open index ranges of ``points`` per band interval.
    """

    band: FrequencyBand
    points: np.ndarray
    step: float
    interval_slices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points.size

    def reflection_permutation(self, atol: float | None = None) -> np.ndarray | None:
        """Index map sending each point to its mirror ``-theta``.

        Returns ``None`` when the grid is not symmetric within ``atol``
        (default: ``1e-9 * max(1, step)``).
        """
        if atol is None:
            atol = 1e-9 * max(1.0, self.step)
        pts = self.points
        idx = np.searchsorted(pts, -pts)
        idx = np.clip(idx, 0, pts.size - 1)
        # searchsorted returns the right neighbour; check it and its left one
        left = np.clip(idx - 1, 0, pts.size - 1)
        pick = np.where(np.abs(pts[left] + pts) < np.abs(pts[idx] + pts), left, idx)
        if np.max(np.abs(pts[pick] + pts)) > atol:
            return None
        return pick


def _interval_points(lo: float, hi: float, step: float) -> np.ndarray:
    """Uniform closed sampling of [lo, hi] with spacing <= step."""
    length = hi - lo
    if length == 0.0:
        return np.array([lo])
    # guard against 600.0000000000001-style roundoff inflating the count
    nsub = max(1, math.ceil((length / step) * (1.0 - 1e-12)))
    return np.linspace(lo, hi, nsub + 1)


def discretize(band: FrequencyBand, step: float) -> FrequencyGrid:
    """Sample ``band`` on a uniform per-interval lattice.

    Each interval ``[lo, hi]`` is covered by ``ceil((hi-lo)/step) + 1``
    equally spaced points including both endpoints, so the realized
    spacing is at most ``step``.  For a mirror-symmetric band the points
    are generated on the nonnegative side and negated, which makes the
    grid exactly symmetric in floating point.

    Raises
    ------
    BadStep
        If ``step`` is not a positive finite number.
    """
    if not (isinstance(step, (int, float)) and math.isfinite(step) and step > 0):
        raise BadStep(f"grid step must be positive and finite, got {step!r}")
    step = float(step)
    ivs = band.intervals
    k = len(ivs)
    per: list[np.ndarray | None] = [None] * k
    if band.is_symmetric():
        # fill the nonnegative side first, then mirror bit-exactly
        for i in range(k - 1, -1, -1):
            j = k - 1 - i
            lo, hi = ivs[i]
            if i > j:
                per[i] = _interval_points(lo, hi, step)
                per[j] = -per[i][::-1]
            elif i == j:  # straddles zero: lo == -hi
                pos = _interval_points(0.0, hi, step)
                per[i] = np.concatenate([-pos[:0:-1], pos]) if hi > 0 else pos
    else:
        for i, (lo, hi) in enumerate(ivs):
            per[i] = _interval_points(lo, hi, step)
    slices = []
    start = 0
    for arr in per:
        slices.append((start, start + arr.size))
        start += arr.size
    points = np.ascontiguousarray(np.concatenate(per))
    return FrequencyGrid(band, points, step, tuple(slices))


# ---------------------------------------------------------------------------
# problem specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """One bound instance: band, pinned lag range, query lag and power.

    ``n`` is the largest integer lag at which the covariance is pinned,
    ``tau`` the (real) lag being queried and ``sigma2`` the signal power,
    i.e. the covariance at lag zero.
    """

    band: FrequencyBand
    n: int
    tau: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be positive and finite")

    @property
    def lags(self) -> np.ndarray:
        """The pinned integer lags -n..n (derived, never stored)."""
        return np.arange(-self.n, self.n + 1)


# ---------------------------------------------------------------------------
# kernels and polynomials
# ---------------------------------------------------------------------------

def eval_kernel(tau: float, theta) -> np.ndarray | complex:
    """Complex lag kernel ``exp(2j*pi*theta*tau)``; unimodular."""
    return np.exp(2j * np.pi * np.asarray(theta) * tau)


def trig_basis(theta, n: int) -> np.ndarray:
    """Matrix of integer-lag kernels on ``theta``.

    Column ``k + n`` holds ``exp(2j*pi*theta*k)`` for ``k = -n..n``; this
    is the evaluation map of degree-``n`` trigonometric polynomials.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(-n, n + 1)
    return np.exp(2j * np.pi * np.outer(theta, k))


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Trigonometric polynomial ``sum_k coeffs[k+n] * exp(2j*pi*theta*k)``.

    ``coeffs`` has length ``2n+1`` and is indexed by lag ``k`` through
    offset ``n``.  The coefficient array is read-only.
    """

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size != 2 * self.n + 1:
            raise ValueError(
                f"need {2 * self.n + 1} coefficients for degree {self.n}, "
                f"got shape {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)
        coeffs.setflags(write=False)

    @classmethod
    def from_lag(cls, k: int, n: int) -> "TrigPolynomial":
        """The single integer-lag kernel ``exp(2j*pi*theta*k)``, |k| <= n."""
        if abs(k) > n:
            raise ValueError(f"lag {k} outside degree {n}")
        coeffs = np.zeros(2 * n + 1, dtype=complex)
        coeffs[k + n] = 1.0
        return cls(n, coeffs)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.n:
            raise ValueError(f"lag {k} outside degree {self.n}")
        return complex(self.coeffs[k + self.n])

    def evaluate(self, theta):
        return eval_poly(self, theta)

    def conj_reflect(self) -> "TrigPolynomial":
        """Map Q to Q*, where Q*(theta) = conj(Q(-theta)).

        In coefficients this is simply ``coeffs -> conj(coeffs)``.
        """
        return TrigPolynomial(self.n, np.conj(self.coeffs))

    def is_real_coefficient(self, rtol: float = REAL_COEFF_RTOL) -> bool:
        scale = 1.0 + float(np.max(np.abs(self.coeffs)))
        return float(np.max(np.abs(self.coeffs.imag))) <= rtol * scale


def eval_poly(q: TrigPolynomial, theta):
    """Evaluate ``q`` at scalar or array ``theta``."""
    values = trig_basis(theta, q.n) @ q.coeffs
    return values[0] if np.isscalar(theta) else values


# ---------------------------------------------------------------------------
# measures on grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteMeasurePair:
    """Pair of nonnegative atomic measures sharing one frequency grid.

    The weights are atom masses; integrals against the grid reduce to
    weighted sums, so the covariance observed under ``mu - nu`` at lag
    ``tau`` is ``sum_j exp(2j*pi*theta_j*tau) * (mu_j - nu_j)``.
    """

    grid: FrequencyGrid
    mu_weights: np.ndarray
    nu_weights: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu_weights, dtype=float)
        nu = np.asarray(self.nu_weights, dtype=float)
        if mu.shape != (self.grid.size,) or nu.shape != (self.grid.size,):
            raise ValueError("weight arrays must match the grid size")
        if mu.min(initial=0.0) < 0 or nu.min(initial=0.0) < 0:
            raise ValueError("measure weights must be nonnegative")
        object.__setattr__(self, "mu_weights", mu)
        object.__setattr__(self, "nu_weights", nu)
        mu.setflags(write=False)
        nu.setflags(write=False)

    def total_mass(self) -> float:
        return float(self.mu_weights.sum() + self.nu_weights.sum())

    def covariance(self, tau: float, which: str = "difference"):
        return covariance_at(self, tau, which)


def covariance_at(pair: DiscreteMeasurePair, tau, which: str = "difference"):
    """Covariance of ``pair`` at lag ``tau`` via discrete quadrature.

    Parameters
    ----------
    pair : DiscreteMeasurePair
    tau : float or array_like
    which : {"difference", "mu", "nu"}
        ``"difference"`` returns ``r_mu(tau) - r_nu(tau)``; the single
        measure variants return the individual covariances.
    """
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    kern = np.exp(2j * np.pi * np.outer(tau_arr, pair.grid.points))
    if which == "difference":
        w = pair.mu_weights - pair.nu_weights
    elif which == "mu":
        w = pair.mu_weights
    elif which == "nu":
        w = pair.nu_weights
    else:
        raise ValueError(f"unknown variant {which!r}")
    values = kern @ w
    return values[0] if np.isscalar(tau) else values


@dataclass(frozen=True, eq=False)
class ComplexMeasure:
    """Complex atomic measure on a frequency grid."""

    grid: FrequencyGrid
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.shape != (self.grid.size,):
            raise ValueError("weight array must match the grid size")
        object.__setattr__(self, "weights", w)
        w.setflags(write=False)

    @classmethod
    def zero(cls, grid: FrequencyGrid) -> "ComplexMeasure":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    def tv_norm(self) -> float:
        return float(np.abs(self.weights).sum())

    def moment(self, k):
        """Integral of ``exp(2j*pi*theta*k)``; vectorized over ``k``."""
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        vals = np.exp(2j * np.pi * np.outer(k_arr, self.grid.points)) @ self.weights
        return vals[0] if np.isscalar(k) else vals

    def conj_reflect(self) -> "ComplexMeasure":
        """The measure ``psi*`` with weight ``conj(psi(-theta))`` at theta.

        Requires a mirror-symmetric grid.
        """
        perm = self.grid.reflection_permutation()
        if perm is None:
            raise ValueError("conj_reflect needs a mirror-symmetric grid")
        return ComplexMeasure(self.grid, np.conj(self.weights[perm]))

    def symmetrized(self) -> "ComplexMeasure":
        """The average ``(psi + psi*)/2``; fixed points satisfy psi = psi*."""
        refl = self.conj_reflect()
        return ComplexMeasure(self.grid, 0.5 * (self.weights + refl.weights))
