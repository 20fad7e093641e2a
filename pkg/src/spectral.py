"""
Scattering amplitudes F(omega), the spectral density of an initial state,
and the decaying survival amplitude A(t) obtained from it.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline

from .errors import BudgetExceeded, SingularSystem, ValidationError
from .models import Branch, InitialState, ModelSpec, SpectralDensitySamples, SurvivalSeries
from .resolvent import CONDITION_LIMIT, DEFAULT_TOLERANCE, g_inverse_grid, g_inverse_matrix
from .utils import resolve_thread_count

logger = logging.getLogger("friedrichs.spectral")

THRESHOLD_DECADES = 8  # grid reaches down to 1e-8 * omega_1
POINTS_PER_DECADE = 40
FLANK_POINTS_PER_DECADE = 200
WINDOW_WIDTHS = 10.0  # +-10 gamma_n around each level
POINTS_PER_WIDTH = 100
PERIOD_FRACTION = 8  # spacing <= period / 8 inside the level windows
MAX_WINDOW_POINTS = 2_000_000
_DENSITY_CHUNK = 4096
_SERIES_SWITCH = 2.0
_SERIES_TERMS = 32
_SPLITTER = 134217729.0  # 2**27 + 1


# --- F and the density -----------------------------------------------------

def solve_F(
    spec: ModelSpec, omega: float, branch: Branch = Branch.PLUS, tolerance: float = DEFAULT_TOLERANCE
) -> np.ndarray:
    """Solve G^-1(omega +- i0) F = -lambda v(omega) by LU with partial pivoting."""
    if not omega > 0:
        raise ValidationError(f"solve_F needs omega > 0, got {omega!r}")
    if spec.lam == 0:
        return np.zeros(spec.n_levels, dtype=complex)
    matrix = g_inverse_matrix(spec, omega, Branch(branch), tolerance)
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition >= CONDITION_LIMIT:
        raise SingularSystem(
            f"G^-1 is singular at omega={omega!r} (condition {condition:.3e}); embedded eigenvalue?",
            {"omega": float(omega), "condition": condition},
        )
    rhs = -spec.lam * spec.couplings(omega)[0]
    return linalg.lu_solve(linalg.lu_factor(matrix), rhs)


def solve_F_grid(
    spec: ModelSpec,
    omegas: Sequence[float],
    branch: Branch = Branch.PLUS,
    tolerance: float = DEFAULT_TOLERANCE,
) -> np.ndarray:
    """Batched solve_F, shape (M, N)"""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if spec.lam == 0:
        return np.zeros((w.size, spec.n_levels), dtype=complex)
    matrices = g_inverse_grid(spec, w, Branch(branch), tolerance)
    conditions = np.linalg.cond(matrices)
    bad = ~np.isfinite(conditions) | (conditions >= CONDITION_LIMIT)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise SingularSystem(
            f"G^-1 is singular at omega={w[idx]!r}; embedded eigenvalue?",
            {"omega": float(w[idx]), "condition": float(conditions[idx])},
        )
    rhs = -spec.lam * spec.couplings(w)
    return np.linalg.solve(matrices, rhs[:, :, None])[:, :, 0]


def spectral_density(
    spec: ModelSpec,
    state: InitialState,
    grid: Sequence[float],
    branch: Branch = Branch.PLUS,
    threads: Optional[int] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SpectralDensitySamples:
    w = np.asarray(grid, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValidationError("density grid must be positive and strictly increasing")
    c = state.vector
    if c.size != spec.n_levels:
        raise ValidationError(f"state has {c.size} components, model has {spec.n_levels} levels")

    chunks = [w[i:i + _DENSITY_CHUNK] for i in range(0, w.size, _DENSITY_CHUNK)]
    workers = min(resolve_thread_count(threads), len(chunks))

    def overlap_chunk(chunk: np.ndarray) -> np.ndarray:
        return solve_F_grid(spec, chunk, branch, tolerance).conj() @ c

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(overlap_chunk, chunks))
    else:
        parts = [overlap_chunk(chunk) for chunk in chunks]
    overlap = np.concatenate(parts)
    logger.debug("Density evaluated on %d points with %d worker(s)", w.size, workers)
    return SpectralDensitySamples(grid=w, density=np.abs(overlap) ** 2, overlap=overlap)


def decay_rate(spec: ModelSpec, n: int) -> float:
    """Golden-rule rate 2 pi lambda^2 |v_n(omega_n)|^2 of level n (1-based)."""
    if not 1 <= n <= spec.n_levels:
        raise ValidationError(f"level index {n} outside 1..{spec.n_levels}")
    level = spec.levels[n - 1]
    v = complex(level.form_factor(level.omega))
    return float(2.0 * np.pi * spec.lam ** 2 * abs(v) ** 2)


def decay_rates(spec: ModelSpec) -> np.ndarray:
    return np.array([decay_rate(spec, n) for n in range(1, spec.n_levels + 1)])


def density_grid(spec: ModelSpec, t_max: Optional[float] = None) -> np.ndarray:
    """
    Adaptive energy grid for the density.

    Log-spaced from 1e-8 * omega_1 up to omega_cut, a uniform window of
    +-10 gamma_n around each level, and log-spaced flanks moving away from
    each level. Inside the windows the spacing is at most gamma_n / 100 and
    at most one eighth of the shortest period 2 pi / t_max.
    """
    omega_1 = float(spec.omegas.min())
    lower = omega_1 * 10.0 ** (-THRESHOLD_DECADES)
    upper = spec.omega_cut
    decades = np.log10(upper / lower)
    pieces = [np.geomspace(lower, upper, int(np.ceil(decades * POINTS_PER_DECADE)) + 1)]

    period_step = np.inf if not t_max else 2.0 * np.pi / t_max / PERIOD_FRACTION
    for n, omega_n in enumerate(spec.omegas, start=1):
        gamma = decay_rate(spec, n)
        if gamma <= 0:
            continue
        step = min(gamma / POINTS_PER_WIDTH, period_step)
        half = WINDOW_WIDTHS * gamma
        count = int(np.ceil(2.0 * half / step)) + 1
        if count > MAX_WINDOW_POINTS:
            logger.warning("Level %d window capped at %d points (requested %d)", n, MAX_WINDOW_POINTS, count)
            count = MAX_WINDOW_POINTS
        pieces.append(np.linspace(omega_n - half, omega_n + half, count))
        flank = half * np.geomspace(1.0, max(upper / half, 10.0), int(FLANK_POINTS_PER_DECADE * max(decades, 1)))
        pieces.append(omega_n - flank)
        pieces.append(omega_n + flank)

    grid = np.concatenate(pieces)
    grid = np.unique(grid[(grid >= lower) & (grid <= upper)])
    keep = np.concatenate([[True], np.diff(grid) > 1e-12 * grid[1:]])
    grid = grid[keep]
    logger.info("Density grid: %d points on [%.3e, %.3e]", grid.size, grid[0], grid[-1])
    return grid


def total_weight(spec: ModelSpec, samples: SpectralDensitySamples) -> Tuple[float, float]:
    """Integral of the density over the grid and an estimate of the part beyond it."""
    x = np.concatenate([[0.0], samples.grid])
    y = np.concatenate([[0.0], samples.density])
    integral = float(CubicSpline(x, y).integrate(0.0, x[-1]))
    decay = 2.0 * min(level.form_factor.r for level in spec.levels) + 2.0
    tail = float(samples.density[-1] * samples.grid[-1] / (decay - 1.0))
    return integral, tail


# --- Fourier integral ------------------------------------------------------

def _split(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * a
    high = c - (c - a)
    return high, a - high


def _phase(x: np.ndarray, t: float) -> np.ndarray:
    """exp(-i x t) with the rounding error of the product x*t restored."""
    product = x * t
    xh, xl = _split(x)
    th, tl = _split(np.float64(t))
    error = ((xh * th - product) + xh * tl + xl * th) + xl * tl
    return np.exp(-1j * product) * np.exp(-1j * error)


def _moments(theta: np.ndarray) -> np.ndarray:
    """mu_m(theta) = int_0^1 s^m exp(-i theta s) ds for m = 0..3, shape (4, K)."""
    mu = np.empty((4, theta.size), dtype=complex)
    small = np.abs(theta) < _SERIES_SWITCH

    if np.any(small):
        ts = theta[small]
        k = np.arange(_SERIES_TERMS)
        factorial = np.cumprod(np.concatenate([[1.0], np.arange(1, _SERIES_TERMS, dtype=float)]))
        powers = (-1j * ts[:, None]) ** k[None, :] / factorial[None, :]
        for m in range(4):
            mu[m, small] = powers @ (1.0 / (m + k + 1.0))

    large = ~small
    if np.any(large):
        tl = theta[large]
        e = np.exp(-1j * tl)
        current = (1.0 - e) / (1j * tl)
        mu[0, large] = current
        for m in range(1, 4):
            current = (m * current - e) / (1j * tl)
            mu[m, large] = current
    return mu


class _FilonPanels:
    """Piecewise-cubic interpolant of the density with exact e^{-i omega t} moments."""

    def __init__(self, samples: SpectralDensitySamples):
        x = np.concatenate([[0.0], samples.grid])
        y = np.concatenate([[0.0], samples.density])
        spline = CubicSpline(x, y)
        self.left = x[:-1]
        self.width = np.diff(x)
        # power-m coefficients scaled by width**m
        scale = self.width[None, :] ** np.arange(4)[:, None]
        self.coeffs = spline.c[::-1] * scale
        self.end_density = float(samples.density[-1])
        self.end = float(x[-1])

    @property
    def size(self) -> int:
        return self.left.size

    def amplitude(self, t: float) -> complex:
        mu = _moments(self.width * t)
        local = np.sum(self.coeffs * mu, axis=0) * self.width
        return complex(np.sum(_phase(self.left, t) * local))


def survival_amplitude(
    spec: ModelSpec,
    state: InitialState,
    times: Sequence[float],
    samples: Optional[SpectralDensitySamples] = None,
    budget: Optional[int] = None,
    threads: Optional[int] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SurvivalSeries:
    """
    A(t) = int_0^inf exp(-i t omega) |<psi_omega|psi>|^2 d omega.

    The density is interpolated by a cubic spline and each panel is
    integrated exactly against the exponential. ``budget`` caps the number
    of panel evaluations; exceeding it raises BudgetExceeded carrying the
    times finished so far. ``tolerance`` goes to the density quadrature and
    is unused when ``samples`` are given.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValidationError("times must be non-negative and sorted")

    if samples is None:
        grid = density_grid(spec, t_max=float(t.max()))
        samples = spectral_density(spec, state, grid, threads=threads, tolerance=tolerance)
    panels = _FilonPanels(samples)

    allowed = t.size if budget is None else min(t.size, budget // max(panels.size, 1))
    workers = min(resolve_thread_count(threads), max(allowed, 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(panels.amplitude, t[:allowed]))
    else:
        values = [panels.amplitude(x) for x in t[:allowed]]

    amplitude = np.array(values, dtype=complex)
    decay = 2.0 * min(level.form_factor.r for level in spec.levels) + 2.0
    tail_mass = panels.end_density * panels.end / (decay - 1.0)
    with np.errstate(divide="ignore"):
        boundary = np.where(t[:allowed] > 0, panels.end_density / np.maximum(t[:allowed], 1e-300), 0.0)
    error = tail_mass + boundary

    series = SurvivalSeries(times=t[:allowed], amplitude=amplitude, error_estimate=error, complete=allowed == t.size)
    if allowed < t.size:
        raise BudgetExceeded(
            f"evaluation budget {budget} covers {allowed} of {t.size} times",
            partial=series,
            details={"panels": panels.size, "completed": allowed},
        )
    return series


def exponential_era(
    spec: ModelSpec,
    state: InitialState,
    times: Sequence[float],
    gammas: Optional[Sequence[float]] = None,
) -> SurvivalSeries:
    t = np.asarray(times, dtype=float)
    rates = decay_rates(spec) if gammas is None else np.asarray(gammas, dtype=float)
    weights = np.abs(state.vector) ** 2
    exponent = -1j * np.outer(t, spec.omegas) - 0.5 * np.outer(t, rates)
    return SurvivalSeries(times=t, amplitude=np.exp(exponent) @ weights)
