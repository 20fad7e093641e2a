"""
Threshold-dominated long-time behaviour: asymptote coefficients, the state
that maximizes them, its orthogonal complement, the single-level check and
the crossover from exponential to power-law decay.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.special import gamma as gamma_fn

from .errors import DegenerateChi, NoRoot, ValidationError
from .model import leading_small_energy
from .models import (
    AsymptoteMode,
    AsymptoteReport,
    CrossoverMode,
    InitialState,
    ModelSpec,
    SchwarzSweep,
    SlaComparison,
)
from .resolvent import DEFAULT_TOLERANCE, g_zero_limit
from .utils import resolve_thread_count

logger = logging.getLogger("friedrichs.asymptotics")

SCAN_LOW = 1e-2  # crossover scan window in units of the slowest lifetime
SCAN_HIGH = 1e4
SCAN_POINTS = 4000
ROOT_RTOL = 1e-6
ORTHOGONALITY_FLOOR = 1e-10
SWEEP_STREAMS = 8
DEFAULT_SEED = 20240501


def asymptote_coeffs(
    spec: ModelSpec, mode: AsymptoteMode = AsymptoteMode.EXACT, tolerance: float = DEFAULT_TOLERANCE
) -> AsymptoteReport:
    mode = AsymptoteMode(mode)
    p, q_tilde = leading_small_energy(spec)
    expansion = g_zero_limit(spec, order=1, tolerance=tolerance)
    if mode is AsymptoteMode.EXACT:
        f = expansion.g_exact @ q_tilde
    else:
        f = expansion.partial_sum(spec.lam, order=1) @ q_tilde
    chi_norm_sq = float(np.sum(np.abs(f) ** 2))
    report = AsymptoteReport(p=p, f=f, chi_norm_sq=chi_norm_sq, lam=spec.lam, mode=mode)
    if chi_norm_sq > 0:
        report.maximizer = f / np.sqrt(chi_norm_sq)
    logger.info("Asymptote (%s): p=%.6g, |chi|^2=%.6e", mode.value, p, chi_norm_sq)
    return report


def asymptote_eval(report: AsymptoteReport, state: InitialState, t):
    """lambda^2 Gamma(2p+1) |<chi|psi>|^2 / (it)^(2p+1); scalar or array t > 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValidationError("asymptote is evaluated for t > 0 only")
    exponent = 2.0 * report.p + 1.0
    value = report.coefficient(state) / (t_arr ** exponent * np.exp(0.5j * np.pi * exponent))
    return complex(value) if value.ndim == 0 else value


def maximizing_state(report: AsymptoteReport) -> InitialState:
    if not report.chi_norm_sq > 0:
        raise DegenerateChi("chi vanishes; every state has a zero asymptote coefficient")
    c = report.f / np.sqrt(report.chi_norm_sq)
    # absorb rounding so the state passes the normalization check
    c = c / np.linalg.norm(c)
    return InitialState(tuple(complex(x) for x in c))


def orthogonal_complement(report: AsymptoteReport) -> List[InitialState]:
    """Orthonormal basis of states with <chi|psi> = 0, by Gram-Schmidt over e_1..e_N."""
    n = report.f.size
    if n < 2:
        raise ValidationError("orthogonal complement needs at least two levels")
    if not report.chi_norm_sq > 0:
        raise DegenerateChi("chi vanishes; the complement is the whole space")

    basis = [report.f / np.linalg.norm(report.f)]
    for k in range(n):
        if len(basis) == n:
            break
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - b * np.vdot(b, v)
        norm = np.linalg.norm(v)
        if norm > ORTHOGONALITY_FLOOR:
            basis.append(v / norm)
    return [InitialState(tuple(complex(x) for x in b)) for b in basis[1:]]


def sla_comparison(spec: ModelSpec, tolerance: float = DEFAULT_TOLERANCE) -> SlaComparison:
    p, q_tilde = leading_small_energy(spec)
    if q_tilde[0] == 0:
        raise ValidationError("single-level comparison needs a non-zero threshold amplitude on level 1")
    prefactor = spec.lam ** 2 * gamma_fn(2.0 * p + 1.0)
    sla = float(prefactor * abs(q_tilde[0]) ** 2 / spec.omegas[0] ** 2)
    report = asymptote_coeffs(spec, AsymptoteMode.EXACT, tolerance)
    exact = report.coefficient(InitialState.basis(spec.n_levels, 0))
    deviation = exact - sla
    relative = deviation / sla if sla != 0 else 0.0
    return SlaComparison(sla_coefficient=sla, exact_coefficient=exact, deviation=deviation, relative_deviation=relative)


# --- Crossover -------------------------------------------------------------

def _log_exponential_era(log_weights: np.ndarray, omegas: np.ndarray, gammas: np.ndarray, t: float) -> float:
    exponents = log_weights - 0.5 * gammas * t
    top = float(np.max(exponents))
    total = np.sum(np.exp(exponents - top - 1j * omegas * t))
    magnitude = abs(total)
    return -np.inf if magnitude == 0 else 2.0 * top + 2.0 * np.log(magnitude)


def _largest_root(func: Callable[[float], float], low: float, high: float, label: str) -> float:
    grid = np.linspace(low, high, SCAN_POINTS)
    values = np.array([func(u) for u in grid])
    finite = np.isfinite(values)
    signs = np.sign(values)
    changes = np.flatnonzero(finite[:-1] & finite[1:] & (signs[:-1] * signs[1:] <= 0) & (signs[:-1] != signs[1:]))
    if changes.size == 0:
        raise NoRoot(
            f"{label}: exponential era and asymptote never cross in the scan window",
            {
                "t_window": [float(np.exp(low)), float(np.exp(high))],
                "min_log_ratio": float(np.nanmin(np.where(finite, values, np.nan))) if finite.any() else None,
                "max_log_ratio": float(np.nanmax(np.where(finite, values, np.nan))) if finite.any() else None,
            },
        )
    i = int(changes[-1])
    logger.debug("%s: %d sign change(s), keeping the last", label, changes.size)
    if values[i + 1] == 0:
        return float(np.exp(grid[i + 1]))
    root = bisect(func, grid[i], grid[i + 1], xtol=ROOT_RTOL / 10.0)
    return float(np.exp(root))


def crossover_time(
    spec: Optional[ModelSpec],
    state: InitialState,
    gamma: Sequence[float],
    report: AsymptoteReport,
    mode: CrossoverMode = CrossoverMode.FULL,
) -> float:
    """
    Largest time where the exponential era and the power-law asymptote have equal |A|^2.

    FULL compares |sum_n |c_n|^2 exp(-i omega_n t - gamma_n t/2)|^2 with
    |A_asym(t)|^2. APPROXIMATE keeps only the slowest level:
    |c_s|^4 exp(-gamma_s t) = |A_asym(t)|^2.
    """
    mode = CrossoverMode(mode)
    rates = np.asarray(gamma, dtype=float)
    if np.any(rates <= 0):
        raise ValidationError("crossover needs positive decay rates")
    weights = np.abs(state.vector) ** 2
    coefficient = report.coefficient(state)
    if coefficient <= 0:
        raise NoRoot("state has no power-law tail (zero asymptote coefficient)", {"coefficient": coefficient})

    exponent = 2.0 * report.p + 1.0
    log_asym_base = 2.0 * np.log(coefficient)
    slowest = int(np.argmin(rates))
    t_slow = 1.0 / rates[slowest]
    low, high = np.log(SCAN_LOW * t_slow), np.log(SCAN_HIGH * t_slow)

    if mode is CrossoverMode.FULL:
        if spec is None:
            raise ValidationError("full crossover mode needs the model energies")
        nonzero = weights > 0
        log_w = np.log(weights[nonzero])
        omegas = spec.omegas[nonzero]
        g = rates[nonzero]

        def log_ratio(u: float) -> float:
            t = np.exp(u)
            return _log_exponential_era(log_w, omegas, g, t) - (log_asym_base - 2.0 * exponent * u)
    else:
        if weights[slowest] == 0:
            raise NoRoot("slowest level carries no weight in the state", {"level": slowest + 1})
        log_c4 = 2.0 * np.log(weights[slowest])

        def log_ratio(u: float) -> float:
            return log_c4 - rates[slowest] * np.exp(u) - (log_asym_base - 2.0 * exponent * u)

    t_ep = _largest_root(log_ratio, low, high, f"crossover ({mode.value})")
    logger.info("Crossover time (%s): %.6e", mode.value, t_ep)
    return t_ep


def crossover_amplitude(report: AsymptoteReport, state: InitialState, t_ep: float) -> float:
    """|A(t_ep)|^2 read off the asymptote at the crossover"""
    return float(abs(asymptote_eval(report, state, t_ep)) ** 2)


# --- Monte-Carlo Schwarz check ---------------------------------------------

def _random_states(seed_sequence: np.random.SeedSequence, count: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed_sequence)
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def random_unit_states(n_states: int, n_levels: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Deterministic set of random unit vectors, split over independent streams."""
    streams = np.random.SeedSequence(seed).spawn(SWEEP_STREAMS)
    counts = [len(chunk) for chunk in np.array_split(np.arange(n_states), SWEEP_STREAMS)]
    return np.concatenate([_random_states(s, c, n_levels) for s, c in zip(streams, counts) if c])


def schwarz_sweep(
    report: AsymptoteReport,
    n_states: int = 1000,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> SchwarzSweep:
    best = report.coefficient(maximizing_state(report))
    chi_hat = report.f / np.sqrt(report.chi_norm_sq)
    prefactor = best / report.chi_norm_sq

    streams = np.random.SeedSequence(seed).spawn(SWEEP_STREAMS)
    counts = [len(chunk) for chunk in np.array_split(np.arange(n_states), SWEEP_STREAMS)]

    def evaluate(args):
        seq, count = args
        if count == 0:
            return np.empty(0), np.empty(0)
        states = _random_states(seq, count, report.f.size)
        overlaps = states @ report.f.conj()
        return prefactor * np.abs(overlaps) ** 2, 1.0 - np.abs(states @ chi_hat.conj()) ** 2

    workers = min(resolve_thread_count(threads), SWEEP_STREAMS)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(evaluate, zip(streams, counts)))
    coefficients = np.concatenate([p[0] for p in parts])
    deficits = np.concatenate([p[1] for p in parts])

    margins = best - coefficients
    candidates = deficits > 1e-6
    sweep = SchwarzSweep(
        n_states=int(n_states),
        seed=int(seed),
        maximal_coefficient=float(best),
        min_margin=float(margins.min()) if margins.size else 0.0,
        strict_wins=int(np.sum(margins[candidates] > 0)),
        strict_candidates=int(np.sum(candidates)),
        violations=int(np.sum(margins < -1e-12 * best)),
    )
    logger.info(
        "Schwarz sweep: %d states, min margin %.3e, %d violation(s)",
        sweep.n_states, sweep.min_margin, sweep.violations,
    )
    return sweep
