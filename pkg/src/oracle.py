"""
Brute-force check of the spectral method: the continuum is replaced by a
Gauss-Legendre rule, the finite Hamiltonian is diagonalized and the
survival amplitude is propagated exactly.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh, eigvalsh
from scipy.special import roots_legendre

from .errors import FriedrichsError, HeisenbergGuard, ValidationError
from .models import (
    BoundStateReport,
    DiscretizedHamiltonian,
    InitialState,
    ModelSpec,
    OracleComparison,
    SurvivalSeries,
)
from .resolvent import DEFAULT_TOLERANCE, s_matrix
from .spectral import density_grid, spectral_density, survival_amplitude, total_weight
from .utils import resolve_thread_count

logger = logging.getLogger("friedrichs.oracle")

MIN_NODES = 10
UNITARITY_TOLERANCE = 1e-12
COMPARISON_TOLERANCE = 1e-3
COMPLETENESS_TOLERANCE = 1e-3
SCAN_POINTS = 60
_TIME_CHUNK = 256


def discretize(spec: ModelSpec, M: int, omega_max: float) -> DiscretizedHamiltonian:
    if M < MIN_NODES:
        raise ValidationError(f"discretization needs M >= {MIN_NODES}, got {M}")
    if not omega_max > float(spec.omegas.max()):
        raise ValidationError(
            f"omega_max={omega_max!r} must exceed the highest level energy {float(spec.omegas.max())!r}"
        )

    x, w = roots_legendre(M)
    nodes = 0.5 * omega_max * (x + 1.0)
    weights = 0.5 * omega_max * w
    # B[n, j] = lambda v_n(x_j) sqrt(w_j)
    coupling = (spec.lam * spec.couplings(nodes) * np.sqrt(weights)[:, None]).T

    n = spec.n_levels
    matrix = np.zeros((n + M, n + M), dtype=complex)
    matrix[:n, :n] = np.diag(spec.omegas)
    matrix[n:, n:] = np.diag(nodes)
    matrix[:n, n:] = coupling
    matrix[n:, :n] = coupling.conj().T
    logger.info("Discretized Hamiltonian: %d levels + %d nodes on [0, %.4g]", n, M, omega_max)
    return DiscretizedHamiltonian(matrix=matrix, nodes=nodes, weights=weights, n_levels=n, omega_max=float(omega_max))


def propagate(
    H: DiscretizedHamiltonian,
    state: InitialState,
    times: Sequence[float],
    threads: Optional[int] = None,
) -> SurvivalSeries:
    """A(t) = sum_k |<e_k|psi>|^2 exp(-i t E_k), one eigendecomposition per call."""
    c = state.vector
    if c.size != H.n_levels:
        raise ValidationError(f"state has {c.size} components, Hamiltonian has {H.n_levels} levels")
    t = np.asarray(times, dtype=float)

    energies, vectors = eigh(H.matrix)
    weights = np.abs(vectors[: H.n_levels, :].conj().T @ c) ** 2
    total = float(weights.sum())
    if abs(total - 1.0) > UNITARITY_TOLERANCE:
        logger.warning("Eigenbasis weights sum to %.15f, not 1", total)

    chunks = [t[i:i + _TIME_CHUNK] for i in range(0, t.size, _TIME_CHUNK)]

    def evolve(chunk: np.ndarray) -> np.ndarray:
        return np.exp(-1j * np.outer(chunk, energies)) @ weights

    workers = min(resolve_thread_count(threads), max(len(chunks), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(evolve, chunks))
    else:
        parts = [evolve(chunk) for chunk in chunks]
    amplitude = np.concatenate(parts) if parts else np.empty(0, dtype=complex)
    return SurvivalSeries(times=t, amplitude=amplitude)


def compare_with_spectral(
    H: DiscretizedHamiltonian,
    spec: ModelSpec,
    state: InitialState,
    times: Sequence[float],
    tolerance: float = COMPARISON_TOLERANCE,
    threads: Optional[int] = None,
    quadrature_tolerance: float = DEFAULT_TOLERANCE,
) -> OracleComparison:
    t = np.asarray(times, dtype=float)
    limit = H.heisenberg_time
    if t.size and float(t.max()) > limit:
        raise HeisenbergGuard(
            f"t={float(t.max()):.4g} is beyond the Heisenberg time {limit:.4g} of the discretization",
            {"t_max": float(t.max()), "heisenberg_time": limit},
        )
    spectral = survival_amplitude(spec, state, t, threads=threads, tolerance=quadrature_tolerance).amplitude
    oracle = propagate(H, state, t, threads=threads).amplitude
    deviation = float(np.max(np.abs(spectral - oracle))) if t.size else 0.0
    logger.info("Oracle comparison: max |dA| = %.3e over %d times (limit %.4g)", deviation, t.size, limit)
    return OracleComparison(
        times=t,
        spectral=spectral,
        oracle=oracle,
        max_abs_deviation=deviation,
        heisenberg_time=limit,
        matched=deviation <= tolerance,
    )


def _scan_eigenvalues(spec: ModelSpec, grid: np.ndarray, tolerance: float) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian G^-1(x) at each scan point, shape (K, N)"""
    result = np.empty((grid.size, spec.n_levels))
    free = np.diag(spec.omegas)
    for i, x in enumerate(grid):
        s = s_matrix(spec, complex(x, 0.0), tolerance).values
        g_inv = free - x * np.eye(spec.n_levels) + spec.lam ** 2 * s
        result[i] = eigvalsh(0.5 * (g_inv + g_inv.conj().T))
    return result


def no_bound_state_check(
    spec: ModelSpec,
    completeness_tolerance: float = COMPLETENESS_TOLERANCE,
    threads: Optional[int] = None,
    tolerance: float = 1e-10,
) -> BoundStateReport:
    """
    Look for eigenvalues below threshold and check that the decaying part
    carries the full norm of every level.

    G^-1(x) is Hermitian and decreasing for real x < 0, so the number of
    its negative eigenvalues next to threshold counts the bound states.
    """
    omegas = spec.omegas
    grid = -np.geomspace(10.0 * float(omegas.max()), 1e-6 * float(omegas.min()), SCAN_POINTS)
    messages = []
    try:
        eigenvalues = _scan_eigenvalues(spec, grid, tolerance)
    except FriedrichsError as exc:
        return BoundStateReport(
            passed=False,
            scan_grid=grid,
            min_eigenvalues=np.full(grid.size, np.nan),
            suspected_bound_states=0,
            messages=[f"threshold scan failed: {exc.message}"],
        )

    minima = eigenvalues[:, 0]
    nearest = grid[-1]
    suspected = int(np.sum(eigenvalues[-1] < 0))
    if suspected:
        messages.append(f"{suspected} eigenvalue(s) of G^-1 negative at x={nearest:.3e}: bound state(s) below threshold")
        logger.warning("Suspected bound states: %d", suspected)

    completeness = {}
    if spec.lam == 0:
        messages.append("lambda = 0: levels are stationary, completeness not checked")
    else:
        grid_density = density_grid(spec)
        for n in range(spec.n_levels):
            try:
                samples = spectral_density(
                    spec, InitialState.basis(spec.n_levels, n), grid_density, threads=threads, tolerance=tolerance
                )
                integral, tail = total_weight(spec, samples)
            except FriedrichsError as exc:
                messages.append(f"level {n + 1}: density failed: {exc.message}")
                continue
            completeness[n + 1] = integral + tail
            if abs(completeness[n + 1] - 1.0) > completeness_tolerance:
                messages.append(f"level {n + 1}: density integrates to {completeness[n + 1]:.6f}")

    passed = suspected == 0 and len(completeness) == (spec.n_levels if spec.lam != 0 else 0) and all(
        abs(w - 1.0) <= completeness_tolerance for w in completeness.values()
    )
    return BoundStateReport(
        passed=passed,
        scan_grid=grid,
        min_eigenvalues=minima,
        suspected_bound_states=suspected,
        completeness=completeness,
        messages=messages,
    )
