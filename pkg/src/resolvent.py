"""
Self-energy matrix s(z), its boundary values on the continuum, and the
reduced resolvent near threshold.

Two independent quadratures live here. ``s_matrix`` uses adaptive
vector quadrature for complex z off the cut. Boundary values on the cut use
a composite Gauss-Legendre rule on geometrically graded panels with the
Cauchy singularity removed by subtraction, which vectorizes over whole
energy grids.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.integrate import quad_vec
from scipy.special import roots_legendre

from .errors import OnCut, QuadratureFailure, SingularLimit, ValidationError
from .models import Branch, BoundaryValues, GZeroExpansion, ModelSpec, SelfEnergyMatrix

logger = logging.getLogger("friedrichs.resolvent")

DEFAULT_TOLERANCE = 1e-10
NODES_PER_PANEL = 20  # at DEFAULT_TOLERANCE; two nodes per requested digit
MIN_NODES, MAX_NODES = 8, 48
TAIL_DOUBLINGS = 40  # graded tail panels beyond omega_cut before the analytic remainder
EVALUATION_BUDGET = 200_000
CONDITION_LIMIT = 1e12
_GK_POINTS = 21
_CHUNK = 256


@dataclass(frozen=True, eq=False)
class _CompositeRule:
    nodes: np.ndarray
    weights: np.ndarray
    tail_nodes: np.ndarray
    tail_weights: np.ndarray
    lower: float
    omega_cut: float
    tail_end: float


@dataclass(frozen=True, eq=False)
class _PairConstants:
    """Per-entry constants of v_n v*_n' at threshold (Q, P) and at infinity (S, R)"""

    Q: np.ndarray
    P: np.ndarray
    S: np.ndarray
    R: np.ndarray


def _graded_panels(lower: float, upper: float) -> np.ndarray:
    n_panels = max(1, int(np.ceil(np.log2(upper / lower))))
    return np.geomspace(lower, upper, n_panels + 1)


def nodes_per_panel(tolerance: float = DEFAULT_TOLERANCE) -> int:
    """Gauss-Legendre order of the graded panels for a relative tolerance"""
    if not (tolerance > 0 and np.isfinite(tolerance)):
        raise ValidationError(f"tolerance must be positive and finite, got {tolerance!r}")
    digits = -float(np.log10(tolerance))
    return int(np.clip(round(2.0 * digits), MIN_NODES, MAX_NODES))


def _panel_rule(edges: np.ndarray, order: int):
    x, w = roots_legendre(order)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    nodes = (0.5 * (left + right) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _composite_rule(lower: float, omega_cut: float, order: int = NODES_PER_PANEL) -> _CompositeRule:
    nodes, weights = _panel_rule(_graded_panels(lower, omega_cut), order)
    tail_end = omega_cut * 2.0 ** TAIL_DOUBLINGS
    tail_nodes, tail_weights = _panel_rule(omega_cut * 2.0 ** np.arange(TAIL_DOUBLINGS + 1), order)
    return _CompositeRule(nodes, weights, tail_nodes, tail_weights, lower, omega_cut, tail_end)


def _pair_constants(spec: ModelSpec) -> _PairConstants:
    ffs = [level.form_factor for level in spec.levels]
    q = np.array([ff.q for ff in ffs], dtype=complex)
    s = np.array([ff.large_energy_amplitude() for ff in ffs], dtype=complex)
    p = np.array([ff.p for ff in ffs], dtype=float)
    r = np.array([ff.r for ff in ffs], dtype=float)
    return _PairConstants(
        Q=np.outer(q, q.conj()).ravel(),
        P=np.add.outer(p, p).ravel(),
        S=np.outer(s, s.conj()).ravel(),
        R=np.add.outer(r, r).ravel(),
    )


def _outer_rows(values: np.ndarray) -> np.ndarray:
    """Row-wise v v^H flattened: (K, N) -> (K, N*N)"""
    k, n = values.shape
    return (values[:, :, None] * values.conj()[:, None, :]).reshape(k, n * n)


def _far_tail(pairs: _PairConstants, end: float, z) -> np.ndarray:
    # two-term expansion of 1/(z - w) for |z| << w on the pure power law
    z = np.atleast_1d(z)[:, None]
    return -pairs.S[None, :] * (end ** (-pairs.R) / pairs.R + z * end ** (-pairs.R - 1) / (pairs.R + 1))


def _threshold_floor(spec: ModelSpec) -> float:
    scales = [level.form_factor.scale for level in spec.levels]
    return 1e-10 * min(min(spec.omegas), min(scales))


def principal_value_grid(
    spec: ModelSpec, omegas: Sequence[float], tolerance: float = DEFAULT_TOLERANCE
) -> np.ndarray:
    """
    I(omega) for many energies at once, shape (M, N, N).

    I(w) = int_0^inf [f(x) - f(w)]/(w - x) dx + f(w) PV int_0^cut dx/(w - x) + tail,
    with f = v_n v*_n'. The removable singularity is handled on shared nodes;
    ``tolerance`` sets the panel order through ``nodes_per_panel``.
    """
    w_all = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(w_all <= 0):
        raise ValidationError("principal values are defined here for omega > 0 only")
    n = spec.n_levels
    omega_cut = max(spec.omega_cut, 4.0 * float(w_all.max()))
    lower = min(_threshold_floor(spec), 1e-3 * float(w_all.min()))
    rule = _composite_rule(lower, omega_cut, nodes_per_panel(tolerance))
    pairs = _pair_constants(spec)

    f_nodes = _outer_rows(spec.couplings(rule.nodes))
    f_tail = _outer_rows(spec.couplings(rule.tail_nodes))
    f_at = _outer_rows(spec.couplings(w_all))

    out = np.empty((w_all.size, n * n), dtype=complex)
    for start in range(0, w_all.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        w = w_all[sl]
        diff = w[:, None] - rule.nodes[None, :]
        kernel = np.divide(rule.weights[None, :], diff, out=np.zeros_like(diff), where=diff != 0)
        core = kernel @ f_nodes - f_at[sl] * kernel.sum(axis=1)[:, None]
        log_term = f_at[sl] * np.log((w - lower) / (omega_cut - w))[:, None]
        head = pairs.Q[None, :] * lower ** (pairs.P + 1) / ((pairs.P + 1) * w[:, None])
        tail_kernel = rule.tail_weights[None, :] / (w[:, None] - rule.tail_nodes[None, :])
        tail = tail_kernel @ f_tail + _far_tail(pairs, rule.tail_end, w)
        out[sl] = core + log_term + head + tail

    values = out.reshape(w_all.size, n, n)
    # hermitian by construction up to rounding
    return 0.5 * (values + np.conj(np.swapaxes(values, 1, 2)))


def _zero_energy_uncached(spec: ModelSpec, order: int) -> np.ndarray:
    n = spec.n_levels
    lower = _threshold_floor(spec)
    rule = _composite_rule(lower, spec.omega_cut, order)
    pairs = _pair_constants(spec)
    core = (-rule.weights / rule.nodes) @ _outer_rows(spec.couplings(rule.nodes))
    tail = (-rule.tail_weights / rule.tail_nodes) @ _outer_rows(spec.couplings(rule.tail_nodes))
    head = -pairs.Q * lower ** pairs.P / pairs.P
    total = (core + tail + head + _far_tail(pairs, rule.tail_end, 0.0)[0]).reshape(n, n)
    return 0.5 * (total + total.conj().T)


@lru_cache(maxsize=32)
def _zero_energy_cached(spec: ModelSpec, order: int) -> np.ndarray:
    return _zero_energy_uncached(spec, order)


def zero_energy_integral(spec: ModelSpec, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """I(0) = -int_0^inf v_n v*_n' / x dx (independent of lambda)"""
    return _zero_energy_cached(spec.with_lambda(0.0), nodes_per_panel(tolerance)).copy()


# --- Off the cut -----------------------------------------------------------

def _adaptive(func, a: float, b: float, points: Optional[List[float]], tolerance: float) -> np.ndarray:
    limit = EVALUATION_BUDGET // _GK_POINTS
    result, error, info = quad_vec(
        func, a, b, epsrel=tolerance, norm="max", limit=limit, points=points, full_output=True,
    )
    size = float(np.max(np.abs(result))) if np.size(result) else 0.0
    if info.status != 0 or error > max(tolerance * size, 1e-300):
        raise QuadratureFailure(
            f"adaptive quadrature on [{a:.3e}, {b:.3e}] missed tolerance {tolerance:.1e}",
            {"status": int(info.status), "error": float(error), "size": size, "neval": int(info.neval)},
        )
    logger.debug("Quadrature on [%.3e, %.3e]: error %.2e, %d evaluations", a, b, error, int(info.neval))
    return result


def _breakpoints(spec: ModelSpec, z: complex, omega_cut: float) -> List[float]:
    base = min(min(spec.omegas), min(level.form_factor.scale for level in spec.levels))
    candidates = [base * 10.0 ** (-k) for k in range(1, 11)]
    candidates += list(spec.omegas)
    if z.real > 0:
        width = abs(z.imag)
        candidates += [z.real + k * width for k in (-10.0, -1.0, 0.0, 1.0, 10.0)]
    return sorted({float(x) for x in candidates if 0.0 < x < omega_cut})


def s_matrix(spec: ModelSpec, z: complex, tolerance: float = DEFAULT_TOLERANCE) -> SelfEnergyMatrix:
    z = complex(z)
    scale = max(abs(z), float(min(spec.omegas)))
    if z.real >= 0 and abs(z.imag) <= 1e-14 * scale:
        raise OnCut(f"z = {z!r} lies on the continuum [0, inf)", {"z": [z.real, z.imag]})

    n = spec.n_levels
    omega_cut = max(spec.omega_cut, 4.0 * abs(z))
    tail_end = omega_cut * 2.0 ** TAIL_DOUBLINGS

    def integrand(x):
        v = spec.couplings(x)[0]
        f = np.outer(v, v.conj()) / (z - x)
        return np.concatenate([f.real.ravel(), f.imag.ravel()])

    def tail_integrand(y):
        x = omega_cut * np.exp(y)
        return integrand(x) * x

    core = _adaptive(integrand, 0.0, omega_cut, _breakpoints(spec, z, omega_cut), tolerance)
    tail = _adaptive(tail_integrand, 0.0, float(np.log(tail_end / omega_cut)), None, tolerance)
    total = core + tail
    values = (total[: n * n] + 1j * total[n * n:]) + _far_tail(_pair_constants(spec), tail_end, z)[0]
    return SelfEnergyMatrix(z=z, values=values.reshape(n, n))


# --- On the cut ------------------------------------------------------------

def boundary_values(spec: ModelSpec, omega: float, tolerance: float = DEFAULT_TOLERANCE) -> BoundaryValues:
    if not omega > 0:
        raise ValidationError(f"boundary values need omega > 0, got {omega!r}")
    I = principal_value_grid(spec, [omega], tolerance)[0]
    v = spec.couplings(omega)[0]
    jump = np.pi * np.outer(v, v.conj())
    return BoundaryValues(omega=float(omega), I=I, s_plus=I - 1j * jump, s_minus=I + 1j * jump)


def g_inverse_matrix(
    spec: ModelSpec, omega: float, branch: Branch, tolerance: float = DEFAULT_TOLERANCE
) -> np.ndarray:
    bv = boundary_values(spec, omega, tolerance)
    return np.diag(spec.omegas - omega).astype(complex) + spec.lam ** 2 * bv.s(Branch(branch))


def g_inverse_grid(
    spec: ModelSpec, omegas: Sequence[float], branch: Branch, tolerance: float = DEFAULT_TOLERANCE
) -> np.ndarray:
    """Batched G^-1(omega +- i0), shape (M, N, N)"""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    I = principal_value_grid(spec, w, tolerance)
    v = spec.couplings(w)
    jump = np.pi * v[:, :, None] * v.conj()[:, None, :]
    s = I - 1j * Branch(branch).sign * jump
    free = np.einsum("mn,nk->mnk", spec.omegas[None, :] - w[:, None], np.eye(spec.n_levels))
    return free + spec.lam ** 2 * s


def g_zero_limit(spec: ModelSpec, order: int = 2, tolerance: float = DEFAULT_TOLERANCE) -> GZeroExpansion:
    """
    Zero-energy reduced resolvent g = [diag(omega) + lambda^2 I(0)]^-1 and its terms
    g^(0) = diag(1/omega), g^(j) = -g^(j-1) I(0) diag(1/omega).
    """
    omegas = spec.omegas
    I0 = zero_energy_integral(spec, tolerance)
    matrix = np.diag(omegas).astype(complex) + spec.lam ** 2 * I0
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition >= CONDITION_LIMIT:
        raise SingularLimit(
            f"diag(omega) + lambda^2 I(0) is singular (condition {condition:.3e})",
            {"condition": condition},
        )
    g_exact = linalg.solve(matrix, np.eye(spec.n_levels, dtype=complex))

    terms = [np.diag(1.0 / omegas).astype(complex)]
    for _ in range(order):
        terms.append(-(terms[-1] @ I0) / omegas[None, :])
    return GZeroExpansion(g_exact=g_exact, g_terms=terms)
