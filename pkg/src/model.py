"""
Model-level operations: assumption checks, threshold amplitudes, state normalization
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from .errors import AllZeroAmplitudes, ZeroVector
from .models import (
    EXPONENT_TOLERANCE,
    FormFactorFamily,
    InitialState,
    ModelSpec,
    ValidationReport,
)

logger = logging.getLogger("friedrichs.model")


def validate_model(spec: ModelSpec) -> ValidationReport:
    """
    Check the standing assumptions on a model without raising.

    Each violation names the assumption and the (1-based) level index.
    """
    violations: List[str] = []

    if spec.n_levels < 1:
        violations.append("model needs at least one level")
    if not np.isfinite(spec.lam) or spec.lam < 0:
        violations.append(f"coupling lambda must be finite and non-negative, got {spec.lam!r}")

    for idx, level in enumerate(spec.levels, start=1):
        ff = level.form_factor
        if not (level.omega > 0):
            violations.append(f"level {idx}: energy must be positive, got {level.omega!r}")
        if not (ff.p > 0):
            violations.append(f"level {idx}: small-energy exponent must be positive, got {ff.p!r}")
        if not (ff.r > 0):
            violations.append(f"level {idx}: large-energy exponent must be positive, got {ff.r!r}")
        if not np.isfinite(abs(ff.q)):
            violations.append(f"level {idx}: amplitude q must be finite")
        if ff.family is FormFactorFamily.POWER_LAW_CUTOFF:
            if ff.cutoff is None or not (ff.cutoff > 0):
                violations.append(f"level {idx}: cutoff must be positive, got {ff.cutoff!r}")
        elif len(ff.samples) < 4:
            violations.append(f"level {idx}: tabulated form factor needs at least 4 samples")
        elif ff.samples[0][0] <= 0:
            violations.append(f"level {idx}: tabulated samples must lie on omega > 0")

    omegas = [level.omega for level in spec.levels]
    for idx in range(1, len(omegas)):
        if not omegas[idx] > omegas[idx - 1]:
            violations.append(f"levels not strictly increasing at index {idx + 1}")
            break

    if violations:
        logger.debug("Model validation found %d violation(s)", len(violations))
    return ValidationReport(passed=not violations, violations=violations)


def leading_small_energy(spec: ModelSpec) -> Tuple[float, np.ndarray]:
    """Minimal threshold exponent p and the amplitudes q~ of levels attaining it."""
    exponents = np.array([level.form_factor.p for level in spec.levels], dtype=float)
    amplitudes = np.array([level.form_factor.q for level in spec.levels], dtype=complex)
    p = float(exponents.min())
    dominant = np.abs(exponents - p) < EXPONENT_TOLERANCE
    q_tilde = np.where(dominant, amplitudes, 0j)
    if not np.any(q_tilde != 0):
        raise AllZeroAmplitudes(
            f"every level with the minimal exponent p={p} has q = 0",
            {"p": p, "levels": [int(i) + 1 for i in np.flatnonzero(dominant)]},
        )
    return p, q_tilde


def normalize_state(c_raw: Sequence[complex]) -> InitialState:
    vector = np.asarray(c_raw, dtype=complex)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0 or not np.isfinite(norm):
        raise ZeroVector("cannot normalize a zero (or non-finite) coefficient vector")
    return InitialState(tuple(complex(x) for x in vector / norm))
