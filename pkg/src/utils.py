"""
Utility helpers shared across modules
"""

import hashlib
import json
import logging
import os
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from .errors import ValidationError

THREADS_ENV = "FRIEDRICHS_THREADS"

_dotenv_loaded = False


def resolve_thread_count(explicit: Optional[int] = None, logger: Optional[logging.Logger] = None) -> int:
    """
    Number of worker threads for parallel sections.

    Priority: explicit argument, then FRIEDRICHS_THREADS (environment or a
    .env file in the working directory), then the CPU count.
    """
    global _dotenv_loaded
    if explicit is not None and explicit > 0:
        return int(explicit)
    if not _dotenv_loaded:
        load_dotenv(override=False)
        _dotenv_loaded = True

    raw = os.getenv(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
        log = logger or logging.getLogger("friedrichs.utils")
        log.warning("Ignoring %s=%r (expected a positive integer)", THREADS_ENV, raw)
    return os.cpu_count() or 1


def config_hash(payload: Any) -> str:
    """Stable short hash of a JSON-serializable configuration"""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def fit_power_law(times: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Least-squares fit of log|values| = slope * log(times) + intercept; returns (slope, prefactor)."""
    t = np.asarray(times, dtype=float)
    y = np.abs(np.asarray(values))
    slope, intercept = np.polyfit(np.log(t), np.log(y), 1)
    return float(slope), float(np.exp(intercept))


def parse_range(text: str, allow_zero: bool = False) -> Tuple[float, float]:
    """Parse 'LO..HI' into two floats"""
    if ".." not in text:
        raise ValidationError(f"expected LO..HI, got {text!r}")
    low, high = text.split("..", 1)
    try:
        lo, hi = float(low), float(high)
    except ValueError as exc:
        raise ValidationError(f"range bounds must be numbers, got {text!r}") from exc
    floor_ok = lo >= 0 if allow_zero else lo > 0
    if not (floor_ok and lo < hi):
        raise ValidationError(f"range must satisfy {'0 <=' if allow_zero else '0 <'} LO < HI, got {text!r}")
    return lo, hi


def complex_pairs(values: Sequence[complex]) -> list:
    return [[float(complex(v).real), float(complex(v).imag)] for v in values]
