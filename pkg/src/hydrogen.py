"""
Hydrogen np series: Bethe decay rates, threshold amplitudes, the
level-number table and a calibrated full model.

Level n stands for the (n+1)p state decaying to 1s. Closed forms are
evaluated in log space so that n in the hundreds does not overflow.
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .asymptotics import crossover_amplitude, crossover_time, maximizing_state
from .errors import CalibrationFailure, ValidationError
from .models import (
    AsymptoteMode,
    AsymptoteReport,
    CrossoverMode,
    FormFactor,
    HydrogenSeriesSpec,
    LevelSpec,
    ModelSpec,
    TableRow,
)

logger = logging.getLogger("friedrichs.hydrogen")

RATE_PREFACTOR = 8.0e9  # s^-1
THRESHOLD_EXPONENT = 0.5
RUNTIME_WARNING_LEVELS = 50


def _log_rate(n: np.ndarray) -> np.ndarray:
    return (
        np.log(RATE_PREFACTOR) + 8.0 * np.log(2.0) + np.log(n + 1.0) + 2.0 * n * np.log(n)
        - np.log(9.0) - (2.0 * n + 4.0) * np.log(n + 2.0)
    )


def _log_lam_q_over_omega_sq(n: np.ndarray, omega_scale: float) -> np.ndarray:
    return (
        np.log(RATE_PREFACTOR) + np.log(6.0) + 7.0 * np.log(n + 1.0) + 2.0 * n * np.log(n)
        - np.log(np.pi) - 3.0 * np.log(omega_scale) - (2.0 * n + 4.0) * np.log(n + 2.0)
        - 3.0 * np.log((n + 1.0) ** 2 - 1.0)
    )


def series_params(n, series: Optional[HydrogenSeriesSpec] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(omega_n, gamma_n, lambda^2 |q_n/omega_n|^2) for level(s) n >= 1."""
    series = series or HydrogenSeriesSpec(n_levels=int(np.max(n)))
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise ValidationError("hydrogen levels are numbered from n = 1")
    omega = series.omega(n_arr)
    rate = np.exp(_log_rate(n_arr))
    amplitude = np.exp(_log_lam_q_over_omega_sq(n_arr, series.omega_scale))
    return omega, rate, amplitude


def leading_order_report(n_levels: int, series: Optional[HydrogenSeriesSpec] = None) -> AsymptoteReport:
    """Asymptote report with f_n = q_n/omega_n, taken straight from the closed forms."""
    series = series or HydrogenSeriesSpec(n_levels=n_levels)
    _, _, amplitude = series_params(np.arange(1, n_levels + 1), series)
    f = (np.sqrt(amplitude) / series.lam).astype(complex)
    report = AsymptoteReport(
        p=THRESHOLD_EXPONENT,
        f=f,
        chi_norm_sq=float(np.sum(np.abs(f) ** 2)),
        lam=series.lam,
        mode=AsymptoteMode.PERTURBATIVE,
    )
    report.maximizer = f / np.sqrt(report.chi_norm_sq)
    return report


def reproduce_table(n_list: Iterable[int], series: Optional[HydrogenSeriesSpec] = None) -> List[TableRow]:
    rows: List[TableRow] = []
    for n_levels in n_list:
        if n_levels < 1:
            raise ValidationError(f"table rows need N >= 1, got {n_levels}")
        spec = HydrogenSeriesSpec(n_levels=n_levels) if series is None else series
        _, rates, amplitude = series_params(np.arange(1, n_levels + 1), spec)
        report = leading_order_report(n_levels, spec)
        state = maximizing_state(report)
        t_ep = crossover_time(None, state, rates, report, CrossoverMode.APPROXIMATE)
        report.t_ep = t_ep
        rows.append(
            TableRow(
                n_levels=n_levels,
                ratio=float(np.sum(amplitude) / amplitude[0]),
                t_n=float(1.0 / rates[-1]),
                t_ep=t_ep,
                amplitude_sq=crossover_amplitude(report, state, t_ep),
            )
        )
        logger.info("N=%d: R=%.4f t_N=%.4e s t_ep=%.4e s", n_levels, rows[-1].ratio, rows[-1].t_n, t_ep)
    return rows


def build_model(n_levels: int, series: Optional[HydrogenSeriesSpec] = None) -> ModelSpec:
    """
    Full cutoff-family model for the first N levels.

    q_n is real positive with |q_n/omega_n|^2 from the closed form; the cutoff
    of each level is solved for so that the golden-rule rate sits inside the
    calibration tolerance of the Bethe rate (aimed at its midpoint, since the
    cutoff factor can only lower the rate).
    """
    if n_levels < 1:
        raise ValidationError(f"hydrogen model needs N >= 1, got {n_levels}")
    if n_levels > RUNTIME_WARNING_LEVELS:
        logger.warning("hydrogen(%d): more than %d levels, expect long runtimes", n_levels, RUNTIME_WARNING_LEVELS)
    series = series or HydrogenSeriesSpec(n_levels=n_levels)
    omega, rates, amplitude = series_params(np.arange(1, n_levels + 1), series)
    lam = series.lam
    target = 1.0 - 0.5 * series.calibration_tolerance

    levels = []
    for idx in range(n_levels):
        w, rate = float(omega[idx]), float(rates[idx])
        q = float(np.sqrt(amplitude[idx]) * w / lam)

        def residual(cutoff: float) -> float:
            ff = FormFactor.power_law_cutoff(q, THRESHOLD_EXPONENT, series.r, cutoff)
            return 2.0 * np.pi * lam ** 2 * abs(complex(ff(w))) ** 2 / rate - target

        low, high = w, 1e6 * w
        if residual(low) * residual(high) > 0:
            raise CalibrationFailure(
                f"no cutoff in [{low:.3e}, {high:.3e}] matches the rate of level {idx + 1}",
                {"level": idx + 1, "residual_low": residual(low), "residual_high": residual(high)},
            )
        cutoff = brentq(residual, low, high, rtol=1e-12)
        levels.append(LevelSpec(omega=w, form_factor=FormFactor.power_law_cutoff(q, THRESHOLD_EXPONENT, series.r, cutoff)))
        logger.debug("level %d: cutoff %.6e (%.1f omega_n)", idx + 1, cutoff, cutoff / w)

    return ModelSpec(levels=tuple(levels), lam=lam)
