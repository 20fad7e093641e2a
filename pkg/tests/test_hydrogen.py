import numpy as np
import pytest

from src.asymptotics import asymptote_coeffs, crossover_time, maximizing_state
from src.errors import ValidationError
from src.hydrogen import build_model, leading_order_report, reproduce_table, series_params
from src.models import AsymptoteMode, CrossoverMode, HydrogenSeriesSpec
from src.spectral import decay_rates

OMEGA = 1.55e16
LAM = 6.43e-9


def direct_rate(n: int) -> float:
    return 8e9 * 2 ** 8 * (n + 1) * n ** (2 * n) / (9 * (n + 2) ** (2 * n + 4))


def direct_amplitude(n: int) -> float:
    return (
        8e9 * 6 * (n + 1) ** 7 * n ** (2 * n)
        / (np.pi * OMEGA ** 3 * (n + 2) ** (2 * n + 4) * ((n + 1) ** 2 - 1) ** 3)
    )


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_log_space_matches_direct_evaluation(n):
    omega, rate, amplitude = series_params(np.array([n]))
    assert rate[0] == pytest.approx(direct_rate(n), rel=1e-12)
    assert amplitude[0] == pytest.approx(direct_amplitude(n), rel=1e-12)
    assert omega[0] == pytest.approx(4.0 / 3.0 * OMEGA * (1 - (n + 1) ** -2), rel=1e-15)


def test_amplitudes_fall_as_inverse_cube():
    _, _, amplitude = series_params(np.array([100, 200]))
    assert amplitude[0] / amplitude[1] == pytest.approx(8.0, rel=0.05)


def test_golden_rule_consistency():
    n = np.arange(1, 60)
    omega, rate, amplitude = series_params(n)
    # lambda^2 |q|^2 = amplitude * omega^2, so 2 pi lambda^2 |q|^2 omega = rate
    np.testing.assert_allclose(2.0 * np.pi * amplitude * omega ** 3, rate, rtol=1e-12)


def test_large_level_numbers_stay_finite():
    _, rate, amplitude = series_params(np.array([500]))
    assert np.isfinite(rate[0]) and rate[0] > 0
    assert np.isfinite(amplitude[0]) and amplitude[0] > 0


def test_levels_numbered_from_one():
    with pytest.raises(ValidationError):
        series_params(np.array([0, 1]))


def test_table_rows():
    rows = {row.n_levels: row for row in reproduce_table([1, 10, 50])}

    assert rows[1].ratio == pytest.approx(1.00, abs=0.01)
    assert rows[10].ratio == pytest.approx(1.28, abs=0.01)
    assert rows[50].ratio == pytest.approx(1.29, abs=0.01)

    assert rows[1].t_n == pytest.approx(1.60e-9, rel=0.01)
    assert rows[10].t_n == pytest.approx(3.18e-7, rel=0.01)
    assert rows[50].t_n == pytest.approx(3.18e-5, rel=0.01)

    assert rows[1].t_ep == pytest.approx(2.00e-7, rel=0.05)
    assert rows[10].t_ep == pytest.approx(4.23e-5, rel=0.05)
    assert rows[50].t_ep == pytest.approx(4.59e-3, rel=0.05)


def test_table_trends_with_levels():
    rows = {row.n_levels: row for row in reproduce_table([1, 2, 5, 10, 20, 50])}
    ratios = [rows[n].ratio for n in sorted(rows)]
    assert all(later >= earlier for earlier, later in zip(ratios, ratios[1:]))
    assert rows[50].ratio - rows[10].ratio <= 0.02
    assert rows[1].t_ep < rows[10].t_ep < rows[50].t_ep


def test_crossover_amplitude_decreases_with_levels():
    rows = reproduce_table([1, 10, 50])
    amplitudes = [row.amplitude_sq for row in rows]
    assert amplitudes[0] > amplitudes[1] > amplitudes[2]


def test_leading_order_report_maximizer():
    report = leading_order_report(5)
    assert report.p == 0.5
    np.testing.assert_allclose(np.linalg.norm(report.maximizer), 1.0)
    _, _, amplitude = series_params(np.arange(1, 6))
    assert LAM ** 2 * report.chi_norm_sq == pytest.approx(np.sum(amplitude), rel=1e-12)


def test_calibrated_model_matches_rates():
    spec = build_model(3)
    assert spec.n_levels == 3
    assert spec.lam == LAM
    _, rate, _ = series_params(np.arange(1, 4))
    np.testing.assert_allclose(decay_rates(spec) / rate, 1.0, atol=0.01)
    for level in spec.levels:
        assert level.form_factor.p == 0.5
        assert level.form_factor.cutoff > level.omega


def test_calibration_uses_series_settings():
    loose = build_model(2, HydrogenSeriesSpec(n_levels=2, calibration_tolerance=0.1))
    tight = build_model(2)
    assert loose.levels[0].form_factor.cutoff < tight.levels[0].form_factor.cutoff


def test_calibrated_model_asymptote_matches_closed_form():
    spec = build_model(10)
    _, _, amplitude = series_params(np.arange(1, 11))
    rates = decay_rates(spec)
    exact = asymptote_coeffs(spec, AsymptoteMode.EXACT)
    # corrections are O(lambda^2) relative to the closed-form sum
    assert LAM ** 2 * exact.chi_norm_sq == pytest.approx(np.sum(amplitude), rel=1e-3)

    state = maximizing_state(exact)
    full = crossover_time(spec, state, rates, exact, CrossoverMode.FULL)
    approximate = crossover_time(spec, state, rates, exact, CrossoverMode.APPROXIMATE)
    assert full == pytest.approx(approximate, rel=1e-2)
    assert full == pytest.approx(4.23e-5, rel=0.05)
