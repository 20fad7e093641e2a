import numpy as np
import pytest

from src.errors import ValidationError
from src.utils import THREADS_ENV, config_hash, fit_power_law, parse_range, resolve_thread_count


def test_fit_power_law_recovers_exponent():
    t = np.geomspace(10.0, 1000.0, 30)
    slope, prefactor = fit_power_law(t, 0.46 * t ** -4.0 * np.exp(1j * t))
    assert slope == pytest.approx(-4.0, abs=1e-10)
    assert prefactor == pytest.approx(0.46, rel=1e-9)


def test_parse_range():
    assert parse_range("1e-2..1e4") == (1e-2, 1e4)
    assert parse_range("0..5", allow_zero=True) == (0.0, 5.0)
    with pytest.raises(ValidationError):
        parse_range("0..5")
    with pytest.raises(ValidationError):
        parse_range("5..1")
    with pytest.raises(ValidationError):
        parse_range("1-5")
    with pytest.raises(ValidationError):
        parse_range("a..b")


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert len(config_hash({})) == 16


def test_thread_count_priority(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_thread_count(5) == 5
    assert resolve_thread_count() == 3


def test_bad_thread_env_falls_back(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    assert resolve_thread_count() >= 1
