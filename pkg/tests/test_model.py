import numpy as np
import pytest

from src.errors import AllZeroAmplitudes, ValidationError, ZeroVector
from src.model import leading_small_energy, normalize_state, validate_model
from src.models import FormFactor, InitialState, LevelSpec, ModelSpec
from tests.conftest import cutoff_model


def test_cutoff_form_factor_values():
    ff = FormFactor.power_law_cutoff(1.0, 0.5, 1.5, 1.0)
    assert abs(complex(ff(1.0))) ** 2 == pytest.approx(1.0 / 16.0)
    assert complex(ff(0.0)) == 0.0
    assert ff.scale == 1.0


def test_tabulated_form_factor_continuation():
    samples = [(w, complex(w ** 0.5 / (1 + w) ** 2)) for w in np.geomspace(0.01, 10.0, 40)]
    ff = FormFactor.tabulated(1.0, 0.5, 1.5, samples)
    reference = FormFactor.power_law_cutoff(1.0, 0.5, 1.5, 1.0)
    assert complex(ff(0.5)) == pytest.approx(complex(reference(0.5)), rel=1e-3)
    # outside the table the threshold and large-energy power laws take over
    assert complex(ff(1e-4)) == pytest.approx(1e-2)
    ratio = complex(ff(40.0)) / complex(ff(20.0))
    assert ratio == pytest.approx(2.0 ** -1.5)


def test_valid_model_passes(weak_two_level):
    report = validate_model(weak_two_level)
    assert report.passed
    assert report.violations == []


def test_violations_are_named():
    spec = cutoff_model([1.0, 0.5], [1.0, 1.0], lam=0.1, r=-1.0)
    report = validate_model(spec)
    assert not report.passed
    assert any("large-energy exponent" in v for v in report.violations)
    assert any("strictly increasing at index 2" in v for v in report.violations)


def test_negative_cutoff_reported():
    level = LevelSpec(omega=1.0, form_factor=FormFactor.power_law_cutoff(1.0, 0.5, 1.5, -2.0))
    report = validate_model(ModelSpec(levels=(level,), lam=0.1))
    assert any("cutoff" in v for v in report.violations)


def test_leading_small_energy_picks_minimal_exponent():
    low = cutoff_model([1.0], [2.0], lam=0.1, p=0.5)
    high = cutoff_model([2.0], [3.0], lam=0.1, p=1.0)
    spec = ModelSpec(levels=low.levels + high.levels, lam=0.1)
    p, q_tilde = leading_small_energy(spec)
    assert p == 0.5
    np.testing.assert_array_equal(q_tilde, [2.0, 0.0])


def test_leading_small_energy_all_zero():
    with pytest.raises(AllZeroAmplitudes):
        leading_small_energy(cutoff_model([1.0, 2.0], [0.0, 0.0], lam=0.1))


def test_normalize_state():
    state = normalize_state([3.0, 4.0j])
    np.testing.assert_allclose(state.vector, [0.6, 0.8j])
    with pytest.raises(ZeroVector):
        normalize_state([0.0, 0.0])


def test_initial_state_must_be_normalized():
    with pytest.raises(ValidationError):
        InitialState((1.0, 1.0))
    assert InitialState.basis(3, 2).c == (0j, 0j, 1 + 0j)
