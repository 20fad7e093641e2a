import textwrap
from pathlib import Path

import numpy as np
import pytest

from src.config_loader import ConfigLoader
from src.errors import ParseError, ValidationError
from src.models import FormFactorFamily


def write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "model.yaml"
    path.write_text(textwrap.dedent(text))
    return path


MINIMAL = """\
model:
  lambda: 0.01
  levels:
    - omega: 1.0
      form_factor: {q: 1.0, p: 0.5, r: 1.5, cutoff: 1.0}
"""


def test_minimal_file_gets_defaults(tmp_path):
    run = ConfigLoader(str(write(tmp_path, MINIMAL))).load()
    assert run.tolerance == 1e-10
    assert run.output_format == "csv"
    assert run.output_dir == Path("./results")
    assert run.seed == 20240501
    assert run.threads is None
    assert run.state is None
    assert run.model.n_levels == 1
    assert run.model.lam == 0.01
    assert run.logging["level"] == "INFO"


def test_full_file(toy_config):
    loader = ConfigLoader(str(toy_config))
    run = loader.load()
    assert run.model.n_levels == 2
    np.testing.assert_allclose(run.model.omegas, [1.0, 1.6])
    assert run.model.levels[1].form_factor.q == 1.5 + 0j
    np.testing.assert_allclose(np.abs(run.state.vector) ** 2, [0.5, 0.5])
    assert loader.config["run"]["tolerance"] == 1e-10


def test_unknown_key_names_field_and_line(tmp_path):
    path = write(tmp_path, MINIMAL.replace("lambda: 0.01", "lamda: 0.01"))
    with pytest.raises(ParseError) as excinfo:
        ConfigLoader(str(path)).load()
    assert excinfo.value.field == "model.lamda"
    assert excinfo.value.line == 2
    assert "lamda" in str(excinfo.value)


def test_unknown_key_inside_level(tmp_path):
    path = write(tmp_path, MINIMAL.replace("cutoff: 1.0", "cutof: 1.0"))
    with pytest.raises(ParseError) as excinfo:
        ConfigLoader(str(path)).load()
    assert excinfo.value.field == "model.levels[0].form_factor.cutof"


def test_invalid_yaml(tmp_path):
    path = write(tmp_path, "model: [unclosed\n")
    with pytest.raises(ParseError):
        ConfigLoader(str(path)).load()


def test_errors_are_collected(tmp_path):
    text = MINIMAL + "run:\n  tolerance: -1\n  format: xml\n  threads: 0\n"
    with pytest.raises(ValidationError) as excinfo:
        ConfigLoader(str(write(tmp_path, text))).load()
    message = str(excinfo.value)
    assert message.startswith("Configuration validation failed:")
    assert "run.tolerance" in message
    assert "run.format" in message
    assert "run.threads" in message


def test_model_assumptions_are_enforced(tmp_path):
    text = MINIMAL.replace("p: 0.5", "p: -0.5")
    with pytest.raises(ValidationError) as excinfo:
        ConfigLoader(str(write(tmp_path, text))).load()
    assert "small-energy exponent" in str(excinfo.value)


def test_state_length_must_match(tmp_path):
    text = MINIMAL.replace("  levels:", "  initial_state: [1, 0]\n  levels:")
    with pytest.raises(ValidationError):
        ConfigLoader(str(write(tmp_path, text))).load()


def test_tabulated_form_factor(tmp_path):
    text = """\
    model:
      lambda: 0.01
      levels:
        - omega: 1.0
          form_factor:
            family: tabulated
            q: 1.0
            p: 0.5
            r: 1.5
            samples: [[0.1, 0.3], [0.5, 0.6], [1.0, 0.7, 0.0], [2.0, 0.6], [4.0, 0.4]]
    """
    run = ConfigLoader(str(write(tmp_path, text))).load()
    ff = run.model.levels[0].form_factor
    assert ff.family is FormFactorFamily.TABULATED
    assert complex(ff(1.0)) == pytest.approx(0.7)


def test_missing_file():
    with pytest.raises(ValidationError):
        ConfigLoader("/nonexistent/model.yaml").load()


def test_hydrogen_builtin():
    run = ConfigLoader("hydrogen(2)").load()
    assert run.model.n_levels == 2
    assert run.output_format == "csv"
    assert run.raw["model"] == "hydrogen(2)"


def test_split_coupling_and_state_rows(tmp_path):
    text = """\
    model:
      lambda: 0.01
      levels:
        - omega: 1.0
          form_factor: {family: power_law_cutoff, q_re: 1.0, q_im: 0.0, p: 0.5, r: 1.5, cutoff: 1.0}
        - omega: 2.0
          form_factor: {family: power_law_cutoff, q_re: 0.5, q_im: -0.25, p: 0.5, r: 1.5, cutoff: 1.0}
      initial_state:
        c: [[1.0, 0.0], [0.0, 1.0]]
    """
    run = ConfigLoader(str(write(tmp_path, text))).load()
    assert run.model.levels[0].form_factor.q == 1.0 + 0j
    assert run.model.levels[1].form_factor.q == 0.5 - 0.25j
    np.testing.assert_allclose(run.state.vector, np.array([1.0, 1.0j]) / np.sqrt(2.0))


def test_single_level_state_rows(tmp_path):
    text = """\
    model:
      lambda: 0.01
      levels:
        - omega: 1.0
          form_factor: {family: power_law_cutoff, q_re: 1.0, q_im: 0.0, p: 0.5, r: 1.5, cutoff: 1.0}
      initial_state: {c: [[1.0, 0.0]]}
    """
    run = ConfigLoader(str(write(tmp_path, text))).load()
    assert run.model.levels[0].form_factor.q == 1.0 + 0j
    np.testing.assert_allclose(run.state.vector, [1.0])


def test_q_and_q_re_together_rejected(tmp_path):
    text = MINIMAL.replace("q: 1.0,", "q: 1.0, q_re: 1.0,")
    with pytest.raises(ValidationError) as excinfo:
        ConfigLoader(str(write(tmp_path, text))).load()
    assert "q_re" in str(excinfo.value)


def test_unknown_key_inside_initial_state(tmp_path):
    text = MINIMAL + "  initial_state: {coeffs: [[1.0, 0.0]]}\n"
    with pytest.raises(ParseError) as excinfo:
        ConfigLoader(str(write(tmp_path, text))).load()
    assert excinfo.value.field == "model.initial_state.coeffs"
