"""
Shared toy models for the test suite.

Every model uses the cutoff family v = q w^p / (1 + w/L)^(p+r).
"""

import textwrap
from pathlib import Path
from typing import Sequence

import pytest

from src.models import FormFactor, LevelSpec, ModelSpec


def cutoff_model(
    omegas: Sequence[float],
    qs: Sequence[complex],
    lam: float,
    p: float = 0.5,
    r: float = 1.5,
    cutoff: float = 1.0,
) -> ModelSpec:
    levels = tuple(
        LevelSpec(omega=float(w), form_factor=FormFactor.power_law_cutoff(q, p, r, cutoff))
        for w, q in zip(omegas, qs)
    )
    return ModelSpec(levels=levels, lam=lam)


@pytest.fixture
def closed_form_model() -> ModelSpec:
    """v^2 = w/(1+w)^4: s(-1) = -1/12, I(0) = -1/3, v(1)^2 = 1/16"""
    return cutoff_model([2.0], [1.0], lam=0.1)


@pytest.fixture
def weak_two_level() -> ModelSpec:
    """gamma ~ (0.097, 0.054); exponential era ends near t ~ 530"""
    return cutoff_model([1.0, 1.5], [15.0, 10.0], lam=1e-2, cutoff=10.0)


@pytest.fixture
def orthogonal_model() -> ModelSpec:
    return cutoff_model([1.0, 2.0], [4.0, 5.0], lam=0.15, cutoff=2.0)


@pytest.fixture
def oracle_model() -> ModelSpec:
    """gamma_1 ~ 0.066, so 5/gamma_1 stays below the Heisenberg time of M=2000 on [0, 60]"""
    return cutoff_model([1.0, 1.6], [2.0, 1.5], lam=0.1, r=2.5, cutoff=4.0)


@pytest.fixture
def single_weak_level() -> ModelSpec:
    return cutoff_model([1.0], [1.0], lam=0.01)


@pytest.fixture
def expansion_models():
    """Same geometry at three couplings for the lambda^6 remainder"""
    return [cutoff_model([1.0, 2.0], [30.0, 20.0], lam=lam) for lam in (1e-3, 3e-3, 1e-2)]


TOY_CONFIG = """\
model:
  lambda: 0.1
  levels:
    - omega: 1.0
      form_factor:
        family: power_law_cutoff
        q_re: 2.0
        q_im: 0.0
        p: 0.5
        r: 2.5
        cutoff: 4.0
    - omega: 1.6
      form_factor:
        q: [1.5, 0.0]
        p: 0.5
        r: 2.5
        cutoff: 4.0
  initial_state:
    c: [[1.0, 0.0], [1.0, 0.0]]
run:
  format: csv
"""


@pytest.fixture
def toy_config(tmp_path) -> Path:
    path = tmp_path / "toy.yaml"
    text = TOY_CONFIG.replace("format: csv", f"format: csv\n  output_dir: {tmp_path / 'out'}")
    path.write_text(text)
    return path


@pytest.fixture
def single_level_config(tmp_path) -> Path:
    path = tmp_path / "single.yaml"
    path.write_text(textwrap.dedent(f"""\
        model:
          lambda: 0.05
          levels:
            - omega: 1.0
              form_factor: {{q: 1.0, p: 0.5, r: 1.5, cutoff: 1.0}}
        run:
          output_dir: {tmp_path / 'out'}
        """))
    return path
