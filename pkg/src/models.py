"""
Dataclasses and shared models for the Friedrichs decay toolkit
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from .errors import ParseError, ValidationError
from .utils import complex_pairs

NORM_TOLERANCE = 1e-12
EXPONENT_TOLERANCE = 1e-12


class FormFactorFamily(str, Enum):
    """Supported form-factor shapes"""
    POWER_LAW_CUTOFF = "power_law_cutoff"
    TABULATED = "tabulated"


class Branch(str, Enum):
    """Side of the cut: omega + i0 or omega - i0"""
    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


class AsymptoteMode(str, Enum):
    EXACT = "exact"
    PERTURBATIVE = "perturbative"


class CrossoverMode(str, Enum):
    FULL = "full"
    APPROXIMATE = "approximate"


@lru_cache(maxsize=64)
def _tabulated_splines(samples: Tuple[Tuple[float, complex], ...]) -> Tuple[CubicSpline, CubicSpline]:
    omegas = np.array([s[0] for s in samples], dtype=float)
    values = np.array([s[1] for s in samples], dtype=complex)
    return CubicSpline(omegas, values.real), CubicSpline(omegas, values.imag)


@dataclass(frozen=True)
class FormFactor:
    """
    Coupling v(omega) between one level and the continuum.

    ``q`` and ``p`` fix the threshold monomial q*omega**p, ``r`` the
    large-energy decay omega**-r. The cutoff family is
    v = q omega**p / (1 + omega/cutoff)**(p + r); the tabulated family
    interpolates ``samples`` with cubic splines and continues them with the
    two power laws outside the table.
    """

    family: FormFactorFamily
    q: complex
    p: float
    r: float
    cutoff: Optional[float] = None
    samples: Tuple[Tuple[float, complex], ...] = ()

    @classmethod
    def power_law_cutoff(cls, q: complex, p: float, r: float, cutoff: float) -> "FormFactor":
        return cls(FormFactorFamily.POWER_LAW_CUTOFF, complex(q), float(p), float(r), cutoff=float(cutoff))

    @classmethod
    def tabulated(cls, q: complex, p: float, r: float, samples: Sequence[Tuple[float, complex]]) -> "FormFactor":
        ordered = tuple(sorted((float(w), complex(v)) for w, v in samples))
        return cls(FormFactorFamily.TABULATED, complex(q), float(p), float(r), samples=ordered)

    @property
    def scale(self) -> float:
        """Energy beyond which the large-energy power law holds"""
        if self.family is FormFactorFamily.POWER_LAW_CUTOFF:
            return float(self.cutoff)
        return self.samples[-1][0]

    def large_energy_amplitude(self) -> complex:
        if self.family is FormFactorFamily.POWER_LAW_CUTOFF:
            return self.q * self.cutoff ** (self.p + self.r)
        w_last, v_last = self.samples[-1]
        return v_last * w_last ** self.r

    def __call__(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        if self.family is FormFactorFamily.POWER_LAW_CUTOFF:
            return self.q * w ** self.p / (1.0 + w / self.cutoff) ** (self.p + self.r)

        re_spline, im_spline = _tabulated_splines(self.samples)
        w_first, w_last = self.samples[0][0], self.samples[-1][0]
        inside = np.clip(w, w_first, w_last)
        out = re_spline(inside) + 1j * im_spline(inside)
        low = w < w_first
        high = w > w_last
        out = np.where(low, self.q * np.where(low, w, 1.0) ** self.p, out)
        out = np.where(high, self.large_energy_amplitude() * np.where(high, w, 1.0) ** (-self.r), out)
        return out


@dataclass(frozen=True)
class LevelSpec:
    """One unstable level: free energy omega_n and its form factor"""

    omega: float
    form_factor: FormFactor


@dataclass(frozen=True)
class ModelSpec:
    """N levels coupled to one continuum with strength ``lam``"""

    levels: Tuple[LevelSpec, ...]
    lam: float

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([level.omega for level in self.levels], dtype=float)

    @property
    def omega_cut(self) -> float:
        scales = [level.form_factor.scale for level in self.levels]
        return max(100.0 * max(scales), 100.0 * max(self.omegas))

    def couplings(self, omega) -> np.ndarray:
        """Form factors on a grid, shape (len(omega), N)"""
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        return np.stack([level.form_factor(w) for level in self.levels], axis=-1)

    def with_lambda(self, lam: float) -> "ModelSpec":
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class InitialState:
    """Normalized superposition of the unstable levels"""

    c: Tuple[complex, ...]

    def __post_init__(self):
        norm_sq = float(sum(abs(x) ** 2 for x in self.c))
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise ValidationError(
                f"Initial state is not normalized: sum |c_n|^2 = {norm_sq!r}",
                {"norm_sq": norm_sq},
            )

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.c, dtype=complex)

    @classmethod
    def basis(cls, n_levels: int, index: int) -> "InitialState":
        c = [0j] * n_levels
        c[index] = 1.0 + 0j
        return cls(tuple(c))


@dataclass
class ValidationReport:
    """Outcome of checking the model's standing assumptions"""

    passed: bool
    violations: List[str] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SelfEnergyMatrix:
    z: complex
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class BoundaryValues:
    omega: float
    I: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray

    def s(self, branch: Branch) -> np.ndarray:
        return self.s_plus if branch is Branch.PLUS else self.s_minus


@dataclass(frozen=True, eq=False)
class GZeroExpansion:
    """Zero-energy reduced resolvent and its series in lambda**2"""

    g_exact: np.ndarray
    g_terms: List[np.ndarray]

    def partial_sum(self, lam: float, order: Optional[int] = None) -> np.ndarray:
        order = len(self.g_terms) - 1 if order is None else order
        total = np.zeros_like(self.g_terms[0])
        for j, term in enumerate(self.g_terms[: order + 1]):
            total = total + lam ** (2 * j) * term
        return total


@dataclass(frozen=True, eq=False)
class SpectralDensitySamples:
    grid: np.ndarray
    density: np.ndarray
    overlap: np.ndarray


@dataclass(eq=False)
class SurvivalSeries:
    """A(t) on a set of times; ``error_estimate`` bounds the truncated tail"""

    times: np.ndarray
    amplitude: np.ndarray
    error_estimate: Optional[np.ndarray] = None
    complete: bool = True

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


@dataclass(eq=False)
class AsymptoteReport:
    """Coefficients of the threshold-dominated long-time behaviour"""

    p: float
    f: np.ndarray
    chi_norm_sq: float
    lam: float
    mode: AsymptoteMode
    phase_convention: str = "(it)^(2p+1) = t^(2p+1) * exp(i*pi*(2p+1)/2)"
    maximizer: Optional[np.ndarray] = None
    t_ep: Optional[float] = None

    def overlap(self, state: InitialState) -> complex:
        """<chi|psi> = sum_n conj(f_n) c_n"""
        return complex(np.vdot(self.f, state.vector))

    def coefficient(self, state: InitialState) -> float:
        """lambda^2 Gamma(2p+1) |<chi|psi>|^2"""
        return float(self.lam ** 2 * gamma(2.0 * self.p + 1.0) * abs(self.overlap(state)) ** 2)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "f": complex_pairs(self.f),
            "chi_norm_sq": self.chi_norm_sq,
            "lam": self.lam,
            "maximizer": None if self.maximizer is None else complex_pairs(self.maximizer),
            "t_ep": self.t_ep,
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AsymptoteReport":
        """
        Inverse of ``to_dict``; complex entries are read from [re, im] pairs.

        Raises:
            ParseError: missing or unknown keys, or malformed pairs
        """
        required = ("p", "f", "chi_norm_sq", "lam", "mode")
        missing = [key for key in required if key not in data]
        if missing:
            raise ParseError(f"asymptote report lacks {missing}", field=missing[0])
        unknown = sorted(set(data) - set(required) - {"maximizer", "t_ep"})
        if unknown:
            raise ParseError(f"unknown key '{unknown[0]}' in asymptote report", field=unknown[0])

        def pairs(key: str) -> np.ndarray:
            rows = np.asarray(data[key], dtype=float)
            if rows.ndim != 2 or rows.shape[1] != 2:
                raise ParseError(f"'{key}' must be a list of [re, im] pairs", field=key)
            return rows[:, 0] + 1j * rows[:, 1]

        return cls(
            p=float(data["p"]),
            f=pairs("f"),
            chi_norm_sq=float(data["chi_norm_sq"]),
            lam=float(data["lam"]),
            mode=AsymptoteMode(data["mode"]),
            maximizer=None if data.get("maximizer") is None else pairs("maximizer"),
            t_ep=None if data.get("t_ep") is None else float(data["t_ep"]),
        )


@dataclass
class SlaComparison:
    sla_coefficient: float
    exact_coefficient: float
    deviation: float
    relative_deviation: float


@dataclass
class SchwarzSweep:
    n_states: int
    seed: int
    maximal_coefficient: float
    min_margin: float
    strict_wins: int
    strict_candidates: int
    violations: int


@dataclass(frozen=True)
class HydrogenSeriesSpec:
    """Hydrogen np series: level n is the (n+1)p state"""

    n_levels: int
    omega_scale: float = 1.55e16
    lam: float = 6.43e-9
    r: float = 2.5
    calibration_tolerance: float = 0.01

    def omega(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return (4.0 / 3.0) * self.omega_scale * (1.0 - (n + 1.0) ** -2)


@dataclass
class TableRow:
    n_levels: int
    ratio: float
    t_n: float
    t_ep: float
    amplitude_sq: float


@dataclass(frozen=True, eq=False)
class DiscretizedHamiltonian:
    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    n_levels: int
    omega_max: float

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def heisenberg_time(self) -> float:
        return 2.0 * np.pi * len(self.nodes) / self.omega_max


@dataclass
class BoundStateReport:
    passed: bool
    scan_grid: np.ndarray
    min_eigenvalues: np.ndarray
    suspected_bound_states: int
    completeness: Dict[int, float] = field(default_factory=dict)
    messages: List[str] = field(default_factory=list)


@dataclass
class OracleComparison:
    times: np.ndarray
    spectral: np.ndarray
    oracle: np.ndarray
    max_abs_deviation: float
    heisenberg_time: float
    matched: bool


@dataclass
class ComparisonResult:
    """Result of comparing computed values to reference data"""

    matched: bool
    differences: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class RunConfig:
    """Validated run settings plus the model they apply to"""

    source: str
    model: ModelSpec
    state: Optional[InitialState] = None
    tolerance: float = 1e-10
    output_format: str = "csv"
    output_dir: Path = Path("./results")
    seed: int = 20240501
    threads: Optional[int] = None
    logging: Dict[str, Any] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)
