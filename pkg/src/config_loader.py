"""
Configuration loader module
Loads and validates model and run settings from YAML files
"""

import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml

from .errors import ParseError, ValidationError
from .hydrogen import build_model
from .model import normalize_state, validate_model
from .models import FormFactor, FormFactorFamily, InitialState, LevelSpec, ModelSpec, RunConfig

HYDROGEN_SOURCE = re.compile(r"^\s*hydrogen\(\s*(\d+)\s*\)\s*$")

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "run": {
        "tolerance": 1e-10,
        "format": "csv",
        "output_dir": "./results",
        "seed": 20240501,
        "threads": None,
    },
    "logging": {
        "level": "INFO",
        "log_dir": None,
        "log_file": "friedrichs_{timestamp}.log",
    },
}

# Allowed keys per section; anything else is a typo and rejected.
SCHEMA: Dict[str, Tuple[str, ...]] = {
    "": ("model", "run", "logging"),
    "model": ("lambda", "levels", "initial_state"),
    "model.initial_state": ("c",),
    "model.levels[]": ("omega", "form_factor"),
    "model.levels[].form_factor": ("family", "q_re", "q_im", "q", "p", "r", "cutoff", "samples"),
    "run": ("tolerance", "format", "output_dir", "seed", "threads"),
    "logging": ("level", "log_dir", "log_file", "timestamp_format"),
}

ALLOWED_FORMATS = ("csv", "json")
ALLOWED_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigLoader:
    """Load and validate a run configuration or the built-in hydrogen model"""

    def __init__(self, source: str):
        """
        Args:
            source: path to a YAML file, or the string ``hydrogen(N)``
        """
        self.source = str(source)
        self.config: Optional[Dict[str, Any]] = None
        self._lines: Dict[str, int] = {}

    def load(self) -> RunConfig:
        """
        Raises:
            ParseError: unreadable YAML or an unknown key
            ValidationError: values that violate the schema or the model assumptions
        """
        builtin = HYDROGEN_SOURCE.match(self.source)
        if builtin:
            n_levels = int(builtin.group(1))
            self.config = {section: dict(values) for section, values in DEFAULTS.items()}
            return RunConfig(
                source=self.source,
                model=build_model(n_levels),
                raw={"model": f"hydrogen({n_levels})", **self.config},
                **self._run_settings(),
            )

        path = Path(self.source)
        if not path.exists():
            raise ValidationError(f"Configuration file not found: {path}")
        text = path.read_text()

        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ParseError(f"invalid YAML: {exc}", line=mark.line + 1 if mark else None) from exc

        if not isinstance(data, dict):
            raise ParseError("configuration must be a mapping with a 'model' section", line=1)
        self._lines = {}
        self._collect_lines(root, "")
        self._reject_unknown(data, "", "")

        self.config = data
        for section, values in DEFAULTS.items():
            merged = dict(values)
            merged.update(data.get(section) or {})
            self.config[section] = merged

        self._validate()
        model, state = self._build_model(self.config["model"])
        report = validate_model(model)
        if not report.passed:
            formatted = "\n - ".join(report.violations)
            raise ValidationError(f"Model validation failed:\n - {formatted}", {"violations": report.violations})

        return RunConfig(source=self.source, model=model, state=state, raw=data, **self._run_settings())

    # --- YAML structure ----------------------------------------------------

    def _collect_lines(self, node: Optional[yaml.Node], path: str) -> None:
        """Map dotted keys to 1-based source lines"""
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = f"{path}.{key_node.value}" if path else str(key_node.value)
                self._lines[key] = key_node.start_mark.line + 1
                self._collect_lines(value_node, key)
        elif isinstance(node, yaml.SequenceNode):
            for idx, item in enumerate(node.value):
                key = f"{path}[{idx}]"
                self._lines[key] = item.start_mark.line + 1
                self._collect_lines(item, key)

    def _reject_unknown(self, data: Any, path: str, schema_key: str) -> None:
        allowed = SCHEMA.get(schema_key)
        if allowed is None or not isinstance(data, dict):
            return
        for key, value in data.items():
            dotted = f"{path}.{key}" if path else str(key)
            if key not in allowed:
                raise ParseError(f"unknown key '{dotted}'", field=dotted, line=self._lines.get(dotted))
            child_schema = f"{schema_key}.{key}" if schema_key else str(key)
            if isinstance(value, list) and f"{child_schema}[]" in SCHEMA:
                for idx, item in enumerate(value):
                    self._reject_unknown(item, f"{dotted}[{idx}]", f"{child_schema}[]")
            else:
                self._reject_unknown(value, dotted, child_schema)

    def line_of(self, key: str) -> Optional[int]:
        return self._lines.get(key)

    # --- Section validators ------------------------------------------------

    def _validate(self) -> None:
        validators = [self._validate_model, self._validate_run, self._validate_logging]
        errors: List[str] = []
        for validator in validators:
            errors.extend(validator())
        if errors:
            formatted = "\n - ".join(errors)
            raise ValidationError(f"Configuration validation failed:\n - {formatted}", {"errors": errors})

    def _validate_model(self) -> List[str]:
        errors: List[str] = []
        model_cfg = self.config.get("model")
        if not isinstance(model_cfg, dict):
            return ["Section 'model' must be a mapping."]

        if self._coerce_number(model_cfg.get("lambda")) is None:
            errors.append(self._where("'model.lambda' must be a number.", "model.lambda"))

        levels = model_cfg.get("levels")
        if not isinstance(levels, list) or not levels:
            errors.append(self._where("'model.levels' must be a non-empty list.", "model.levels"))
            return errors

        for idx, level in enumerate(levels):
            prefix = f"model.levels[{idx}]"
            if not isinstance(level, dict):
                errors.append(self._where(f"'{prefix}' must be a mapping.", prefix))
                continue
            if self._coerce_number(level.get("omega")) is None:
                errors.append(self._where(f"'{prefix}.omega' must be a number.", f"{prefix}.omega"))
            ff = level.get("form_factor")
            if not isinstance(ff, dict):
                errors.append(self._where(f"'{prefix}.form_factor' must be a mapping.", prefix))
                continue
            errors.extend(self._validate_form_factor(ff, f"{prefix}.form_factor"))

        state = self._state_rows(model_cfg)
        if state is not None:
            if not isinstance(state, list) or len(state) != len(levels):
                errors.append(self._where(
                    f"'model.initial_state.c' must list one coefficient per level ({len(levels)}).",
                    "model.initial_state",
                ))
            elif any(self._coerce_complex(c) is None for c in state):
                errors.append(self._where(
                    "'model.initial_state.c' entries must be [re, im] rows or real numbers.", "model.initial_state"
                ))
        return errors

    @staticmethod
    def _state_rows(model_cfg: Dict[str, Any]) -> Any:
        # initial_state: {c: [[re, im], ...]}; a bare list is read as c
        state = model_cfg.get("initial_state")
        if isinstance(state, dict):
            return state.get("c")
        return state

    def _form_factor_q(self, ff: Dict[str, Any]) -> Optional[complex]:
        """q from q_re/q_im, or from the older single ``q`` entry"""
        if "q_re" in ff or "q_im" in ff:
            if "q" in ff or "q_re" not in ff:
                return None
            re_part = self._coerce_number(ff["q_re"])
            im_part = self._coerce_number(ff.get("q_im", 0.0))
            if re_part is None or im_part is None:
                return None
            return complex(re_part, im_part)
        return self._coerce_complex(ff.get("q"))

    def _validate_form_factor(self, ff: Dict[str, Any], prefix: str) -> List[str]:
        errors: List[str] = []
        family = ff.get("family", FormFactorFamily.POWER_LAW_CUTOFF.value)
        allowed = [f.value for f in FormFactorFamily]
        if family not in allowed:
            errors.append(self._where(f"'{prefix}.family' must be one of {allowed}.", f"{prefix}.family"))
            return errors
        if self._form_factor_q(ff) is None:
            errors.append(self._where(
                f"'{prefix}' needs numeric q_re (and optional q_im), or a single q; not both.", f"{prefix}.q_re"
            ))
        for key in ("p", "r"):
            if self._coerce_number(ff.get(key)) is None:
                errors.append(self._where(f"'{prefix}.{key}' must be a number.", f"{prefix}.{key}"))
        if family == FormFactorFamily.POWER_LAW_CUTOFF.value:
            if self._coerce_number(ff.get("cutoff")) is None:
                errors.append(self._where(f"'{prefix}.cutoff' is required for the cutoff family.", prefix))
        else:
            samples = ff.get("samples")
            if not isinstance(samples, list) or not all(
                isinstance(s, list) and len(s) in (2, 3) and all(self._coerce_number(x) is not None for x in s)
                for s in samples
            ):
                errors.append(self._where(
                    f"'{prefix}.samples' must be a list of [omega, re] or [omega, re, im] rows.", prefix
                ))
        return errors

    def _validate_run(self) -> List[str]:
        errors: List[str] = []
        run_cfg = self.config.get("run")
        if not isinstance(run_cfg, dict):
            return ["Section 'run' must be a mapping."]
        if self._coerce_number(run_cfg.get("tolerance"), positive=True) is None:
            errors.append(self._where("'run.tolerance' must be a positive number.", "run.tolerance"))
        if run_cfg.get("format") not in ALLOWED_FORMATS:
            errors.append(self._where(f"'run.format' must be one of {list(ALLOWED_FORMATS)}.", "run.format"))
        if not isinstance(run_cfg.get("output_dir"), str) or not run_cfg["output_dir"].strip():
            errors.append(self._where("'run.output_dir' must be a non-empty string.", "run.output_dir"))
        if self._coerce_number(run_cfg.get("seed"), integer=True) is None:
            errors.append(self._where("'run.seed' must be an integer.", "run.seed"))
        threads = run_cfg.get("threads")
        if threads is not None and self._coerce_number(threads, integer=True, positive=True) is None:
            errors.append(self._where("'run.threads' must be a positive integer when specified.", "run.threads"))
        return errors

    def _validate_logging(self) -> List[str]:
        log_cfg = self.config.get("logging")
        if not isinstance(log_cfg, dict):
            return ["Section 'logging' must be a mapping."]
        if str(log_cfg.get("level", "INFO")).upper() not in ALLOWED_LEVELS:
            return [self._where(f"'logging.level' must be one of {list(ALLOWED_LEVELS)}.", "logging.level")]
        return []

    def _where(self, message: str, key: str) -> str:
        # fall back to the closest enclosing key that exists in the file
        line = self.line_of(key)
        while line is None and "." in key:
            key = key.rsplit(".", 1)[0]
            line = self.line_of(key)
        return f"{message} (line {line})" if line else message

    # --- Construction ------------------------------------------------------

    def _build_model(self, model_cfg: Dict[str, Any]) -> Tuple[ModelSpec, Optional[InitialState]]:
        levels = []
        for level in model_cfg["levels"]:
            ff = level["form_factor"]
            q = self._form_factor_q(ff)
            p, r = float(ff["p"]), float(ff["r"])
            if ff.get("family", FormFactorFamily.POWER_LAW_CUTOFF.value) == FormFactorFamily.TABULATED.value:
                samples = [(float(s[0]), complex(float(s[1]), float(s[2]) if len(s) == 3 else 0.0)) for s in ff["samples"]]
                form_factor = FormFactor.tabulated(q, p, r, samples)
            else:
                form_factor = FormFactor.power_law_cutoff(q, p, r, float(ff["cutoff"]))
            levels.append(LevelSpec(omega=float(level["omega"]), form_factor=form_factor))

        spec = ModelSpec(levels=tuple(levels), lam=float(model_cfg["lambda"]))
        raw_state = self._state_rows(model_cfg)
        state = normalize_state([self._coerce_complex(c) for c in raw_state]) if raw_state is not None else None
        return spec, state

    def _run_settings(self) -> Dict[str, Any]:
        run_cfg = self.config["run"]
        threads = run_cfg.get("threads")
        return {
            "tolerance": float(run_cfg["tolerance"]),
            "output_format": run_cfg["format"],
            "output_dir": Path(run_cfg["output_dir"]),
            "seed": int(run_cfg["seed"]),
            "threads": int(threads) if threads is not None else None,
            "logging": dict(self.config["logging"]),
        }

    @staticmethod
    def _coerce_number(value: Any, *, integer: bool = False, positive: bool = False) -> Optional[float]:
        """
        Attempt to coerce a value to a number.
        Returns the coerced value (float or int) or None if conversion fails.
        """
        if isinstance(value, bool):
            return None

        coerced: Optional[float]
        if isinstance(value, (int, float)):
            coerced = float(value)
        elif isinstance(value, str):
            # PyYAML reads 1e-10 (no dot) as a string
            try:
                coerced = float(value.strip())
            except ValueError:
                return None
        else:
            return None

        if integer:
            if not coerced.is_integer():
                return None
            coerced = int(coerced)

        if positive and coerced <= 0:
            return None

        return coerced

    @classmethod
    def _coerce_complex(cls, value: Any) -> Optional[complex]:
        if isinstance(value, Sequence) and not isinstance(value, str):
            if len(value) != 2:
                return None
            re_part, im_part = cls._coerce_number(value[0]), cls._coerce_number(value[1])
            if re_part is None or im_part is None:
                return None
            return complex(re_part, im_part)
        number = cls._coerce_number(value)
        return None if number is None else complex(number)
