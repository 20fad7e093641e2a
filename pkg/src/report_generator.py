"""
Write CSV/JSON results and the aligned hydrogen table
"""

import csv
import json
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from jinja2 import BaseLoader, Environment

from .errors import ParseError, ValidationError
from .models import ComparisonResult, TableRow


TABLE_TEMPLATE = """\
{{ "%6s"|format("N") }}  {{ "%8s"|format("R") }}  {{ "%12s"|format("t_N [s]") }}  {{ "%12s"|format("t_ep [s]") }}  {{ "%14s"|format("|A(t_ep)|^2") }}
{% for row in rows -%}
{{ "%6d"|format(row.n_levels) }}  {{ "%8.4f"|format(row.ratio) }}  {{ "%12.4e"|format(row.t_n) }}  {{ "%12.4e"|format(row.t_ep) }}  {{ "%14.4e"|format(row.amplitude_sq) }}
{% endfor -%}
{% if comparison %}
Reference check: {{ "PASS" if comparison.matched else "FAIL" }}
{% if comparison.differences %}{{ comparison.differences }}
{% endif %}{% endif %}"""


def format_number(value: Any) -> str:
    """17 significant digits, '.' decimal, independent of locale"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; complex numbers become [re, im]"""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


class ReportGenerator:
    """Create CSV, JSON and text outputs under a fixed directory"""

    def __init__(self, output_dir: Path, output_format: str = "csv"):
        self.output_dir = Path(output_dir)
        self.output_format = output_format

    def write_rows(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{name}.csv"
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_number(v) for v in row])
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{name}.json"
        path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
        return path

    def write_columns(self, name: str, columns: Dict[str, Sequence[Any]]) -> Path:
        """
        Column data in the configured format.

        Complex columns are split into ``<name>_re`` and ``<name>_im`` for CSV.
        """
        if self.output_format == "json":
            return self.write_json(name, columns)

        header: List[str] = []
        arrays: List[np.ndarray] = []
        for key, values in columns.items():
            arr = np.asarray(values)
            if np.iscomplexobj(arr):
                header += [f"{key}_re", f"{key}_im"]
                arrays += [arr.real, arr.imag]
            else:
                header.append(key)
                arrays.append(arr)
        rows = list(zip(*arrays)) if arrays else []
        return self.write_rows(name, header, rows)

    def write_record(self, name: str, record: Dict[str, Any]) -> Path:
        """Single report: JSON always, since it nests"""
        return self.write_json(name, record)

    def read_record(self, name: str) -> Dict[str, Any]:
        path = self.output_dir / f"{name}.json"
        if not path.exists():
            raise ValidationError(f"No {name} record in {self.output_dir}")
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc.msg}", line=exc.lineno) from exc

    def render_table(self, rows: Sequence[TableRow], comparison: Optional[ComparisonResult] = None) -> str:
        env = Environment(loader=BaseLoader(), keep_trailing_newline=True)
        template = env.from_string(TABLE_TEMPLATE)
        return template.render(rows=rows, comparison=comparison)

    def write_table(self, rows: Sequence[TableRow], comparison: Optional[ComparisonResult] = None) -> Dict[str, Path]:
        artifacts: Dict[str, Path] = {}
        columns = {
            "N": [r.n_levels for r in rows],
            "ratio": [r.ratio for r in rows],
            "t_N_s": [r.t_n for r in rows],
            "t_ep_s": [r.t_ep for r in rows],
            "A_ep_sq": [r.amplitude_sq for r in rows],
        }
        artifacts[self.output_format] = self.write_columns("hydrogen_table", columns)
        path = self.output_dir / "hydrogen_table.txt"
        path.write_text(self.render_table(rows, comparison))
        artifacts["txt"] = path
        return artifacts
