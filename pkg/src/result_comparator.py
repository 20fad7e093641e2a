"""
Compare computed values against reference data
"""

from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .models import ComparisonResult, TableRow

# Published hydrogen table: N -> (R, t_N [s], t_ep [s])
HYDROGEN_REFERENCE: Dict[int, Dict[str, float]] = {
    1: {"R": 1.00, "t_N": 1.60e-9, "t_ep": 2.00e-7},
    10: {"R": 1.28, "t_N": 3.18e-7, "t_ep": 4.23e-5},
    50: {"R": 1.29, "t_N": 3.18e-5, "t_ep": 4.59e-3},
}


class ResultComparator:
    """Per-key numeric comparisons with absolute or relative tolerances"""

    def __init__(self, mode: str = "strict", scale_map: Optional[Dict[str, float]] = None):
        """
        Args:
            mode: 'strict' or 'loose', scales every tolerance.
            scale_map: mode -> scale factor, default {'strict': 1.0, 'loose': 5.0}.
        """
        # key -> (kind, tolerance); kind is 'abs' or 'rel'
        self.tolerances: Dict[str, Tuple[str, float]] = {
            "R": ("abs", 0.01),
            "t_N": ("rel", 0.01),
            "t_ep": ("rel", 0.05),
            "amplitude": ("abs", 1e-3),
        }
        scale_map = scale_map or {"strict": 1.0, "loose": 5.0}
        scale = scale_map.get(mode, 1.0)
        if scale != 1.0:
            self.tolerances = {k: (kind, tol * scale) for k, (kind, tol) in self.tolerances.items()}

    def within(self, key: str, value: float, reference: float) -> bool:
        kind, tol = self.tolerances[key]
        if kind == "rel":
            return abs(value - reference) <= tol * abs(reference)
        return abs(value - reference) <= tol

    def compare_values(self, computed: Mapping[str, float], reference: Mapping[str, float], label: str = "") -> List[str]:
        mismatches: List[str] = []
        for key, ref in reference.items():
            if key not in computed:
                mismatches.append(f"{label}{key}: missing from computed values")
                continue
            if not self.within(key, computed[key], ref):
                kind, tol = self.tolerances[key]
                mismatches.append(
                    f"{label}{key} differs beyond {kind} tolerance {tol}\n"
                    f"  gen: {computed[key]!r}\n"
                    f"  ref: {ref!r}"
                )
        return mismatches

    def compare_table(
        self,
        rows: Sequence[TableRow],
        reference: Optional[Mapping[int, Mapping[str, float]]] = None,
    ) -> ComparisonResult:
        """
        Check hydrogen rows against the reference and require |A(t_ep)|^2
        to decrease with N.
        """
        reference = HYDROGEN_REFERENCE if reference is None else reference
        mismatches: List[str] = []
        checked = []
        for row in rows:
            ref = reference.get(row.n_levels)
            if ref is None:
                continue
            checked.append(row.n_levels)
            computed = {"R": row.ratio, "t_N": row.t_n, "t_ep": row.t_ep}
            mismatches.extend(self.compare_values(computed, ref, label=f"N={row.n_levels}: "))

        ordered = sorted(rows, key=lambda r: r.n_levels)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.n_levels > prev.n_levels and not cur.amplitude_sq < prev.amplitude_sq:
                mismatches.append(
                    f"|A(t_ep)|^2 does not decrease from N={prev.n_levels} to N={cur.n_levels}: "
                    f"{prev.amplitude_sq!r} -> {cur.amplitude_sq!r}"
                )

        return ComparisonResult(
            matched=not mismatches,
            differences="\n".join(mismatches) if mismatches else None,
            details={"checked_levels": checked, "mismatch_count": len(mismatches)},
        )

    def compare_series(self, computed: Sequence[complex], reference: Sequence[complex], key: str = "amplitude") -> ComparisonResult:
        a = np.asarray(computed)
        b = np.asarray(reference)
        if a.shape != b.shape:
            return ComparisonResult(
                matched=False,
                differences=f"series lengths differ: {a.shape} vs {b.shape}",
                details={"generated": list(a.shape), "reference": list(b.shape)},
            )
        kind, tol = self.tolerances[key]
        deviation = np.abs(a - b)
        if kind == "rel":
            deviation = deviation / np.maximum(np.abs(b), np.finfo(float).tiny)
        worst = int(np.argmax(deviation)) if deviation.size else 0
        max_dev = float(deviation[worst]) if deviation.size else 0.0
        matched = max_dev <= tol
        return ComparisonResult(
            matched=matched,
            differences=None if matched else f"{key}: max deviation {max_dev:.3e} at index {worst} exceeds {tol}",
            details={"max_deviation": max_dev, "index": worst, "tolerance": tol},
        )
