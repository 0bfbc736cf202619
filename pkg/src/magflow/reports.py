"""Uniform pass/fail records for identity and estimate checks.

Every numerical battery reduces to rows of the same shape: the two
sides of an identity (or estimate), their residual, the tolerance it
was held to, and the resolution parameters that produced the numbers.
Serialization is deterministic (sorted keys, fixed float formatting)
so repeated runs on the same config are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from typing import Dict, List

__all__ = ["IdentityReport", "ReportTable", "fmt_float"]


def fmt_float(x) -> str:
    return f"{float(x):.16e}"


def _jsonable(v):
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, complex):
        return {"re": fmt_float(v.real), "im": fmt_float(v.imag)}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in sorted(v.items())}
    return v


@dataclasses.dataclass(frozen=True)
class IdentityReport:
    """One verified identity/estimate instance.

    ``left`` and ``right`` are the two sides as computed; ``residual``
    is |left - right| (or the estimate slack), ``rel_residual`` the same
    normalized by scale; ``passed`` is residual <= tolerance (for
    estimates: left <= right up to tolerance).
    """

    name: str
    left: float
    right: float
    residual: float
    rel_residual: float
    tolerance: float
    passed: bool
    resolution: Dict[str, object] = dataclasses.field(default_factory=dict)
    detail: Dict[str, object] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_sides(cls, name, left, right, tolerance, resolution=None,
                   detail=None, relative=False):
        left = float(left)
        right = float(right)
        residual = abs(left - right)
        scale = max(abs(left), abs(right), 1e-300)
        rel = residual / scale
        passed = (rel if relative else residual) <= tolerance
        return cls(name, left, right, residual, rel, float(tolerance), passed,
                   dict(resolution or {}), dict(detail or {}))

    @classmethod
    def from_bound(cls, name, left, right, tolerance, resolution=None, detail=None):
        """Estimate row: passes iff left <= right * (1 + tolerance)."""
        left = float(left)
        right = float(right)
        slack = left - right
        scale = max(abs(left), abs(right), 1e-300)
        passed = left <= right + tolerance * scale
        return cls(name, left, right, max(slack, 0.0), max(slack, 0.0) / scale,
                   float(tolerance), passed, dict(resolution or {}),
                   dict(detail or {}))

    def to_json_obj(self):
        d = dataclasses.asdict(self)
        for key in ("left", "right", "residual", "rel_residual", "tolerance"):
            d[key] = fmt_float(d[key])
        d["resolution"] = _jsonable(d["resolution"])
        d["detail"] = _jsonable(d["detail"])
        return d

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: residual={self.residual:.3e} "
                f"(rel {self.rel_residual:.3e}, tol {self.tolerance:.1e})")


@dataclasses.dataclass
class ReportTable:
    """An ordered collection of report rows with deterministic export."""

    rows: List[IdentityReport] = dataclasses.field(default_factory=list)
    meta: Dict[str, object] = dataclasses.field(default_factory=dict)

    def add(self, row: IdentityReport):
        self.rows.append(row)
        return row

    def extend(self, rows):
        self.rows.extend(rows)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> str:
        obj = {
            "meta": _jsonable(self.meta),
            "rows": [r.to_json_obj() for r in self.rows],
            "passed": self.passed,
        }
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def write_json(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "left", "right", "residual", "rel_residual",
                        "tolerance", "passed"])
            for r in self.rows:
                w.writerow([r.name, fmt_float(r.left), fmt_float(r.right),
                            fmt_float(r.residual), fmt_float(r.rel_residual),
                            fmt_float(r.tolerance), int(r.passed)])

    def print_lines(self, out=None):
        import sys
        out = out or sys.stdout
        for r in self.rows:
            print(r.line(), file=out)
