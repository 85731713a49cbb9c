"""Run configuration and CSV/JSON writers.

CSV floats use 17 significant digits so values round-trip; JSON uses Python's
shortest round-trip repr.  Every JSON document carries ``"schema": 1`` and is
written with sorted keys so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ValidationError
from .mapcore import OrbitRecord, TorusPoint
from .orbits import FinderConfig
from .tracer import DEFAULT_BORDER_TOL, DEFAULT_BOUNDARY_TOL

SCHEMA_VERSION = 1
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    grid_points: int = 4096
    root_tol: float = 1e-12
    match_tol: float = 1e-8
    max_iter: int = 100
    max_grid_points: int = 2**18
    closure_tol: float = 1e-9
    marginal_tol: float = 1e-9
    boundary_tol: float = DEFAULT_BOUNDARY_TOL
    border_tol: float = DEFAULT_BORDER_TOL
    output_format: str = "json"
    output_path: str | None = None

    def __post_init__(self):
        if self.output_format not in FORMATS:
            raise ValidationError(f"output_format must be one of {FORMATS}, got {self.output_format!r}")
        for name in ("boundary_tol", "border_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive number, got {v!r}")
        self.finder_config()  # validates the shared fields

    def finder_config(self) -> FinderConfig:
        names = {f.name for f in fields(FinderConfig)}
        return FinderConfig(**{n: getattr(self, n) for n in names})

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config; keys may use dashes or underscores."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


# ---------------------------------------------------------------------------
# value conversion


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, Enum):
        return str(v.value)
    if v is None:
        return ""
    return str(v)


def to_jsonable(obj):
    """Plain JSON types for dataclasses, enums, fractions, tuples and NaN."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, TorusPoint):
        return {"theta": obj.theta, "J": obj.J}
    if isinstance(obj, OrbitRecord):
        return orbit_to_dict(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def orbit_to_dict(o: OrbitRecord) -> dict[str, Any]:
    return {
        "period": o.period,
        "winding_j": o.winding_j,
        "winding_s": o.winding_s,
        "trace": o.trace,
        "stability": o.stability.value,
        "case": o.case.value if o.case is not None else None,
        "points": [[x.theta, x.J] for x in o.points],
        "symmetric": [[i, c.value] for i, c in o.symmetric],
    }


# ---------------------------------------------------------------------------
# writers


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def render_json(kind: str, payload: dict[str, Any]) -> str:
    doc = {"schema": SCHEMA_VERSION, "kind": kind}
    doc.update(to_jsonable(payload))
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit(text: str, path: str | None) -> None:
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
