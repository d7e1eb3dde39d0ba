"""Plain tables and their CSV / JSON serialisation.

CSV files start with ``#``-prefixed metadata lines, then a header row.
Reals are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(value)


def to_jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    @classmethod
    def from_columns(cls, **cols: Sequence) -> Table:
        names = tuple(cols)
        data = [list(np.asarray(v).tolist()) if isinstance(v, np.ndarray) else list(v) for v in cols.values()]
        lengths = {len(d) for d in data}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
        return cls(names, tuple(zip(*data)))

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def to_csv(self, meta: dict | None = None) -> str:
        lines = []
        for key, value in (meta or {}).items():
            lines.append(f"# {key}: {json.dumps(to_jsonable(value), sort_keys=True)}")
        lines.append(",".join(self.columns))
        lines.extend(",".join(fmt(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}
