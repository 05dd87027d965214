"""Byte-stable CSV and JSON emission.

CSV: '.' decimal separator, no thousands separators, 17 significant digits
for reals, header row, LF line endings.  JSON: a single object with "meta"
and "data" keys, sorted keys.  Identical inputs always produce identical
bytes, so reruns can be diffed.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable

__all__ = ["format_value", "write_csv", "write_json", "write_sidecar"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def write_csv(path: str | Path, header: list[str], rows: Iterable[Iterable]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _jsonable(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        try:
            return _jsonable(v.item())
        except (AttributeError, ValueError):
            pass
    return v


def write_json(path: str | Path, meta: dict[str, Any], data: Any) -> None:
    def default(o):
        out = _jsonable(o)
        if out is o and not isinstance(o, (str, int, float, bool, type(None), list, dict)):
            return str(o)
        return out

    payload = {"meta": meta, "data": data}
    text = json.dumps(payload, sort_keys=True, indent=2, default=default)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def write_sidecar(data_path: str | Path, meta: dict[str, Any]) -> Path:
    """Write ``<data_path>.meta.json`` describing how the file was produced."""
    side = Path(str(data_path) + ".meta.json")
    write_json(side, meta, data=None)
    return side
