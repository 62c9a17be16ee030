"""Raw float64 grids with JSON sidecars, and CSV tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

RAW_SUFFIX = ".f64"
SIDECAR_SUFFIX = ".json"


class FormatError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_grid(stem: str | Path, values: np.ndarray, meta: dict[str, Any]) -> tuple[Path, Path]:
    """Write ``stem.f64`` (little-endian, row-major) and ``stem.json``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim != 2:
        raise FormatError("grids must be two-dimensional")
    raw = stem.with_suffix(RAW_SUFFIX)
    side = stem.with_suffix(SIDECAR_SUFFIX)
    raw.write_bytes(values.tobytes(order="C"))
    meta = {**meta, "n1": int(values.shape[0]), "n2": int(values.shape[1]),
            "dtype": "<f8", "order": "C"}
    side.write_text(dumps(meta), encoding="utf-8")
    return raw, side


def read_grid(path: str | Path) -> tuple[np.ndarray, dict[str, Any]]:
    """Read a grid given either its raw file or its sidecar."""
    path = Path(path)
    raw = path.with_suffix(RAW_SUFFIX)
    side = path.with_suffix(SIDECAR_SUFFIX)
    if not raw.is_file() or not side.is_file():
        raise FormatError(f"{path}: need both {raw.name} and {side.name}")
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
        n1, n2 = int(meta["n1"]), int(meta["n2"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{side}: bad sidecar ({exc})") from exc
    if meta.get("dtype", "<f8") != "<f8":
        raise FormatError(f"{side}: unsupported dtype {meta.get('dtype')!r}")
    data = raw.read_bytes()
    if len(data) != 8 * n1 * n2:
        raise FormatError(
            f"{raw}: {len(data)} bytes, sidecar says {n1}x{n2} float64 = {8 * n1 * n2}"
        )
    return np.frombuffer(data, dtype="<f8").reshape(n1, n2).copy(), meta


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path
