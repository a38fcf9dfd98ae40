"""JSON and CSV reading/writing for parameters, data matrices and reports."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .tree_model import DataTriple, SbtopParams

SIGNIFICANT_DIGITS = 12


def round_floats(obj, digits: int = SIGNIFICANT_DIGITS):
    """Recursively round floats to ``digits`` significant digits; NaN becomes None."""
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{float(obj):.{digits}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(round_floats(obj), indent=2)


def _nan_matrix(rows) -> np.ndarray:
    return np.array([[np.nan if v is None else v for v in row] for row in rows], dtype=float)


def load_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_params(path: str | Path) -> SbtopParams:
    return SbtopParams.from_dict(load_json(path))


def data_from_dict(data: dict) -> DataTriple:
    missing = [k for k in ("P", "T", "Tw") if k not in data]
    if missing:
        raise ValueError(f"data object is missing matrices: {', '.join(missing)}")
    return DataTriple(P=_nan_matrix(data["P"]), T=_nan_matrix(data["T"]), Tw=_nan_matrix(data["Tw"]))


def read_csv_matrix(path: str | Path) -> np.ndarray:
    """Read a matrix whose first row is a header of Psi levels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: expected a header row and at least one data row")
    width = len(rows[0])
    body = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValueError(f"{path}:{line_no}: expected {width} values, got {len(row)}")
        body.append([float(v) if v.strip() else np.nan for v in row])
    return np.array(body, dtype=float)


def write_csv_matrix(path: str | Path, matrix) -> None:
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(range(matrix.shape[1]))
        for row in matrix:
            writer.writerow(["" if np.isnan(v) else f"{v:.{SIGNIFICANT_DIGITS}g}" for v in row])


def load_data(paths: list[str]) -> DataTriple:
    """Load a data triple from one JSON file or from three CSV files (P, T, Tw)."""
    if len(paths) == 1:
        return data_from_dict(load_json(paths[0]))
    if len(paths) == 3:
        P, T, Tw = (read_csv_matrix(p) for p in paths)
        return DataTriple(P=P, T=T, Tw=Tw)
    raise ValueError("give either one JSON data file or three CSV files (P, T, Tw)")


def save_data_csv(prefix: str | Path, data: DataTriple) -> list[Path]:
    prefix = Path(prefix)
    out = []
    for name in ("P", "T", "Tw"):
        path = prefix.with_name(f"{prefix.name}_{name}.csv")
        write_csv_matrix(path, getattr(data, name))
        out.append(path)
    return out
