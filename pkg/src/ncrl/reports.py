"""Report records and the JSON/CSV file formats.

Matrix JSON: ``{"dim": n, "entries": [[re, im], ...]}`` row-major.
Frame JSON: ``{"n": n, "k": k, "measurements": [[matrix, ...], ...]}``.
Table CSV: k rows of n probabilities, no header.

Reports are written with sorted keys and fixed indentation so that equal
inputs give byte-identical output. Scalars in a report payload are rounded
to 12 significant digits; matrices in frame/witness files keep the shortest
round-trip representation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .operators import NotHermitianError, as_hermitian
from .tomography import MeasurementFrame, validate_table


class SchemaError(ValueError):
    """Input file does not match the expected schema."""


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "residual": _sig12(self.residual)}


@dataclass
class RepresentationReport:
    command: str
    verdict: str
    checks: list[Check] = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    seed: int = 0
    params: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, residual: float) -> Check:
        c = Check(name, bool(passed), float(residual))
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
            "payload": to_jsonable(self.payload),
            "seed": int(self.seed),
            "params": to_jsonable(self.params),
            "provenance": {"artifact": "ncrl", "version": __version__},
        }


def _sig12(x):
    x = float(x)
    if not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.12g}")


def to_jsonable(obj):
    """Convert payload values: arrays of complex become matrix JSON, floats get 12 digits."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
            return matrix_to_json(obj, digits=12)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig12(obj)
    if isinstance(obj, complex):
        return [_sig12(obj.real), _sig12(obj.imag)]
    return obj


def serialize_report(report: RepresentationReport) -> bytes:
    return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()


# --- matrices and frames ----------------------------------------------------


def matrix_to_json(A, digits: int | None = None) -> dict:
    A = np.asarray(A, dtype=complex)
    rnd = (lambda x: float(f"{x:.{digits}g}")) if digits else float
    return {
        "dim": int(A.shape[0]),
        "entries": [[rnd(z.real), rnd(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise SchemaError(f"{where}: expected an object with 'dim' and 'entries'")
    n = obj["dim"]
    entries = obj["entries"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"{where}.dim: expected a positive integer, got {n!r}")
    if not isinstance(entries, list) or len(entries) != n * n:
        raise SchemaError(f"{where}.entries: expected {n * n} entries")
    vals = []
    for i, e in enumerate(entries):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, (int, float)) for x in e)):
            raise SchemaError(f"{where}.entries[{i}]: expected [re, im]")
        vals.append(complex(e[0], e[1]))
    return np.array(vals, dtype=complex).reshape(n, n)


def frame_to_json(frame: MeasurementFrame) -> dict:
    return {
        "n": frame.n,
        "k": frame.k,
        "measurements": [[matrix_to_json(P) for P in m] for m in frame.measurements],
    }


def frame_from_json(obj) -> MeasurementFrame:
    if not isinstance(obj, dict) or not {"n", "k", "measurements"} <= obj.keys():
        raise SchemaError("frame: expected keys 'n', 'k', 'measurements'")
    n, k, ms = obj["n"], obj["k"], obj["measurements"]
    if not isinstance(ms, list) or len(ms) != k:
        raise SchemaError(f"frame.measurements: expected {k} measurements")
    parsed = []
    for i, m in enumerate(ms):
        if not isinstance(m, list) or len(m) != n:
            raise SchemaError(f"frame.measurements[{i}]: expected {n} projections")
        row = []
        for j, P in enumerate(m):
            where = f"frame.measurements[{i}][{j}]"
            M = matrix_from_json(P, where)
            if M.shape != (n, n):
                raise SchemaError(f"{where}: dimension {M.shape[0]} != n = {n}")
            try:
                row.append(as_hermitian(M))
            except NotHermitianError as e:
                raise SchemaError(f"{where}: {e}") from None
        parsed.append(tuple(row))
    try:
        return MeasurementFrame(tuple(parsed))
    except ValueError as e:
        raise SchemaError(f"frame: {e}") from None


def dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def load_frame(path) -> MeasurementFrame:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    return frame_from_json(obj)


def save_frame(frame: MeasurementFrame, path) -> None:
    Path(path).write_bytes(dump_json(frame_to_json(frame)))


def table_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(table, dtype=float):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def table_from_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise SchemaError(f"table line {lineno}: non-numeric entry in {row!r}") from None
    if not rows:
        raise SchemaError("table: no rows")
    if len({len(r) for r in rows}) != 1:
        raise SchemaError("table: rows have different lengths")
    try:
        return validate_table(np.array(rows))
    except ValueError as e:
        raise SchemaError(f"table {e}") from None


def load_table(path) -> np.ndarray:
    return table_from_csv(Path(path).read_text())
