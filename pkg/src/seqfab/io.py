"""File formats: matrix JSON, run manifests and the fidelity table CSV.

A matrix file is a JSON object ``{"dims": [rows, cols], "re": [...], "im": [...]}``
with row-major real and imaginary parts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__


def matrix_to_dict(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("only 2-d matrices can be serialized")
    flat = m.ravel()
    return {"dims": list(m.shape), "re": flat.real.tolist(), "im": flat.imag.tolist()}


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        rows, cols = (int(x) for x in d["dims"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", [0.0] * len(d["re"])), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ValueError(f"matrix entries do not match dims {[rows, cols]}")
    return (re + 1j * im).reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_dict(json.load(fh))


def save_matrix(path, m) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_dict(m), fh)
        fh.write("\n")


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


@dataclass
class RunManifest:
    command: str
    config: dict
    gate: dict
    results: dict
    tool_version: str = __version__
    timestamp: str = field(default_factory=utc_now)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(**{f.name: data[f.name] for f in fields(cls)})

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


TABLE_HEADER = ("gate", "ancilla_dim", "rounds", "fidelity", "gap", "sweeps", "wall_time_ms", "status")


@dataclass
class TableRow:
    gate: str
    ancilla_dim: int
    rounds: int
    fidelity: float
    gap: float
    sweeps: int
    wall_time_ms: float
    status: str

    _types = {"ancilla_dim": int, "rounds": int, "sweeps": int, "fidelity": float, "gap": float, "wall_time_ms": float}

    @classmethod
    def from_record(cls, rec: dict) -> "TableRow":
        return cls(**{k: cls._types.get(k, str)(rec[k]) for k in TABLE_HEADER})


def write_table_csv(path, rows: list[TableRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TABLE_HEADER)
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(r).items()})


def read_table_csv(path) -> list[TableRow]:
    with open(path, newline="") as fh:
        return [TableRow.from_record(rec) for rec in csv.DictReader(fh)]


def write_table_json(path, rows: list[TableRow]) -> None:
    Path(path).write_text(json.dumps([asdict(r) for r in rows], indent=2) + "\n")


def read_table_json(path) -> list[TableRow]:
    return [TableRow.from_record(rec) for rec in json.loads(Path(path).read_text())]
