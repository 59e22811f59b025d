"""Flat per-run records and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional

from ..errors import ParseError

TIMING_FIELDS = ("wall_time",)


@dataclass
class ExperimentRecord:
    algo: str
    dataset: str
    n: int
    k: int
    delta: float
    eps: float
    const: Optional[float]
    c_ball: float
    c_iter: Optional[float]
    c_sample: float
    search_mode: str
    seed: int
    repeat: int
    budget: Optional[int]
    size_param: Optional[int]
    strong_raw: int
    strong_distinct: int
    weak_raw: int
    weak_distinct: int
    strong_pct: float
    true_cost: Optional[float]
    est_cost: Optional[float]
    found_rad: Optional[float]
    baseline_cost: Optional[float]
    weak_baseline_cost: Optional[float]
    approx_factor: Optional[float]
    status: str
    aborted: bool
    wall_time: float

    def __post_init__(self):
        # NaN never round-trips as an equal value, so it is stored as missing
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and math.isnan(v):
                setattr(self, f.name, None)
        # status often carries an exception message; keep it to one printable line
        self.status = " ".join("".join(ch if ch.isprintable() else " " for ch in self.status).split())

    @property
    def ok(self) -> bool:
        return self.true_cost is not None and not self.status.startswith("error")

    def to_row(self) -> dict:
        return {k: _fmt(v) for k, v in asdict(self).items()}

    @classmethod
    def from_row(cls, row: dict) -> "ExperimentRecord":
        missing = [f.name for f in fields(cls) if f.name not in row]
        if missing:
            raise ParseError(f"record is missing columns {missing}")
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            try:
                kw[f.name] = _parse(raw, f.type)
            except ValueError:
                raise ParseError(f"bad value {raw!r} in column {f.name}") from None
        return cls(**kw)


RECORD_FIELDS = tuple(f.name for f in fields(ExperimentRecord))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(raw: str, typ: str):
    optional = typ.startswith("Optional[")
    base = typ[9:-1] if optional else typ
    if raw == "":
        if optional:
            return None
        if base == "str":
            return ""
        raise ValueError("empty")
    if base == "int":
        return int(raw)
    if base == "float":
        return float(raw)
    if base == "bool":
        if raw not in ("true", "false"):
            raise ValueError(raw)
        return raw == "true"
    return raw


def records_to_csv(records: Iterable[ExperimentRecord], *, timing: bool = True) -> str:
    cols = [c for c in RECORD_FIELDS if timing or c not in TIMING_FIELDS]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in records:
        w.writerow(r.to_row())
    return buf.getvalue()


def write_records(path, records: Iterable[ExperimentRecord]) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records(path) -> list[ExperimentRecord]:
    text = Path(path).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError("empty records file", line=1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append(ExperimentRecord.from_row(row))
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return out
