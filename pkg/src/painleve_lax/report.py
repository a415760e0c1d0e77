"""Structured check reports with a versioned schema.

A report is a command echo plus an ordered list of records.  Symbolic
records carry an exact boolean (``exact_zero``) and never a float residual.
``timing`` is the only field that may differ between identical runs.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional

SCHEMA = "fgpair-report/1"
PASS, FAIL, ERROR = "PASS", "FAIL", "ERROR"


@dataclass
class Record:
    name: str
    kind: str  # symbolic | numeric
    status: str
    residual: Optional[float] = None
    exact_zero: Optional[bool] = None
    source: str = ""
    timing: float = 0.0
    notes: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("symbolic", "numeric"):
            raise ValueError(f"unknown record kind {self.kind!r}")
        if self.status not in (PASS, FAIL, ERROR):
            raise ValueError(f"unknown status {self.status!r}")
        if self.kind == "symbolic" and self.residual is not None:
            raise ValueError("symbolic records report exact_zero, not a float residual")

    @property
    def ok(self) -> bool:
        return self.status == PASS


def symbolic(name: str, ok: bool, source: str = "", notes=(), data=None, timing=0.0) -> Record:
    return Record(name, "symbolic", PASS if ok else FAIL, None, bool(ok), source, timing, list(notes),
                  dict(data or {}))


def numeric(name: str, residual: float, tol: float, source: str = "", notes=(), data=None,
            timing=0.0, larger_is_pass: bool = False) -> Record:
    ok = residual >= tol if larger_is_pass else residual <= tol
    d = {"tolerance": tol}
    d.update(data or {})
    return Record(name, "numeric", PASS if ok else FAIL, float(residual), None, source, timing,
                  list(notes), d)


def error(name: str, kind: str, exc: BaseException, source: str = "") -> Record:
    return Record(name, kind, ERROR, None, None if kind == "numeric" else False, source, 0.0,
                  [f"{type(exc).__name__}: {exc}"], {})


@contextmanager
def timed() -> Iterator[List[float]]:
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0


@dataclass
class Report:
    command: Dict[str, Any]
    records: List[Record] = field(default_factory=list)
    schema: str = SCHEMA

    def add(self, rec: Record) -> Record:
        self.records.append(rec)
        return rec

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def summary(self) -> Dict[str, int]:
        out = {PASS: 0, FAIL: 0, ERROR: 0}
        for r in self.records:
            out[r.status] += 1
        return out

    def to_dict(self, with_timing: bool = True) -> Dict[str, Any]:
        recs = []
        for r in self.records:
            d = asdict(r)
            if not with_timing:
                d.pop("timing")
            recs.append(d)
        return {"schema": self.schema, "command": self.command, "records": recs,
                "summary": self.summary()}

    def to_json(self, with_timing: bool = True) -> str:
        return json.dumps(self.to_dict(with_timing), indent=2, sort_keys=False, default=_jsonable)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        recs = [Record(**{k: v for k, v in r.items()}) for r in d["records"]]
        return cls(d["command"], recs, d["schema"])

    def to_text(self) -> str:
        lines = [f"schema: {self.schema}",
                 "command: " + " ".join(f"{k}={v}" for k, v in self.command.items())]
        for r in self.records:
            if r.kind == "symbolic":
                res = f"exact_zero={str(r.exact_zero).lower()}"
            else:
                res = "residual=" + (f"{r.residual:.3e}" if r.residual is not None else "n/a")
                if "tolerance" in r.data:
                    res += f" tol={r.data['tolerance']:.1e}"
            lines.append(f"[{r.status}] {r.name} ({r.kind}) {res} time={r.timing:.2f}s")
            if r.source:
                lines.append(f"    source: {r.source}")
            for n in r.notes:
                lines.append(f"    note: {n}")
        s = self.summary()
        lines.append(f"summary: {s[PASS]} passed, {s[FAIL]} failed, {s[ERROR]} errors")
        return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    try:
        import numpy as np

        if isinstance(x, np.ndarray):
            return _jsonable(x.tolist()) if x.dtype != complex else [[_jsonable(complex(v)) for v in row]
                                                                       for row in np.atleast_2d(x)]
        if isinstance(x, np.generic):
            return _jsonable(x.item())
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"cannot serialize {type(x).__name__}")
