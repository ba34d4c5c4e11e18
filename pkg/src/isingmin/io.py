"""Text instance format, CSV exports, and report JSON.

Instance format (``.ising``)::

    ising 1 <num_spins> <num_edges>
    h <i> <value>                 one line per nonzero field
    e <k> <i_1> ... <i_k> <value> one line per edge
    c <i> <+1|-1>                 clamped spins
    offset <value>

Blank lines and lines starting with ``#`` are ignored.  Energy convention:
``offset - sum J prod S - sum h S``.  Values that are integers print without
a decimal point; everything else uses the shortest repr that round-trips.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .model import SpinSystem
from .report import SolveReport

FORMAT_VERSION = 1

SAMPLE_FIELDS = ("start_index", "seed", "energy", "passes", "wall_ms")
DISTRIBUTION_FIELDS = ("product", "count", "probability", "is_correct")
TIMING_FIELDS = ("num_spins", "round", "passes", "mean_pass_seconds")

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "SolveReport",
    "type": "object",
    "required": ["solver", "best_energy", "best_config", "proven_optimal", "wall_time",
                 "nodes_explored", "bound_prunes", "dominance_prunes", "passes", "moves"],
    "properties": {
        "solver": {"type": "string"},
        "best_energy": {"type": "number"},
        "best_config": {"type": "array", "items": {"enum": [-1, 1]}},
        "proven_optimal": {"type": "boolean"},
        "wall_time": {"type": "number", "minimum": 0},
        "nodes_explored": {"type": "integer", "minimum": 0},
        "bound_prunes": {"type": "integer", "minimum": 0},
        "dominance_prunes": {"type": "integer", "minimum": 0},
        "passes": {"type": "integer", "minimum": 0},
        "moves": {"type": "integer", "minimum": 0},
        "extra": {"type": "object"},
        "run_config": {"type": "object"},
    },
    "additionalProperties": False,
}


class InstanceFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_number(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 2.0**63:
        return str(int(v))
    return repr(v)


def _num(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise InstanceFormatError(lineno, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise InstanceFormatError(lineno, f"non-finite value {tok!r}")
    return v


def _index(tok: str, n: int, lineno: int) -> int:
    try:
        i = int(tok)
    except ValueError:
        raise InstanceFormatError(lineno, f"not a spin index: {tok!r}") from None
    if not 0 <= i < n:
        raise InstanceFormatError(lineno, f"spin {i} out of range [0, {n})")
    return i


def serialize_instance(system: SpinSystem) -> str:
    out = [f"ising {FORMAT_VERSION} {system.num_spins} {system.num_edges}"]
    for i in np.flatnonzero(system.h):
        out.append(f"h {i} {format_number(system.h[i])}")
    for e in range(system.num_edges):
        members, J = system.edge(e)
        out.append(f"e {len(members)} {' '.join(map(str, members))} {format_number(J)}")
    for i, v in system.clamped.items():
        out.append(f"c {i} {'+1' if v > 0 else '-1'}")
    out.append(f"offset {format_number(system.offset)}")
    return "\n".join(out) + "\n"


def parse_instance(text: str) -> SpinSystem:
    lines = text.splitlines()
    header = None
    n = m_declared = 0
    h = None
    h_seen: set[int] = set()
    ptr, spins, J = [0], [], []
    clamped: dict[int, int] = {}
    offset = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if header is None:
            if tok[0] != "ising" or len(tok) != 4:
                raise InstanceFormatError(lineno, "expected header 'ising <version> <n> <m>'")
            try:
                version, n, m_declared = (int(t) for t in tok[1:])
            except ValueError:
                raise InstanceFormatError(lineno, "header fields must be integers") from None
            if version != FORMAT_VERSION:
                raise InstanceFormatError(lineno, f"unsupported version {version}")
            if n < 0 or m_declared < 0:
                raise InstanceFormatError(lineno, "negative count in header")
            header = tok
            h = np.zeros(n)
            continue
        kind = tok[0]
        if kind == "h":
            if len(tok) != 3:
                raise InstanceFormatError(lineno, "expected 'h <i> <value>'")
            i = _index(tok[1], n, lineno)
            if i in h_seen:
                raise InstanceFormatError(lineno, f"second field for spin {i}")
            h_seen.add(i)
            h[i] = _num(tok[2], lineno)
        elif kind == "e":
            if len(tok) < 2:
                raise InstanceFormatError(lineno, "expected 'e <k> <spins...> <value>'")
            try:
                k = int(tok[1])
            except ValueError:
                raise InstanceFormatError(lineno, f"bad arity {tok[1]!r}") from None
            if k < 2:
                raise InstanceFormatError(lineno, f"arity {k} is below 2")
            if len(tok) != k + 3:
                raise InstanceFormatError(lineno, f"arity {k} needs {k} spins and a value, "
                                                  f"got {len(tok) - 2} fields")
            members = [_index(t, n, lineno) for t in tok[2:2 + k]]
            if len(set(members)) != k:
                raise InstanceFormatError(lineno, "edge repeats a spin")
            spins.extend(members)
            ptr.append(len(spins))
            J.append(_num(tok[-1], lineno))
        elif kind == "c":
            if len(tok) != 3 or tok[2] not in ("+1", "-1", "1"):
                raise InstanceFormatError(lineno, "expected 'c <i> <+1|-1>'")
            i = _index(tok[1], n, lineno)
            if i in clamped:
                raise InstanceFormatError(lineno, f"spin {i} clamped twice")
            clamped[i] = -1 if tok[2] == "-1" else 1
        elif kind == "offset":
            if len(tok) != 2:
                raise InstanceFormatError(lineno, "expected 'offset <value>'")
            if offset is not None:
                raise InstanceFormatError(lineno, "second offset line")
            offset = _num(tok[1], lineno)
        else:
            raise InstanceFormatError(lineno, f"unknown record type {kind!r}")
    if header is None:
        raise InstanceFormatError(len(lines) + 1, "missing header")
    if len(J) != m_declared:
        raise InstanceFormatError(len(lines) + 1, f"header declares {m_declared} edges, found {len(J)}")
    return SpinSystem.from_arrays(n, h, np.array(ptr, dtype=np.int64), np.array(spins, dtype=np.int64),
                                  np.array(J, dtype=np.float64), offset=offset or 0.0,
                                  clamped=clamped)


def read_instance(path) -> SpinSystem:
    return parse_instance(Path(path).read_text())


def write_instance(system: SpinSystem, path) -> None:
    Path(path).write_text(serialize_instance(system))


# -- CSV ---------------------------------------------------------------------------


def _write_csv(path, fields, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    w.writerows(rows)
    if path is None:
        return buf.getvalue()
    Path(path).write_text(buf.getvalue())
    return None


def export_samples(samples, path=None, timing: bool = True):
    """Per-start CSV.  ``timing=False`` writes 0 for ``wall_ms`` so the file
    depends only on the run's inputs.  Returns the text when ``path`` is None."""
    rows = [(s.start_index, s.seed, format_number(s.energy), s.passes,
             f"{s.wall_ms:.3f}" if timing else "0") for s in samples]
    return _write_csv(path, SAMPLE_FIELDS, rows)


def read_samples(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{"start_index": int(r["start_index"]), "seed": int(r["seed"]),
                 "energy": float(r["energy"]), "passes": int(r["passes"]),
                 "wall_ms": float(r["wall_ms"])} for r in csv.DictReader(fh)]


def export_distribution(result, path=None):
    """``product,count,probability,is_correct`` rows of a factoring result."""
    rows = [(p, c, repr(q), int(ok)) for p, c, q, ok in result.distribution_rows()]
    return _write_csv(path, DISTRIBUTION_FIELDS, rows)


def read_distribution(path) -> dict[int, int]:
    with open(path, newline="") as fh:
        return {int(r["product"]): int(r["count"]) for r in csv.DictReader(fh)}


def export_timings(rows, path=None):
    return _write_csv(path, TIMING_FIELDS,
                      [(r.num_spins, r.round, r.passes, repr(r.mean_pass_seconds)) for r in rows])


# -- JSON --------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def report_document(report: SolveReport, run_config: dict | None = None) -> dict:
    doc = report.to_dict()
    extra = {k: v for k, v in doc.get("extra", {}).items() if k != "trace"}
    if extra:
        doc["extra"] = extra
    else:
        doc.pop("extra", None)
    if run_config is not None:
        doc["run_config"] = run_config
    return _jsonable(doc)


def export_report(report: SolveReport, path=None, run_config: dict | None = None):
    text = json.dumps(report_document(report, run_config), indent=2, sort_keys=True) + "\n"
    if path is None:
        return text
    Path(path).write_text(text)
    return None
