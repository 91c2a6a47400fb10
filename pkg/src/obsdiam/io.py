"""File formats: point CSV, Burmeister .cxt, CSV contexts, profile CSV, report JSON."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .core import DimensionReport, ObsDiamProfile
from .fca import DEFAULT_CONCEPT_CAP, FormalContext
from .metric import MetricKind, PointCloud


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def _decode(data: bytes) -> str:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise ParseError("input is not valid UTF-8", line) from None
    if text.startswith("\ufeff"):
        text = text[1:]
    return text


def _float_cell(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def _csv_rows(text: str):
    try:
        reader = csv.reader(io.StringIO(text, newline=""))
        return [(reader.line_num, row) for row in reader]
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from None


def parse_point_csv(data: bytes) -> PointCloud:
    """One point per comma-separated row; a non-numeric first row is a header."""
    rows = [(ln, row) for ln, row in _csv_rows(_decode(data)) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError("no data rows", 1)
    first_ln, first = rows[0]
    if any(_float_cell(c.strip()) is None for c in first):
        rows = rows[1:]
        if not rows:
            raise ParseError("header but no data rows", first_ln)
    width = len(rows[0][1])
    points = []
    for ln, row in rows:
        if len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", ln)
        vals = []
        for col, cell in enumerate(row, start=1):
            x = _float_cell(cell.strip())
            if x is None:
                raise ParseError(f"non-numeric cell {cell!r}", ln, col)
            if not math.isfinite(x):
                raise ParseError(f"non-finite cell {cell!r}", ln, col)
            vals.append(x)
        points.append(vals)
    return PointCloud(np.array(points, dtype=float))


def parse_cxt(data: bytes) -> FormalContext:
    """Burmeister format.

    ``B``, an optional name line, a blank line, ``|G|``, ``|M|``, a blank
    line, object names, attribute names, then ``|G|`` rows over ``X`` / ``.``.
    """
    lines = _decode(data).replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    pos = 0

    def take(what: str) -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(f"unexpected end of file, expected {what}", pos + 1)
        pos += 1
        return lines[pos - 1]

    def blank():
        ln = pos + 1
        if take("blank line").strip():
            raise ParseError("expected blank line", ln)

    def count(what: str) -> int:
        ln = pos + 1
        raw = take(what).strip()
        if not (raw.isascii() and raw.isdigit()):
            raise ParseError(f"expected {what} as a non-negative integer, got {raw!r}", ln)
        return int(raw)

    if take("'B'").strip() != "B":
        raise ParseError("missing 'B' magic line", 1)
    if pos < len(lines) and lines[pos].strip():
        pos += 1  # context name
    blank()
    n_obj = count("object count")
    n_att = count("attribute count")
    blank()
    objects = [take("object name").strip() for _ in range(n_obj)]
    attributes = [take("attribute name").strip() for _ in range(n_att)]
    rows = []
    for i in range(n_obj):
        ln = pos + 1
        row = take(f"incidence row {i + 1}").strip()
        if len(row) != n_att:
            raise ParseError(f"incidence row has length {len(row)}, expected {n_att}", ln)
        bad = next((k for k, ch in enumerate(row) if ch not in "X."), None)
        if bad is not None:
            raise ParseError(f"illegal character {row[bad]!r} in incidence row", ln, bad + 1)
        rows.append([ch == "X" for ch in row])
    if pos < len(lines):
        raise ParseError("trailing content after incidence rows", pos + 1)
    try:
        return FormalContext(objects, attributes, np.array(rows, dtype=bool).reshape(n_obj, n_att))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_cxt(ctx: FormalContext, name: str = "") -> bytes:
    out = ["B", *([name] if name else []), "", str(ctx.n_objects), str(ctx.n_attributes), ""]
    out += list(ctx.objects) + list(ctx.attributes)
    out += ["".join("X" if x else "." for x in row) for row in ctx.incidence]
    return ("\n".join(out) + "\n").encode("utf-8")


_INCIDENT = {"1": True, "X": True, "x": True, "0": False, ".": False}


def parse_csv_context(data: bytes) -> FormalContext:
    """Header: corner cell then attribute names; rows: object name then 0/1/X/x/. cells."""
    rows = [(ln, row) for ln, row in _csv_rows(_decode(data)) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty context file", 1)
    header_ln, header = rows[0]
    attributes = [c.strip() for c in header[1:]]
    if not attributes:
        raise ParseError("header lists no attributes", header_ln)
    body = rows[1:]
    if not body:
        raise ParseError("context has no objects", header_ln + 1)
    objects, inc = [], []
    for ln, row in body:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", ln)
        objects.append(row[0].strip())
        line = []
        for col, cell in enumerate(row[1:], start=2):
            v = _INCIDENT.get(cell.strip())
            if v is None:
                raise ParseError(f"illegal incidence cell {cell!r}", ln, col)
            line.append(v)
        inc.append(line)
    try:
        return FormalContext(objects, attributes, np.array(inc, dtype=bool))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _num(x) -> str:
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def emit_profile_csv(p: ObsDiamProfile) -> bytes:
    """Rows ``alpha,obsdiam`` at the left end of each constant piece, then ``1,0``."""
    p = p.merged()
    lines = ["alpha,obsdiam"]
    lines += [f"{_num(a)},{_num(v)}" for a, v in zip(p.breakpoints, p.values)]
    lines.append("1,0")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_profile_csv(data: bytes) -> ObsDiamProfile:
    rows = [(ln, row) for ln, row in _csv_rows(_decode(data)) if row]
    if not rows or [c.strip() for c in rows[0][1]] != ["alpha", "obsdiam"]:
        raise ParseError("missing 'alpha,obsdiam' header", 1)
    pts = []
    for ln, row in rows[1:]:
        if len(row) != 2:
            raise ParseError("expected two cells", ln)
        a, v = _float_cell(row[0]), _float_cell(row[1])
        if a is None or v is None:
            raise ParseError("non-numeric cell", ln)
        pts.append((a, v))
    if len(pts) < 2 or pts[-1][0] != 1.0:
        raise ParseError("profile must end with an alpha = 1 row", rows[-1][0])
    try:
        return ObsDiamProfile(tuple(a for a, _ in pts), tuple(v for _, v in pts[:-1]))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


INPUT_KINDS = ("points_csv", "context_cxt", "context_csv", "builtin_scale")


@dataclass(frozen=True)
class RunConfig:
    input_kind: str
    input_path: Optional[str] = None
    input_sha256: Optional[str] = None
    metric: Optional[str] = None
    normalize: bool = True
    chavez: bool = False
    include_diagonal: bool = True
    levy: bool = False
    cap: int = DEFAULT_CONCEPT_CAP
    seed: Optional[int] = None
    scale_kind: Optional[str] = None
    scale_n: Optional[int] = None
    profile_out: Optional[str] = None
    report_out: Optional[str] = None

    def __post_init__(self):
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind {self.input_kind!r}")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.metric is not None:
            MetricKind(self.metric)

    def descriptor(self) -> dict:
        d: dict = {"kind": self.input_kind}
        if self.input_kind == "builtin_scale":
            d["scale"] = self.scale_kind
            d["n"] = self.scale_n
        else:
            d["path"] = self.input_path
            d["sha256"] = self.input_sha256
        if self.input_kind == "points_csv":
            d["metric"] = self.metric
            d["normalize"] = self.normalize
            if self.chavez:
                d["chavez_include_diagonal"] = self.include_diagonal
        else:
            d["cap"] = self.cap
        return d


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _json_number(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    x = float(x)
    if math.isinf(x):
        return "inf"
    return x


def report_dict(r: DimensionReport, provenance: RunConfig) -> dict:
    out: dict = {
        "delta": _json_number(r.delta),
        "intrinsic_dimension": _json_number(r.dimension),
    }
    if r.exact:
        dim = r.dimension
        out["exact_fraction"] = {
            "delta": str(Fraction(r.delta)),
            "intrinsic_dimension": "inf" if isinstance(dim, float) else str(dim),
        }
    if r.chavez_computed:
        out["chavez_id"] = "undefined" if r.chavez_id is None else float(r.chavez_id)
    if r.levy_defect is not None:
        out["levy_defect"] = _json_number(r.levy_defect)
    out["n_points"] = r.n_points
    out["n_features"] = r.n_features
    out["input"] = provenance.descriptor()
    out["tool_version"] = __version__
    out["seed"] = provenance.seed
    return out


def emit_report_json(r: DimensionReport, provenance: RunConfig) -> bytes:
    return (json.dumps(report_dict(r, provenance), indent=2) + "\n").encode("utf-8")


def emit_study_csv(rows) -> bytes:
    lines = ["n,delta,sqrt_n_delta,intrinsic_dimension"]
    for r in rows:
        dim = "inf" if math.isinf(r.dimension) else _num(r.dimension)
        lines.append(f"{r.n},{_num(r.delta)},{_num(r.sqrt_n_delta)},{dim}")
    return ("\n".join(lines) + "\n").encode("ascii")
