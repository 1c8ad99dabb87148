"""Render feature windows as CSV, Markdown, Tabular or LaTeX tables and read them back.

The renderings follow the table excerpts used in the prompts:

* CSV keeps a trailing ``.0`` on integral floats and leaves missing cells empty.
* Markdown is pipe separated with a trailing pipe, prints integral values
  without a decimal point and writes missing cells as ``nan``.
* Tabular is single-space separated and silently skips missing cells, which
  makes it impossible to parse back once anything is missing.
* LaTeX is a booktabs ``tabular`` with ``NaN`` for missing cells and at least
  three decimals on fractional values (``0.850``).
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import math

import numpy as np

from .schema import DATE_COLUMN, PAPER_SCHEMA, FeatureSchema, FeatureWindow


class DataFormat(str, enum.Enum):
    CSV = "csv"
    TABULAR = "tabular"
    MARKDOWN = "markdown"
    LATEX = "latex"


class TableParseError(ValueError):
    pass


class AmbiguousTabular(TableParseError):
    pass


class MalformedRow(TableParseError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


def _shortest(v: float) -> str:
    return repr(float(v))


def _integral(v: float) -> bool:
    return float(v).is_integer() and abs(v) < 1e16


def format_value(v: float, fmt: DataFormat) -> str:
    """Render one cell; returns ``""`` for a missing Tabular cell (caller drops it)."""
    missing = math.isnan(v)
    if fmt is DataFormat.CSV or fmt is DataFormat.TABULAR:
        return "" if missing else _shortest(v)
    if fmt is DataFormat.MARKDOWN:
        if missing:
            return "nan"
        return str(int(v)) if _integral(v) else _shortest(v)
    if fmt is DataFormat.LATEX:
        if missing:
            return "NaN"
        if _integral(v):
            return _shortest(v)
        fixed = f"{v:.3f}"
        return fixed if float(fixed) == v else _shortest(v)
    raise ValueError(fmt)


def serialize_table(window: FeatureWindow, fmt: DataFormat | str) -> str:
    fmt = DataFormat(fmt)
    header = [DATE_COLUMN, *window.schema.labels]
    rows = [
        [d.isoformat(), *(format_value(v, fmt) for v in row)]
        for d, row in zip(window.dates, window.values)
    ]
    if fmt is DataFormat.CSV:
        lines = [",".join(header)] + [",".join(r) for r in rows]
    elif fmt is DataFormat.MARKDOWN:
        lines = ["|".join(header) + "|"] + ["|".join(r) + "|" for r in rows]
    elif fmt is DataFormat.TABULAR:
        lines = [" ".join(header)] + [" ".join(c for c in r if c) for r in rows]
    else:
        lines = [
            "\\begin{tabular}{l" + "r" * len(window.schema) + "}",
            "\\toprule",
            " & ".join(header) + " \\\\",
            "\\midrule",
            *(" & ".join(r) + " \\\\" for r in rows),
            "\\bottomrule",
            "\\end{tabular}",
        ]
    return "\n".join(lines)


def _cell(text: str, line: int) -> float:
    text = text.strip()
    if text in ("", "nan", "NaN"):
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(line, f"not a number: {text!r}") from None


def _split(fmt: DataFormat, lines: list[tuple[int, str]]):
    """Yield ``(line_no, fields)`` for the header then every data row."""
    if fmt is DataFormat.CSV:
        for no, line in lines:
            yield no, next(csv.reader([line]))
    elif fmt is DataFormat.MARKDOWN:
        for no, line in lines:
            fields = line.split("|")
            if fields and fields[0] == "":
                fields = fields[1:]
            if fields and fields[-1] == "":
                fields = fields[:-1]
            yield no, fields
    elif fmt is DataFormat.TABULAR:
        for no, line in lines:
            yield no, line.split()
    else:
        body = [(no, l) for no, l in lines if not l.startswith("\\")]
        for no, line in body:
            if not line.endswith("\\\\"):
                raise MalformedRow(no, "LaTeX row must end with \\\\")
            yield no, [f.strip() for f in line[:-2].split("&")]


def parse_table(
    text: str, fmt: DataFormat | str, schema: FeatureSchema = PAPER_SCHEMA
) -> FeatureWindow:
    """Inverse of :func:`serialize_table`."""
    fmt = DataFormat(fmt)
    lines = [(i, l.strip()) for i, l in enumerate(text.splitlines(), start=1) if l.strip()]
    if fmt is DataFormat.LATEX:
        if not lines or not lines[0][1].startswith("\\begin{tabular}"):
            raise MalformedRow(lines[0][0] if lines else 1, "expected \\begin{tabular}")
    rows = iter(_split(fmt, lines))
    try:
        no, header = next(rows)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    expected = [DATE_COLUMN, *schema.labels]
    if [h.strip() for h in header] != expected:
        raise MalformedRow(no, "header does not match the schema")

    width = len(expected)
    dates: list[dt.date] = []
    values: list[list[float]] = []
    for no, fields in rows:
        if fmt is DataFormat.TABULAR and len(fields) < width:
            raise AmbiguousTabular(
                f"line {no}: {width - len(fields)} missing value(s) cannot be placed in columns"
            )
        if len(fields) != width:
            raise MalformedRow(no, f"expected {width} fields, found {len(fields)}")
        try:
            day = dt.date.fromisoformat(fields[0].strip())
        except ValueError:
            raise MalformedRow(no, f"bad date {fields[0]!r}") from None
        if dates and day - dates[-1] != dt.timedelta(days=1):
            raise MalformedRow(no, "dates are not consecutive")
        dates.append(day)
        values.append([_cell(f, no) for f in fields[1:]])
    arr = np.array(values, dtype=float).reshape(len(values), len(schema))
    return FeatureWindow(tuple(dates), arr, schema)


def detect_format(text: str) -> DataFormat:
    first = text.lstrip().split("\n", 1)[0]
    if first.startswith("\\begin{tabular}"):
        return DataFormat.LATEX
    if "|" in first:
        return DataFormat.MARKDOWN
    if "," in first:
        return DataFormat.CSV
    return DataFormat.TABULAR
