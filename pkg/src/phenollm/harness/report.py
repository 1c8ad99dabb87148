"""CSV, SVG bar charts and a text summary for a metrics table.

The SVG is written by hand with fixed number formatting, so identical metrics
always give identical bytes.
"""
from __future__ import annotations

import csv
import io
from html import escape
from pathlib import Path
from typing import Sequence

from .metrics import CellMetrics, MetricsTable, percent


class IoFailure(OSError):
    pass


PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1")
CSV_FIELDS = (
    "strategy", "format", "model", "n", "accuracy", "yes_rate", "no_rate", "unparseable_rate",
    "tp", "tn", "fp", "fn", "tpr", "tnr", "errors", "graded",
    "q1_rate", "q2_rate", "q3_rate", "q4_rate",
)

_W, _H, _LEFT, _TOP, _BOTTOM = 720, 360, 60, 40, 90


def _f(x: float) -> str:
    return f"{x:.2f}"


def _frame(title: str, legend: Sequence[str]) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    base = _H - _BOTTOM
    height = base - _TOP
    for tick in range(0, 101, 25):
        y = base - height * tick / 100
        out.append(f'<line x1="{_LEFT}" y1="{_f(y)}" x2="{_W - 10}" y2="{_f(y)}" stroke="#ddd"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{_f(y + 4)}" text-anchor="end">{tick}%</text>')
    for i, name in enumerate(legend):
        x = _LEFT + i * 110
        out.append(f'<rect x="{x}" y="{_H - 22}" width="10" height="10" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{x + 14}" y="{_H - 13}">{escape(name)}</text>')
    return out


def grouped_bars(title: str, groups: Sequence[str], series: Sequence[str],
                 values: Sequence[Sequence[float]]) -> str:
    """``values[g][s]`` in [0, 1]; one cluster of bars per group."""
    out = _frame(title, series)
    base = _H - _BOTTOM
    height = base - _TOP
    slot = (_W - 10 - _LEFT) / max(len(groups), 1)
    bar = slot * 0.8 / max(len(series), 1)
    for g, name in enumerate(groups):
        x0 = _LEFT + g * slot + slot * 0.1
        for s, v in enumerate(values[g]):
            h = height * max(0.0, min(1.0, v))
            out.append(f'<rect x="{_f(x0 + s * bar)}" y="{_f(base - h)}" width="{_f(bar)}" '
                       f'height="{_f(h)}" fill="{PALETTE[s % len(PALETTE)]}">'
                       f'<title>{escape(name)} {escape(series[s])}: {percent(v)}</title></rect>')
        out.append(f'<text x="{_f(x0 + slot * 0.4)}" y="{base + 14}" text-anchor="middle">'
                   f'{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def stacked_bars(title: str, groups: Sequence[str], series: Sequence[str],
                 values: Sequence[Sequence[float]]) -> str:
    """One bar per group with ``values[g]`` stacked bottom to top."""
    out = _frame(title, series)
    base = _H - _BOTTOM
    height = base - _TOP
    slot = (_W - 10 - _LEFT) / max(len(groups), 1)
    for g, name in enumerate(groups):
        x = _LEFT + g * slot + slot * 0.2
        y = float(base)
        for s, v in enumerate(values[g]):
            h = height * max(0.0, v)
            y -= h
            out.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(slot * 0.6)}" height="{_f(h)}" '
                       f'fill="{PALETTE[s % len(PALETTE)]}"/>')
        out.append(f'<text x="{_f(x + slot * 0.3)}" y="{base + 14}" text-anchor="middle">'
                   f'{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def metrics_csv(metrics: MetricsTable) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for cell in metrics:
        row = cell.row()
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in CSV_FIELDS})
    return buf.getvalue()


def _label(cell: CellMetrics) -> str:
    return f"{cell.strategy}/{cell.format}"


def accuracy_chart(metrics: MetricsTable) -> str:
    groups = list(dict.fromkeys(_label(c) for c in metrics))
    models = list(dict.fromkeys(c.model for c in metrics))
    lookup = {(_label(c), c.model): c.accuracy for c in metrics}
    values = [[lookup.get((g, m), 0.0) for m in models] for g in groups]
    return grouped_bars("Accuracy by strategy and format", groups, models, values)


def answers_chart(metrics: MetricsTable) -> str:
    groups = [f"{_label(c)}/{c.model}" for c in metrics]
    values = [[c.yes_rate, c.no_rate, c.unparseable_rate] for c in metrics]
    return stacked_bars("Share of Yes / No / unparseable answers", groups,
                        ["Yes", "No", "Unparseable"], values)


def rubric_chart(metrics: MetricsTable) -> str:
    graded = [c for c in metrics if c.graded]
    groups = [f"{_label(c)}/{c.model}" for c in graded]
    values = [list(c.rubric_rates()) for c in graded]
    return grouped_bars("Reasoning rubric (share answering yes)", groups,
                        ["Q1 numbers", "Q2 numbers correct", "Q3 trends", "Q4 trends correct"],
                        values)


def summary_text(metrics: MetricsTable) -> str:
    lines = []
    for c in metrics:
        line = (f"{c.strategy:<10} {c.format:<9} {c.model:<16} n={c.n:<4} "
                f"accuracy={percent(c.accuracy)} yes={percent(c.yes_rate)} "
                f"no={percent(c.no_rate)} unparseable={percent(c.unparseable_rate)}")
        rates = c.rubric_rates()
        if rates:
            line += " rubric=" + "/".join(percent(r) for r in rates)
        if c.errors:
            line += f" errors={c.errors}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def emit_report(metrics: MetricsTable, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    files = {
        "metrics.csv": metrics_csv(metrics),
        "accuracy.svg": accuracy_chart(metrics),
        "answers.svg": answers_chart(metrics),
        "summary.txt": summary_text(metrics),
    }
    if any(c.graded for c in metrics):
        files["rubric.svg"] = rubric_chart(metrics)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise IoFailure(f"could not write report to {out}: {exc}") from exc
    return written
