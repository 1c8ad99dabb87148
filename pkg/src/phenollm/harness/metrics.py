"""Per-cell accuracy, answer rates and rubric rates over run records."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from ..interpret import Decision
from .records import RunRecord


class EmptyRecords(ValueError):
    pass


class MetricsInconsistency(AssertionError):
    pass


@dataclass(frozen=True)
class CellMetrics:
    strategy: str
    format: str
    model: str
    n: int
    tp: int
    tn: int
    fp: int
    fn: int
    yes: int
    no: int
    unparseable: int
    errors: int
    positives: int
    negatives: int
    graded: int
    q1: int
    q2: int
    q3: int
    q4: int

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.strategy, self.format, self.model)

    @property
    def accuracy(self) -> float:
        # unparseable replies stay in the denominator and count as wrong
        return (self.tp + self.tn) / self.n

    @property
    def yes_rate(self) -> float:
        return self.yes / self.n

    @property
    def no_rate(self) -> float:
        return self.no / self.n

    @property
    def unparseable_rate(self) -> float:
        return self.unparseable / self.n

    @property
    def tpr(self) -> float | None:
        return self.tp / self.positives if self.positives else None

    @property
    def tnr(self) -> float | None:
        return self.tn / self.negatives if self.negatives else None

    def rubric_rates(self) -> tuple[float, float, float, float] | None:
        if not self.graded:
            return None
        return tuple(q / self.graded for q in (self.q1, self.q2, self.q3, self.q4))

    def row(self) -> dict:
        d = asdict(self)
        d.update(accuracy=self.accuracy, yes_rate=self.yes_rate, no_rate=self.no_rate,
                 unparseable_rate=self.unparseable_rate, tpr=self.tpr, tnr=self.tnr)
        rates = self.rubric_rates() or (None,) * 4
        d.update({f"q{i}_rate": r for i, r in enumerate(rates, start=1)})
        return d


@dataclass(frozen=True)
class MetricsTable:
    cells: tuple[CellMetrics, ...]

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def get(self, strategy: str, fmt: str, model: str) -> CellMetrics:
        for c in self.cells:
            if c.key == (strategy, fmt, model):
                return c
        raise KeyError((strategy, fmt, model))


def percent(x: float | None) -> str:
    return "n/a" if x is None else f"{100 * x:.2f}%"


def _cell(key, recs: list[RunRecord]) -> CellMetrics:
    counts = dict(tp=0, tn=0, fp=0, fn=0, yes=0, no=0, unparseable=0)
    q = [0, 0, 0, 0]
    graded = errors = positives = 0
    for r in recs:
        pos = r.true_label == "Positive"
        positives += pos
        errors += r.error is not None
        d = r.outcome.decision
        if d is Decision.UNPARSEABLE:
            counts["unparseable"] += 1
        else:
            yes = d is Decision.YES
            counts["yes" if yes else "no"] += 1
            counts[("t" if yes == pos else "f") + ("p" if yes else "n")] += 1
        rubric = r.rubric()
        if rubric is not None:
            graded += 1
            for i, v in enumerate(rubric):
                q[i] += bool(v)
    return CellMetrics(*key, n=len(recs), errors=errors, positives=positives,
                       negatives=len(recs) - positives, graded=graded,
                       q1=q[0], q2=q[1], q3=q[2], q4=q[3], **counts)


def self_check(cell: CellMetrics) -> None:
    """Internal consistency; on a class-balanced cell accuracy must equal (TPR + TNR) / 2."""
    if cell.yes + cell.no + cell.unparseable != cell.n:
        raise MetricsInconsistency(f"{cell.key}: answer counts do not sum to n")
    if cell.tp + cell.tn + cell.fp + cell.fn != cell.yes + cell.no:
        raise MetricsInconsistency(f"{cell.key}: confusion counts do not match parsed answers")
    if cell.positives == cell.negatives and cell.positives:
        balanced = (cell.tpr + cell.tnr) / 2
        if abs(balanced - cell.accuracy) > 1e-12:
            raise MetricsInconsistency(
                f"{cell.key}: accuracy {cell.accuracy} != (TPR+TNR)/2 = {balanced}")


def compute_metrics(records: Sequence[RunRecord]) -> MetricsTable:
    """Group by (strategy, format, model) in order of first appearance."""
    if not records:
        raise EmptyRecords("no run records")
    groups: dict[tuple[str, str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.strategy, r.format, r.model), []).append(r)
    cells = tuple(_cell(k, v) for k, v in groups.items())
    for c in cells:
        self_check(c)
    return MetricsTable(cells)
