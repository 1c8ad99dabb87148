"""Loading labeled windows from daily-feature CSV files, labeling and sampling."""
from __future__ import annotations

import csv
import datetime as dt
import enum
import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .schema import DATE_COLUMN, DEFAULT_WINDOW_LENGTH, PAPER_SCHEMA, FeatureSchema, FeatureWindow

logger = logging.getLogger(__name__)

SUBJECT_COLUMN = "pid"
YEAR_COLUMN = "study_year"
PHQ4_COLUMN = "phq4_total"
ANXIETY_COLUMN = "phq4_anxiety"


class DatasetError(Exception):
    pass


class MissingColumn(DatasetError):
    def __init__(self, name: str):
        super().__init__(f"missing column {name!r}")
        self.name = name


class MalformedDate(DatasetError):
    def __init__(self, row: int, value: str):
        super().__init__(f"row {row}: cannot parse date {value!r}")
        self.row = row
        self.value = value


class EmptyDataset(DatasetError):
    pass


class OutOfRange(DatasetError):
    pass


class InsufficientClass(DatasetError):
    def __init__(self, year: int, label: "Label", available: int, needed: int):
        super().__init__(
            f"year {year}: need {needed} {label.value} samples, only {available} available"
        )
        self.year = year
        self.label = label
        self.available = available
        self.needed = needed


class Label(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    BORDERLINE = "Borderline"


class Target(str, enum.Enum):
    DEPRESSION = "depression"
    ANXIETY = "anxiety"


@dataclass(frozen=True)
class Thresholds:
    """Label cutoffs.

    A score is Negative when ``score <= negative_max``, Positive when
    ``score >= positive_min`` and Borderline in between. The depression
    defaults select PHQ-4 totals below 1 or above 5; the anxiety defaults use
    the usual PHQ-4 anxiety subscale screen (0 negative, 3+ positive).
    """

    negative_max: int
    positive_min: int

    def label(self, score: int) -> Label:
        if score <= self.negative_max:
            return Label.NEGATIVE
        if score >= self.positive_min:
            return Label.POSITIVE
        return Label.BORDERLINE


DEPRESSION_THRESHOLDS = Thresholds(negative_max=0, positive_min=6)
ANXIETY_THRESHOLDS = Thresholds(negative_max=0, positive_min=3)


def label_sample(
    phq4_total: int,
    anxiety_sub: int,
    depression: Thresholds = DEPRESSION_THRESHOLDS,
    anxiety: Thresholds = ANXIETY_THRESHOLDS,
) -> tuple[Label, Label]:
    """Return ``(depression_label, anxiety_label)`` for a PHQ-4 assessment."""
    if not 0 <= phq4_total <= 12:
        raise OutOfRange(f"PHQ-4 total {phq4_total} outside 0..12")
    if not 0 <= anxiety_sub <= 6:
        raise OutOfRange(f"anxiety sub-score {anxiety_sub} outside 0..6")
    if anxiety_sub > phq4_total:
        raise OutOfRange(f"anxiety sub-score {anxiety_sub} exceeds total {phq4_total}")
    return depression.label(phq4_total), anxiety.label(anxiety_sub)


@dataclass(frozen=True)
class LabeledSample:
    window: FeatureWindow
    phq4_total: int
    anxiety_sub: int
    subject_id: str
    study_year: int
    depression_label: Label = field(default=None)
    anxiety_label: Label = field(default=None)

    def __post_init__(self):
        dep, anx = label_sample(self.phq4_total, self.anxiety_sub)
        if self.depression_label is None:
            object.__setattr__(self, "depression_label", dep)
        if self.anxiety_label is None:
            object.__setattr__(self, "anxiety_label", anx)

    @property
    def end_date(self) -> dt.date:
        return self.window.end_date

    @property
    def key(self) -> tuple[str, dt.date]:
        return (self.subject_id, self.end_date)

    @property
    def sample_id(self) -> str:
        return f"{self.subject_id}@{self.end_date.isoformat()}"

    def label_for(self, target: Target | str = Target.DEPRESSION) -> Label:
        if Target(target) is Target.ANXIETY:
            return self.anxiety_label
        return self.depression_label


@dataclass(frozen=True)
class DatasetSplit:
    test: list[LabeledSample]
    train: list[LabeledSample]


class SampleList(list):
    """List of samples that also remembers how many windows were dropped."""

    dropped: int = 0


def _parse_date(value: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(value.strip())
    except ValueError:
        raise MalformedDate(row, value) from None


def _parse_float(value: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        return math.nan
    return x if math.isfinite(x) else math.nan


def _csv_files(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.suffix == ".csv")
    return [path]


def load_dataset(
    path: str | Path,
    schema: FeatureSchema = PAPER_SCHEMA,
    *,
    window_length: int = DEFAULT_WINDOW_LENGTH,
) -> SampleList:
    """Build one labeled window per assessment row.

    Rows with a non-empty ``phq4_total`` are assessment days. Each one yields
    the ``window_length`` days ending on that date, provided a row exists for
    every day; otherwise the window is dropped and counted in ``.dropped``.
    Unparseable numeric cells become missing values.
    """
    days: dict[str, dict[dt.date, np.ndarray]] = defaultdict(dict)
    assessments: list[tuple[str, dt.date, int, int, int]] = []
    n_rows = 0
    for file in _csv_files(Path(path)):
        with open(file, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for name in [DATE_COLUMN, *schema.raw_names, PHQ4_COLUMN, ANXIETY_COLUMN]:
                if name not in header:
                    raise MissingColumn(name)
            for lineno, row in enumerate(reader, start=2):
                n_rows += 1
                day = _parse_date(row[DATE_COLUMN], lineno)
                pid = row.get(SUBJECT_COLUMN) or "0"
                if day in days[pid]:
                    raise DatasetError(f"{file}:{lineno}: duplicate row for {pid} on {day}")
                days[pid][day] = np.array([_parse_float(row[c]) for c in schema.raw_names])
                phq = (row.get(PHQ4_COLUMN) or "").strip()
                if phq:
                    year_cell = (row.get(YEAR_COLUMN) or "").strip()
                    year = int(year_cell) if year_cell else day.year
                    anx = int(float(row[ANXIETY_COLUMN]))
                    assessments.append((pid, day, int(float(phq)), anx, year))
    if n_rows == 0:
        raise EmptyDataset(f"no data rows in {path}")

    samples = SampleList()
    for pid, end, phq, anx, year in assessments:
        dates = [end - dt.timedelta(days=window_length - 1 - i) for i in range(window_length)]
        rows = days[pid]
        if not all(d in rows for d in dates):
            samples.dropped += 1
            continue
        values = np.array([rows[d] for d in dates]).reshape(window_length, len(schema))
        window = FeatureWindow(tuple(dates), values, schema)
        samples.append(LabeledSample(window, phq, anx, pid, year))
    if samples.dropped:
        logger.info("dropped %d windows with fewer than %d days", samples.dropped, window_length)
    return samples


def balanced_sample(
    pool: Sequence[LabeledSample],
    per_year: int,
    seed: int,
    target: Target | str = Target.DEPRESSION,
) -> DatasetSplit:
    """Draw a class-balanced test set per study year; the rest becomes train.

    Borderline samples are excluded from both sides. The draw depends only on
    ``seed`` and the pool contents, not on the pool's order.
    """
    if per_year < 0 or per_year % 2:
        raise ValueError(f"per_year must be a non-negative even number, got {per_year}")
    target = Target(target)
    eligible = sorted(
        (s for s in pool if s.label_for(target) is not Label.BORDERLINE), key=lambda s: s.key
    )
    rng = random.Random(seed)
    by_year: dict[int, dict[Label, list[LabeledSample]]] = defaultdict(lambda: defaultdict(list))
    for s in eligible:
        by_year[s.study_year][s.label_for(target)].append(s)

    half = per_year // 2
    test: list[LabeledSample] = []
    for year in sorted(by_year):
        for label in (Label.POSITIVE, Label.NEGATIVE):
            group = by_year[year][label]
            if len(group) < half:
                raise InsufficientClass(year, label, len(group), half)
            test.extend(rng.sample(group, half))
    taken = {s.key for s in test}
    train = [s for s in eligible if s.key not in taken]
    return DatasetSplit(test=test, train=train)


def average_features(window: FeatureWindow) -> np.ndarray:
    """Per-column mean over present values; all-missing columns stay NaN."""
    out = np.full(len(window.schema), np.nan)
    for j in range(len(window.schema)):
        col = window.values[:, j]
        col = col[~np.isnan(col)]
        if col.size:
            # fsum is exactly rounded, so row order cannot change the result
            out[j] = math.fsum(col) / col.size
    return out


def select_samples(samples: Iterable[LabeledSample], label: Label, target=Target.DEPRESSION):
    return [s for s in samples if s.label_for(target) is label]
