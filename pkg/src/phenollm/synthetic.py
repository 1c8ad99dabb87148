"""Synthetic GLOBEM-shaped datasets with recorded ground truth.

Each subject-year is a block of consecutive days starting on January 1 of
``start_year + year_index``. Assessments fall every 7 days once a full window
of history exists. Every daily value is

    base + drift * day + seasonality * sin(2 pi day / 7)
         + severity_weight * severity + noise * N(0, 1)

then multiplied by any anomaly hitting that day, clipped at zero and rounded
to the column's declared decimals.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import ANXIETY_COLUMN, PHQ4_COLUMN, SUBJECT_COLUMN, YEAR_COLUMN
from .schema import DATE_COLUMN, DEFAULT_WINDOW_LENGTH, PAPER_SCHEMA, FeatureSchema


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class FeatureGenerator:
    base: float
    noise: float = 0.0
    seasonality: float = 0.0
    drift: float = 0.0
    severity_weight: float = 0.0


@dataclass(frozen=True)
class Anomaly:
    """Multiply ``column`` by ``multiplier`` on day ``offset`` of each subject-year block."""

    offset: int
    column: str
    multiplier: float
    subject: str | None = None


_PAPER_GENERATORS = (
    FeatureGenerator(20000, 6000, 3000, 0, -8000),
    FeatureGenerator(700, 120, 60, 0, 200),
    FeatureGenerator(0.8, 0.2, 0.05, 0, -0.3),
    FeatureGenerator(300, 60, 20, 0, 80),
    FeatureGenerator(3, 1, 0.3, 0, 1),
    FeatureGenerator(10, 8, 2, 0, -4),
    FeatureGenerator(10, 8, 2, 0, -4),
    FeatureGenerator(25, 8, 3, 0, -8),
    FeatureGenerator(8000, 2500, 800, 0, -3000),
    FeatureGenerator(40, 6, 2, 0, 5),
    FeatureGenerator(1200, 80, 20, 0, 80),
    FeatureGenerator(40, 6, 2, 0, -5),
    FeatureGenerator(150, 40, 10, 0, -50),
    FeatureGenerator(420, 50, 15, 0, -90),
    FeatureGenerator(40, 12, 3, 0, 15),
)


def paper_generators(schema: FeatureSchema = PAPER_SCHEMA) -> tuple[FeatureGenerator, ...]:
    """Plausible default generators for the default schema columns (by table label)."""
    by_label = dict(zip(PAPER_SCHEMA.labels, _PAPER_GENERATORS))
    return tuple(by_label[label] for label in schema.labels)


# latent severity ranges; "low" maps to PHQ-4 total 0 and "high" to 7..12
SEVERITY_BANDS = {"low": (0.0, 0.025), "high": (0.55, 1.0), "mid": (0.1, 0.45)}


def separated_generators(
    shift_sigmas: float = 2.0,
    columns: tuple[str, ...] = ("time_asleep(minutes)", "step_count"),
    schema: FeatureSchema = PAPER_SCHEMA,
) -> tuple[FeatureGenerator, ...]:
    """Generators where only ``columns`` depend on severity.

    Moving from the middle of the low severity band to the middle of the high one
    shifts each named column's daily mean by ``shift_sigmas`` noise standard deviations.
    """
    gap = sum(SEVERITY_BANDS["high"]) / 2 - sum(SEVERITY_BANDS["low"]) / 2
    out = []
    for label, g in zip(schema.labels, paper_generators(schema)):
        weight = 0.0
        if label in columns:
            sign = 1.0 if g.severity_weight >= 0 else -1.0
            weight = sign * shift_sigmas * g.noise / gap
        out.append(FeatureGenerator(g.base, g.noise, g.seasonality, g.drift, weight))
    return tuple(out)


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int = 0
    subjects: int = 10
    years: int = 3
    weeks: int = 10
    start_year: int = 2018
    schema: FeatureSchema = PAPER_SCHEMA
    generators: tuple[FeatureGenerator, ...] = None
    anomalies: tuple[Anomaly, ...] = ()
    window_length: int = DEFAULT_WINDOW_LENGTH
    day_dropout: float = 0.0
    cell_missing: float = 0.0
    # shares of subjects per year given low / high latent severity; the rest is mid
    severity_mix: tuple[float, float] = (0.4, 0.4)
    severity_jitter: float = 0.01

    def __post_init__(self):
        if self.generators is None:
            object.__setattr__(self, "generators", paper_generators(self.schema))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "anomalies", tuple(self.anomalies))

    @property
    def days_per_year(self) -> int:
        return self.window_length + 7 * (self.weeks - 1)

    def validate(self) -> None:
        if self.subjects < 1 or self.years < 1 or self.weeks < 1 or self.window_length < 1:
            raise InvalidSpec("subjects, years, weeks and window_length must be positive")
        if self.days_per_year > 365:
            raise InvalidSpec(f"{self.weeks} weeks do not fit in one study year")
        if len(self.generators) != len(self.schema):
            raise InvalidSpec(
                f"{len(self.generators)} generators for {len(self.schema)} schema columns"
            )
        for g in self.generators:
            if g.noise < 0:
                raise InvalidSpec("noise scale must be non-negative")
        for rate in (self.day_dropout, self.cell_missing, *self.severity_mix):
            if not 0.0 <= rate <= 1.0:
                raise InvalidSpec(f"rate {rate} outside [0, 1]")
        if sum(self.severity_mix) > 1.0:
            raise InvalidSpec("severity_mix probabilities exceed 1")
        for a in self.anomalies:
            if not 0 <= a.offset < self.days_per_year:
                raise InvalidSpec(f"anomaly offset {a.offset} outside the year block")
            try:
                self.schema.index_of(a.column)
            except KeyError:
                raise InvalidSpec(f"anomaly column {a.column!r} not in schema") from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schema"] = self.schema.name
        return d


@dataclass
class SubjectYear:
    subject_id: str
    study_year: int
    dates: list[dt.date]
    values: np.ndarray  # already rounded, NaN = missing cell
    present: np.ndarray  # False where the whole day row was dropped
    assessments: list[dict] = field(default_factory=list)


def _phq4_from_severity(severity: float, rng: np.random.Generator) -> tuple[int, int]:
    total = int(np.clip(np.round(12 * severity), 0, 12))
    anxiety = int(np.clip(np.round(total / 2 + rng.integers(-1, 2)), max(0, total - 6), min(6, total)))
    return total, anxiety


def _severity_bands(spec: SyntheticSpec, rng: np.random.Generator) -> list[str]:
    """Band per subject for one year: fixed counts from severity_mix, shuffled."""
    n_low = round(spec.severity_mix[0] * spec.subjects)
    n_high = min(round(spec.severity_mix[1] * spec.subjects), spec.subjects - n_low)
    bands = ["low"] * n_low + ["high"] * n_high + ["mid"] * (spec.subjects - n_low - n_high)
    return [bands[i] for i in rng.permutation(spec.subjects)]


def synthesize(spec: SyntheticSpec) -> list[SubjectYear]:
    """Generate the in-memory dataset; :func:`generate_synthetic` writes it out."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n_days, n_cols = spec.days_per_year, len(spec.schema)
    day_idx = np.arange(n_days)
    decimals = [c.decimals for c in spec.schema]
    blocks = []
    for y in range(spec.years):
        start = dt.date(spec.start_year + y, 1, 1)
        dates = [start + dt.timedelta(days=int(i)) for i in day_idx]
        bands = _severity_bands(spec, rng)
        for s in range(spec.subjects):
            pid = f"S{s + 1:03d}"
            base_severity = float(rng.uniform(*SEVERITY_BANDS[bands[s]]))
            week_sev = np.clip(
                base_severity + rng.uniform(-spec.severity_jitter, spec.severity_jitter, spec.weeks),
                0.0, 1.0,
            )
            # a day takes the severity of the assessment week it precedes
            day_week = np.clip((day_idx - (spec.window_length - 1) + 6) // 7, 0, spec.weeks - 1)
            day_sev = week_sev[day_week]
            noise = rng.standard_normal((n_days, n_cols))
            values = np.empty((n_days, n_cols))
            for j, g in enumerate(spec.generators):
                values[:, j] = (
                    g.base
                    + g.drift * day_idx
                    + g.seasonality * np.sin(2 * np.pi * day_idx / 7)
                    + g.severity_weight * day_sev
                    + g.noise * noise[:, j]
                )
            for a in spec.anomalies:
                if a.subject is None or a.subject == pid:
                    values[a.offset, spec.schema.index_of(a.column)] *= a.multiplier
            values = np.clip(values, 0.0, None)
            for j, d in enumerate(decimals):
                values[:, j] = np.round(values[:, j], d)
            missing = rng.random((n_days, n_cols)) < spec.cell_missing
            values[missing] = np.nan
            present = rng.random(n_days) >= spec.day_dropout
            block = SubjectYear(pid, spec.start_year + y, dates, values, present)
            for w in range(spec.weeks):
                end = spec.window_length - 1 + 7 * w
                total, anxiety = _phq4_from_severity(float(week_sev[w]), rng)
                if not present[end]:
                    continue
                block.assessments.append({
                    "pid": pid,
                    "study_year": block.study_year,
                    "end_date": dates[end].isoformat(),
                    "severity": round(float(week_sev[w]), 6),
                    "phq4_total": total,
                    "phq4_anxiety": anxiety,
                })
            blocks.append(block)
    return blocks


def _fmt(value: float, decimals: int) -> str:
    if np.isnan(value):
        return ""
    return f"{value:.{decimals}f}"


def to_csv_text(spec: SyntheticSpec, blocks: list[SubjectYear]) -> str:
    schema = spec.schema
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([SUBJECT_COLUMN, YEAR_COLUMN, DATE_COLUMN, *schema.raw_names,
                     PHQ4_COLUMN, ANXIETY_COLUMN])
    for block in blocks:
        scores = {a["end_date"]: a for a in block.assessments}
        for i, day in enumerate(block.dates):
            if not block.present[i]:
                continue
            a = scores.get(day.isoformat())
            writer.writerow([
                block.subject_id, block.study_year, day.isoformat(),
                *(_fmt(v, c.decimals) for v, c in zip(block.values[i], schema)),
                a["phq4_total"] if a else "", a["phq4_anxiety"] if a else "",
            ])
    return buf.getvalue()


def metadata(spec: SyntheticSpec, blocks: list[SubjectYear]) -> dict:
    anomalies = []
    for block in blocks:
        for a in spec.anomalies:
            if a.subject is None or a.subject == block.subject_id:
                anomalies.append({
                    "pid": block.subject_id,
                    "study_year": block.study_year,
                    "offset": a.offset,
                    "date": block.dates[a.offset].isoformat(),
                    "column": spec.schema.columns[spec.schema.index_of(a.column)].raw_name,
                    "multiplier": a.multiplier,
                    "row_present": bool(block.present[a.offset]),
                })
    return {
        "spec": spec.to_dict(),
        "drift": {c.raw_name: g.drift for c, g in zip(spec.schema, spec.generators)},
        "anomalies": anomalies,
        "windows": [a for block in blocks for a in block.assessments],
        "dropped_days": [
            {"pid": b.subject_id, "date": b.dates[i].isoformat()}
            for b in blocks for i in np.flatnonzero(~b.present)
        ],
    }


def generate_synthetic(spec: SyntheticSpec, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``synthetic.csv`` and ``ground_truth.json`` into ``out_dir``."""
    blocks = synthesize(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / "synthetic.csv"
    meta_path = out / "ground_truth.json"
    data_path.write_text(to_csv_text(spec, blocks))
    meta_path.write_text(json.dumps(metadata(spec, blocks), indent=1, sort_keys=True) + "\n")
    return data_path, meta_path
