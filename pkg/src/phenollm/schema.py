"""Feature schema and the 28-day feature window.

The default schema mirrors the GLOBEM daily features used for prompting:
raw GLOBEM column names, a human readable display name, the unit, the
column label used in serialized tables and a one-sentence description used
to build the variable-explanation prompt block.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DATE_COLUMN = "date"
DEFAULT_WINDOW_LENGTH = 28


@dataclass(frozen=True)
class FeatureColumn:
    raw_name: str
    display_name: str
    unit: str
    description: str
    label: str = ""
    decimals: int = 0

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", default_label(self.display_name))

    @property
    def stem(self) -> str:
        """Display name without the trailing ``(unit)`` annotation."""
        name = self.display_name
        if name.endswith(")") and "(" in name:
            name = name[: name.rindex("(")]
        return name.strip()


def default_label(display_name: str) -> str:
    # "total distance traveled (meters)" -> "total_distance_traveled(meters)"
    return display_name.replace(" (", "(").replace(" ", "_")


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    columns: tuple[FeatureColumn, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for attr in ("raw_name", "display_name", "label"):
            seen = [getattr(c, attr) for c in self.columns]
            if len(set(seen)) != len(seen):
                raise ValueError(f"duplicate {attr} in schema {self.name!r}")
        if any(c.raw_name == DATE_COLUMN for c in self.columns):
            raise ValueError("the date column is implicit and must not be listed")

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __getitem__(self, i: int) -> FeatureColumn:
        return self.columns[i]

    @property
    def raw_names(self) -> list[str]:
        return [c.raw_name for c in self.columns]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.columns]

    @property
    def display_names(self) -> list[str]:
        return [c.display_name for c in self.columns]

    def index_of(self, key: str) -> int:
        """Look a column up by raw name, display name or table label."""
        for i, c in enumerate(self.columns):
            if key in (c.raw_name, c.display_name, c.label):
                return i
        raise KeyError(key)

    def display_name_for(self, raw_name: str) -> str:
        return self.columns[self.index_of(raw_name)].display_name


_M = "minutes"

PAPER_SCHEMA = FeatureSchema(
    name="globem-paper",
    columns=(
        FeatureColumn(
            "f_loc:phone_locations_doryab_totaldistance:allday",
            "total distance traveled (meters)", "meters",
            "This represents the total distance traveled as measured by the GPS in the "
            "participant's smartphone. This includes walking, driving, and any other modes "
            "of transportation.",
            label="total_distance_traveled(meters)",
        ),
        FeatureColumn(
            "f_loc:phone_locations_doryab_timeathome:allday",
            "time spent at home (minutes)", _M,
            "This is the total time that the participant was at home as determined by "
            "their smartphone GPS.",
            label="time_at_home(minutes)",
        ),
        FeatureColumn(
            "f_loc:phone_locations_doryab_locationentropy:allday",
            "location entropy", "",
            "This measures how evenly the participant's time was spread across the "
            "distinct places they visited. A value of 0 means all time was spent in one place.",
            label="location_entropy", decimals=2,
        ),
        FeatureColumn(
            "f_screen:phone_screen_rapids_sumdurationunlock:allday",
            "phone screen time (minutes)", _M,
            "This is the total time the smartphone was unlocked and in use during the day.",
            label="phone_screen_time(minutes)",
        ),
        FeatureColumn(
            "f_screen:phone_screen_rapids_avgdurationunlock:allday",
            "average phone unlock duration (minutes)", _M,
            "This is the average length of a single smartphone usage session, from unlock "
            "until the screen turned off.",
            label="average_phone_unlock_duration(minutes)",
        ),
        FeatureColumn(
            "f_call:phone_calls_rapids_incoming_sumduration:allday",
            "phone call incoming duration (minutes)", _M,
            "This is the total duration of incoming phone calls answered by the participant.",
            label="incoming_call_duration(minutes)",
        ),
        FeatureColumn(
            "f_call:phone_calls_rapids_outgoing_sumduration:allday",
            "phone call outgoing duration (minutes)", _M,
            "This is the total duration of phone calls placed by the participant.",
            label="outgoing_call_duration(minutes)",
        ),
        FeatureColumn(
            "f_blue:phone_bluetooth_doryab_uniquedevicesothers:allday",
            "unique Bluetooth devices discovered nearby", "devices",
            "This is the number of distinct Bluetooth devices not owned by the participant "
            "that were detected near their smartphone, a proxy for being around other people.",
            label="bluetooth_devices_nearby",
        ),
        FeatureColumn(
            "f_steps:fitbit_steps_intraday_rapids_sumsteps:allday",
            "step count", "steps",
            "This is the total number of steps recorded by the smartwatch.",
            label="step_count",
        ),
        FeatureColumn(
            "f_steps:fitbit_steps_intraday_rapids_countepisodesedentarybout:allday",
            "number of sedentary episodes", "episodes",
            "This is the number of distinct periods during which the smartwatch recorded "
            "no stepping activity.",
            label="sedentary_episodes",
        ),
        FeatureColumn(
            "f_steps:fitbit_steps_intraday_rapids_sumdurationsedentarybout:allday",
            "total time spent sedentary (minutes)", _M,
            "This is the total time spent in sedentary periods as recorded by the smartwatch.",
            label="sedentary_time(minutes)",
        ),
        FeatureColumn(
            "f_steps:fitbit_steps_intraday_rapids_countepisodeactivebout:allday",
            "number of activity episodes", "episodes",
            "This is the number of distinct periods during which the smartwatch recorded "
            "stepping activity.",
            label="active_episodes",
        ),
        FeatureColumn(
            "f_steps:fitbit_steps_intraday_rapids_sumdurationactivebout:allday",
            "total time spent active (minutes)", _M,
            "This is the total time spent in active periods as recorded by the smartwatch.",
            label="active_time(minutes)",
        ),
        FeatureColumn(
            "f_slp:fitbit_sleep_intraday_rapids_sumdurationasleepunifiedmain:allday",
            "total time asleep (minutes)", _M,
            "This is the total time the participant was asleep during their main sleep "
            "period, as recorded by the smartwatch.",
            label="time_asleep(minutes)",
        ),
        FeatureColumn(
            "f_slp:fitbit_sleep_intraday_rapids_sumdurationawakeunifiedmain:allday",
            "total time spent awake while in bed (minutes)", _M,
            "This is the total time the participant spent awake while in bed during their "
            "main sleep period, as recorded by the smartwatch.",
            label="time_awake_in_bed(minutes)",
        ),
    ),
)


def toy_schema(n: int) -> FeatureSchema:
    """The first ``n`` paper columns, for small tests and demos."""
    return FeatureSchema(name=f"globem-paper[:{n}]", columns=PAPER_SCHEMA.columns[:n])


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    """Consecutive daily rows of features; ``NaN`` marks a missing cell."""

    dates: tuple[dt.date, ...]
    values: np.ndarray
    schema: FeatureSchema = field(default=PAPER_SCHEMA)

    def __post_init__(self):
        dates = tuple(self.dates)
        values = np.array(self.values, dtype=float, copy=True)
        if values.size == 0:
            values = values.reshape(len(dates), len(self.schema))
        if values.shape != (len(dates), len(self.schema)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(dates)} dates x {len(self.schema)} columns"
            )
        for a, b in zip(dates, dates[1:]):
            if b - a != dt.timedelta(days=1):
                raise ValueError(f"dates must be consecutive days, got {a} then {b}")
        if np.isinf(values).any():
            raise ValueError("window values must be finite or missing")
        values.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_rows(
        cls,
        start: dt.date,
        rows: Iterable[Sequence[float | None]],
        schema: FeatureSchema = PAPER_SCHEMA,
    ) -> "FeatureWindow":
        rows = [[np.nan if v is None else float(v) for v in r] for r in rows]
        dates = tuple(start + dt.timedelta(days=i) for i in range(len(rows)))
        return cls(dates, np.array(rows, dtype=float).reshape(len(rows), len(schema)), schema)

    def __len__(self) -> int:
        return len(self.dates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureWindow):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.schema.labels == other.schema.labels
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __hash__(self):
        return hash((self.dates, self.values.tobytes()))

    @property
    def end_date(self) -> dt.date | None:
        return self.dates[-1] if self.dates else None

    @property
    def is_complete(self) -> bool:
        return not np.isnan(self.values).any()

    def column(self, key: int | str) -> np.ndarray:
        idx = key if isinstance(key, int) else self.schema.index_of(key)
        return self.values[:, idx]

    def row_of(self, day: dt.date) -> int | None:
        if not self.dates:
            return None
        offset = (day - self.dates[0]).days
        return offset if 0 <= offset < len(self.dates) else None
