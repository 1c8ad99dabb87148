"""Deterministic offline stand-in for a chat model.

The mock reads the data table back out of the prompt, writes a short bulleted
analysis citing real statistics of that table, optionally corrupts some of
them, and records every claim it made (and whether it lied) in a truth log.
"""
from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..schema import FeatureWindow
from ..tables import serialize_table


class AnswerMode(str, enum.Enum):
    ALWAYS_NO = "always-no"
    ALWAYS_YES = "always-yes"
    ORACLE = "oracle"
    COIN = "coin"


@dataclass(frozen=True)
class MockPolicy:
    seed: int = 0
    answer_mode: AnswerMode = AnswerMode.ALWAYS_NO
    numeric_error_rate: float = 0.0
    trend_error_rate: float = 0.0
    claims_per_response: int = 4

    def __post_init__(self):
        object.__setattr__(self, "answer_mode", AnswerMode(self.answer_mode))
        for rate in (self.numeric_error_rate, self.trend_error_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"error rate {rate} outside [0, 1]")
        if self.claims_per_response < 0:
            raise ValueError("claims_per_response must be non-negative")


@dataclass(frozen=True)
class TruthEntry:
    """One claim the mock made; ``start``/``end`` delimit its sentence in the reply."""

    start: int
    end: int
    kind: str  # "numeric" or "trend"
    claim: str
    column: str
    corrupted: bool
    true_value: float | None = None
    cited: str = ""


class MockReasoning(NamedTuple):
    text: str
    truth: tuple[TruthEntry, ...]


class MissingLabel(ValueError):
    pass


def window_digest(window: FeatureWindow) -> str:
    return hashlib.sha256(serialize_table(window, "csv").encode()).hexdigest()


def _rng(*parts) -> random.Random:
    key = "|".join(str(p) for p in parts)
    return random.Random(int(hashlib.sha256(key.encode()).hexdigest()[:16], 16))


def answer(policy: MockPolicy, label: str | None, rng: random.Random) -> str:
    mode = policy.answer_mode
    if mode is AnswerMode.ALWAYS_NO:
        return "No"
    if mode is AnswerMode.ALWAYS_YES:
        return "Yes"
    if mode is AnswerMode.ORACLE:
        if label is None:
            raise MissingLabel("oracle answer mode needs the true label in the request context")
        return "Yes" if label == "Positive" else "No"
    return "Yes" if rng.random() < 0.5 else "No"


def format_number(v: float, decimals: int | None = None) -> str:
    if decimals is not None:
        return f"{v:,.{decimals}f}"
    if float(v).is_integer():
        return f"{int(v):,}"
    return f"{v:,}"


def corrupt(v: float, col_max: float, rng: random.Random) -> float:
    """Drop a digit from an integer (or scale by 10) so the value no longer matches."""
    if v == 0:
        return float(10 ** (len(str(int(abs(col_max)))) + 1))
    if float(v).is_integer() and abs(v) >= 10 and rng.random() < 0.5:
        digits = str(int(v))
        i = rng.randrange(1, len(digits))
        dropped = float(digits[:i] + digits[i + 1:])
        if abs(dropped - v) >= 1:
            return dropped
    return v * 10


_UNITS = {"minutes", "meters", "steps", "devices", "episodes"}


class _Builder:
    def __init__(self):
        self.parts: list[str] = []
        self.pos = 0
        self.truth: list[TruthEntry] = []

    def add(self, text: str) -> tuple[int, int]:
        start = self.pos
        self.parts.append(text)
        self.pos += len(text)
        return start, self.pos


def _half_change(values: np.ndarray) -> float | None:
    half = len(values) // 2
    early = values[:half][~np.isnan(values[:half])]
    late = values[len(values) - half:][~np.isnan(values[len(values) - half:])]
    if not early.size or not late.size or early.mean() == 0:
        return None
    return float((late.mean() - early.mean()) / abs(early.mean()))


def _trend_options(window: FeatureWindow, j: int, cvs: dict[int, float]):
    """Trend statements about column ``j`` that are clearly true, as (kind, truth, flipped)."""
    col = window.values[:, j]
    n = len(window)
    options = []
    whole = _half_change(col)
    if whole is not None and abs(whole) > 0.10:
        up = whole > 0
        options.append(("increase" if up else "decrease", "over the course of the window", up))
    second = _half_change(col[n - n // 2:])
    if second is not None and abs(second) > 0.10:
        up = second > 0
        options.append(("increase" if up else "decrease", "during the second half of the window", up))
    if j in cvs and len(cvs) >= 3:
        spread = list(cvs.values())
        median = float(np.median(spread))
        if cvs[j] > float(np.quantile(spread, 2 / 3)) and cvs[j] > median:
            options.append(("high-variability", "", True))
        elif cvs[j] < float(np.quantile(spread, 1 / 3)) and cvs[j] < median:
            options.append(("low-variability", "", False))
    mean = float(np.nanmean(col))
    far = [i for i in range(n) if not np.isnan(col[i]) and abs(col[i] - mean) > 0.1 * abs(mean)]
    if far:
        options.append(("above-below", far, None))
    return options


def _trend_sentence(kind, detail, flag, stem, window, col, rng, flip):
    if kind in ("increase", "decrease"):
        up = flag != flip
        verb = "increased" if up else "decreased"
        return f"The {stem} {verb} {detail}.", ("increase" if up else "decrease")
    if kind in ("high-variability", "low-variability"):
        if (kind == "high-variability") != flip:
            return f"The {stem} fluctuated considerably from one day to the next.", "high-variability"
        return f"The {stem} remained stable from one day to the next.", "low-variability"
    r = rng.choice(detail)
    word = "above" if (col[r] > np.nanmean(col)) != flip else "below"
    return f"On {window.dates[r].isoformat()}, the {stem} was {word} average.", f"{word}-average"


def mock_reason(
    policy: MockPolicy,
    window: FeatureWindow,
    *,
    nonce: str = "",
    label: str | None = None,
    condition: str = "Depression",
) -> MockReasoning:
    """Generate an analysis of ``window`` plus the truth log of its claims."""
    rng = _rng(policy.seed, nonce, window_digest(window))
    schema = window.schema
    b = _Builder()
    b.add("Here is an analysis of the collected activity tracking data.\n\n"
          "Hypothesis About Overall Mental Health:\n\n")

    candidates = []
    cvs = {}
    for j in range(len(schema)):
        col = window.values[:, j]
        present = col[~np.isnan(col)]
        if present.size >= 2 and present.mean() > 0:
            candidates.append(j)
            cvs[j] = float(present.std() / present.mean())
    order = rng.sample(candidates, len(candidates))

    n_claims = policy.claims_per_response if order else 0
    for i in range(n_claims):
        j = order[i % len(order)]
        c = schema.columns[j]
        stem = c.stem
        unit = f" {c.unit}" if c.unit in _UNITS else ""
        col = window.values[:, j]
        rows = [r for r in range(len(window)) if not np.isnan(col[r])]
        b.add(f"- **{stem[:1].upper() + stem[1:]}**: ")

        stat = rng.choice(["max", "min", "point", "mean"])
        decimals = None
        if stat == "max":
            r = max(rows, key=lambda r: (col[r], -r))
            true = float(col[r])
        elif stat == "min":
            r = min(rows, key=lambda r: (col[r], r))
            true = float(col[r])
        elif stat == "point":
            nonzero = [r for r in rows if col[r] != 0] or rows
            r = rng.choice(nonzero)
            true = float(col[r])
        else:
            r = None
            true = float(np.nanmean(col))
            decimals = max(1, c.decimals)
        corrupted = rng.random() < policy.numeric_error_rate
        cited_value = corrupt(true, float(np.nanmax(col)), rng) if corrupted else true
        cited = format_number(cited_value, decimals)
        date = window.dates[r].isoformat() if r is not None else ""
        if stat == "max":
            sentence = f"The highest {stem} was {cited}{unit} on {date}."
        elif stat == "min":
            sentence = f"The lowest {stem} was {cited}{unit} on {date}."
        elif stat == "point":
            if rng.random() < 0.5:
                sentence = f"On {date}, the {stem} was {cited}{unit}."
            else:
                sentence = f"The {stem} was {cited}{unit} on {date}."
        else:
            sentence = f"On average, the {stem} was {cited}{unit} per day."
        start, end = b.add(sentence)
        b.truth.append(TruthEntry(start, end, "numeric", stat, c.label, corrupted, true, cited))
        if stat in ("max", "min"):
            b.truth.append(TruthEntry(start, end, "trend", "extremum-at-date", c.label, False))

        options = _trend_options(window, j, cvs)
        if options:
            kind, detail, flag = rng.choice(options)
            flip = rng.random() < policy.trend_error_rate
            text, claim = _trend_sentence(kind, detail, flag, stem, window, col, rng, flip)
            b.add(" ")
            s2, e2 = b.add(text)
            b.truth.append(TruthEntry(s2, e2, "trend", claim, c.label, flip))
        b.add("\n")

    if n_claims == 0:
        b.add("- Nothing in the collected data stands out clearly.\n")
    verdict = answer(policy, label, rng)
    b.add(f"\nBest Guess if Experiencing {condition}: {verdict}.\n")
    return MockReasoning("".join(b.parts), tuple(b.truth))
