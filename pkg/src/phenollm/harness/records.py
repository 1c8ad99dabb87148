"""Run records and the append-only JSON-lines log that holds them."""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..interpret import ClassificationOutcome, Decision


@dataclass(frozen=True)
class RunRecord:
    sample_id: str
    strategy: str
    format: str
    model: str
    repetition: int
    prompt_hash: str
    prompt: str
    reply: str
    outcome: ClassificationOutcome
    report: dict | None  # VerificationReport.to_dict(), absent for ungraded strategies
    true_label: str
    latency_ms: float = 0.0
    temperature: float = 0.0
    error: str | None = None

    @property
    def cell(self) -> tuple[str, str, str, str, int]:
        return (self.sample_id, self.strategy, self.format, self.model, self.repetition)

    @property
    def correct(self) -> bool:
        d = self.outcome.decision
        if d is Decision.UNPARSEABLE:
            return False
        return (d is Decision.YES) == (self.true_label == "Positive")

    def rubric(self) -> tuple[bool, bool, bool, bool] | None:
        if self.report is None:
            return None
        r = self.report
        return (r["q1_has_numbers"], r["q2_numbers_consistent"],
                r["q3_has_trends"], r["q4_trends_consistent"])

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id, "strategy": self.strategy, "format": self.format,
            "model": self.model, "repetition": self.repetition,
            "prompt_hash": self.prompt_hash, "prompt": self.prompt, "reply": self.reply,
            "outcome": self.outcome.to_dict(), "report": self.report,
            "true_label": self.true_label, "latency_ms": self.latency_ms,
            "temperature": self.temperature, "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["outcome"] = ClassificationOutcome.from_dict(d["outcome"])
        return cls(**d)


def dumps(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False)


def read_records(path: str | Path, *, repair: bool = False) -> list[RunRecord]:
    """Read a log, ignoring a torn final line; ``repair`` also truncates it away."""
    path = Path(path)
    if not path.exists():
        return []
    data = path.read_bytes()
    good_end = data.rfind(b"\n") + 1
    records = []
    for line in data[:good_end].splitlines():
        if line.strip():
            records.append(RunRecord.from_dict(json.loads(line)))
    if repair and good_end < len(data):
        with open(path, "r+b") as fh:
            fh.truncate(good_end)
    return records


class RecordLog:
    """Single-writer appender; each line is flushed and fsynced before returning."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: RunRecord) -> None:
        with self._lock:
            self._fh.write(dumps(record) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def extend(self, records: Iterable[RunRecord]) -> None:
        for r in records:
            self.append(r)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
