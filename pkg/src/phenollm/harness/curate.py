"""Selecting clean, correct reasoning replies as a class-balanced fine-tuning set."""
from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from ..interpret import Decision
from .records import RunRecord

DEFAULT_EPOCHS = 2


class InsufficientQualifying(ValueError):
    def __init__(self, label: str, available: int, needed: int):
        super().__init__(f"only {available} qualifying {label} records, need {needed}")
        self.label = label
        self.available = available
        self.needed = needed


@dataclass(frozen=True)
class CurationCriteria:
    require_correct_label: bool = True
    require_clean_numbers: bool = True
    target_size: int = 70
    epochs: int = DEFAULT_EPOCHS

    def __post_init__(self):
        if self.target_size < 0 or self.target_size % 2:
            raise ValueError("target_size must be a non-negative even number")


def qualifies(record: RunRecord, criteria: CurationCriteria) -> bool:
    if record.error is not None or record.outcome.decision is Decision.UNPARSEABLE:
        return False
    if criteria.require_correct_label and not record.correct:
        return False
    if criteria.require_clean_numbers:
        rubric = record.rubric()
        if rubric is None or not rubric[1]:
            return False
    return True


def chat_example(record: RunRecord) -> dict:
    system, _, user = record.prompt.partition("\n\n")
    return {"messages": [
        {"role": "system", "content": system},
        {"role": "user", "content": user},
        {"role": "assistant", "content": record.reply},
    ]}


@dataclass(frozen=True)
class CurationResult:
    examples: tuple[RunRecord, ...]
    data_path: Path
    manifest_path: Path


def select(records: Sequence[RunRecord], criteria: CurationCriteria, seed: int) -> list[RunRecord]:
    """Draw target_size/2 qualifying records per class; independent of input order."""
    pool = sorted((r for r in records if qualifies(r, criteria)), key=lambda r: r.cell)
    rng = random.Random(seed)
    half = criteria.target_size // 2
    chosen = []
    for label in ("Positive", "Negative"):
        group = [r for r in pool if r.true_label == label]
        if len(group) < half:
            raise InsufficientQualifying(label, len(group), half)
        chosen.extend(rng.sample(group, half))
    rng.shuffle(chosen)
    return chosen


def curate_finetune_set(
    records: Sequence[RunRecord],
    criteria: CurationCriteria,
    seed: int,
    out_dir: str | Path,
) -> CurationResult:
    chosen = select(records, criteria, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / "finetune.jsonl"
    with open(data_path, "w", encoding="utf-8") as fh:
        for r in chosen:
            fh.write(json.dumps(chat_example(r), ensure_ascii=False) + "\n")
    manifest = {
        "criteria": asdict(criteria),
        "seed": seed,
        "epochs": criteria.epochs,
        "examples": len(chosen),
        "per_class": {lab: sum(r.true_label == lab for r in chosen) for lab in ("Positive", "Negative")},
        "pool_size": len(records),
        "qualifying": sum(qualifies(r, criteria) for r in records),
        "data_file": data_path.name,
        "cells": [list(r.cell) for r in chosen],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return CurationResult(tuple(chosen), data_path, manifest_path)
