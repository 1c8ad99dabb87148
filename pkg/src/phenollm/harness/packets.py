"""Export graded replies as packets for human raters."""
from __future__ import annotations

import random
from pathlib import Path
from typing import Sequence

from ..prompts import extract_data_block
from .records import RunRecord

QUESTIONS = (
    "Q1. Does the response cite specific numbers from the data? (yes/no)",
    "Q2. Are all cited numbers correct? (yes/no)",
    "Q3. Does the response identify trends in the data? (yes/no)",
    "Q4. Are all identified trends correct? (yes/no)",
)


def export_grader_packets(
    records: Sequence[RunRecord], out_dir: str | Path, *, per_grader: int = 32, seed: int = 0,
) -> list[Path]:
    """Shuffle the free-text replies and split them into numbered packets.

    Each item shows the reply, the table it was written about and the four
    rubric questions; model and strategy are hidden from the rater in the
    packet but kept in ``key.tsv`` for unblinding.
    """
    graded = sorted((r for r in records if r.report is not None and r.error is None),
                    key=lambda r: r.cell)
    random.Random(seed).shuffle(graded)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths, key_lines = [], ["packet\titem\tsample_id\tstrategy\tformat\tmodel\trepetition"]
    for p, start in enumerate(range(0, len(graded), per_grader), start=1):
        chunk = graded[start:start + per_grader]
        parts = [f"# Packet {p}\n"]
        for i, r in enumerate(chunk, start=1):
            table = extract_data_block(r.prompt) or ""
            parts.append(f"## Item {i}\n\n### Data\n\n```\n{table}\n```\n\n"
                         f"### Response\n\n{r.reply.strip()}\n\n### Questions\n\n"
                         + "\n".join(QUESTIONS) + "\n")
            key_lines.append("\t".join(map(str, (p, i) + r.cell)))
        path = out / f"packet_{p:02d}.md"
        path.write_text("\n".join(parts), encoding="utf-8")
        paths.append(path)
    (out / "key.tsv").write_text("\n".join(key_lines) + "\n", encoding="utf-8")
    return paths
