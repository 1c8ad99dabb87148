"""Reading a Yes/No classification out of a free-text reply."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class Decision(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNPARSEABLE = "Unparseable"


@dataclass(frozen=True)
class ClassificationOutcome:
    decision: Decision
    evidence_span: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {"decision": self.decision.value, "evidence_span": list(self.evidence_span)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassificationOutcome":
        return cls(Decision(d["decision"]), tuple(d["evidence_span"]))


UNPARSEABLE = ClassificationOutcome(Decision.UNPARSEABLE, (0, 0))

# "Best Guess if Experiencing Depression: Yes", "Answer - No", "Classification: **Yes**"
_LABELLED = re.compile(
    r"(?:best\s+guess|answer|classification|prediction|verdict|conclusion|experiencing\s+\w+)"
    r"[^\n:]{0,60}?[:\-]\s*[\*_\"']*\s*(?P<ans>yes|no)\b",
    re.IGNORECASE,
)
_WORD = re.compile(r"\b(yes|no)\b", re.IGNORECASE)
_OPENERS = set("\n.!?:;\"'*(")
_CLOSERS = set(".!?,;:\"'*)\n")


def _standalone(text: str, start: int, end: int) -> bool:
    before = text[:start].rstrip(" \t")
    after = text[end:].lstrip(" \t")
    return not before or before[-1] in _OPENERS or not after or after[0] in _CLOSERS


def _decision(word: str) -> Decision:
    return Decision.YES if word.lower() == "yes" else Decision.NO


def extract_classification(reply: str) -> ClassificationOutcome:
    """Prefer the last labelled answer; else accept a lone standalone Yes/No."""
    labelled = list(_LABELLED.finditer(reply))
    if labelled:
        m = labelled[-1]
        return ClassificationOutcome(_decision(m.group("ans")), m.span("ans"))

    hits = [
        (m.group(1), m.span(1))
        for m in _WORD.finditer(reply)
        if _standalone(reply, *m.span(1))
    ]
    decisions = {_decision(w) for w, _ in hits}
    if len(decisions) != 1:
        return UNPARSEABLE
    word, span = hits[-1]
    return ClassificationOutcome(_decision(word), span)
