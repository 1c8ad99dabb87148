"""Block-structured prompts for each prompting strategy."""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

from .dataset import Target
from .schema import FeatureSchema, FeatureWindow
from .tables import DataFormat, serialize_table


class Strategy(str, enum.Enum):
    DIRECT = "dp"
    COT = "cot"
    COT_EXP = "cot-exp"
    COT_DSM = "cot-dsm"
    REASONING = "reasoning"


class BlockKind(str, enum.Enum):
    ROLE = "Role"
    TASK = "TaskDescription"
    DATA = "Data"
    VARIABLES = "VariableDescriptions"
    DSM = "DSMCriteria"
    INSTRUCTIONS = "Instructions"


class PromptTooLong(ValueError):
    pass


ROLE_TEXT = "Role:\nYou are a data analyst helping a psychiatrist understand human activity data."

TASK_HEADER = (
    "Task:\n"
    "You will be shown data gathered from a smartphone and smart watch worn by an individual. "
    "Your goal is to analyze this data.\n"
    "You are presented with the following:"
)

VARIABLES_HEADER = (
    "Description of variables\n"
    "For the duration of the data collection period, data was logged from the individual's "
    "smartphone and a fitness tracking smartwatch. An explanation of the different types of "
    "data logged is included below:\n"
    "Date: the data in this row was recorded on that date."
)

# Stand-in for the elided criteria text; pass ``dsm_text=`` to build_prompt to replace it.
DSM5_CRITERIA = """Depression Criteria
Here is the DSM-5 Criteria for depression. The DSM-5 outlines the following criterion to make a diagnosis of depression. The individual must be experiencing five or more symptoms during the same 2-week period and at least one of the symptoms should be either (1) depressed mood or (2) loss of interest or pleasure.
1. Depressed mood most of the day, nearly every day.
2. Markedly diminished interest or pleasure in all, or almost all, activities most of the day, nearly every day.
3. Significant weight loss when not dieting, weight gain, or a decrease or increase in appetite nearly every day.
4. Insomnia or hypersomnia nearly every day.
5. Psychomotor agitation or retardation nearly every day.
6. Fatigue or loss of energy nearly every day.
7. Feelings of worthlessness or excessive or inappropriate guilt nearly every day.
8. Diminished ability to think or concentrate, or indecisiveness, nearly every day.
9. Recurrent thoughts of death, recurrent suicidal ideation without a specific plan, or a suicide attempt or a specific plan for committing suicide."""

CLASSIFY_TEXT = (
    'Make your best guess if this person is currently experiencing depression. '
    'Please answer only "Yes" or "No" to this question.'
)
HYPOTHESIZE_TEXT = (
    "Based on the collected data, hypothesize about the overall mental health of the "
    "individual with detailed explanations."
)
REASONING_TEXT = (
    "Although the data does not contain explicit information on mood, trends in physiological "
    "signals have been shown to correlate with mental health symptoms. Examine this data and "
    "point out any specific trends or data points that could spark fruitful conversation with "
    "a mental health professional."
)

_TASK_ITEMS = {
    BlockKind.VARIABLES: "Explanation of the different types of data. [Description of Variables]",
    BlockKind.DSM: "DSM-5 Criteria for depression. [Depression Criteria]",
    BlockKind.INSTRUCTIONS: "Instructions on how to analyze the data [Instructions]",
}

_ONES = ("zero one two three four five six seven eight nine ten eleven twelve thirteen "
         "fourteen fifteen sixteen seventeen eighteen nineteen").split()
_TENS = "twenty thirty forty fifty sixty seventy eighty ninety".split()


def number_words(n: int) -> str:
    if 0 <= n < 20:
        return _ONES[n]
    if 20 <= n < 100:
        tens, ones = divmod(n, 10)
        return _TENS[tens - 2] + (f"-{_ONES[ones]}" if ones else "")
    return str(n)


_STRATEGY_BLOCKS = {
    Strategy.DIRECT: (BlockKind.DATA, BlockKind.INSTRUCTIONS),
    Strategy.COT: (BlockKind.DATA, BlockKind.INSTRUCTIONS),
    Strategy.COT_EXP: (BlockKind.DATA, BlockKind.VARIABLES, BlockKind.INSTRUCTIONS),
    Strategy.COT_DSM: (BlockKind.DATA, BlockKind.DSM, BlockKind.INSTRUCTIONS),
    Strategy.REASONING: (BlockKind.DATA, BlockKind.INSTRUCTIONS),
}


@dataclass(frozen=True)
class PromptBundle:
    strategy: Strategy
    format: DataFormat
    target: Target
    blocks: tuple[tuple[BlockKind, str], ...]
    table: str

    @property
    def rendered(self) -> str:
        return "\n\n".join(text for _, text in self.blocks)

    @property
    def kinds(self) -> tuple[BlockKind, ...]:
        return tuple(k for k, _ in self.blocks)

    def block(self, kind: BlockKind) -> str:
        for k, text in self.blocks:
            if k is kind:
                return text
        raise KeyError(kind)

    @property
    def prompt_hash(self) -> str:
        return prompt_hash(self.rendered)

    def chat_split(self) -> tuple[str, str]:
        """``(system, user)``: the Role block and the rest of the prompt."""
        return self.blocks[0][1], "\n\n".join(text for _, text in self.blocks[1:])


def prompt_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def variable_descriptions(schema: FeatureSchema) -> str:
    lines = [VARIABLES_HEADER]
    lines += [f"{c.label}: {c.description}" for c in schema]
    return "\n".join(lines)


def _instructions(strategy: Strategy, target: Target) -> str:
    if strategy is Strategy.REASONING:
        body = REASONING_TEXT
    elif strategy is Strategy.DIRECT:
        body = f"1. {CLASSIFY_TEXT}"
    else:
        body = f"1. {HYPOTHESIZE_TEXT}\n2. {CLASSIFY_TEXT}"
    if target is Target.ANXIETY:
        body = body.replace("depression", "anxiety")
    return f"Instructions\n{body}"


def build_prompt(
    window: FeatureWindow,
    strategy: Strategy | str = Strategy.COT,
    fmt: DataFormat | str = DataFormat.MARKDOWN,
    schema: FeatureSchema | None = None,
    target: Target | str = Target.DEPRESSION,
    *,
    dsm_text: str = DSM5_CRITERIA,
    max_chars: int | None = None,
) -> PromptBundle:
    strategy, fmt, target = Strategy(strategy), DataFormat(fmt), Target(target)
    schema = schema or window.schema
    table = serialize_table(window, fmt)
    later = _STRATEGY_BLOCKS[strategy]

    items = []
    for kind in later:
        if kind is BlockKind.DATA:
            items.append(
                f"A table consisting of {number_words(len(window))} days of collected "
                "activity tracking data [Collected Data]"
            )
        else:
            items.append(_TASK_ITEMS[kind])
    task = TASK_HEADER + "".join(f"\n{i}. {item}" for i, item in enumerate(items, start=1))

    texts = {
        BlockKind.DATA: f"Collected Data:\n{table}",
        BlockKind.VARIABLES: variable_descriptions(schema),
        BlockKind.DSM: dsm_text,
        BlockKind.INSTRUCTIONS: _instructions(strategy, target),
    }
    blocks = ((BlockKind.ROLE, ROLE_TEXT), (BlockKind.TASK, task)) + tuple(
        (k, texts[k]) for k in later
    )
    bundle = PromptBundle(strategy, fmt, target, blocks, table)
    if max_chars is not None and len(bundle.rendered) > max_chars:
        raise PromptTooLong(f"prompt has {len(bundle.rendered)} characters, limit {max_chars}")
    return bundle


def extract_data_block(prompt: str) -> str | None:
    """Pull the serialized table back out of a rendered prompt."""
    marker = "Collected Data:\n"
    start = prompt.find(marker)
    if start < 0:
        return None
    start += len(marker)
    end = prompt.find("\n\n", start)
    return prompt[start:] if end < 0 else prompt[start:end]

