"""Parsers for the interpretation-answer and answer-only output grammars.

A completion is free-form reasoning followed by an answer block::

    ...analysis and reasoning...
    <answer>
    **Interpretation 1:** <interpretation>
    <answer for interpretation 1>

    **Interpretation 2:** ...
    </answer>

For SQL tasks each answer is a fenced ``sql`` code block.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

MAX_PAIRS = 5


class TaskKind(str, Enum):
    QA = "qa"
    SQL = "sql"


# violation codes
MISSING_BLOCK = "MISSING_BLOCK"
PAIR_COUNT_EXCEEDED = "PAIR_COUNT_EXCEEDED"
EMPTY_ANSWER = "EMPTY_ANSWER"
EMPTY_INTERPRETATION = "EMPTY_INTERPRETATION"
NON_CONTIGUOUS_INDEX = "NON_CONTIGUOUS_INDEX"
MULTIPLE_SQL_BLOCKS = "MULTIPLE_SQL_BLOCKS"


class ParseError(ValueError):
    """Base class for completions that cannot be turned into pairs."""

    code = "PARSE_ERROR"


class NoAnswerBlock(ParseError):
    code = "NO_ANSWER_BLOCK"


class NoPairs(ParseError):
    code = "NO_PAIRS"


class MissingSqlBlock(ParseError):
    code = "MISSING_SQL_BLOCK"


class EmptyPairs(ValueError):
    pass


@dataclass(frozen=True)
class InterpretationAnswerPair:
    index: int
    interpretation: str
    answer: str


@dataclass
class StructuredResponse:
    reasoning_text: str
    pairs: list[InterpretationAnswerPair]
    format_violations: list[str] = field(default_factory=list)

    @property
    def answers(self) -> list[str]:
        return [p.answer for p in self.pairs]


_OPEN_RE = re.compile(r"<\s*answer\s*>", re.IGNORECASE)
_CLOSE_RE = re.compile(r"<\s*/\s*answer\s*>", re.IGNORECASE)

# Accepts "**Interpretation 1:** x", "**Interpretation 1**: x", "Interpretation 1: x",
# "### Interpretation 1: x"; case-insensitive.
_INTERP_RE = re.compile(
    r"^[ \t]*(?:#{1,6}[ \t]*)?(?:\*\*)?[ \t]*interpretation[ \t]+(\d+)[ \t]*"
    r"(?:\*\*[ \t]*:|:[ \t]*\*\*|:)[ \t]*(.*?)[ \t]*$",
    re.IGNORECASE,
)
_ANSWER_RE = re.compile(
    r"^[ \t]*(?:#{1,6}[ \t]*)?(?:\*\*)?[ \t]*answer[ \t]+(\d+)[ \t]*"
    r"(?:\*\*[ \t]*:|:[ \t]*\*\*|:)[ \t]*(.*?)[ \t]*$",
    re.IGNORECASE,
)
_FENCE_LINE_RE = re.compile(r"^[ \t]*```")
_SQL_BLOCK_RE = re.compile(
    r"```[ \t]*(?:sql|sqlite)?[ \t]*\n?(.*?)```", re.IGNORECASE | re.DOTALL
)


def split_answer_block(completion: str) -> tuple[str, str] | None:
    """Return ``(reasoning_text, block_body)`` or None when no block is delimited.

    The last opening tag wins, so reasoning that quotes the tag is not mistaken
    for the block.
    """
    opens = list(_OPEN_RE.finditer(completion))
    if not opens:
        return None
    start = opens[-1]
    close = _CLOSE_RE.search(completion, start.end())
    if close is None:
        return None
    return completion[: start.start()], completion[start.end() : close.start()]


def _segments(block: str, marker: re.Pattern) -> list[tuple[int, str, list[str]]]:
    """Split a block body at marker lines, ignoring markers inside code fences."""
    segments: list[tuple[int, str, list[str]]] = []
    in_fence = False
    for line in block.splitlines():
        if _FENCE_LINE_RE.match(line):
            in_fence = not in_fence
            if segments:
                segments[-1][2].append(line)
            continue
        m = None if in_fence else marker.match(line)
        if m:
            segments.append((int(m.group(1)), m.group(2).strip(), []))
        elif segments:
            segments[-1][2].append(line)
    return segments


def _extract_sql(body: str, violations: list[str]) -> str:
    blocks = _SQL_BLOCK_RE.findall(body)
    if not blocks:
        raise MissingSqlBlock("answer has no fenced sql code block")
    if len(blocks) > 1:
        violations.append(MULTIPLE_SQL_BLOCKS)
    return blocks[0].strip()


def _check_indices(indices: list[int], violations: list[str]) -> None:
    if indices != list(range(1, len(indices) + 1)):
        violations.append(NON_CONTIGUOUS_INDEX)
    if len(indices) > MAX_PAIRS:
        violations.append(PAIR_COUNT_EXCEEDED)


def parse_interpretation_answer(completion: str, task: TaskKind | str = TaskKind.QA) -> StructuredResponse:
    task = TaskKind(task)
    split = split_answer_block(completion)
    if split is None:
        raise NoAnswerBlock("no <answer>...</answer> block found")
    reasoning, block = split
    segments = _segments(block, _INTERP_RE)
    if not segments:
        raise NoPairs("answer block contains no interpretation markers")

    violations: list[str] = []
    pairs = []
    for index, interpretation, lines in segments:
        if not interpretation:
            violations.append(EMPTY_INTERPRETATION)
        body = "\n".join(lines).strip()
        if task is TaskKind.SQL:
            answer = _extract_sql(body, violations)
        else:
            answer = body
        if not answer:
            violations.append(EMPTY_ANSWER)
        pairs.append(InterpretationAnswerPair(index, interpretation, answer))
    _check_indices([p.index for p in pairs], violations)
    return StructuredResponse(reasoning, pairs, violations)


def parse_answers_only(completion: str, task: TaskKind | str = TaskKind.QA) -> list[str]:
    """Answers of an ``Answer k: ...`` block, in order."""
    task = TaskKind(task)
    split = split_answer_block(completion)
    if split is None:
        raise NoAnswerBlock("no <answer>...</answer> block found")
    segments = _segments(split[1], _ANSWER_RE)
    if not segments:
        raise NoPairs("answer block contains no answer markers")
    answers = []
    for _, first, rest in segments:
        body = "\n".join([first, *rest]).strip()
        if task is TaskKind.SQL:
            body = _extract_sql(body, [])
        answers.append(body)
    return answers


def parse_answers_only_response(completion: str, task: TaskKind | str = TaskKind.QA) -> StructuredResponse:
    """Answer-only output lifted into a StructuredResponse with blank interpretations."""
    split = split_answer_block(completion)
    answers = parse_answers_only(completion, task)
    pairs = [InterpretationAnswerPair(k, "", a) for k, a in enumerate(answers, 1)]
    violations = [EMPTY_ANSWER for a in answers if not a]
    if len(pairs) > MAX_PAIRS:
        violations.append(PAIR_COUNT_EXCEEDED)
    return StructuredResponse(split[0], pairs, violations)


def render_template(pairs: list[InterpretationAnswerPair], task: TaskKind | str = TaskKind.QA) -> str:
    """Render pairs as an answer block; the inverse of parse_interpretation_answer."""
    task = TaskKind(task)
    if not pairs:
        raise EmptyPairs("cannot render an empty pair list")
    chunks = []
    for p in pairs:
        answer = f"```sql\n{p.answer}\n```" if task is TaskKind.SQL else p.answer
        chunks.append(f"**Interpretation {p.index}:** {p.interpretation}\n{answer}")
    return "<answer>\n" + "\n\n".join(chunks) + "\n</answer>"


def render_answers_only(answers: list[str]) -> str:
    if not answers:
        raise EmptyPairs("cannot render an empty answer list")
    lines = [f"Answer {k}: {a}" for k, a in enumerate(answers, 1)]
    return "<answer>\n" + "\n".join(lines) + "\n</answer>"
