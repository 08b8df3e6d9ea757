"""Dataset records, JSONL ingestion and the ambiguous-oversampling batch stream."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .parsing import TaskKind
from .similarity import ExecutionCache, ExecutionError, GoldAnswer, GoldExecutionFault, normalize_text, results_equal


class SchemaViolation(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EmptyClass(ValueError):
    pass


@dataclass(frozen=True)
class GoldExample:
    id: str
    task: TaskKind
    context: str
    question: str
    gold_answers: tuple[GoldAnswer, ...]
    ambiguous: bool
    db_path: str | None = None
    # path as written in the file; db_path is resolved against the data root
    db_ref: str | None = field(default=None, compare=False)

    def to_record(self) -> dict:
        if self.task is TaskKind.SQL:
            golds = [g.text for g in self.gold_answers]
        else:
            golds = [list(g.variants) for g in self.gold_answers]
        rec = {
            "id": self.id,
            "task": self.task.value,
            "context": self.context,
            "question": self.question,
            "gold_answers": golds,
            "ambiguous": self.ambiguous,
        }
        if self.db_ref is not None or self.db_path is not None:
            rec["db_path"] = self.db_ref if self.db_ref is not None else self.db_path
        return rec


def _golds_from_record(raw, task: TaskKind, line: int) -> tuple[GoldAnswer, ...]:
    if not isinstance(raw, list) or not raw:
        raise SchemaViolation("gold_answers must be a non-empty list", line)
    golds = []
    for item in raw:
        variants = [item] if isinstance(item, str) else item
        if not isinstance(variants, list) or not variants or not all(isinstance(v, str) for v in variants):
            raise SchemaViolation("each gold answer is a string or a non-empty list of strings", line)
        if task is TaskKind.SQL and len(variants) != 1:
            raise SchemaViolation("SQL gold answers carry exactly one query", line)
        normed = [tuple(normalize_text(v)) for v in variants]
        if task is TaskKind.QA and len(set(normed)) != len(normed):
            raise SchemaViolation("gold answer variants must be distinct after normalization", line)
        golds.append(GoldAnswer(tuple(variants)))
    return tuple(golds)


def example_from_record(rec: dict, line: int | None = None, data_root: Path | None = None) -> GoldExample:
    if not isinstance(rec, dict):
        raise SchemaViolation("record must be a JSON object", line)
    for key in ("id", "task", "question", "gold_answers", "ambiguous"):
        if key not in rec:
            raise SchemaViolation(f"missing field {key!r}", line)
    try:
        task = TaskKind(rec["task"])
    except ValueError:
        raise SchemaViolation(f"unknown task {rec['task']!r}", line) from None
    if not isinstance(rec["ambiguous"], bool):
        raise SchemaViolation("ambiguous must be a boolean", line)
    golds = _golds_from_record(rec["gold_answers"], task, line)
    if rec["ambiguous"] != (len(golds) > 1):
        raise SchemaViolation("ambiguous must be true exactly when there is more than one gold answer", line)
    if task is TaskKind.QA:
        seen: dict[tuple, int] = {}
        for j, g in enumerate(golds):
            for v in g.variants:
                key = tuple(normalize_text(v))
                if seen.setdefault(key, j) != j:
                    raise SchemaViolation("gold answers must be pairwise distinct", line)
    db_ref = rec.get("db_path")
    db_path = None
    if task is TaskKind.SQL:
        if not db_ref:
            raise SchemaViolation("SQL records need db_path", line)
        p = Path(db_ref)
        if not p.is_absolute() and data_root is not None:
            p = data_root / p
        db_path = str(p)
    return GoldExample(
        id=str(rec["id"]),
        task=task,
        context=str(rec.get("context", "")),
        question=str(rec["question"]),
        gold_answers=golds,
        ambiguous=rec["ambiguous"],
        db_path=db_path,
        db_ref=db_ref,
    )


def _check_sql_golds(ex: GoldExample, line: int, cache: ExecutionCache) -> None:
    tables = []
    for g in ex.gold_answers:
        try:
            tables.append(cache.run(g.text, ex.db_path))
        except ExecutionError as exc:
            raise GoldExecutionFault(f"line {line}: example {ex.id}: {exc}") from exc
    for a in range(len(tables)):
        for b in range(a + 1, len(tables)):
            if results_equal(tables[a], tables[b]):
                raise SchemaViolation(f"example {ex.id}: gold queries {a} and {b} return equal results", line)


def load_dataset(
    path: str | Path,
    data_root: str | Path | None = None,
    *,
    check_sql: bool = True,
    cache: ExecutionCache | None = None,
) -> list[GoldExample]:
    """Load and validate a JSONL dataset; relative db paths resolve against ``data_root``
    (default: the dataset file's directory)."""
    path = Path(path)
    root = Path(data_root) if data_root is not None else path.parent
    cache = cache if cache is not None else ExecutionCache()
    examples = []
    ids = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON: {exc.msg}", lineno) from None
            ex = example_from_record(rec, lineno, root)
            if ex.id in ids:
                raise SchemaViolation(f"duplicate id {ex.id!r}", lineno)
            ids.add(ex.id)
            if check_sql and ex.task is TaskKind.SQL:
                _check_sql_golds(ex, lineno, cache)
            examples.append(ex)
    return examples


def dump_dataset(examples: Sequence[GoldExample], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_record(), ensure_ascii=False) + "\n")


class _ClassCycle:
    """Reshuffled cycling over one class: no repeats until the class is exhausted."""

    def __init__(self, items: Sequence, rng: np.random.Generator):
        self.items = list(items)
        self.rng = rng
        self.order: list[int] = []
        self.cycles = 0

    def next(self):
        if not self.order:
            self.order = list(self.rng.permutation(len(self.items)))
            self.cycles += 1
        return self.items[self.order.pop()]


def _is_ambiguous_slot(k: int, frac: float) -> bool:
    # exact long-run composition: the count of ambiguous slots among the first t
    # draws is floor(t * frac)
    return int(np.floor((k + 1) * frac + 1e-9)) > int(np.floor(k * frac + 1e-9))


def balanced_stream(
    examples: Sequence[GoldExample],
    ratio: float = 3.0,
    batch_size: int = 4,
    seed: int = 0,
) -> Iterator[list[GoldExample]]:
    """Infinite stream of batches with ``ratio`` ambiguous examples per unambiguous one.

    Composition is deterministic: with ratio 3 and batch size 4 every batch holds
    three ambiguous examples and one unambiguous example.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    amb = [e for e in examples if e.ambiguous]
    unamb = [e for e in examples if not e.ambiguous]
    if not amb or not unamb:
        raise EmptyClass("balanced_stream needs both ambiguous and unambiguous examples")
    rng = np.random.default_rng(seed)
    cycles = {True: _ClassCycle(amb, rng), False: _ClassCycle(unamb, rng)}
    frac = ratio / (ratio + 1.0)
    k = 0
    while True:
        batch = []
        for _ in range(batch_size):
            batch.append(cycles[_is_ambiguous_slot(k, frac)].next())
            k += 1
        yield batch


def parse_ratio(text: str | float) -> float:
    """Accept ``3``, ``3.0`` or ``3:1``."""
    if isinstance(text, (int, float)):
        return float(text)
    if ":" in text:
        a, b = text.split(":", 1)
        return float(a) / float(b)
    return float(text)
