"""Similarity functions between a predicted answer and a gold answer.

QA answers are compared with token-overlap F1 (max over paraphrase variants);
SQL answers are compared by executing both queries against a SQLite database.
"""
from __future__ import annotations

import math
import re
import sqlite3
import string
import threading
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

FLOAT_ATOL = 1e-6
DEFAULT_TIMEOUT = 5.0

_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


class ExecutionError(RuntimeError):
    """A query could not be executed (syntax, schema, timeout)."""


class GoldExecutionFault(RuntimeError):
    """A gold query failed to execute; the benchmark record is corrupt."""


@dataclass(frozen=True)
class GoldAnswer:
    """One gold interpretation's answer, with acceptable paraphrases."""

    variants: tuple[str, ...]

    def __post_init__(self):
        if not self.variants:
            raise ValueError("GoldAnswer needs at least one variant")
        object.__setattr__(self, "variants", tuple(self.variants))

    @classmethod
    def of(cls, value: str | Sequence[str]) -> "GoldAnswer":
        if isinstance(value, str):
            return cls((value,))
        return cls(tuple(value))

    @property
    def text(self) -> str:
        return self.variants[0]


def normalize_text(s: str) -> list[str]:
    """Lowercase, strip punctuation, drop articles, split on whitespace."""
    s = s.lower().translate(_PUNCT_TABLE)
    s = _ARTICLES_RE.sub(" ", s)
    return s.split()


def f1_overlap(pred: str, gold: str) -> float:
    pred_tokens = normalize_text(pred)
    gold_tokens = normalize_text(gold)
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred_tokens)
    recall = common / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def sim_text(pred: str, gold: GoldAnswer) -> float:
    return max(f1_overlap(pred, v) for v in gold.variants)


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[tuple[Any, ...], ...]
    column_count: int

    def __post_init__(self):
        for row in self.rows:
            if len(row) != self.column_count:
                raise ValueError("row width does not match column_count")

    def canonical_rows(self) -> list[tuple[Any, ...]]:
        return sorted(self.rows, key=_row_key)


def _cell_key(v: Any) -> tuple:
    if v is None:
        return (0, 0)
    if isinstance(v, (int, float)):
        return (1, float(v))
    if isinstance(v, str):
        return (2, v)
    return (3, bytes(v))


def _row_key(row: tuple) -> tuple:
    return tuple(_cell_key(v) for v in row)


def _cells_equal(a: Any, b: Any) -> bool:
    if a is None or b is None:
        return a is None and b is None
    num_a, num_b = isinstance(a, (int, float)), isinstance(b, (int, float))
    if num_a or num_b:
        return num_a and num_b and math.isclose(a, b, rel_tol=0.0, abs_tol=FLOAT_ATOL)
    return type(a) is type(b) and a == b


def results_equal(a: ResultTable, b: ResultTable) -> bool:
    """Multiset-of-rows equality; row order ignored, column order significant."""
    if a.column_count != b.column_count or len(a.rows) != len(b.rows):
        return False
    return all(
        all(_cells_equal(x, y) for x, y in zip(ra, rb))
        for ra, rb in zip(a.canonical_rows(), b.canonical_rows())
    )


def execute_sql(query: str, db: str | Path, timeout: float = DEFAULT_TIMEOUT) -> ResultTable:
    """Run a query read-only against a SQLite file.

    Raises ExecutionError on any failure, including exceeding ``timeout`` seconds.
    """
    path = Path(db)
    if not path.is_file():
        raise ExecutionError(f"database not found: {path}")
    uri = f"{path.resolve().as_uri()}?mode=ro"
    try:
        conn = sqlite3.connect(uri, uri=True, check_same_thread=False)
    except sqlite3.Error as exc:
        raise ExecutionError(str(exc)) from exc
    deadline = time.monotonic() + timeout
    conn.set_progress_handler(lambda: int(time.monotonic() > deadline), 10_000)
    try:
        conn.execute("PRAGMA query_only = ON")
        cur = conn.execute(query)
        rows = cur.fetchall()
        width = len(cur.description) if cur.description else 0
    except (sqlite3.Error, sqlite3.Warning, ValueError, OverflowError) as exc:
        if time.monotonic() > deadline:
            raise ExecutionError(f"query exceeded {timeout}s timeout") from exc
        raise ExecutionError(str(exc)) from exc
    finally:
        conn.close()
    return ResultTable(tuple(tuple(r) for r in rows), width)


class ExecutionCache:
    """Per-batch memo of execution outcomes keyed on (query, db path)."""

    def __init__(self, timeout: float = DEFAULT_TIMEOUT):
        self.timeout = timeout
        self._store: dict[tuple[str, str], ResultTable | ExecutionError] = {}
        self._lock = threading.Lock()

    def run(self, query: str, db: str | Path) -> ResultTable:
        key = (query, str(Path(db).resolve()))
        with self._lock:
            hit = self._store.get(key)
        if hit is None:
            try:
                hit = execute_sql(query, db, self.timeout)
            except ExecutionError as exc:
                hit = exc
            with self._lock:
                self._store[key] = hit
        if isinstance(hit, ExecutionError):
            raise hit
        return hit

    def __len__(self) -> int:
        return len(self._store)


def sim_exec(pred_query: str, gold_query: str, db: str | Path, cache: ExecutionCache | None = None) -> int:
    cache = cache if cache is not None else ExecutionCache()
    try:
        gold = cache.run(gold_query, db)
    except ExecutionError as exc:
        raise GoldExecutionFault(f"gold query failed: {exc}") from exc
    try:
        pred = cache.run(pred_query, db)
    except ExecutionError:
        return 0
    return int(results_equal(pred, gold))
