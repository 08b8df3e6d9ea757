"""Evaluation metrics over completion dumps.

Per example: recall and precision of the optimal matching, full coverage
(recall of 1), single coverage (at least one exactly matched gold), the legacy
max-over-predictions overlap F1, and reasoning length in characters. Results are
macro-averaged per subset and reported as percentages.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .assignment import optimal_assignment
from .judge import Judge, JudgeOracle
from .oracles import ExecOracle, TextOracle
from .parsing import ParseError, TaskKind, split_answer_block
from .reward import parse_completion
from .similarity import ExecutionCache, sim_text

FULL_COVERAGE_TOL = 1e-9
SINGLE_COVERAGE_SIM = 0.999


class SimMode(str, Enum):
    JUDGE = "judge"
    OVERLAP = "overlap"
    EXEC = "exec"


@dataclass
class ExampleMetrics:
    example_id: str
    ambiguous: bool
    recall: float
    precision: float
    full_coverage: bool
    single_coverage: bool
    legacy_overlap_f1: float | None
    reasoning_chars: int
    parse_failure: bool
    n_pred: int
    n_gold: int
    judge_malformed: int = 0


@dataclass
class SubsetReport:
    recall: float
    precision: float
    full_coverage: float
    single_coverage: float
    legacy_overlap_f1: float | None
    mean_reasoning_chars: float
    n_examples: int
    n_parse_failures: int
    n_judge_malformed: int


@dataclass
class EvalReport:
    subsets: dict[str, SubsetReport]
    sim_mode: str

    def to_dict(self) -> dict:
        return {"sim_mode": self.sim_mode, "subsets": {k: asdict(v) for k, v in self.subsets.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_table(self) -> str:
        cols = ["subset", "n", "recall", "precision", "full_cov", "single_cov", "overlap_f1", "reason_chars", "parse_fail"]
        rows = []
        for name, s in self.subsets.items():
            f1 = "-" if s.legacy_overlap_f1 is None else f"{s.legacy_overlap_f1:.1f}"
            rows.append([
                name, str(s.n_examples), f"{s.recall:.1f}", f"{s.precision:.1f}", f"{s.full_coverage:.1f}",
                f"{s.single_coverage:.1f}", f1, f"{s.mean_reasoning_chars:.0f}", str(s.n_parse_failures),
            ])
        widths = [max(len(c), *(len(r[k]) for r in rows)) if rows else len(c) for k, c in enumerate(cols)]
        fmt = lambda r: "  ".join(x.rjust(w) for x, w in zip(r, widths))  # noqa: E731
        out = [fmt(cols), fmt(["-" * w for w in widths])]
        out += [fmt(r) for r in rows]
        return "\n".join(out)


def reasoning_length(completion: str) -> int:
    """Characters before the answer block; the whole completion when there is none."""
    split = split_answer_block(completion)
    return len(completion) if split is None else len(split[0])


def legacy_overlap_f1(example, completion: str, *, fmt: str = "pairs") -> float:
    """Mean over golds of the best F1 against any prediction (no one-to-one constraint)."""
    try:
        preds = parse_completion(completion, example.task, fmt).answers
    except ParseError:
        return 0.0
    return legacy_overlap_from_preds(preds, example.gold_answers)


def legacy_overlap_from_preds(preds: Sequence[str], golds) -> float:
    if not preds:
        return 0.0
    return math.fsum(max(sim_text(p, g) for p in preds) for g in golds) / len(golds)


def _oracle(example, sim_mode: SimMode, judge: Judge | None, exec_cache: ExecutionCache | None):
    if sim_mode is SimMode.JUDGE:
        if judge is None:
            raise ValueError("judge mode needs a Judge")
        return JudgeOracle(judge)
    if sim_mode is SimMode.EXEC:
        if TaskKind(example.task) is not TaskKind.SQL:
            raise ValueError(f"exec similarity needs a SQL example, got {example.id}")
        return ExecOracle(example.db_path, exec_cache)
    return TextOracle()


def evaluate_example(
    example,
    completion: str,
    sim_mode: SimMode | str = SimMode.OVERLAP,
    *,
    judge: Judge | None = None,
    exec_cache: ExecutionCache | None = None,
    fmt: str = "pairs",
) -> ExampleMetrics:
    sim_mode = SimMode(sim_mode)
    n_gold = len(example.gold_answers)
    is_qa = TaskKind(example.task) is TaskKind.QA
    chars = reasoning_length(completion)
    try:
        parsed = parse_completion(completion, example.task, fmt)
    except ParseError:
        return ExampleMetrics(example.id, example.ambiguous, 0.0, 0.0, False, False,
                              0.0 if is_qa else None, chars, True, 0, n_gold)

    preds = parsed.answers
    oracle = _oracle(example, sim_mode, judge, exec_cache)
    S = oracle.matrix(preds, example.gold_answers, example)
    a = optimal_assignment(S)
    recall = a.value / n_gold
    precision = a.value / len(preds)
    single = any(S[i, j] >= SINGLE_COVERAGE_SIM for i, j in a.matches)
    f1 = legacy_overlap_from_preds(preds, example.gold_answers) if is_qa else None
    return ExampleMetrics(
        example_id=example.id,
        ambiguous=example.ambiguous,
        recall=min(recall, 1.0),
        precision=min(precision, 1.0),
        full_coverage=recall >= 1.0 - FULL_COVERAGE_TOL,
        single_coverage=single,
        legacy_overlap_f1=f1,
        reasoning_chars=chars,
        parse_failure=False,
        n_pred=len(preds),
        n_gold=n_gold,
        judge_malformed=getattr(oracle, "malformed", 0),
    )


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs) if xs else 0.0


def aggregate(results: Iterable[ExampleMetrics], labels: Sequence[str] | None = None, sim_mode: str = "") -> EvalReport:
    """Macro-average per subset, as percentages.

    ``labels`` defaults to ``ambiguous`` / ``unambiguous`` from each result. For the
    unambiguous subset the coverage headline is recall, so full_coverage reports it.
    """
    results = list(results)
    if labels is None:
        labels = ["ambiguous" if r.ambiguous else "unambiguous" for r in results]
    groups: dict[str, list[ExampleMetrics]] = {}
    for label, r in zip(labels, results):
        groups.setdefault(label, []).append(r)
    subsets = {}
    for name in sorted(groups):
        rs = groups[name]
        recall = 100 * _mean([r.recall for r in rs])
        full = 100 * _mean([float(r.full_coverage) for r in rs])
        if name == "unambiguous":
            full = recall
        f1s = [r.legacy_overlap_f1 for r in rs if r.legacy_overlap_f1 is not None]
        subsets[name] = SubsetReport(
            recall=recall,
            precision=100 * _mean([r.precision for r in rs]),
            full_coverage=full,
            single_coverage=100 * _mean([float(r.single_coverage) for r in rs]),
            legacy_overlap_f1=100 * _mean(f1s) if f1s else None,
            mean_reasoning_chars=_mean([r.reasoning_chars for r in rs]),
            n_examples=len(rs),
            n_parse_failures=sum(r.parse_failure for r in rs),
            n_judge_malformed=sum(r.judge_malformed for r in rs),
        )
    return EvalReport(subsets, sim_mode)


def read_dump(path: str | Path) -> list[dict]:
    """Completion dump: JSONL records ``{"example_id": ..., "completion_text": ...}``."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "example_id" not in rec or "completion_text" not in rec:
                raise ValueError(f"line {lineno}: dump records need example_id and completion_text")
            records.append(rec)
    return records


def evaluate_dump(
    examples_by_id: dict,
    records: Sequence[dict],
    sim_mode: SimMode | str = SimMode.OVERLAP,
    *,
    judge: Judge | None = None,
    fmt: str = "pairs",
    exec_timeout: float | None = None,
) -> tuple[EvalReport, list[ExampleMetrics]]:
    sim_mode = SimMode(sim_mode)
    cache = ExecutionCache(exec_timeout) if exec_timeout else ExecutionCache()
    per = []
    for rec in records:
        ex = examples_by_id.get(rec["example_id"])
        if ex is None:
            raise KeyError(f"unknown example_id {rec['example_id']!r}")
        per.append(evaluate_example(ex, rec["completion_text"], sim_mode, judge=judge, exec_cache=cache, fmt=fmt))
    return aggregate(per, sim_mode=sim_mode.value), per
