"""Recall / precision rewards over optimally matched answers.

Ambiguous examples (more than one gold answer) are rewarded by recall, the matched
similarity mass divided by the number of golds. Unambiguous examples are rewarded
by precision, the same mass divided by the number of predicted answers.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .assignment import matched_triples, optimal_assignment
from .oracles import ExecOracle, SimilarityOracle, TextOracle
from .parsing import (
    InterpretationAnswerPair,
    ParseError,
    StructuredResponse,
    TaskKind,
    parse_answers_only_response,
    parse_interpretation_answer,
)
from .similarity import ExecutionCache, ExecutionError, results_equal

log = logging.getLogger(__name__)


class RewardMode(str, Enum):
    RECALL = "RECALL"
    PRECISION = "PRECISION"
    FORMAT_FAILURE = "FORMAT_FAILURE"


@dataclass
class RewardOutcome:
    reward: float
    mode: RewardMode
    matched: list[tuple[int, int, float]]
    pred_count: int
    gold_count: int
    violations: list[str] = field(default_factory=list)
    intended_mode: RewardMode | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["intended_mode"] = self.intended_mode.value if self.intended_mode else None
        d["matched"] = [list(t) for t in self.matched]
        return d


def mode_for(gold_count: int) -> RewardMode:
    return RewardMode.RECALL if gold_count > 1 else RewardMode.PRECISION


def default_oracle(example, exec_cache: ExecutionCache | None = None) -> SimilarityOracle:
    if TaskKind(example.task) is TaskKind.SQL:
        return ExecOracle(example.db_path, exec_cache)
    return TextOracle()


def parse_completion(completion: str, task, fmt: str = "pairs") -> StructuredResponse:
    if fmt == "answers":
        return parse_answers_only_response(completion, task)
    return parse_interpretation_answer(completion, task)


def reward_from_matrix(S: np.ndarray) -> tuple[float, RewardMode, list[tuple[int, int, float]]]:
    """Mode dispatch on the number of golds (columns) plus optimal matching."""
    n_pred, n_gold = S.shape
    mode = mode_for(n_gold)
    a = optimal_assignment(S)
    denom = n_gold if mode is RewardMode.RECALL else n_pred
    reward = a.value / denom if denom else 0.0
    return min(max(reward, 0.0), 1.0), mode, matched_triples(S, a)


def compute_reward(
    completion: str,
    example,
    sim: SimilarityOracle | None = None,
    *,
    fmt: str = "pairs",
    exec_cache: ExecutionCache | None = None,
) -> RewardOutcome:
    golds = list(example.gold_answers)
    intended = mode_for(len(golds))
    try:
        parsed = parse_completion(completion, example.task, fmt)
    except ParseError as exc:
        log.info("format failure", extra={"example_id": example.id, "code": exc.code})
        return RewardOutcome(0.0, RewardMode.FORMAT_FAILURE, [], 0, len(golds), [exc.code], intended)
    preds = parsed.answers
    sim = sim or default_oracle(example, exec_cache)
    S = sim.matrix(preds, golds, example)
    reward, mode, matched = reward_from_matrix(S)
    return RewardOutcome(reward, mode, matched, len(preds), len(golds), parsed.format_violations, intended)


def dedupe_by_execution(
    pairs: list[InterpretationAnswerPair],
    db: str | Path,
    cache: ExecutionCache | None = None,
) -> list[InterpretationAnswerPair]:
    """Keep the first pair for each distinct execution result.

    Pairs whose query fails to execute are all kept.
    """
    cache = cache if cache is not None else ExecutionCache()
    seen = []
    kept = []
    for pair in pairs:
        try:
            table = cache.run(pair.answer, db)
        except ExecutionError:
            kept.append(pair)
            continue
        if any(results_equal(table, other) for other in seen):
            continue
        seen.append(table)
        kept.append(pair)
    return kept
