"""Wire models for the reward service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..parsing import TaskKind


class RewardRequest(BaseModel):
    example_id: str
    completions: list[str] = Field(min_length=1)
    task: Optional[TaskKind] = None
    want_dapo: bool = False
    format: Literal["pairs", "answers"] = "pairs"


class CompletionReward(BaseModel):
    reward: float
    mode: str
    matched: list[tuple[int, int, float]]
    pred_count: int
    gold_count: int
    violations: list[str]


class DapoInfo(BaseModel):
    keep: bool
    advantages: Optional[list[float]] = None


class RewardResponse(BaseModel):
    example_id: str
    results: list[CompletionReward]
    dapo: Optional[DapoInfo] = None


class DumpRecord(BaseModel):
    example_id: str
    completion_text: str


class EvaluateRequest(BaseModel):
    records: list[DumpRecord]
    sim: Literal["judge", "overlap", "exec"] = "overlap"
    format: Literal["pairs", "answers"] = "pairs"


class SubsetReportModel(BaseModel):
    recall: float
    precision: float
    full_coverage: float
    single_coverage: float
    legacy_overlap_f1: Optional[float]
    mean_reasoning_chars: float
    n_examples: int
    n_parse_failures: int
    n_judge_malformed: int


class EvaluateResponse(BaseModel):
    sim_mode: str
    subsets: dict[str, SubsetReportModel]


class HealthResponse(BaseModel):
    status: str
    examples: int
    ambiguous: int
    unambiguous: int
