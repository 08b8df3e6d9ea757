"""Rewards and evaluation for interpretation-answer outputs on ambiguous requests."""
from .assignment import Assignment, binary_match_count, optimal_assignment
from .dapo import (
    DapoConfig,
    DegenerateGroup,
    GroupRollout,
    ShapeMismatch,
    TokenBatch,
    dapo_gradient,
    dapo_objective,
    dynamic_sampling_filter,
    group_advantage,
)
from .data import EmptyClass, GoldExample, SchemaViolation, balanced_stream, dump_dataset, load_dataset
from .evaluation import EvalReport, SimMode, aggregate, evaluate_example, legacy_overlap_f1, reasoning_length
from .judge import Judge, JudgeCache, StubChatClient, judge_matrix
from .parsing import (
    InterpretationAnswerPair,
    MissingSqlBlock,
    NoAnswerBlock,
    NoPairs,
    ParseError,
    StructuredResponse,
    TaskKind,
    parse_answers_only,
    parse_interpretation_answer,
    render_template,
)
from .reward import RewardMode, RewardOutcome, compute_reward, dedupe_by_execution
from .similarity import (
    ExecutionError,
    GoldAnswer,
    GoldExecutionFault,
    ResultTable,
    execute_sql,
    f1_overlap,
    normalize_text,
    sim_exec,
    sim_text,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "DapoConfig",
    "DegenerateGroup",
    "EmptyClass",
    "EvalReport",
    "ExecutionError",
    "GoldAnswer",
    "GoldExample",
    "GoldExecutionFault",
    "GroupRollout",
    "InterpretationAnswerPair",
    "Judge",
    "JudgeCache",
    "MissingSqlBlock",
    "NoAnswerBlock",
    "NoPairs",
    "ParseError",
    "ResultTable",
    "RewardMode",
    "RewardOutcome",
    "SchemaViolation",
    "ShapeMismatch",
    "SimMode",
    "StructuredResponse",
    "StubChatClient",
    "TaskKind",
    "TokenBatch",
    "aggregate",
    "balanced_stream",
    "binary_match_count",
    "compute_reward",
    "dapo_gradient",
    "dapo_objective",
    "dedupe_by_execution",
    "dump_dataset",
    "dynamic_sampling_filter",
    "evaluate_example",
    "execute_sql",
    "f1_overlap",
    "group_advantage",
    "judge_matrix",
    "legacy_overlap_f1",
    "load_dataset",
    "normalize_text",
    "optimal_assignment",
    "parse_answers_only",
    "parse_interpretation_answer",
    "reasoning_length",
    "render_template",
    "sim_exec",
    "sim_text",
]
