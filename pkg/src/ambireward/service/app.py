"""FastAPI reward and evaluation service.

Dataset and fixtures are loaded once at startup and treated as read-only. Each
request gets its own execution cache; the judge cache is the only shared mutable
state and is internally locked.
"""
from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException

from ..config import Settings
from ..dapo import GroupRollout, group_advantage, keep_group
from ..data import load_dataset
from ..evaluation import evaluate_dump
from ..judge import HTTPChatClient, Judge, JudgeCache, JudgeUnavailable, StubChatClient
from ..reward import compute_reward
from ..similarity import ExecutionCache, GoldExecutionFault
from .schemas import (
    CompletionReward,
    DapoInfo,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    RewardRequest,
    RewardResponse,
)

log = logging.getLogger(__name__)


def build_judge(settings: Settings) -> Judge:
    js = settings.judge
    if js.kind == "http":
        if not js.url or not js.model:
            raise ValueError("http judge needs url and model")
        client = HTTPChatClient(js.url, js.model, js.api_key_env, js.timeout)
    else:
        client = StubChatClient()
    template = None
    if js.template:
        with open(js.template, encoding="utf-8") as fh:
            template = fh.read()
    return Judge(client, template, JudgeCache(js.cache_path), js.max_concurrency)


def create_app(settings: Settings, examples=None) -> FastAPI:
    if examples is None:
        if not settings.dataset:
            raise ValueError("settings.dataset is required")
        examples = load_dataset(settings.dataset, settings.data_root)
    by_id = {ex.id: ex for ex in examples}
    dapo_cfg = settings.dapo.to_config()
    judge = build_judge(settings)

    app = FastAPI(title="ambireward", version="1")
    app.state.examples = by_id
    app.state.judge = judge

    @app.get("/v1/health", response_model=HealthResponse)
    def health():
        n_amb = sum(ex.ambiguous for ex in by_id.values())
        return HealthResponse(status="ok", examples=len(by_id), ambiguous=n_amb, unambiguous=len(by_id) - n_amb)

    @app.post("/v1/reward", response_model=RewardResponse)
    def reward(req: RewardRequest):
        ex = by_id.get(req.example_id)
        if ex is None:
            raise HTTPException(404, f"unknown example_id {req.example_id!r}")
        if req.task is not None and req.task != ex.task:
            raise HTTPException(422, f"task {req.task.value!r} does not match example task {ex.task.value!r}")
        cache = ExecutionCache(settings.sql_timeout)
        try:
            outcomes = [compute_reward(c, ex, fmt=req.format, exec_cache=cache) for c in req.completions]
        except GoldExecutionFault as exc:
            raise HTTPException(500, str(exc)) from exc
        results = [
            CompletionReward(
                reward=o.reward, mode=o.mode.value, matched=o.matched,
                pred_count=o.pred_count, gold_count=o.gold_count, violations=o.violations,
            )
            for o in outcomes
        ]
        dapo = None
        if req.want_dapo:
            rewards = [o.reward for o in outcomes]
            kept = len(rewards) >= 2 and keep_group(
                GroupRollout(rewards, success_threshold=dapo_cfg.success_threshold),
                settings.dapo.filter_criterion,
            )
            dapo = DapoInfo(keep=kept, advantages=group_advantage(rewards).tolist() if kept else None)
        log.info("reward", extra={"example_id": ex.id, "n": len(results)})
        return RewardResponse(example_id=ex.id, results=results, dapo=dapo)

    @app.post("/v1/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest):
        records = [r.model_dump() for r in req.records]
        missing = [r["example_id"] for r in records if r["example_id"] not in by_id]
        if missing:
            raise HTTPException(404, f"unknown example_id(s): {missing[:5]}")
        try:
            report, _ = evaluate_dump(by_id, records, req.sim, judge=judge, fmt=req.format,
                                      exec_timeout=settings.sql_timeout)
        except JudgeUnavailable as exc:
            raise HTTPException(503, str(exc)) from exc
        except (GoldExecutionFault, ValueError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return EvaluateResponse.model_validate(report.to_dict())

    return app
