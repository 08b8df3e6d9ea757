"""Declarative configuration (YAML) with environment overrides for secrets."""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field

from .dapo import DapoConfig

ENV_PREFIX = "AMBIREWARD_"


class JudgeSettings(BaseModel):
    kind: Literal["stub", "http"] = "stub"
    url: str | None = None
    model: str | None = None
    api_key_env: str = "AMBIREWARD_JUDGE_API_KEY"
    template: str | None = None
    timeout: float = 60.0
    max_concurrency: int = Field(8, ge=1)
    cache_path: str | None = None


class DapoSettings(BaseModel):
    eps_low: float = 0.2
    eps_high: float = 0.28
    group_size: int = 16
    max_completion_tokens: int = 2500
    success_threshold: float = 0.999
    filter_criterion: Literal["success", "variance", "both"] = "both"

    def to_config(self) -> DapoConfig:
        return DapoConfig(self.eps_low, self.eps_high, self.group_size, self.max_completion_tokens, self.success_threshold)


class Settings(BaseModel):
    dataset: str | None = None
    data_root: str | None = None
    ratio: float = 3.0
    batch_size: int = 4
    seed: int = 0
    sql_timeout: float = 5.0
    output_format: Literal["pairs", "answers"] = "pairs"
    host: str = "127.0.0.1"
    port: int = 8000
    dapo: DapoSettings = DapoSettings()
    judge: JudgeSettings = JudgeSettings()


def load_settings(path: str | Path | None = None, **overrides) -> Settings:
    data: dict = {}
    if path is not None:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    env_url = os.environ.get(ENV_PREFIX + "JUDGE_URL")
    if env_url:
        data.setdefault("judge", {})["url"] = env_url
    data.update({k: v for k, v in overrides.items() if v is not None})
    return Settings.model_validate(data)


class JsonLogFormatter(logging.Formatter):
    _skip = set(logging.LogRecord("", 0, "", 0, "", (), None).__dict__) | {"message", "asctime"}

    def format(self, record: logging.LogRecord) -> str:
        out = {"level": record.levelname, "logger": record.name, "msg": record.getMessage()}
        out.update({k: v for k, v in record.__dict__.items() if k not in self._skip})
        return json.dumps(out, default=str)


def setup_logging(level: str = "INFO") -> None:
    handler = logging.StreamHandler()
    handler.setFormatter(JsonLogFormatter())
    root = logging.getLogger("ambireward")
    root.handlers[:] = [handler]
    root.setLevel(level)
