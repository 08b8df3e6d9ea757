"""Similarity oracles: build the |P| x |A| score grid for one example."""
from __future__ import annotations

from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .similarity import ExecutionCache, GoldAnswer, sim_exec, sim_text


class SimilarityOracle(Protocol):
    binary: bool

    def matrix(self, preds: Sequence[str], golds: Sequence[GoldAnswer], example=None) -> np.ndarray: ...


class TextOracle:
    """Token-overlap F1, max over each gold's paraphrases."""

    binary = False

    def matrix(self, preds, golds, example=None) -> np.ndarray:
        S = np.zeros((len(preds), len(golds)))
        for i, p in enumerate(preds):
            for j, g in enumerate(golds):
                S[i, j] = sim_text(p, g)
        return S


class ExecOracle:
    """Binary execution match against the example's database."""

    binary = True

    def __init__(self, db: str | Path | None = None, cache: ExecutionCache | None = None):
        self.db = db
        self.cache = cache if cache is not None else ExecutionCache()

    def matrix(self, preds, golds, example=None) -> np.ndarray:
        db = self.db if self.db is not None else example.db_path
        S = np.zeros((len(preds), len(golds)))
        for j, g in enumerate(golds):
            for i, p in enumerate(preds):
                S[i, j] = sim_exec(p, g.text, db, self.cache)
        return S
