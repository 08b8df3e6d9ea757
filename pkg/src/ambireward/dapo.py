"""DAPO objective numerics: group advantages, decoupled clipping, token-level loss.

Everything is float64. Importance ratios are formed as ``exp(logp_new - logp_old)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

STD_EPS = 1e-12


class DegenerateGroup(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DapoConfig:
    eps_low: float = 0.2
    eps_high: float = 0.28
    group_size: int = 16
    max_completion_tokens: int = 2500
    success_threshold: float = 0.999

    def __post_init__(self):
        if not (0 < self.eps_low < 1 and 0 < self.eps_high < 1):
            raise ValueError("eps_low and eps_high must lie in (0, 1)")
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")


@dataclass
class GroupRollout:
    rewards: list[float]
    success_flags: list[bool] | None = None
    success_threshold: float = 0.999

    def __post_init__(self):
        if len(self.rewards) < 2:
            raise ValueError("a rollout group needs at least 2 completions")
        if self.success_flags is None:
            self.success_flags = [r >= self.success_threshold for r in self.rewards]
        elif len(self.success_flags) != len(self.rewards):
            raise ShapeMismatch("success_flags and rewards differ in length")


@dataclass
class TokenBatch:
    logp_new: list[np.ndarray]
    logp_old: list[np.ndarray]
    lengths: list[int] = field(init=False)

    def __post_init__(self):
        self.logp_new = [np.asarray(x, dtype=np.float64).reshape(-1) for x in self.logp_new]
        self.logp_old = [np.asarray(x, dtype=np.float64).reshape(-1) for x in self.logp_old]
        if len(self.logp_new) != len(self.logp_old):
            raise ShapeMismatch("new/old log-prob lists differ in completion count")
        for a, b in zip(self.logp_new, self.logp_old):
            if a.shape != b.shape:
                raise ShapeMismatch(f"token count mismatch: {a.shape} vs {b.shape}")
        for a in (*self.logp_new, *self.logp_old):
            if a.size and a.max() > 0:
                raise ValueError("log-probabilities must be <= 0")
        self.lengths = [a.size for a in self.logp_new]


def group_advantage(rewards: Sequence[float]) -> np.ndarray:
    """(R_i - mean) / population std over one rollout group."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.size < 2:
        raise DegenerateGroup("a group needs at least 2 rewards")
    std = r.std()
    if std < STD_EPS:
        raise DegenerateGroup("all rewards in the group are identical")
    return (r - r.mean()) / std


def keep_group(
    group: GroupRollout,
    criterion: Literal["success", "variance", "both"] = "both",
) -> bool:
    n_ok = sum(bool(f) for f in group.success_flags)
    mixed = 0 < n_ok < len(group.rewards)
    varied = float(np.std(np.asarray(group.rewards, dtype=np.float64))) >= STD_EPS
    if criterion == "success":
        return mixed
    if criterion == "variance":
        return varied
    return mixed and varied


def dynamic_sampling_filter(
    groups: Sequence[GroupRollout],
    criterion: Literal["success", "variance", "both"] = "both",
) -> list[GroupRollout]:
    """Drop prompts whose sampled completions all succeed or all fail."""
    return [g for g in groups if keep_group(g, criterion)]


def _flatten(batch: TokenBatch, advantages) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    adv = np.asarray(advantages, dtype=np.float64).reshape(-1)
    if adv.size != len(batch.lengths):
        raise ShapeMismatch(f"{adv.size} advantages for {len(batch.lengths)} completions")
    if sum(batch.lengths) == 0:
        raise ShapeMismatch("batch has no tokens")
    new = np.concatenate(batch.logp_new)
    old = np.concatenate(batch.logp_old)
    return new - old, np.repeat(adv, batch.lengths), new


def _terms(log_ratio: np.ndarray, adv: np.ndarray, cfg: DapoConfig):
    r = np.exp(log_ratio)
    unclipped = r * adv
    clipped = np.clip(r, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high) * adv
    # boundary tokens count as unclipped
    clip_active = clipped < unclipped
    return np.where(clip_active, clipped, unclipped), r, clip_active


def token_terms(batch: TokenBatch, advantages, cfg: DapoConfig = DapoConfig()) -> list[np.ndarray]:
    log_ratio, adv, _ = _flatten(batch, advantages)
    terms, _, _ = _terms(log_ratio, adv, cfg)
    return np.split(terms, np.cumsum(batch.lengths)[:-1])


def dapo_objective(batch: TokenBatch, advantages, cfg: DapoConfig = DapoConfig()) -> float:
    log_ratio, adv, _ = _flatten(batch, advantages)
    terms, _, _ = _terms(log_ratio, adv, cfg)
    return float(terms.sum() / terms.size)


def dapo_gradient(batch: TokenBatch, advantages, cfg: DapoConfig = DapoConfig()) -> list[np.ndarray]:
    """dJ/d logp_new per token: r*A/N where the unclipped branch is active, else 0."""
    log_ratio, adv, _ = _flatten(batch, advantages)
    _, r, clip_active = _terms(log_ratio, adv, cfg)
    grad = np.where(clip_active, 0.0, r * adv) / r.size
    return np.split(grad, np.cumsum(batch.lengths)[:-1])
