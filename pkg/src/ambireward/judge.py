"""LLM-as-judge equivalence client with a verdict contract and a result cache.

The judge must reply with ``correct`` or ``incorrect`` on its final line. Any other
reply is a malformed verdict, scored 0 and counted.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from .similarity import GoldAnswer, normalize_text


class JudgeUnavailable(RuntimeError):
    pass


class JudgeMalformedVerdict(ValueError):
    pass


def default_template() -> str:
    return resources.files("ambireward").joinpath("templates/judge.txt").read_text(encoding="utf-8")


def parse_verdict(reply: str) -> bool:
    lines = [ln for ln in reply.strip().splitlines() if ln.strip()]
    if not lines:
        raise JudgeMalformedVerdict("empty judge reply")
    token = lines[-1].strip().strip("*_`'\".:!() \t").lower()
    if token == "correct":
        return True
    if token == "incorrect":
        return False
    raise JudgeMalformedVerdict(f"unrecognised verdict {lines[-1]!r}")


class ChatClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class HTTPChatClient:
    """OpenAI-compatible ``/chat/completions`` client."""

    def __init__(
        self,
        url: str,
        model: str,
        api_key_env: str = "AMBIREWARD_JUDGE_API_KEY",
        timeout: float = 60.0,
    ):
        self.url = url
        self.model = model
        self.api_key = os.environ.get(api_key_env)
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.0,
        }
        try:
            resp = httpx.post(self.url, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise JudgeUnavailable(f"judge request failed: {exc}") from exc


class StubChatClient:
    """Deterministic offline judge: the gold's normalized tokens must appear,
    contiguously, in the prediction's normalized tokens."""

    def complete(self, prompt: str) -> str:
        gold = _field(prompt, "GOLD")
        pred = _field(prompt, "PREDICTION")
        g, p = normalize_text(gold), normalize_text(pred)
        hit = bool(g) and any(p[k : k + len(g)] == g for k in range(len(p) - len(g) + 1))
        return "correct" if hit else "incorrect"


def _field(prompt: str, name: str) -> str:
    start = prompt.index(f"<{name}>") + len(name) + 2
    return prompt[start : prompt.index(f"</{name}>", start)]


class JudgeCache:
    """Thread-safe memo of judge replies, optionally persisted as JSONL."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._store: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._store[rec["key"]] = rec["reply"]

    @staticmethod
    def key(template: str, context: str, question: str, gold: str, prediction: str) -> str:
        h = hashlib.sha256()
        for part in (hashlib.sha256(template.encode()).hexdigest(), context, question, gold, prediction):
            h.update(part.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    def get(self, key: str) -> str | None:
        with self._lock:
            return self._store.get(key)

    def put(self, key: str, reply: str) -> None:
        with self._lock:
            if key in self._store:
                return
            self._store[key] = reply
            if self.path:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "reply": reply}) + "\n")

    def __len__(self) -> int:
        return len(self._store)


class Judge:
    def __init__(
        self,
        client: ChatClient,
        template: str | None = None,
        cache: JudgeCache | None = None,
        max_concurrency: int = 8,
    ):
        self.client = client
        self.template = template or default_template()
        self.cache = cache if cache is not None else JudgeCache()
        self.max_concurrency = max_concurrency
        self.malformed = 0
        self._lock = threading.Lock()

    def reply(self, context: str, question: str, gold: str, prediction: str) -> str:
        key = JudgeCache.key(self.template, context, question, gold, prediction)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        prompt = self.template.format(context=context, question=question, gold=gold, prediction=prediction)
        out = self.client.complete(prompt)
        self.cache.put(key, out)
        return out

    def equivalent(self, context: str, question: str, gold: GoldAnswer, prediction: str) -> tuple[bool, int]:
        """Verdict over all paraphrases of ``gold``; also returns the malformed count."""
        malformed = 0
        for variant in gold.variants:
            try:
                if parse_verdict(self.reply(context, question, variant, prediction)):
                    return True, malformed
            except JudgeMalformedVerdict:
                malformed += 1
        return False, malformed


def judge_matrix(
    preds: Sequence[str],
    golds: Sequence[GoldAnswer],
    judge: Judge,
    context: str = "",
    question: str = "",
) -> tuple[np.ndarray, int]:
    """Binary |P| x |A| grid of judge verdicts, plus the malformed-verdict count."""
    cells = [(i, j) for i in range(len(preds)) for j in range(len(golds))]
    S = np.zeros((len(preds), len(golds)))
    if not cells:
        return S, 0

    def run(cell):
        i, j = cell
        return judge.equivalent(context, question, golds[j], preds[i])

    with ThreadPoolExecutor(max_workers=max(1, judge.max_concurrency)) as pool:
        results = list(pool.map(run, cells))
    malformed = 0
    for (i, j), (ok, bad) in zip(cells, results):
        S[i, j] = float(ok)
        malformed += bad
    with judge._lock:
        judge.malformed += malformed
    return S, malformed


class JudgeOracle:
    """Adapter so the judge can back reward-style similarity grids."""

    binary = True

    def __init__(self, judge: Judge):
        self.judge = judge
        self.malformed = 0

    def matrix(self, preds, golds, example=None) -> np.ndarray:
        ctx = example.context if example is not None else ""
        q = example.question if example is not None else ""
        S, bad = judge_matrix(preds, golds, self.judge, ctx, q)
        self.malformed += bad
        return S
