"""Shared builders and hypothesis strategies for the test suite."""
from __future__ import annotations

import itertools
import math
import string

from hypothesis import strategies as st

from ambireward.data import GoldExample
from ambireward.parsing import InterpretationAnswerPair, TaskKind, render_template
from ambireward.similarity import GoldAnswer

WORDS = ["luca", "mike", "comrie", "his", "name", "was", "son", "husband", "two", "years",
         "the", "a", "of", "call", "wild", "hockey", "player", "2010", "2012", "unknown"]


def qa_example(golds, ex_id="qa-1", context="ctx", question="What is his name?") -> GoldExample:
    gold_answers = tuple(GoldAnswer.of(g) for g in golds)
    return GoldExample(ex_id, TaskKind.QA, context, question, gold_answers, len(gold_answers) > 1)


def qa_completion(answers, reasoning="thinking\n") -> str:
    pairs = [InterpretationAnswerPair(k, f"Reading {k}", a) for k, a in enumerate(answers, 1)]
    return reasoning + render_template(pairs, TaskKind.QA)


def brute_force_assignment_value(S) -> float:
    """Exhaustive max over all injective mappings of the smaller side."""
    m, n = len(S), len(S[0]) if len(S) else 0
    if m == 0 or n == 0:
        return 0.0
    best = -1.0
    if m <= n:
        for cols in itertools.permutations(range(n), m):
            best = max(best, math.fsum(S[i][c] for i, c in enumerate(cols)))
    else:
        for rows in itertools.permutations(range(m), n):
            best = max(best, math.fsum(S[r][j] for j, r in enumerate(rows)))
    return best


def augmenting_path_matching(B) -> int:
    """Kuhn's augmenting-path maximum bipartite matching on a 0/1 grid."""
    m = len(B)
    n = len(B[0]) if m else 0
    match_of_col = [-1] * n

    def try_row(i, seen):
        for j in range(n):
            if B[i][j] and not seen[j]:
                seen[j] = True
                if match_of_col[j] == -1 or try_row(match_of_col[j], seen):
                    match_of_col[j] = i
                    return True
        return False

    return sum(try_row(i, [False] * n) for i in range(m))


_line_chars = string.ascii_letters + string.digits + " ,.;'()?-"
_clean_line = st.text(alphabet=_line_chars, min_size=1, max_size=40).map(str.strip).filter(bool).filter(
    lambda s: not s.lower().startswith(("interpretation", "answer"))
)
_answer_text = st.lists(_clean_line, min_size=1, max_size=3).map("\n".join)
_sql_text = st.lists(
    st.text(alphabet=string.ascii_letters + string.digits + " ,*=()>;_'", min_size=1, max_size=40)
    .map(str.strip).filter(bool).filter(lambda s: not s.lower().startswith("interpretation")),
    min_size=1, max_size=3,
).map("\n".join)


@st.composite
def pair_lists(draw, task: TaskKind = TaskKind.QA, max_size: int = 7):
    n = draw(st.integers(1, max_size))
    answers = draw(st.lists(_sql_text if task is TaskKind.SQL else _answer_text, min_size=n, max_size=n))
    interps = draw(st.lists(_clean_line, min_size=n, max_size=n))
    return [InterpretationAnswerPair(k, i, a) for k, (i, a) in enumerate(zip(interps, answers), 1)]


class LiveServer:
    """Run an ASGI app under uvicorn on a free local port in a background thread."""

    def __init__(self, app):
        import socket
        import threading

        import uvicorn

        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            self.port = s.getsockname()[1]
        config = uvicorn.Config(app, host="127.0.0.1", port=self.port, log_level="warning")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self):
        import time

        self.thread.start()
        deadline = time.monotonic() + 10
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=10)


def random_qa_case(rng, max_golds=4, max_preds=5):
    """Random golds (1-2 paraphrases of 1-3 words) and predictions over WORDS."""
    def phrase():
        return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))

    golds = [[phrase() for _ in range(rng.randint(1, 2))] for _ in range(rng.randint(1, max_golds))]
    preds = [phrase() for _ in range(rng.randint(1, max_preds))]
    return golds, preds
