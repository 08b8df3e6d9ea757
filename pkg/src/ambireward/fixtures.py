"""Desk-scale SQL fixture: a seeded Jobs database plus a small ambiguous dataset."""
from __future__ import annotations

import json
import random
import sqlite3
from pathlib import Path

from .data import GoldExample, example_from_record, load_dataset
from .parsing import InterpretationAnswerPair, TaskKind, render_template

JOBS_SCHEMA = """CREATE TABLE Jobs (
    JobID INTEGER PRIMARY KEY,
    Min_Years INTEGER,
    Pref_Years INTEGER,
    Position TEXT,
    Description TEXT,
    Salary REAL
);"""

MIN_YEARS_SQL = "SELECT Min_Years FROM Jobs ORDER BY Salary DESC LIMIT 1;"
PREF_YEARS_SQL = "SELECT Pref_Years FROM Jobs ORDER BY Salary DESC LIMIT 1;"
BOTH_YEARS_SQL = "SELECT Min_Years, Pref_Years FROM Jobs ORDER BY Salary DESC LIMIT 1;"
JOBS_GOLD = (MIN_YEARS_SQL, PREF_YEARS_SQL, BOTH_YEARS_SQL)

_POSITIONS = ["Engineer", "Analyst", "Designer", "Manager", "Scientist", "Technician", "Consultant", "Architect"]

# (id, question, gold queries, interpretations)
_SQL_ITEMS = [
    ("jobs-experience", "Show the required experience for the best-paid role.", JOBS_GOLD,
     ["Minimum years of experience required for the best-paid role",
      "Preferred years of experience for the best-paid role",
      "Both the minimum and preferred years for the best-paid role"]),
    ("jobs-years-lowest", "What experience is needed for the lowest-paid role?",
     ("SELECT Min_Years FROM Jobs ORDER BY Salary ASC LIMIT 1;",
      "SELECT Pref_Years FROM Jobs ORDER BY Salary ASC LIMIT 1;"),
     ["Minimum years of experience for the lowest-paid role",
      "Preferred years of experience for the lowest-paid role"]),
    ("jobs-position-top", "Which position pays the most?",
     ("SELECT Position FROM Jobs ORDER BY Salary DESC LIMIT 1;",),
     ["Which position has the highest salary?"]),
    ("jobs-count", "How many jobs are listed?",
     ("SELECT COUNT(*) FROM Jobs;",),
     ["How many rows does the Jobs table contain?"]),
    ("jobs-avg-salary", "What is the average salary?",
     ("SELECT AVG(Salary) FROM Jobs;",),
     ["What is the mean of the Salary column over all jobs?"]),
]


def build_jobs_db(path: str | Path, seed: int = 0, n_rows: int = 12) -> Path:
    """Create the Jobs database with seeded rows.

    Rows are drawn so Min_Years < Pref_Years everywhere and salaries are distinct,
    which makes the three top-salary gold queries return distinct tables.
    """
    path = Path(path)
    if path.exists():
        path.unlink()
    rng = random.Random(seed)
    salaries = rng.sample(range(40_000, 200_000, 500), n_rows)
    rows = []
    for k in range(n_rows):
        lo = rng.randint(0, 8)
        hi = lo + rng.randint(1, 5)
        pos = _POSITIONS[k % len(_POSITIONS)]
        rows.append((k + 1, lo, hi, f"{pos} {k + 1}", f"{pos} role number {k + 1}", float(salaries[k])))
    conn = sqlite3.connect(path)
    try:
        conn.execute(JOBS_SCHEMA)
        conn.executemany("INSERT INTO Jobs VALUES (?, ?, ?, ?, ?, ?)", rows)
        conn.commit()
    finally:
        conn.close()
    return path


def _example(item, db_name: str) -> dict:
    ex_id, question, golds, _ = item
    return {
        "id": ex_id,
        "task": "sql",
        "context": JOBS_SCHEMA,
        "question": question,
        "gold_answers": list(golds),
        "ambiguous": len(golds) > 1,
        "db_path": db_name,
    }


def mock_completion(interpretations: list[str], queries: list[str], reasoning: str = "Reasoning about the schema.\n") -> str:
    pairs = [InterpretationAnswerPair(k, i, q) for k, (i, q) in enumerate(zip(interpretations, queries), 1)]
    return reasoning + render_template(pairs, TaskKind.SQL)


def write_fixtures(out_dir: str | Path, seed: int = 0) -> dict[str, Path]:
    """Materialise ``jobs.sqlite``, ``dataset.jsonl`` and mock-policy completion dumps.

    ``completions_gold.jsonl`` answers every gold interpretation; ``completions_min.jsonl``
    answers only the first interpretation of each example.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    db = build_jobs_db(out / "jobs.sqlite", seed)
    dataset = out / "dataset.jsonl"
    with dataset.open("w", encoding="utf-8") as fh:
        for item in _SQL_ITEMS:
            fh.write(json.dumps(_example(item, db.name)) + "\n")
    gold_dump = out / "completions_gold.jsonl"
    min_dump = out / "completions_min.jsonl"
    with gold_dump.open("w", encoding="utf-8") as g, min_dump.open("w", encoding="utf-8") as m:
        for ex_id, _, golds, interps in _SQL_ITEMS:
            g.write(json.dumps({"example_id": ex_id, "completion_text": mock_completion(interps, list(golds))}) + "\n")
            m.write(json.dumps({"example_id": ex_id, "completion_text": mock_completion(interps[:1], list(golds[:1]))}) + "\n")
    # round-trip through the loader so a broken fixture fails here
    load_dataset(dataset)
    return {"db": db, "dataset": dataset, "completions_gold": gold_dump, "completions_min": min_dump}


def jobs_example(db_path: str | Path) -> GoldExample:
    """The three-interpretation experience question bound to ``db_path``."""
    rec = _example(_SQL_ITEMS[0], str(db_path))
    return example_from_record(rec)

