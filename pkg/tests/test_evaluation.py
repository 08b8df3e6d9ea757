import json
import random

import pytest

from ambireward.data import load_dataset
from ambireward.evaluation import (
    ExampleMetrics,
    aggregate,
    evaluate_dump,
    evaluate_example,
    legacy_overlap_f1,
    read_dump,
    reasoning_length,
)
from ambireward.fixtures import BOTH_YEARS_SQL, JOBS_GOLD, PREF_YEARS_SQL, mock_completion
from ambireward.judge import Judge, StubChatClient

from helpers import brute_force_assignment_value, qa_completion, qa_example, random_qa_case


def test_all_golds_predicted(jobs_ex):
    m = evaluate_example(jobs_ex, mock_completion(["a", "b", "c"], list(JOBS_GOLD)), "exec")
    assert (m.recall, m.precision, m.full_coverage, m.single_coverage) == (1.0, 1.0, True, True)


def test_two_of_three_gold(jobs_ex):
    m = evaluate_example(jobs_ex, mock_completion(["a", "b"], [PREF_YEARS_SQL, BOTH_YEARS_SQL]), "exec")
    assert m.recall == pytest.approx(2 / 3, abs=1e-12)
    assert m.precision == 1.0
    assert not m.full_coverage and m.single_coverage
    assert m.recall * m.n_gold == round(m.recall * m.n_gold)


def test_wrong_query_and_failing_query(jobs_ex):
    comp = mock_completion(["a", "b"], ["SELECT JobID FROM Jobs LIMIT 1;", "SELECT nothing FROM nowhere;"])
    m = evaluate_example(jobs_ex, comp, "exec")
    assert (m.recall, m.precision, m.single_coverage) == (0.0, 0.0, False)


def test_empty_completion():
    ex = qa_example(["Luca", "Mike Comrie"])
    m = evaluate_example(ex, "", "overlap")
    assert m.parse_failure
    assert (m.recall, m.precision, m.full_coverage, m.single_coverage, m.legacy_overlap_f1) == (0, 0, False, False, 0)
    assert aggregate([m]).subsets["ambiguous"].n_parse_failures == 1


def test_legacy_f1_examples():
    ex = qa_example([["Mike Comrie"], ["Luca"]])
    assert legacy_overlap_f1(ex, qa_completion(["Luca"])) == 0.5
    ex2 = qa_example([["Luca", "his name was Luca"], ["Mike Comrie"]])
    assert legacy_overlap_f1(ex2, qa_completion(["Luca", "his name was Luca", "Mike Comrie"])) == 1.0


def test_legacy_f1_dominates_recall():
    rng = random.Random(11)
    for k in range(200):
        golds, preds = random_qa_case(rng)
        ex = qa_example(golds, ex_id=f"d{k}")
        comp = qa_completion(preds)
        m = evaluate_example(ex, comp, "overlap")
        assert m.legacy_overlap_f1 >= m.recall - 1e-12


def test_reasoning_length():
    assert reasoning_length("abc<answer>...</answer>") == 3
    assert reasoning_length("0123456789") == 10
    base = qa_completion(["x"], reasoning="")
    for k in (0, 1, 7, 100):
        assert reasoning_length("r" * k + base) == reasoning_length(base) + k


def test_judge_mode_uses_stub():
    ex = qa_example([["Luca"], ["Mike Comrie"]])
    judge = Judge(StubChatClient())
    m = evaluate_example(ex, qa_completion(["His name was Luca", "unknown"]), "judge", judge=judge)
    assert m.recall == 0.5 and m.single_coverage and not m.full_coverage
    with pytest.raises(ValueError):
        evaluate_example(ex, qa_completion(["Luca"]), "judge")
    with pytest.raises(ValueError):
        evaluate_example(ex, qa_completion(["Luca"]), "exec")


def test_flags_invariants():
    rng = random.Random(5)
    for k in range(100):
        golds, preds = random_qa_case(rng)
        m = evaluate_example(qa_example(golds, ex_id=str(k)), qa_completion(preds), "overlap")
        assert 0 <= m.recall <= 1 and 0 <= m.precision <= 1
        if m.full_coverage:
            assert m.single_coverage


def test_aggregate_small():
    def em(recall, amb=True):
        return ExampleMetrics("x", amb, recall, recall, recall == 1, recall == 1, None, 0, False, 1, 1)

    assert aggregate([em(1.0)]).subsets["ambiguous"].recall == 100
    assert aggregate([em(1.0), em(0.0)]).subsets["ambiguous"].recall == 50
    unamb = aggregate([em(0.5, False), em(1.0, False)]).subsets["unambiguous"]
    assert unamb.full_coverage == unamb.recall == 75


def _independent_metrics(golds, preds):
    """Recompute recall/precision/coverage with brute-force matching and a hand-written F1."""
    def toks(s):
        s = "".join(ch for ch in s.lower() if ch.isalnum() or ch.isspace())
        return [w for w in s.split() if w not in ("a", "an", "the")]

    def f1(p, g):
        pt, gt = toks(p), toks(g)
        if not pt and not gt:
            return 1.0
        common = sum(min(pt.count(w), gt.count(w)) for w in set(pt))
        if common == 0:
            return 0.0
        pr, rc = common / len(pt), common / len(gt)
        return 2 * pr * rc / (pr + rc)

    S = [[max(f1(p, v) for v in g) for g in golds] for p in preds]
    value = brute_force_assignment_value(S)
    legacy = sum(max(S[i][j] for i in range(len(preds))) for j in range(len(golds))) / len(golds)
    return value / len(golds), value / len(preds), legacy


def test_aggregate_matches_recomputation():
    rng = random.Random(20)
    rows, metrics = [], []
    for k in range(20):
        golds, preds = random_qa_case(rng)
        if k % 4 == 0:
            golds = [golds[0]]
            preds = [golds[0][0]] + preds[:1]
        ex = qa_example(golds, ex_id=f"e{k}")
        metrics.append(evaluate_example(ex, qa_completion(preds, reasoning="r" * k), "overlap"))
        rows.append((len(golds) > 1, *_independent_metrics(golds, preds), k))
    report = aggregate(metrics)
    for name, flag in (("ambiguous", True), ("unambiguous", False)):
        sub = [r for r in rows if r[0] is flag]
        s = report.subsets[name]
        assert s.n_examples == len(sub)
        assert s.recall == pytest.approx(100 * sum(r[1] for r in sub) / len(sub), abs=1e-9)
        assert s.precision == pytest.approx(100 * sum(r[2] for r in sub) / len(sub), abs=1e-9)
        assert s.legacy_overlap_f1 == pytest.approx(100 * sum(r[3] for r in sub) / len(sub), abs=1e-9)
        assert s.mean_reasoning_chars == pytest.approx(sum(r[4] for r in sub) / len(sub))
        full = 100 * sum(r[1] >= 1 - 1e-9 for r in sub) / len(sub)
        assert s.full_coverage == pytest.approx(full if flag else s.recall, abs=1e-9)
        assert 0 <= s.full_coverage <= 100


def test_dump_evaluation_fixture(fixture_set):
    by_id = {ex.id: ex for ex in load_dataset(fixture_set["dataset"])}
    report, per = evaluate_dump(by_id, read_dump(fixture_set["completions_gold"]), "exec")
    assert report.subsets["ambiguous"].full_coverage == 100
    assert report.subsets["unambiguous"].recall == 100
    report, per = evaluate_dump(by_id, read_dump(fixture_set["completions_min"]), "exec")
    exp = next(m for m in per if m.example_id == "jobs-experience")
    assert exp.recall == pytest.approx(1 / 3, abs=1e-9)
    assert report.subsets["ambiguous"].full_coverage == 0
    assert report.subsets["ambiguous"].single_coverage == 100


def test_reports_byte_identical():
    rng = random.Random(3)
    by_id, records = {}, []
    for k in range(10):
        golds, preds = random_qa_case(rng)
        ex = qa_example(golds, ex_id=f"b{k}")
        by_id[ex.id] = ex
        records.append({"example_id": ex.id, "completion_text": qa_completion(preds)})
    a, _ = evaluate_dump(by_id, records, "judge", judge=Judge(StubChatClient()))
    b, _ = evaluate_dump(by_id, records, "judge", judge=Judge(StubChatClient()))
    assert a.to_json().encode() == b.to_json().encode()
    assert json.loads(a.to_json())["sim_mode"] == "judge"
    assert "recall" in a.to_table()


def test_read_dump_rejects_bad_records(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(json.dumps({"example_id": "x"}) + "\n")
    with pytest.raises(ValueError):
        read_dump(p)
