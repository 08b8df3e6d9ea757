import numpy as np
import pytest
from hypothesis import given, strategies as st

from ambireward.fixtures import JOBS_GOLD, MIN_YEARS_SQL, mock_completion
from ambireward.oracles import TextOracle
from ambireward.parsing import InterpretationAnswerPair
from ambireward.reward import RewardMode, compute_reward, dedupe_by_execution, reward_from_matrix

from helpers import WORDS, brute_force_assignment_value, qa_completion, qa_example

answers = st.lists(st.sampled_from(WORDS), min_size=1, max_size=4).map(" ".join)


def test_perfect_recall():
    ex = qa_example(["Mike Comrie", "Luca"])
    out = compute_reward(qa_completion(["Mike Comrie", "Luca"]), ex)
    assert out.mode is RewardMode.RECALL
    assert out.reward == 1.0


def test_half_recall():
    ex = qa_example(["Mike Comrie", "Luca"])
    out = compute_reward(qa_completion(["Luca"]), ex)
    S = TextOracle().matrix(["Luca"], ex.gold_answers)
    assert out.reward == brute_force_assignment_value(S.tolist()) / 2 == 0.5
    assert out.matched == [(0, 1, 1.0)]


def test_precision_mode():
    ex = qa_example(["Luca"])
    assert compute_reward(qa_completion(["Luca"]), ex).mode is RewardMode.PRECISION
    out = compute_reward(qa_completion(["Luca", "Mike Comrie"]), ex)
    assert out.reward == 0.5 and out.pred_count == 2


def test_format_failure():
    ex = qa_example(["Mike Comrie", "Luca"])
    for bad in ["", "no block", "<answer>nothing</answer>"]:
        out = compute_reward(bad, ex)
        assert out.reward == 0.0
        assert out.mode is RewardMode.FORMAT_FAILURE
        assert out.intended_mode is RewardMode.RECALL


def test_overflow_counts_in_precision():
    ex = qa_example(["Luca"])
    out = compute_reward(qa_completion(["Luca"] + ["zzz"] * 6), ex)
    assert out.pred_count == 7
    assert out.reward == pytest.approx(1 / 7)
    assert "PAIR_COUNT_EXCEEDED" in out.violations


def test_sql_duplicates_cannot_double_match(jobs_ex):
    interps = ["min", "pref", "both", "min again"]
    completion = mock_completion(interps, list(JOBS_GOLD) + [MIN_YEARS_SQL])
    out = compute_reward(completion, jobs_ex)
    assert out.mode is RewardMode.RECALL
    assert out.reward == 1.0
    assert len(out.matched) == 3


def test_sql_partial(jobs_ex):
    out = compute_reward(mock_completion(["min"], [MIN_YEARS_SQL]), jobs_ex)
    assert out.reward == pytest.approx(1 / 3, abs=1e-12)


def test_sql_non_executable_is_zero(jobs_ex):
    out = compute_reward(mock_completion(["oops"], ["SELECT Experience FROM Jobs"]), jobs_ex)
    assert out.reward == 0.0 and out.mode is RewardMode.RECALL


def test_dedupe(jobs_db):
    same = [InterpretationAnswerPair(1, "a", MIN_YEARS_SQL),
            InterpretationAnswerPair(2, "b", "SELECT Min_Years FROM Jobs WHERE Salary = (SELECT MAX(Salary) FROM Jobs)")]
    assert dedupe_by_execution(same, jobs_db) == same[:1]
    distinct = [InterpretationAnswerPair(k, "x", q) for k, q in enumerate(JOBS_GOLD, 1)]
    assert dedupe_by_execution(distinct, jobs_db) == distinct
    assert dedupe_by_execution([], jobs_db) == []
    broken = [InterpretationAnswerPair(1, "x", "SELECT nope"), InterpretationAnswerPair(2, "y", "SELECT nope")]
    assert dedupe_by_execution(broken, jobs_db) == broken


@given(st.lists(answers, min_size=2, max_size=4, unique=True), st.lists(answers, min_size=1, max_size=4), answers)
def test_recall_monotone(golds, preds, extra):
    ex = qa_example([[g] for g in golds])
    base = compute_reward(qa_completion(preds), ex)
    more = compute_reward(qa_completion(preds + [extra]), ex)
    assert more.reward >= base.reward - 1e-12


@given(answers, st.lists(answers, min_size=1, max_size=4))
def test_precision_strictly_drops_with_zero_sim_pred(gold, preds):
    ex = qa_example([gold])
    base = compute_reward(qa_completion(preds), ex)
    if base.reward == 0:
        return
    more = compute_reward(qa_completion(preds + ["qqq xyzzy"]), ex)
    assert more.reward < base.reward


@given(st.integers(0, 5), st.integers(1, 5), st.data())
def test_binary_reward_is_cardinality_over_denominator(m, n, data):
    B = np.array(data.draw(st.lists(st.lists(st.sampled_from([0.0, 1.0]), min_size=n, max_size=n),
                                    min_size=max(m, 1), max_size=max(m, 1))))
    reward, mode, matched = reward_from_matrix(B)
    card = sum(1 for _, _, s in matched if s == 1.0)
    denom = n if n > 1 else B.shape[0]
    assert reward == card / denom
    assert mode is (RewardMode.RECALL if n > 1 else RewardMode.PRECISION)


def test_mode_depends_only_on_gold_count():
    one = qa_example(["Luca"])
    two = qa_example(["Luca", "Mike"])
    for preds in (["Luca"], ["Luca", "Mike", "x"]):
        assert compute_reward(qa_completion(preds), one).mode is RewardMode.PRECISION
        assert compute_reward(qa_completion(preds), two).mode is RewardMode.RECALL
