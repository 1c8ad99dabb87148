import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phenollm.interpret import Decision, extract_classification, grade_response
from phenollm.llmgate import AnswerMode, MissingLabel, MockPolicy, mock_reason
from phenollm.llmgate.mock import corrupt, format_number
from phenollm.schema import PAPER_SCHEMA, FeatureWindow

from _support import reference_window


def reason(window=None, **kw):
    nonce = kw.pop("nonce", "n")
    label = kw.pop("label", None)
    return mock_reason(MockPolicy(**kw), window or reference_window(), nonce=nonce, label=label)


def test_clean_policy_grades_fully_consistent():
    reply, truth = reason(seed=3)
    report = grade_response(reply, reference_window())
    assert report.q2_numbers_consistent and report.q4_trends_consistent
    assert truth and not any(t.corrupted for t in truth)


def test_three_claims_all_corrupted():
    reply, truth = reason(seed=3, numeric_error_rate=1.0, claims_per_response=3)
    numeric = [t for t in truth if t.kind == "numeric"]
    assert len(numeric) == 3 and all(t.corrupted for t in numeric)
    for t in numeric:
        assert t.cited in reply[t.start:t.end]
        assert float(t.cited.replace(",", "")) != t.true_value


def test_no_claims_means_no_numbers():
    reply, truth = reason(claims_per_response=0)
    assert truth == ()
    assert not grade_response(reply, reference_window()).q1_has_numbers


@pytest.mark.parametrize("mode, label, decision", [
    (AnswerMode.ALWAYS_NO, None, Decision.NO),
    (AnswerMode.ALWAYS_YES, None, Decision.YES),
    (AnswerMode.ORACLE, "Positive", Decision.YES),
    (AnswerMode.ORACLE, "Negative", Decision.NO),
])
def test_answer_modes(mode, label, decision):
    reply, _ = reason(answer_mode=mode, label=label)
    assert extract_classification(reply).decision is decision
    assert reply.rstrip().endswith(f"Best Guess if Experiencing Depression: {decision.value}.")


def test_oracle_needs_label():
    with pytest.raises(MissingLabel):
        reason(answer_mode=AnswerMode.ORACLE)


def test_coin_mode_uses_both_answers():
    seen = {extract_classification(reason(answer_mode="coin", nonce=str(i))[0]).decision for i in range(30)}
    assert seen == {Decision.YES, Decision.NO}


def test_deterministic_for_same_inputs_and_varies_with_nonce():
    a = reason(seed=9, numeric_error_rate=0.5, trend_error_rate=0.5)
    assert a == reason(seed=9, numeric_error_rate=0.5, trend_error_rate=0.5)
    assert a.text != reason(seed=9, numeric_error_rate=0.5, trend_error_rate=0.5, nonce="other").text
    assert a.text != reason(seed=10, numeric_error_rate=0.5, trend_error_rate=0.5).text


def test_looks_like_a_bulleted_analysis():
    reply, _ = reason(claims_per_response=4)
    bullets = [line for line in reply.splitlines() if line.startswith("- **")]
    assert len(bullets) == 4


@pytest.mark.parametrize("rate", [-0.1, 1.5])
def test_rates_validated(rate):
    with pytest.raises(ValueError):
        MockPolicy(numeric_error_rate=rate)
    with pytest.raises(ValueError):
        MockPolicy(trend_error_rate=rate)


def test_negative_claim_count_rejected():
    with pytest.raises(ValueError):
        MockPolicy(claims_per_response=-1)


def test_empty_window_has_nothing_to_cite():
    w = FeatureWindow.from_rows(reference_window().dates[0], [[None] * len(PAPER_SCHEMA)] * 3)
    reply, truth = mock_reason(MockPolicy(claims_per_response=5), w)
    assert truth == ()
    assert extract_classification(reply).decision is Decision.NO


@pytest.mark.parametrize("v", [0.0, 5.0, 12.0, 11430.0, 0.85, 49037.0])
def test_corruption_changes_the_value(v):
    import random
    for seed in range(20):
        bad = corrupt(v, 60000.0, random.Random(seed))
        assert format_number(bad) != format_number(v)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.0, 0.3, 1.0]), st.sampled_from([0.0, 0.3, 1.0]))
def test_truth_log_is_exact(seed, num_rate, trend_rate):
    w = reference_window()
    reply, truth = mock_reason(MockPolicy(seed=seed, numeric_error_rate=num_rate,
                                          trend_error_rate=trend_rate), w, nonce="p")
    for t in truth:
        assert 0 <= t.start < t.end <= len(reply)
        if t.kind == "numeric":
            cited = float(t.cited.replace(",", ""))
            assert t.cited in reply[t.start:t.end]
            assert np.isclose(cited, t.true_value, rtol=1e-9, atol=0.05) != t.corrupted
    if num_rate == 0.0:
        assert not any(t.corrupted for t in truth if t.kind == "numeric")
    if trend_rate == 0.0:
        assert not any(t.corrupted for t in truth if t.kind == "trend")
