import datetime as dt
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from phenollm.interpret import ClaimKind, Scope, TrendKind, extract_claims, match_column
from phenollm.schema import PAPER_SCHEMA

from _support import reference_window

S = PAPER_SCHEMA
STEPS = S.index_of("step_count")
SLEEP = S.index_of("time_asleep(minutes)")
HOME = S.index_of("time_at_home(minutes)")
DISTANCE = S.index_of("total_distance_traveled(meters)")
ENTROPY = S.index_of("location_entropy")
REPLY = (Path(__file__).parent / "data" / "gpt4_reply.txt").read_text()


def numeric(text, window=None):
    return extract_claims(text, S, window or reference_window())[0]


def trends(text, window=None):
    return extract_claims(text, S, window or reference_window())[1]


def test_point_value_with_iso_date():
    [c] = numeric("55,755 steps on 2019-05-11")
    assert c.value == 55755
    assert c.column_ref == STEPS
    assert c.date_ref == dt.date(2019, 5, 11)
    assert c.claim_kind is ClaimKind.POINT
    assert c.unit_hint == "steps"


def test_numbered_list_ordinal_is_not_a_number():
    assert numeric("1. Physical Activity:") == []
    [c] = numeric("1. Physical Activity: the person walked 12,000 steps on May 3.")
    assert c.value == 12000 and c.date_ref == dt.date(2019, 5, 3)


def test_second_half_increase():
    [t] = trends("The time spent asleep increased in the second half of the month")
    assert (t.column_ref, t.trend_kind, t.time_scope) == (SLEEP, TrendKind.INCREASE, Scope.SECOND_HALF)


@pytest.mark.parametrize("text", [
    "The DSM-5 criteria require a 2-week period.",
    "Over the last 14 days, nothing changed.",
    "He felt happy.",
    "PHQ-4 scores are not shown.",
])
def test_no_numeric_claims(text):
    assert numeric(text) == []


def test_years_inside_dates_are_not_numbers():
    cs = numeric("On 2019-05-03 and May 4, 2019 the step count was 9,100.")
    assert [c.value for c in cs] == [9100]


def test_natural_and_slash_dates_resolve_inside_window():
    [c] = numeric("On 5/3, the phone screen time was 298 minutes.")
    assert c.date_ref == dt.date(2019, 5, 3)
    [c] = numeric("Location entropy peaked at 0.87 on April 30.")
    assert c.date_ref == dt.date(2019, 4, 30)


def test_extremum_records_direction_and_emits_dated_trend():
    cs, ts = extract_claims("Location entropy peaked at 0.87 on April 30.", S, reference_window())
    [c] = cs
    assert c.claim_kind is ClaimKind.EXTREMUM and c.direction == "max" and c.decimals == 2
    [t] = ts
    assert t.trend_kind is TrendKind.EXTREMUM_AT_DATE
    assert t.direction == "max" and t.date_ref == dt.date(2019, 4, 30)


def test_lowest_is_min_extremum():
    [c] = numeric("The lowest distance travelled was 127 meters.")
    assert (c.claim_kind, c.direction, c.column_ref, c.value) == (ClaimKind.EXTREMUM, "min", DISTANCE, 127)


def test_range_gives_min_and_max():
    lo, hi = numeric("The step count ranged from 2,050 to 55,755 steps.")
    assert (lo.direction, lo.value) == ("min", 2050)
    assert (hi.direction, hi.value) == ("max", 55755)


def test_aggregate_and_unit_hint():
    [c] = numeric("Sleep averaged 11.3 hours per night.")
    assert c.claim_kind is ClaimKind.AGGREGATE and c.statistic == "mean"
    assert c.unit_hint == "hours" and c.decimals == 1 and c.column_ref == SLEEP


@pytest.mark.parametrize("text", [
    "The person walked 5,000 steps on average.",
    "The person walked 5,000 steps per day on average.",
    "The person walked 5,000 steps on a daily average.",
])
def test_trailing_on_average(text):
    [c] = numeric(text)
    assert c.claim_kind is ClaimKind.AGGREGATE and c.statistic == "mean" and c.column_ref == STEPS


def test_trailing_average_stays_with_its_number():
    mean, day = numeric("They walked 5,000 steps on average, and 7,000 steps on 2019-05-03.")
    assert (mean.value, mean.claim_kind) == (5000, ClaimKind.AGGREGATE)
    assert (day.value, day.claim_kind, day.date_ref) == (7000, ClaimKind.POINT, dt.date(2019, 5, 3))


def test_example_values_are_points_even_near_the_word_average():
    text = ("The phone screen time and average phone use unlock duration fluctuate, "
            "with some days showing high usage (e.g., 819 minutes on 2019-05-21).")
    [c] = numeric(text)
    assert c.claim_kind is ClaimKind.POINT


def test_two_named_columns_are_both_candidates():
    text = "The phone screen time and average phone use unlock duration vary (e.g., 819 minutes)."
    [c] = numeric(text)
    cols = {c.column_ref, *c.alt_columns}
    assert {S.index_of("phone_screen_time(minutes)"), S.index_of("average_phone_unlock_duration(minutes)")} <= cols


def test_hedge_detected():
    [c] = numeric("Over the last 14 days, the step count was about 11,430.")
    assert c.hedged and c.value == 11430


@pytest.mark.parametrize("text, kind, scope, direction", [
    ("Step count was higher than average on May 3.", TrendKind.ABOVE_BELOW_AVERAGE, Scope.WHOLE, "above"),
    ("Step count decreased in the first half of the month.", TrendKind.DECREASE, Scope.FIRST_HALF, None),
    ("The total time asleep is consistent across the period.", TrendKind.LOW_VARIABILITY, Scope.WHOLE, None),
    ("The individual's step count fluctuates significantly.", TrendKind.HIGH_VARIABILITY, Scope.WHOLE, None),
])
def test_trend_keywords(text, kind, scope, direction):
    [t] = trends(text)
    assert (t.column_ref, t.trend_kind, t.time_scope, t.direction) == (STEPS if "tep" in text else SLEEP,
                                                                       kind, scope, direction)


def test_date_range_scope():
    [t] = trends("Time at home increased between May 1 and May 10.")
    assert t.column_ref == HOME and t.time_scope is Scope.DATE_RANGE
    assert t.date_range == (dt.date(2019, 5, 1), dt.date(2019, 5, 10))


def test_date_only_extremum_is_a_trend_without_numbers():
    cs, [t] = extract_claims("The highest sleep time occurred on May 9.", S, reference_window())
    assert cs == []
    assert (t.trend_kind, t.direction, t.column_ref) == (TrendKind.EXTREMUM_AT_DATE, "max", SLEEP)


def test_wrapped_lines_keep_number_unit_and_date_together():
    cs = numeric(REPLY)
    first = cs[0]
    assert (first.value, first.column_ref, first.date_ref) == (55755, STEPS, dt.date(2019, 5, 11))
    assert first.raw_span == "55,755 steps on 2019-05-11"
    by_value = {c.value: c for c in cs}
    assert by_value[1240].column_ref == HOME and by_value[1240].date_ref == dt.date(2019, 5, 12)
    assert by_value[249].date_ref == dt.date(2019, 5, 10) and by_value[249].column_ref == SLEEP
    assert by_value[0].column_ref == ENTROPY
    # 2019, DSM-5 and list structure contribute nothing
    assert sorted(by_value) == [0, 5, 38, 138, 249, 679, 819, 1240, 1402, 2050, 55755]


def test_match_column_gate_and_ties():
    assert match_column("total time asleep", S) == SLEEP
    assert match_column("the weather was nice", S) is None
    # "call duration" fits incoming and outgoing equally well
    assert match_column("call duration", S) is None


def test_spans_point_into_reply():
    for c in numeric(REPLY):
        assert REPLY[c.start:c.end].replace(",", "").startswith(f"{c.value:g}".split(".")[0])


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=300))
def test_extraction_is_total_and_deterministic(text):
    w = reference_window()
    a = extract_claims(text, S, w)
    assert a == extract_claims(text, S, w)
