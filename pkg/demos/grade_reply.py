"""Grade a free-text reply against a data window and print every claim found.

    python3 demos/grade_reply.py
"""
import datetime as dt

import numpy as np

from phenollm.interpret import grade_response
from phenollm.schema import PAPER_SCHEMA, FeatureWindow

REPLY = """\
- **Physical activity**: The person walked 12,400 steps on 2019-05-03, their busiest day.
- **Sleep**: Time asleep increased in the second half of the period.
- **Mobility**: The lowest distance travelled was 127 meters.

Best Guess if Experiencing Depression: No."""


def window() -> FeatureWindow:
    rng = np.random.default_rng(0)
    days = 28
    values = rng.uniform(0.5, 1.5, size=(days, len(PAPER_SCHEMA))) * 100
    steps, sleep, dist = (PAPER_SCHEMA.index_of(n) for n in
                          ("step_count", "time_asleep(minutes)", "total_distance_traveled(meters)"))
    values[:, steps] = rng.integers(3000, 9000, days)
    values[4, steps] = 12400
    values[:, sleep] = np.linspace(330, 470, days).round()
    values[:, dist] = np.linspace(1270, 9000, days).round()
    return FeatureWindow.from_rows(dt.date(2019, 4, 29), values.tolist())


if __name__ == "__main__":
    report = grade_response(REPLY, window())
    for f in (*report.numeric_claims, *report.trend_claims):
        print(f"{f.verdict.value:<13} {f.claim.raw_span!r}  ({f.witness})")
    print("rubric Q1-Q4:", report.rubric)
