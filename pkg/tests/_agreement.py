"""Compare verifier verdicts with the mock's truth log."""
from __future__ import annotations

from dataclasses import dataclass, field

from phenollm.interpret import TrendKind, Verdict, grade_response
from phenollm.llmgate import MockPolicy, mock_reason
from phenollm.schema import FeatureWindow

RATES = (0.0, 0.3, 1.0)


@dataclass
class Agreement:
    claims: int = 0
    claim_hits: int = 0
    reports: int = 0
    q2_hits: int = 0
    q4_hits: int = 0
    composition_ok: int = 0
    misses: list = field(default_factory=list)


def _findings_in(findings, entry):
    return [f for f in findings if entry.start <= f.claim.start < entry.end]


def tally(windows: list[FeatureWindow], per_window_policies=None) -> Agreement:
    out = Agreement()
    k = 0
    for w in windows:
        for num_rate in RATES:
            for trend_rate in RATES:
                k += 1
                policy = MockPolicy(seed=k, numeric_error_rate=num_rate, trend_error_rate=trend_rate)
                reply, truth = mock_reason(policy, w, nonce=f"agreement-{k}")
                report = grade_response(reply, w)
                out.reports += 1
                q1, q2, q3, q4 = report.rubric
                out.composition_ok += (q1 or not q2) and (q3 or not q4)
                numeric = [t for t in truth if t.kind == "numeric"]
                trends = [t for t in truth if t.kind == "trend"]
                out.q2_hits += q2 == (bool(numeric) and not any(t.corrupted for t in numeric))
                out.q4_hits += q4 == (bool(trends) and not any(t.corrupted for t in trends))
                for t in truth:
                    pool = report.numeric_claims if t.kind == "numeric" else report.trend_claims
                    found = _findings_in(pool, t)
                    if t.kind == "trend":
                        at_date = t.claim == "extremum-at-date"
                        found = [f for f in found
                                 if (f.claim.trend_kind is TrendKind.EXTREMUM_AT_DATE) == at_date]
                    expect = Verdict.INCONSISTENT if t.corrupted else Verdict.CONSISTENT
                    out.claims += 1
                    if len(found) == 1 and found[0].verdict is expect:
                        out.claim_hits += 1
                    else:
                        out.misses.append((reply[t.start:t.end], t, found))
    return out
