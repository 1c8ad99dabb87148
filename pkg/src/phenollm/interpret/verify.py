"""Checking extracted claims against the window they talk about."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..schema import FeatureSchema, FeatureWindow
from .claims import ClaimKind, NumericClaim, Scope, TrendClaim, TrendKind, extract_claims


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNVERIFIABLE = "unverifiable"


@dataclass(frozen=True)
class VerifierConfig:
    # relative half-mean difference below which any direction is accepted
    trend_margin: float = 0.02
    # a column is "highly variable" if its CV is at or above this quantile of the
    # window's per-column CVs, and "low variability" at or below the low quantile
    high_cv_quantile: float = 0.5
    low_cv_quantile: float = 0.5


@dataclass(frozen=True)
class Finding:
    claim: NumericClaim | TrendClaim
    verdict: Verdict
    witness: str

    def to_dict(self) -> dict:
        return {"claim": self.claim.to_dict(), "verdict": self.verdict.value, "witness": self.witness}


@dataclass(frozen=True)
class VerificationReport:
    q1_has_numbers: bool
    q2_numbers_consistent: bool
    q3_has_trends: bool
    q4_trends_consistent: bool
    numeric_claims: tuple[Finding, ...] = field(default=())
    trend_claims: tuple[Finding, ...] = field(default=())

    @property
    def rubric(self) -> tuple[bool, bool, bool, bool]:
        return (self.q1_has_numbers, self.q2_numbers_consistent,
                self.q3_has_trends, self.q4_trends_consistent)

    def to_dict(self) -> dict:
        return {
            "q1_has_numbers": self.q1_has_numbers,
            "q2_numbers_consistent": self.q2_numbers_consistent,
            "q3_has_trends": self.q3_has_trends,
            "q4_trends_consistent": self.q4_trends_consistent,
            "numeric_claims": [f.to_dict() for f in self.numeric_claims],
            "trend_claims": [f.to_dict() for f in self.trend_claims],
        }

    def annotate(self, schema: FeatureSchema | None = None) -> str:
        """Plain-text listing of every claim with its verdict and witness."""
        def col(c):
            if c.column_ref is None:
                return "?"
            return schema.columns[c.column_ref].display_name if schema else str(c.column_ref)

        yn = {True: "yes", False: "no"}
        lines = [
            f"Q1 includes numbers: {yn[self.q1_has_numbers]}",
            f"Q2 numbers consistent: {yn[self.q2_numbers_consistent]}",
            f"Q3 identifies trends: {yn[self.q3_has_trends]}",
            f"Q4 trends consistent: {yn[self.q4_trends_consistent]}",
        ]
        for f in self.numeric_claims:
            c = f.claim
            lines.append(f"[{f.verdict.value}] {c.claim_kind.value} {c.value:g} ({col(c)}): "
                         f"{c.raw_span!r} -- {f.witness}")
        for f in self.trend_claims:
            c = f.claim
            lines.append(f"[{f.verdict.value}] {c.trend_kind.value}/{c.time_scope.value} "
                         f"({col(c)}): {c.raw_span!r} -- {f.witness}")
        return "\n".join(lines)


_TO_CLAIM_UNIT = {
    ("minutes", "hours"): 1 / 60,
    ("minutes", "seconds"): 60.0,
    ("meters", "kilometers"): 1 / 1000,
    ("meters", "miles"): 1 / 1609.344,
}
_COUNT_UNITS = {"steps", "devices", "episodes"}


def _conversion(column_unit: str, claim_unit: str | None) -> float | None:
    """Factor taking a cell into the claim's unit; None when they cannot be compared."""
    if claim_unit is None or claim_unit == column_unit:
        return 1.0
    if claim_unit == "percent":
        return None
    if claim_unit in _COUNT_UNITS:
        return 1.0 if column_unit in _COUNT_UNITS | {""} else None
    return _TO_CLAIM_UNIT.get((column_unit, claim_unit))


def _tolerance(claim: NumericClaim) -> float:
    tol = 0.5 * 10.0 ** -claim.decimals
    if claim.hedged and claim.decimals == 0 and claim.value >= 10:
        digits = str(int(claim.value))
        zeros = len(digits) - len(digits.rstrip("0"))
        tol = max(tol, 0.5 * 10.0 ** zeros)
    return tol


def cited_matches(claim: NumericClaim, x: float) -> bool:
    """True when ``x`` rounds to the cited value at the cited precision."""
    if math.isnan(x):
        return False
    return abs(x - claim.value) <= _tolerance(claim) * (1 + 1e-9) + 1e-9


def _fmt(x: float) -> str:
    return f"{x:g}" if abs(x) < 1e6 else f"{x:.0f}"


def _verify_numeric(claim: NumericClaim, window: FeatureWindow) -> tuple[Verdict, str]:
    """Consistent if the claim checks out against its column or any listed alternative."""
    cols = ([claim.column_ref] if claim.column_ref is not None else []) + list(claim.alt_columns)
    if not cols:
        return Verdict.UNVERIFIABLE, "no column could be matched"
    first = None
    for j in cols:
        verdict = _verify_in_column(claim, j, window)
        if verdict[0] is Verdict.CONSISTENT:
            return verdict
        first = first or verdict
    return first


def _verify_in_column(claim: NumericClaim, j: int, window: FeatureWindow) -> tuple[Verdict, str]:
    column = window.schema.columns[j]
    factor = _conversion(column.unit, claim.unit_hint)
    if factor is None:
        return Verdict.UNVERIFIABLE, f"unit {claim.unit_hint!r} not comparable with {column.unit!r}"
    values = window.values[:, j] * factor
    present = ~np.isnan(values)
    if not present.any():
        return Verdict.INCONSISTENT, f"{column.display_name} has no values"

    row = None
    if claim.date_ref is not None:
        row = window.row_of(claim.date_ref)
        if row is None:
            return Verdict.INCONSISTENT, f"{claim.date_ref} is outside the window"
        if not present[row]:
            return Verdict.INCONSISTENT, f"no {column.display_name} value on {claim.date_ref}"

    if claim.claim_kind is ClaimKind.POINT:
        if row is not None:
            ok = cited_matches(claim, values[row])
            return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT,
                    f"value on {claim.date_ref} is {_fmt(values[row])}")
        hits = [i for i in np.flatnonzero(present) if cited_matches(claim, values[i])]
        if hits:
            return Verdict.CONSISTENT, f"matches {window.dates[hits[0]]}"
        return Verdict.INCONSISTENT, f"no {column.display_name} cell rounds to {_fmt(claim.value)}"

    if claim.claim_kind is ClaimKind.EXTREMUM:
        pick = np.nanmax if claim.direction == "max" else np.nanmin
        extreme = pick(values)
        at = [window.dates[i] for i in np.flatnonzero(values == extreme)]
        witness = f"{claim.direction} is {_fmt(extreme)} on {', '.join(map(str, at))}"
        if not cited_matches(claim, extreme):
            return Verdict.INCONSISTENT, witness
        if row is not None and not (values[row] == extreme or cited_matches(claim, values[row])):
            return Verdict.INCONSISTENT, witness
        return Verdict.CONSISTENT, witness

    stat = np.nanmedian(values) if claim.statistic == "median" else float(np.nanmean(values))
    ok = cited_matches(claim, stat)
    return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT,
            f"{claim.statistic or 'mean'} is {stat:.4g}")


def _scope_rows(claim: TrendClaim, window: FeatureWindow) -> list[int]:
    n = len(window)
    if claim.time_scope is Scope.FIRST_HALF:
        return list(range(n // 2))
    if claim.time_scope is Scope.SECOND_HALF:
        return list(range(n - n // 2, n))
    if claim.time_scope is Scope.DATE_RANGE and claim.date_range:
        a, b = sorted(claim.date_range)
        return [i for i, d in enumerate(window.dates) if a <= d <= b]
    return list(range(n))


def _coefficients_of_variation(window: FeatureWindow) -> dict[int, float]:
    cvs = {}
    for j in range(len(window.schema)):
        col = window.values[:, j]
        col = col[~np.isnan(col)]
        if col.size >= 2 and col.mean() > 0:
            cvs[j] = float(col.std() / col.mean())
    return cvs


def _verify_trend(claim: TrendClaim, window: FeatureWindow, cfg: VerifierConfig):
    if claim.column_ref is None:
        return Verdict.UNVERIFIABLE, "no column could be matched"
    values = window.values[:, claim.column_ref]
    name = window.schema.columns[claim.column_ref].display_name
    kind = claim.trend_kind

    if kind in (TrendKind.INCREASE, TrendKind.DECREASE):
        rows = _scope_rows(claim, window)
        half = len(rows) // 2
        early = values[rows[:half]]
        late = values[rows[len(rows) - half:]]
        early, late = early[~np.isnan(early)], late[~np.isnan(late)]
        if not early.size or not late.size:
            return Verdict.UNVERIFIABLE, f"not enough {name} values in scope"
        m1, m2 = float(early.mean()), float(late.mean())
        rel = (m2 - m1) / abs(m1) if m1 else (math.copysign(math.inf, m2 - m1) if m2 != m1 else 0.0)
        witness = f"earlier mean {m1:.4g}, later mean {m2:.4g} ({rel:+.1%})"
        if abs(rel) <= cfg.trend_margin:
            return Verdict.CONSISTENT, witness + ", flat within margin"
        rising = rel > 0
        ok = rising == (kind is TrendKind.INCREASE)
        return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT), witness

    if kind is TrendKind.EXTREMUM_AT_DATE:
        row = window.row_of(claim.date_ref) if claim.date_ref else None
        if row is None:
            return Verdict.INCONSISTENT, f"{claim.date_ref} is outside the window"
        if np.isnan(values).all():
            return Verdict.INCONSISTENT, f"{name} has no values"
        extreme = np.nanmax(values) if claim.direction == "max" else np.nanmin(values)
        at = [str(window.dates[i]) for i in np.flatnonzero(values == extreme)]
        witness = f"{claim.direction} {_fmt(extreme)} on {', '.join(at)}"
        ok = values[row] == extreme
        return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT), witness

    if kind is TrendKind.ABOVE_BELOW_AVERAGE:
        if np.isnan(values).all():
            return Verdict.INCONSISTENT, f"{name} has no values"
        mean = float(np.nanmean(values))
        if claim.date_ref is not None:
            row = window.row_of(claim.date_ref)
            if row is None or np.isnan(values[row]):
                return Verdict.INCONSISTENT, f"no {name} value on {claim.date_ref}"
            target = float(values[row])
        else:
            part = values[_scope_rows(claim, window)]
            part = part[~np.isnan(part)]
            if not part.size:
                return Verdict.UNVERIFIABLE, f"no {name} values in scope"
            target = float(part.mean())
        witness = f"{_fmt(target)} vs mean {mean:.4g}"
        if abs(target - mean) <= cfg.trend_margin * abs(mean):
            return Verdict.CONSISTENT, witness + ", within margin"
        ok = (target > mean) == (claim.direction == "above")
        return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT), witness

    cvs = _coefficients_of_variation(window)
    if claim.column_ref not in cvs:
        return Verdict.UNVERIFIABLE, f"variability of {name} undefined"
    cv = cvs[claim.column_ref]
    spread = list(cvs.values())
    if kind is TrendKind.HIGH_VARIABILITY:
        cut = float(np.quantile(spread, cfg.high_cv_quantile))
        ok = cv >= cut
    else:
        cut = float(np.quantile(spread, cfg.low_cv_quantile))
        ok = cv <= cut
    return (Verdict.CONSISTENT if ok else Verdict.INCONSISTENT), f"CV {cv:.3f} vs cutoff {cut:.3f}"


def verify_claims(
    numeric: list[NumericClaim],
    trends: list[TrendClaim],
    window: FeatureWindow,
    config: VerifierConfig = VerifierConfig(),
) -> VerificationReport:
    """Judge every claim and compose the four rubric answers."""
    num = tuple(Finding(c, *_verify_numeric(c, window)) for c in numeric)
    tr = tuple(Finding(c, *_verify_trend(c, window, config)) for c in trends)
    q1, q3 = bool(num), bool(tr)
    q2 = q1 and all(f.verdict is Verdict.CONSISTENT for f in num)
    q4 = q3 and all(f.verdict is Verdict.CONSISTENT for f in tr)
    return VerificationReport(q1, q2, q3, q4, num, tr)


def grade_response(
    reply: str,
    window: FeatureWindow,
    schema: FeatureSchema | None = None,
    config: VerifierConfig = VerifierConfig(),
) -> VerificationReport:
    schema = schema or window.schema
    numeric, trends = extract_claims(reply, schema, window)
    return verify_claims(numeric, trends, window, config)
