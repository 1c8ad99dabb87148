"""Turning LLM replies into decisions and grounded-claim verdicts."""
from .claims import ClaimKind, NumericClaim, Scope, TrendClaim, TrendKind, extract_claims, match_column
from .classify import ClassificationOutcome, Decision, extract_classification
from .verify import (
    Finding,
    VerificationReport,
    Verdict,
    VerifierConfig,
    grade_response,
    verify_claims,
)

__all__ = [
    "ClaimKind", "ClassificationOutcome", "Decision", "Finding", "NumericClaim", "Scope",
    "TrendClaim", "TrendKind", "VerificationReport", "Verdict", "VerifierConfig",
    "extract_claims", "extract_classification", "grade_response", "match_column", "verify_claims",
]
