"""Chat-completion gateway with an HTTP backend and a deterministic mock."""
from .gateway import (
    AuthFailure, BackendConfig, BackendKind, BadResponse, CacheMiss, CompletionResult,
    ExhaustedRetries, Gateway, GatewayError, RateLimiter, RequestContext, Timeout,
    complete, reply_text, request_body,
)
from .mock import AnswerMode, MissingLabel, MockPolicy, MockReasoning, TruthEntry, mock_reason

__all__ = [
    "AnswerMode", "AuthFailure", "BackendConfig", "BackendKind", "BadResponse", "CacheMiss",
    "CompletionResult", "ExhaustedRetries", "Gateway", "GatewayError", "MissingLabel",
    "MockPolicy", "MockReasoning", "RateLimiter", "RequestContext", "Timeout", "TruthEntry",
    "complete", "mock_reason", "reply_text", "request_body",
]
