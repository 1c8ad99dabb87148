"""One entry point for chat completions, over HTTP or the offline mock."""
from __future__ import annotations

import collections
import dataclasses
import enum
import json
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import httpx

from ..prompts import HYPOTHESIZE_TEXT, REASONING_TEXT, extract_data_block, prompt_hash
from ..schema import PAPER_SCHEMA, FeatureSchema, FeatureWindow
from ..tables import detect_format, parse_table
from .mock import MockPolicy, TruthEntry, _rng, answer, mock_reason, window_digest


class BackendKind(str, enum.Enum):
    HTTP = "http"
    MOCK = "mock"


class GatewayError(RuntimeError):
    pass


class AuthFailure(GatewayError):
    pass


class ExhaustedRetries(GatewayError):
    def __init__(self, attempts: int, last_cause: BaseException | None):
        super().__init__(f"gave up after {attempts} attempts: {last_cause!r}")
        self.attempts = attempts
        self.last_cause = last_cause


class Timeout(ExhaustedRetries):
    """Every attempt timed out."""


class BadResponse(GatewayError):
    pass


class CacheMiss(GatewayError):
    pass


class _Transient(Exception):
    pass


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = BackendKind.MOCK
    model_name: str = "mock"
    endpoint_url: str = ""
    api_key_env_var: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_retries: int = 3
    rate_limit: float | None = 60.0  # requests per minute; None disables
    timeout: float = 60.0
    max_in_flight: int = 4
    backoff_base: float = 1.0
    backoff_cap: float = 30.0
    mock: MockPolicy = field(default_factory=MockPolicy)

    def __post_init__(self):
        object.__setattr__(self, "kind", BackendKind(self.kind))
        if isinstance(self.mock, dict):
            object.__setattr__(self, "mock", MockPolicy(**self.mock))
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0 or self.max_in_flight < 1:
            raise ValueError("max_retries must be >= 0 and max_in_flight >= 1")
        if self.rate_limit is not None and self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive or None")
        if self.kind is BackendKind.HTTP and not self.endpoint_url:
            raise ValueError("an http backend needs endpoint_url")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["kind"] = self.kind.value
        d["mock"]["answer_mode"] = self.mock.answer_mode.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BackendConfig":
        return cls(**d)


@dataclass(frozen=True)
class RequestContext:
    """Extra information only the mock uses; a real endpoint sees just the prompt."""

    label: str | None = None
    window: FeatureWindow | None = None
    repetition: int = 0


@dataclass(frozen=True)
class CompletionResult:
    text: str
    model_name: str
    latency_ms: float
    attempt_count: int
    cached: bool = False
    truth: tuple[TruthEntry, ...] = ()


class RateLimiter:
    """Sliding 60-second window; ``clock`` and ``sleep`` are injectable for tests."""

    def __init__(self, per_minute: float | None, clock=time.monotonic, sleep=time.sleep):
        self.per_minute = per_minute
        self.clock = clock
        self.sleep = sleep
        self._stamps: collections.deque[float] = collections.deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        if self.per_minute is None:
            return self.clock()
        with self._lock:
            now = self.clock()
            while self._stamps and self._stamps[0] + 60.0 <= now:
                self._stamps.popleft()
            if len(self._stamps) >= self.per_minute:
                # wait out the oldest slot; clamp so float rounding cannot reuse it early
                release = self._stamps.popleft() + 60.0
                self.sleep(release - now)
                now = max(self.clock(), release)
            self._stamps.append(now)
            return now


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def request_body(config: BackendConfig, prompt: str, system: str | None = None) -> dict:
    messages = [{"role": "system", "content": system}] if system else []
    messages.append({"role": "user", "content": prompt})
    return {"model": config.model_name, "messages": messages, "temperature": config.temperature}


def reply_text(payload: dict) -> str:
    try:
        text = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise BadResponse(f"unexpected response shape: {exc!r}") from None
    if not isinstance(text, str) or not text.strip():
        raise BadResponse("empty reply")
    return text


def _window_from_prompt(prompt: str, schema: FeatureSchema) -> FeatureWindow:
    table = extract_data_block(prompt)
    if table is None:
        raise BadResponse("mock backend found no data table in the prompt")
    return parse_table(table, detect_format(table), schema)


class Gateway:
    def __init__(
        self,
        config: BackendConfig,
        *,
        cache_dir: str | Path | None = None,
        replay_only: bool = False,
        schema: FeatureSchema = PAPER_SCHEMA,
        transport: httpx.BaseTransport | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        jitter_seed: int | None = None,
    ):
        self.config = config
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.replay_only = replay_only
        self.schema = schema
        self.limiter = RateLimiter(config.rate_limit, clock, sleep)
        self._sleep = sleep
        self._jitter = random.Random(jitter_seed)
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        self._transport = transport
        self._client: httpx.Client | None = None
        self._client_lock = threading.Lock()
        if replay_only and self.cache_dir is None:
            raise ValueError("replay_only needs a cache_dir")

    # -- cache --------------------------------------------------------------------

    def cache_path(self, prompt: str, repetition: int = 0) -> Path | None:
        if self.cache_dir is None:
            return None
        name = prompt_hash(prompt) + (f"-r{repetition}" if repetition else "")
        return self.cache_dir / _safe(self.config.model_name) / f"{name}.json"

    def _load(self, path: Path | None) -> dict | None:
        if path is None or not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def _store(self, path: Path | None, payload: dict) -> None:
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)

    # -- backends -----------------------------------------------------------------

    def _mock_payload(self, prompt: str, ctx: RequestContext) -> dict:
        window = ctx.window if ctx.window is not None else _window_from_prompt(prompt, self.schema)
        nonce = f"{self.config.model_name}:{prompt_hash(prompt)}:{ctx.repetition}"
        condition = "Anxiety" if "experiencing anxiety" in prompt else "Depression"
        if HYPOTHESIZE_TEXT in prompt or REASONING_TEXT in prompt:
            text, truth = mock_reason(self.config.mock, window, nonce=nonce,
                                      label=ctx.label, condition=condition)
        else:
            rng = _rng(self.config.mock.seed, nonce, window_digest(window))
            text, truth = answer(self.config.mock, ctx.label, rng) + ".", ()
        return {
            "model": self.config.model_name,
            "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}],
            "truth": [dataclasses.asdict(t) for t in truth],
        }

    def _client_get(self) -> httpx.Client:
        with self._client_lock:
            if self._client is None:
                self._client = httpx.Client(timeout=self.config.timeout, transport=self._transport)
            return self._client

    def _post(self, body: dict, key: str) -> dict:
        try:
            resp = self._client_get().post(
                self.config.endpoint_url, json=body,
                headers={"Authorization": f"Bearer {key}"},
            )
        except httpx.TimeoutException as exc:
            raise _Transient(exc) from exc
        except httpx.TransportError as exc:
            raise _Transient(exc) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise _Transient(GatewayError(f"HTTP {resp.status_code}"))
        if resp.status_code in (401, 403):
            raise AuthFailure(f"HTTP {resp.status_code} from {self.config.endpoint_url}")
        if resp.status_code >= 400:
            raise BadResponse(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BadResponse("response is not JSON") from exc

    def _http_payload(self, prompt: str, system: str | None) -> tuple[dict, int]:
        key = os.environ.get(self.config.api_key_env_var)
        if not key:
            raise AuthFailure(f"environment variable {self.config.api_key_env_var} is not set")
        body = request_body(self.config, prompt, system)
        causes: list[BaseException] = []
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                ceiling = min(self.config.backoff_cap, self.config.backoff_base * 2 ** (attempt - 1))
                self._sleep(self._jitter.uniform(0, ceiling))
            self.limiter.acquire()
            try:
                return self._post(body, key), attempt + 1
            except _Transient as exc:
                causes.append(exc.args[0])
        err = Timeout if all(isinstance(c, httpx.TimeoutException) for c in causes) else ExhaustedRetries
        raise err(len(causes), causes[-1])

    # -- public -------------------------------------------------------------------

    def complete(self, prompt: str, context: RequestContext | None = None,
                 system: str | None = None) -> CompletionResult:
        ctx = context or RequestContext()
        path = self.cache_path(prompt, ctx.repetition)
        cached = self._load(path)
        if cached is not None:
            return CompletionResult(reply_text(cached), self.config.model_name, 0.0, 0, True,
                                    tuple(TruthEntry(**t) for t in cached.get("truth", ())))
        if self.replay_only:
            raise CacheMiss(f"no cached reply at {path}")

        with self._slots:
            if self.config.kind is BackendKind.MOCK:
                payload, attempts, latency = self._mock_payload(prompt, ctx), 1, 0.0
            else:
                started = time.perf_counter()
                payload, attempts = self._http_payload(prompt, system)
                latency = (time.perf_counter() - started) * 1000.0
        text = reply_text(payload)
        self._store(path, payload)
        truth = tuple(TruthEntry(**t) for t in payload.get("truth", ()))
        return CompletionResult(text, self.config.model_name, latency, attempts, False, truth)

    def complete_many(self, prompts: Sequence[str],
                      contexts: Sequence[RequestContext | None] | None = None) -> list[CompletionResult]:
        """Run requests concurrently (up to ``max_in_flight``); results keep input order."""
        contexts = list(contexts) if contexts is not None else [None] * len(prompts)
        with ThreadPoolExecutor(self.config.max_in_flight) as pool:
            return list(pool.map(self.complete, prompts, contexts))

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None

    def __enter__(self):
        return self

    def __exit__(self, *exc: Any):
        self.close()


def complete(config: BackendConfig, prompt: str, context: RequestContext | None = None,
             **gateway_kwargs) -> CompletionResult:
    with Gateway(config, **gateway_kwargs) as gw:
        return gw.complete(prompt, context)
