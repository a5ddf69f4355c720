"""Uniform text-generation interface with mock and HTTP backends.

The mock backend dispatches on the request tag to deterministic handlers
supplied at construction, so CI runs are byte-reproducible. The HTTP
backend speaks the de-facto chat-completions wire format (messages array
in, choices[0].message.content out) against any conforming endpoint, with
bounded retries and exponential backoff.

Credentials come from the environment and are never echoed into logs,
errors, or reprs.
"""
from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import requests

TAGS = ("refine", "route", "rewrite", "profile_update")

# decision-style calls want stability, rewrites want variety
DEFAULT_TEMPERATURE = {
    "refine": 0.0,
    "route": 0.0,
    "rewrite": 0.7,
    "profile_update": 0.0,
}

ENV_BASE_URL = "QOESIM_BASE_URL"
ENV_API_KEY = "QOESIM_API_KEY"
ENV_MODEL = "QOESIM_MODEL"


class GatewayError(Exception):
    """Base class for all gateway failures."""


class GatewayTimeout(GatewayError):
    """The request did not complete within the configured timeout."""


class GatewayStatusError(GatewayError):
    """The endpoint answered with a non-2xx status."""

    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}{': ' + detail if detail else ''}")
        self.status = status


class GatewayFormatError(GatewayError):
    """The endpoint's body did not match the chat-completions schema."""


class GatewayRetriesExhausted(GatewayError):
    """All attempts failed; last_error holds the final failure."""

    def __init__(self, attempts: int, last_error: GatewayError):
        super().__init__(f"all {attempts} attempts failed: {last_error}")
        self.last_error = last_error


@dataclass(frozen=True)
class GenerationRequest:
    system_text: str
    user_text: str
    max_tokens: int = 256
    temperature: float | None = None
    tag: str = "rewrite"

    def __post_init__(self) -> None:
        if not self.system_text or not self.user_text:
            raise ValueError("system_text and user_text must be non-empty")
        if self.max_tokens <= 0:
            raise ValueError(f"max_tokens must be > 0, got {self.max_tokens}")
        if self.temperature is not None and self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.tag not in TAGS:
            raise ValueError(f"tag must be one of {TAGS}, got {self.tag!r}")

    def effective_temperature(self) -> float:
        if self.temperature is not None:
            return self.temperature
        return DEFAULT_TEMPERATURE[self.tag]


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    backend: str
    latency_ms: float
    token_counts: dict = field(default_factory=dict)


class MockBackend:
    """Deterministic backend: pure function of the request via tag handlers."""

    name = "mock"

    def __init__(self, handlers: dict[str, Callable[[GenerationRequest], str]] | None = None):
        self.handlers = dict(handlers or {})

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        start = time.perf_counter()
        handler = self.handlers.get(request.tag)
        if handler is None:
            text = request.user_text  # echo is the safest neutral default
        else:
            text = handler(request)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        return GenerationResponse(
            text=text,
            backend=self.name,
            latency_ms=elapsed_ms,
            token_counts={
                "prompt": len(request.system_text.split()) + len(request.user_text.split()),
                "completion": len(text.split()),
            },
        )


class HttpBackend:
    """Chat-completions client for any endpoint speaking the common schema."""

    name = "http"

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout_s: float = 30.0,
        retries: int = 2,
        backoff_s: float = 0.5,
        session: requests.Session | None = None,
        max_in_flight: int | None = None,
    ):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self._api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        if not self.base_url:
            raise GatewayError(f"no endpoint configured (set {ENV_BASE_URL})")
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self.session = session or requests.Session()
        self._gate = threading.BoundedSemaphore(max_in_flight) if max_in_flight else None

    def __repr__(self) -> str:  # never include the key
        return f"HttpBackend(base_url={self.base_url!r}, model={self.model!r})"

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.effective_temperature(),
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        start = time.perf_counter()
        last_error: GatewayError | None = None
        attempts = self.retries + 1
        for attempt in range(attempts):
            try:
                text, usage = self._one_call(payload, headers)
                elapsed_ms = (time.perf_counter() - start) * 1000.0
                return GenerationResponse(
                    text=text, backend=self.name, latency_ms=elapsed_ms, token_counts=usage
                )
            except GatewayError as exc:
                last_error = exc
                if attempt < attempts - 1:
                    time.sleep(self.backoff_s * (2**attempt))
        assert last_error is not None
        raise GatewayRetriesExhausted(attempts, last_error)

    def _one_call(self, payload: dict, headers: dict) -> tuple[str, dict]:
        try:
            if self._gate is not None:
                self._gate.acquire()
            try:
                response = self.session.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout_s,
                )
            finally:
                if self._gate is not None:
                    self._gate.release()
        except requests.Timeout as exc:
            raise GatewayTimeout(f"no response within {self.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise GatewayError(f"transport failure: {exc.__class__.__name__}") from exc
        if not 200 <= response.status_code < 300:
            raise GatewayStatusError(response.status_code)
        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayFormatError(f"unexpected response body: {exc}") from exc
        if not isinstance(text, str):
            raise GatewayFormatError("message content is not a string")
        usage = body.get("usage") or {}
        return text, {k: v for k, v in usage.items() if isinstance(v, int)}
