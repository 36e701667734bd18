"""The LLM boundary: completion types, token accounting, HTTP adapter.

One generic chat-completions wire shape covers live providers; scripted
backends (see :mod:`opsbench.scripted`) share the same interface.
"""

from __future__ import annotations

import math
import os
import re
import threading
import time
from dataclasses import dataclass

import httpx

from .domain import DomainError

_NONSPACE_RE = re.compile(r"\S+")


class BackendError(RuntimeError):
    """Transport or provider failure after retries."""


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    stop_sequences: tuple[str, ...] = ()
    max_output_chars: int = 32768

    def __post_init__(self) -> None:
        if not self.prompt:
            raise DomainError("prompt must be nonempty")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    token_source: str = "approximated"  # "provider_reported" | "approximated"


def approx_tokens(text: str) -> int:
    """Deterministic token estimate when a provider reports no usage.

    Counts maximal runs of non-whitespace characters plus a length-based
    punctuation correction of ceil(len/100).
    """
    if not text:
        return 0
    return len(_NONSPACE_RE.findall(text)) + math.ceil(len(text) / 100)


def approximated_response(prompt: str, text: str) -> CompletionResponse:
    return CompletionResponse(
        text=text,
        prompt_tokens=approx_tokens(prompt),
        completion_tokens=approx_tokens(text),
        token_source="approximated",
    )


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    auth_env_var: str = ""
    timeout_s: float = 60.0
    requests_per_second: float = 0.0  # 0 disables rate limiting


class _RateLimiter:
    """Minimal interval gate; good enough to respect provider request caps."""

    def __init__(self, requests_per_second: float) -> None:
        self._interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        if self._interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            time.sleep(delay)


class HttpChatBackend:
    """Chat-completions adapter for any OpenAI-compatible gateway endpoint."""

    def __init__(
        self,
        config: EndpointConfig,
        backend_id: str | None = None,
        transport: httpx.BaseTransport | None = None,
        backoff_s: float = 0.5,
    ) -> None:
        self.config = config
        self.backend_id = backend_id or config.model
        self._limiter = _RateLimiter(config.requests_per_second)
        self._backoff_s = backoff_s
        self._client = httpx.Client(
            timeout=config.timeout_s,
            transport=transport,
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_env_var:
            token = os.environ.get(self.config.auth_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        url = self.config.base_url.rstrip("/") + "/v1/chat/completions"
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "stop": list(request.stop_sequences),
            "temperature": 0,
        }
        last_error = "unknown error"
        for attempt in range(2):
            if attempt:
                time.sleep(self._backoff_s * (2 ** (attempt - 1)))
            self._limiter.wait()
            try:
                response = self._client.post(url, json=body, headers=self._headers())
            except httpx.TimeoutException:
                last_error = "timeout"
                continue
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code >= 400:
                last_error = f"HTTP {response.status_code}: {response.text[:200]}"
                continue
            return self._parse(request, response.json())
        raise BackendError(f"{self.backend_id}: {last_error}")

    def _parse(self, request: CompletionRequest, payload: dict) -> CompletionResponse:
        try:
            text = payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"{self.backend_id}: malformed response body") from exc
        # Providers that honor stop server-side are passed through; trim
        # client-side otherwise so the contract holds either way.
        for stop in request.stop_sequences:
            idx = text.find(stop)
            if idx >= 0:
                text = text[:idx]
        usage = payload.get("usage")
        if isinstance(usage, dict) and "prompt_tokens" in usage:
            return CompletionResponse(
                text=text,
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
                token_source="provider_reported",
            )
        return approximated_response(request.prompt, text)

    def close(self) -> None:
        self._client.close()
