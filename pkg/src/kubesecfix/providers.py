"""Repair providers: anything that maps a prompt to candidate text.

A provider only needs a ``generate(prompt, temperature) -> str`` method and
an ``identity`` string.  Transport-level retries live inside the HTTP
provider and are invisible to the repair loop; they never consume parse
retries.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Callable, Protocol, Sequence, runtime_checkable

import httpx

logger = logging.getLogger(__name__)

DEFAULT_TRANSPORT_TRIES = 3
DEFAULT_BACKOFF_BASE = 0.5
DEFAULT_TIMEOUT = 60.0


class ProviderError(Exception):
    """Provider could not produce a response; not curable by more attempts."""


class ProviderAuthError(ProviderError):
    """Credentials rejected; retrying is pointless."""


class ProviderTransportError(ProviderError):
    """Transport kept failing after bounded retries."""


@runtime_checkable
class RepairProvider(Protocol):
    identity: str

    def generate(self, prompt: str, temperature: float) -> str: ...


class ScriptedProvider:
    """Deterministic provider replaying a fixed script.

    Entries are returned in order; once exhausted the last entry repeats.
    Thread-safe so concurrent sessions may share one instance.
    """

    def __init__(self, script: Sequence[str], identity: str = "scripted"):
        if not script:
            raise ValueError("script must be non-empty")
        self.script = list(script)
        self.identity = identity
        self.call_count = 0
        self._lock = threading.Lock()

    def generate(self, prompt: str, temperature: float) -> str:
        with self._lock:
            index = min(self.call_count, len(self.script) - 1)
            self.call_count += 1
        return self.script[index]


class TokenBucket:
    """Simple thread-safe token bucket limiting requests per minute."""

    def __init__(
        self,
        requests_per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be positive")
        self.capacity = requests_per_minute
        self.rate = requests_per_minute / 60.0
        self._tokens = requests_per_minute
        self._clock = clock
        self._sleep = sleep
        self._updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


class HttpChatProvider:
    """Chat-completion HTTP backend.

    Posts ``{model, messages, temperature}`` to ``<endpoint>/chat/completions``
    and returns the assistant text.  5xx, 429 and timeouts are retried with
    exponential backoff up to ``max_transport_tries`` total requests; auth
    failures raise immediately.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        max_transport_tries: int = DEFAULT_TRANSPORT_TRIES,
        backoff_base: float = DEFAULT_BACKOFF_BASE,
        rate_limiter: TokenBucket | None = None,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.url = endpoint.rstrip("/") + "/chat/completions"
        self.model = model
        self.identity = model
        self.api_key = api_key
        self.max_transport_tries = max_transport_tries
        self.backoff_base = backoff_base
        self.rate_limiter = rate_limiter
        self._sleep = sleep
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def generate(self, prompt: str, temperature: float) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        last_failure = ""
        for attempt in range(1, self.max_transport_tries + 1):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            try:
                response = self._client.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                last_failure = f"transport error: {exc}"
                logger.warning("%s (try %d/%d)", last_failure, attempt, self.max_transport_tries)
                self._backoff(attempt)
                continue
            if response.status_code in (401, 403):
                raise ProviderAuthError(f"authentication rejected ({response.status_code})")
            if response.status_code == 429 or response.status_code >= 500:
                last_failure = f"HTTP {response.status_code}"
                logger.warning(
                    "retryable response %s (try %d/%d)",
                    last_failure,
                    attempt,
                    self.max_transport_tries,
                )
                self._backoff(attempt)
                continue
            if response.status_code >= 400:
                raise ProviderError(f"request rejected: HTTP {response.status_code}")
            return self._extract_text(response)
        raise ProviderTransportError(
            f"gave up after {self.max_transport_tries} tries: {last_failure}"
        )

    def _backoff(self, attempt: int) -> None:
        if attempt < self.max_transport_tries:
            self._sleep(self.backoff_base * (2 ** (attempt - 1)))

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc
        if not isinstance(content, str):
            raise ProviderError("completion content is not text")
        return content

    def close(self) -> None:
        self._client.close()
