"""Transports: how a request payload reaches a backend and comes back.

The engine only ever sees ``post(endpoint, payload) -> payload``; HTTP,
in-process mocks, caching and call counting are all stacked transports.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from typing import Protocol

import requests

from ..errors import BackendUnavailable, ProtocolError
from .types import canonical_json

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.1


class Transport(Protocol):
    def post(self, endpoint: str, payload: dict) -> dict: ...


class HttpTransport:
    """JSON-over-HTTP transport with bounded retries on transport failures.

    Retries only connection-level problems (3 attempts, exponential
    backoff); a well-formed error envelope is raised as ProtocolError
    immediately.
    """

    def __init__(self, base_url: str, timeout: float = 30.0, retry_base_delay: float = RETRY_BASE_DELAY):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retry_base_delay = retry_base_delay
        self._local = threading.local()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            self._local.session = session
        return session

    def post(self, endpoint: str, payload: dict) -> dict:
        url = f"{self.base_url}{endpoint}"
        last_error: Exception | None = None
        for attempt in range(RETRY_ATTEMPTS):
            try:
                resp = self._session().post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                if attempt + 1 < RETRY_ATTEMPTS:
                    time.sleep(self.retry_base_delay * (2**attempt))
                continue
            if resp.status_code != 200:
                raise ProtocolError(_error_message(resp))
            try:
                body = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"non-JSON response from {endpoint}") from exc
            if not isinstance(body, dict):
                raise ProtocolError(f"response from {endpoint} is not an object")
            return body
        raise BackendUnavailable(f"{url} unreachable after {RETRY_ATTEMPTS} attempts: {last_error}")

    def healthy(self) -> bool:
        try:
            resp = self._session().get(f"{self.base_url}/v1/health", timeout=self.timeout)
            return resp.status_code == 200
        except requests.RequestException:
            return False


def _error_message(resp: requests.Response) -> str:
    try:
        envelope = resp.json()
        return f"backend error {resp.status_code}: {envelope.get('code')}: {envelope.get('message')}"
    except ValueError:
        return f"backend error {resp.status_code}"


class InProcessTransport:
    """Dispatch straight into backend handlers without sockets."""

    def __init__(self, handler) -> None:
        # handler: (endpoint, payload) -> payload, raising engine errors directly
        self._handler = handler

    def post(self, endpoint: str, payload: dict) -> dict:
        # Round-trip through JSON so in-process behaves like the wire.
        clean = json.loads(canonical_json(payload))
        return self._handler(endpoint, clean)


class CountingTransport:
    """Wrapper that counts calls per endpoint (test instrumentation)."""

    def __init__(self, inner: Transport):
        self.inner = inner
        self.counts: dict[str, int] = {}
        self._lock = threading.Lock()

    def post(self, endpoint: str, payload: dict) -> dict:
        with self._lock:
            self.counts[endpoint] = self.counts.get(endpoint, 0) + 1
        return self.inner.post(endpoint, payload)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


class ResponseCache:
    """Content-addressed response store, thread-safe, optionally persistent.

    Keys are sha256 over (endpoint, canonical request JSON); values are the
    raw response payloads. Enabling the cache never changes results, only
    call counts.
    """

    def __init__(self, directory: str | None = None):
        self.directory = directory
        self._memory: dict[str, dict] = {}
        self._lock = threading.Lock()
        if directory:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key_for(endpoint: str, payload: dict) -> str:
        digest = hashlib.sha256()
        digest.update(endpoint.encode())
        digest.update(b"\n")
        digest.update(canonical_json(payload).encode())
        return digest.hexdigest()

    def _path(self, key: str) -> str:
        assert self.directory is not None
        return os.path.join(self.directory, key[:2], f"{key}.json")

    def get(self, key: str) -> dict | None:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        if self.directory:
            path = self._path(key)
            if os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    value = json.load(fh)
                with self._lock:
                    self._memory[key] = value
                return value
        return None

    def put(self, key: str, value: dict) -> None:
        with self._lock:
            self._memory[key] = value
        if self.directory:
            path = self._path(key)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    json.dump(value, fh, sort_keys=True)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


class CachingTransport:
    """Serve identical (endpoint, request) pairs from a ResponseCache."""

    def __init__(self, inner: Transport, cache: ResponseCache, enabled: bool = True):
        self.inner = inner
        self.cache = cache
        self.enabled = enabled

    def post(self, endpoint: str, payload: dict) -> dict:
        if not self.enabled:
            return self.inner.post(endpoint, payload)
        key = ResponseCache.key_for(endpoint, payload)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        value = self.inner.post(endpoint, payload)
        self.cache.put(key, value)
        return value
