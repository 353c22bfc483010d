"""Backend client seam: every ML call goes through one interface speaking
JSON envelopes {backend, version, payload}, so a recorded cassette can
stand in for the live services bit-for-bit.

Cassette files hold request/response pairs per backend keyed by a stable
digest of the canonicalized request envelope; replay is exact-match only.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from pathlib import Path
from typing import Callable, Optional, Protocol

ENVELOPE_VERSION = 1

# Logical backend names routed through the client
BACKEND_NAMES = ("layout", "detect", "ocsr", "reason", "names")


class BackendError(Exception):
    pass


class BackendTimeout(BackendError):
    pass


class CassetteMiss(BackendError):
    def __init__(self, backend: str, digest: str):
        self.backend = backend
        self.digest = digest
        super().__init__(f"no recorded response for {backend} request {digest[:12]}")


def canonical_json(data) -> str:
    """Stable serialization: sorted keys, no whitespace, plain unicode."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_envelope(backend: str, payload: dict) -> dict:
    return {"backend": backend, "version": ENVELOPE_VERSION, "payload": payload}


def request_digest(backend: str, payload: dict) -> str:
    text = canonical_json(request_envelope(backend, payload))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class BackendClient(Protocol):
    def call(self, backend: str, payload: dict) -> dict:
        """Send one request payload, return the response payload."""


class CallableBackend:
    """Adapter for an in-process function (str backend, dict payload) -> dict."""

    def __init__(self, fn: Callable[[str, dict], dict]):
        self._fn = fn

    def call(self, backend: str, payload: dict) -> dict:
        return self._fn(backend, payload)


class HttpBackendClient:
    """POSTs envelopes to {base_url}/{backend}; retries timeouts with
    exponential backoff (the requests are inference-only, hence idempotent)."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.5,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def call(self, backend: str, payload: dict) -> dict:
        import httpx

        envelope = request_envelope(backend, payload)
        last: Optional[Exception] = None
        for attempt in range(self.retries):
            try:
                resp = httpx.post(
                    f"{self.base_url}/{backend}", json=envelope, timeout=self.timeout
                )
                resp.raise_for_status()
                body = resp.json()
            except httpx.TimeoutException as exc:
                last = exc
                time.sleep(self.backoff * (2**attempt))
                continue
            except httpx.HTTPError as exc:
                raise BackendError(f"{backend} request failed: {exc}") from exc
            if not isinstance(body, dict) or "payload" not in body:
                raise BackendError(f"{backend} returned a malformed envelope")
            return body["payload"]
        raise BackendTimeout(f"{backend} timed out after {self.retries} attempts") from last


class Cassette:
    """Directory of {backend}.json files mapping digest -> {request, response}.

    Writes are serialized and flushed through a temp file so a crashed run
    leaves the previous consistent cassette behind.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._lock = threading.Lock()
        self._data: dict[str, dict[str, dict]] = {}
        self._load()

    def _load(self) -> None:
        if not self.directory.is_dir():
            return
        for path in sorted(self.directory.glob("*.json")):
            with open(path, encoding="utf-8") as fh:
                self._data[path.stem] = json.load(fh)

    def lookup(self, backend: str, digest: str) -> Optional[dict]:
        entry = self._data.get(backend, {}).get(digest)
        return None if entry is None else entry["response"]

    def store(self, backend: str, digest: str, payload: dict, response: dict) -> None:
        with self._lock:
            table = self._data.setdefault(backend, {})
            table[digest] = {
                "request": request_envelope(backend, payload),
                "response": response,
            }
            self._flush(backend)

    def _flush(self, backend: str) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{backend}.json"
        tmp = path.with_suffix(".json.tmp")
        table = self._data[backend]
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(
                {k: table[k] for k in sorted(table)}, fh, indent=2, sort_keys=True
            )
            fh.write("\n")
        tmp.replace(path)

    def __len__(self) -> int:
        return sum(len(t) for t in self._data.values())


class RecordingBackend:
    """Pass calls through to ``inner`` and persist each pair to the cassette."""

    def __init__(self, inner: BackendClient, cassette: Cassette):
        self.inner = inner
        self.cassette = cassette

    def call(self, backend: str, payload: dict) -> dict:
        digest = request_digest(backend, payload)
        cached = self.cassette.lookup(backend, digest)
        if cached is not None:
            return cached
        response = self.inner.call(backend, payload)
        self.cassette.store(backend, digest, payload, response)
        return response


class ReplayBackend:
    """Serve exclusively from the cassette; unseen requests are errors."""

    def __init__(self, cassette: Cassette):
        self.cassette = cassette

    def call(self, backend: str, payload: dict) -> dict:
        digest = request_digest(backend, payload)
        response = self.cassette.lookup(backend, digest)
        if response is None:
            raise CassetteMiss(backend, digest)
        return response


class NameClient:
    """Name-to-structure resolution over the backend protocol:
    request {name}, response {smiles}."""

    def __init__(self, client: BackendClient):
        self._client = client

    def resolve(self, name: str) -> str:
        response = self._client.call("names", {"name": name})
        smiles = response.get("smiles")
        if not smiles:
            raise BackendError(f"name service returned no structure for {name!r}")
        return smiles
