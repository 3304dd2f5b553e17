"""Transport abstraction: one HTTP hop in, one reply out.

Three implementations share the same contract so the verification pipeline
is byte-deterministic without a live network:

* ``LiveTransport`` -- real HTTP via requests (redirects NOT followed here;
  the client layer follows them so all transports behave alike).
* ``ReplayTransport`` -- a recorded request->reply map loaded from a fixture
  file; missing keys fail loudly.
* ``ScriptedTransport`` -- programmable reply sequences per request key, for
  retry/backoff tests.

A request is identified by its key: ``"<METHOD> <url>"`` with the URL fully
encoded and query parameters in fixed order (the clients build URLs
deterministically).

Fixture file format (version 1): UTF-8 JSON lines. An optional first line
``{"fixture_version": 1}`` tags the file. Every other line is one record:
``{"key": "GET https://...", "status": 200, "body": "...", "location":
"..."}`` where ``location`` (redirect target) and ``body`` may be omitted.
A record may instead carry ``{"key": ..., "error": "transient"|"refused"}``
to script network failures, or ``{"key": ..., "replies": [{...}, {...}]}``
with a list of reply objects consumed in request order (the last one
repeats), which is how retry sequences are recorded.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

FIXTURE_VERSION = 1


class TransportError(Exception):
    """Base class for transport-level failures (no HTTP reply obtained)."""


class TransientError(TransportError):
    """Retryable failure: timeout, connection reset, DNS blip."""


class ConnectionRefused(TransportError):
    """Definitive failure: nothing is listening at the target."""


class MissingFixtureError(KeyError):
    """Replay mode was asked for a request that was never recorded."""


@dataclass(frozen=True)
class TransportReply:
    """One HTTP reply: status, body text, and redirect target if any."""

    status: int
    body: str = ""
    location: str | None = None

    @property
    def is_redirect(self) -> bool:
        return self.status in (301, 302, 303, 307, 308) and self.location is not None


class Transport(Protocol):
    def request(self, method: str, url: str) -> TransportReply:
        """Perform one HTTP exchange (no redirect following). May raise
        TransientError or ConnectionRefused."""
        ...


def request_key(method: str, url: str) -> str:
    return f"{method} {url}"


class LiveTransport:
    """Real HTTP. Reads politeness/credential settings from the environment:
    REFAUDIT_CONTACT (mailto for the User-Agent) and
    SEMANTIC_SCHOLAR_API_KEY (x-api-key header for that host).
    """

    def __init__(self, timeout_seconds: float = 20.0):
        import requests

        self._requests = requests
        self._session = requests.Session()
        self.timeout_seconds = timeout_seconds
        agent = "refaudit/0.1"
        contact = os.environ.get("REFAUDIT_CONTACT")
        if contact:
            agent += f" (mailto:{contact})"
        self._session.headers["User-Agent"] = agent
        self._api_key = os.environ.get("SEMANTIC_SCHOLAR_API_KEY")

    def request(self, method: str, url: str) -> TransportReply:
        headers = {}
        if self._api_key and "semanticscholar.org" in url:
            headers["x-api-key"] = self._api_key
        try:
            response = self._session.request(
                method,
                url,
                headers=headers,
                timeout=self.timeout_seconds,
                allow_redirects=False,
            )
        except self._requests.exceptions.ConnectionError as exc:
            if "refused" in str(exc).lower():
                raise ConnectionRefused(str(exc)) from exc
            raise TransientError(str(exc)) from exc
        except self._requests.exceptions.RequestException as exc:
            raise TransientError(str(exc)) from exc
        body = "" if method == "HEAD" else response.text
        return TransportReply(
            status=response.status_code,
            body=body,
            location=response.headers.get("Location"),
        )


def _reply_from_record(record: dict) -> TransportReply | TransportError:
    error = record.get("error")
    if error == "transient":
        return TransientError(f"scripted transient failure for {record.get('key')!r}")
    if error == "refused":
        return ConnectionRefused(f"scripted refused connection for {record.get('key')!r}")
    if error is not None:
        raise ValueError(f"unknown fixture error kind {error!r}")
    return TransportReply(
        status=int(record["status"]),
        body=record.get("body", ""),
        location=record.get("location"),
    )


def load_fixture_file(path: str | Path) -> dict[str, list[TransportReply | TransportError]]:
    """Parse a fixture file into a request-key -> reply-sequence map."""
    fixtures: dict[str, list[TransportReply | TransportError]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if "fixture_version" in record:
                if record["fixture_version"] != FIXTURE_VERSION:
                    raise ValueError(
                        f"{path}:{lineno}: unsupported fixture_version "
                        f"{record['fixture_version']}"
                    )
                continue
            if "key" not in record:
                raise ValueError(f"{path}:{lineno}: fixture record without a key")
            if "replies" in record:
                if not record["replies"]:
                    raise ValueError(f"{path}:{lineno}: empty replies sequence")
                fixtures[record["key"]] = [
                    _reply_from_record(entry) for entry in record["replies"]
                ]
            else:
                fixtures[record["key"]] = [_reply_from_record(record)]
    return fixtures


def write_fixture_file(path: str | Path, records: Iterable[dict]) -> None:
    """Write fixture records (dicts as documented above) with a version tag."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"fixture_version": FIXTURE_VERSION}) + "\n")
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


class ReplayTransport:
    """Serve recorded replies from a fixture file; unknown keys fail loudly.

    Multi-reply records are consumed in request order with the last reply
    repeating, so recorded retry sequences play back faithfully.
    """

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._fixtures = load_fixture_file(path)
        self._lock = threading.Lock()
        self.calls: list[str] = []

    def calls_matching(self, fragment: str) -> int:
        with self._lock:
            return sum(1 for key in self.calls if fragment in key)

    def request(self, method: str, url: str) -> TransportReply:
        key = request_key(method, url)
        with self._lock:
            self.calls.append(key)
            try:
                sequence = self._fixtures[key]
            except KeyError:
                raise MissingFixtureError(
                    f"no recorded reply for {key!r} in {self.path}"
                ) from None
            outcome = sequence.pop(0) if len(sequence) > 1 else sequence[0]
        if isinstance(outcome, TransportError):
            raise outcome
        return outcome


class ScriptedTransport:
    """Programmable reply sequences, for exercising retry/backoff paths.

    Each scripted entry is a TransportReply or a TransportError instance to
    raise. Replies are consumed in order; the final entry repeats once the
    script is exhausted. Every request key is recorded in ``calls``.
    """

    def __init__(self):
        self._scripts: dict[str, list[TransportReply | TransportError]] = {}
        self._lock = threading.Lock()
        self.calls: list[str] = []

    def script(self, key: str, *outcomes: TransportReply | TransportError) -> None:
        if not outcomes:
            raise ValueError("a script needs at least one outcome")
        self._scripts[key] = list(outcomes)

    def calls_matching(self, fragment: str) -> int:
        with self._lock:
            return sum(1 for key in self.calls if fragment in key)

    def request(self, method: str, url: str) -> TransportReply:
        key = request_key(method, url)
        with self._lock:
            self.calls.append(key)
            try:
                script = self._scripts[key]
            except KeyError:
                raise MissingFixtureError(f"no script for {key!r}") from None
            outcome = script.pop(0) if len(script) > 1 else script[0]
        if isinstance(outcome, TransportError):
            raise outcome
        return outcome
