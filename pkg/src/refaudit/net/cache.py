"""Durable response cache keyed by (source, normalized request).

Repeated audits replay terminal replies instead of re-hitting the APIs:
politeness and reproducibility in one layer. Definitive replies (including
not-found) are stored; retry-exhausted transient failures never are, so a
re-run gets a fresh chance.

On disk the cache is append-only JSON lines, one entry per line:
``{"source": ..., "key": ..., "status": ..., "body": ..., "location": ...}``.
Appends are flushed per entry, so concurrent writers interleave whole
records.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .transport import TransportReply


class ResponseCache:
    """In-memory map with optional JSONL persistence at ``path``."""

    def __init__(self, path: str | Path | None = None):
        self.path = str(path) if path is not None else None
        self._entries: dict[tuple[str, str], TransportReply] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.path is not None:
            parent = Path(self.path).parent
            if parent and not parent.exists():
                parent.mkdir(parents=True, exist_ok=True)
            if Path(self.path).exists():
                self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{self.path}:{lineno}: corrupt cache line: {exc}") from exc
                self._entries[(record["source"], record["key"])] = TransportReply(
                    status=int(record["status"]),
                    body=record.get("body", ""),
                    location=record.get("location"),
                )

    def get(self, source: str, key: str) -> TransportReply | None:
        with self._lock:
            reply = self._entries.get((source, key))
            if reply is None:
                self.misses += 1
            else:
                self.hits += 1
            return reply

    def put(self, source: str, key: str, reply: TransportReply) -> None:
        with self._lock:
            if (source, key) in self._entries:
                return
            self._entries[(source, key)] = reply
            if self.path is not None:
                record = {"source": source, "key": key, "status": reply.status}
                if reply.body:
                    record["body"] = reply.body
                if reply.location is not None:
                    record["location"] = reply.location
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(record, ensure_ascii=False) + "\n")
                    handle.flush()

    def __len__(self) -> int:
        return len(self._entries)
