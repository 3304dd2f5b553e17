"""Request pacing: per-source rate limiting and exponential backoff.

The wall clock is injectable so tests advance simulated time instead of
sleeping. Rate limiting is a process-wide contract per source: the total
outbound request rate to a source never exceeds its configured rate no
matter how many workers share the limiter.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    """Monotonic wall clock."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class SimulatedClock:
    """Deterministic clock whose sleeps advance time instantly.

    Single-threaded use only; concurrent sleepers would race on ``_now``.
    """

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        self._now += seconds


@dataclass(frozen=True)
class TransportPolicy:
    """Rate-limit intervals and retry/backoff parameters for the clients."""

    per_source_min_interval_seconds: dict[str, float] = field(
        default_factory=lambda: {"semantic-scholar": 1.0, "crossref": 0.1}
    )
    backoff_initial_seconds: float = 1.0
    backoff_max_seconds: float = 60.0
    max_retries: int = 3
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        for source, interval in self.per_source_min_interval_seconds.items():
            if interval <= 0:
                raise ValueError(f"min interval for {source!r} must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backoff_initial_seconds > self.backoff_max_seconds:
            raise ValueError("backoff_initial_seconds exceeds backoff_max_seconds")


class UnconfiguredSourceError(KeyError):
    """A permit was requested for a source with no configured interval."""


class RateLimiter:
    """Spaces permits per source by at least the configured interval.

    Thread-safe: a slot is reserved under the lock, then the wait happens
    outside it, so workers queue on the schedule rather than on each other.
    Sources are independent; acquiring for one never delays another.
    """

    def __init__(self, intervals: dict[str, float], clock: Clock | None = None):
        self._intervals = dict(intervals)
        self._clock = clock if clock is not None else SystemClock()
        self._next_free: dict[str, float] = {}
        self._lock = threading.Lock()

    def configured(self, source: str) -> bool:
        return source in self._intervals

    def acquire(self, source: str) -> float:
        """Block until a permit is available; returns the permit timestamp."""
        try:
            interval = self._intervals[source]
        except KeyError:
            raise UnconfiguredSourceError(source) from None
        with self._lock:
            now = self._clock.now()
            slot = max(now, self._next_free.get(source, now))
            self._next_free[source] = slot + interval
        self._clock.sleep(slot - now)
        return slot


def backoff_wait(k: int, policy: TransportPolicy, rng: random.Random) -> float:
    """Wait before retry ``k``: min(b0 * 2^k + jitter, b_max).

    The jitter is uniform on [0, 0.1 * b0 * 2^k), drawn from the caller's
    seeded generator, and exists to de-synchronize clients that would
    otherwise retry in lockstep.
    """
    if k < 0:
        raise ValueError("retry index must be >= 0")
    base = policy.backoff_initial_seconds * (2.0**k)
    jitter = rng.uniform(0.0, 0.1 * base)
    return min(base + jitter, policy.backoff_max_seconds)
