"""Network stack: transports, throttling, caching, and metadata clients.

All verification traffic flows through an injectable transport, so every
test (and replay mode) runs with zero live network access.
"""

from .cache import ResponseCache
from .clients import (
    TRANSIENT,
    ResolutionKind,
    ResolutionResult,
    ResolverClients,
    Transient,
)
from .throttle import RateLimiter, SimulatedClock, SystemClock, TransportPolicy, backoff_wait
from .transport import (
    ConnectionRefused,
    LiveTransport,
    MissingFixtureError,
    ReplayTransport,
    ScriptedTransport,
    TransientError,
    TransportError,
    TransportReply,
    load_fixture_file,
    write_fixture_file,
)

__all__ = [
    "ConnectionRefused",
    "LiveTransport",
    "MissingFixtureError",
    "RateLimiter",
    "ReplayTransport",
    "ResolutionKind",
    "ResolutionResult",
    "ResolverClients",
    "ResponseCache",
    "ScriptedTransport",
    "SimulatedClock",
    "SystemClock",
    "TRANSIENT",
    "Transient",
    "TransientError",
    "TransportError",
    "TransportPolicy",
    "TransportReply",
    "backoff_wait",
    "load_fixture_file",
    "write_fixture_file",
]
