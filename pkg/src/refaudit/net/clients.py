"""Metadata clients: DOI resolution, arXiv existence, URL reachability, and
title search against two scholarly indexes.

All four share one fetch path: response cache, per-source rate limiting,
redirect following, and retry with exponential backoff. Network failure
after retries is reported as a value (the ``TRANSIENT`` sentinel or a
``TransientFailure`` resolution kind), never an exception: the pipeline maps
it to Unknown, because a transient failure is not evidence of absence.

Live endpoint templates (replay/scripted transports use the same URLs):

* DOI:              ``GET https://doi.org/<doi>``
* arXiv:            ``GET https://export.arxiv.org/api/query?id_list=<id>&max_results=1``
* Crossref:         ``GET https://api.crossref.org/works?query.bibliographic=<q>&rows=<n>&select=title,DOI``
* Semantic Scholar: ``GET https://api.semanticscholar.org/graph/v1/paper/search?query=<q>&limit=<n>&fields=title,externalIds``
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from urllib.parse import quote, urlencode, urljoin

from ..fuzzy import MatchCandidate, title_similarity
from ..model import NOT_FOUND_STATUSES, AuditConfig
from .cache import ResponseCache
from .throttle import Clock, RateLimiter, SystemClock, TransportPolicy, backoff_wait
from .transport import (
    ConnectionRefused,
    TransientError,
    Transport,
    TransportReply,
    request_key,
)

RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})
MAX_REDIRECTS = 10

SEMANTIC_SCHOLAR = "semantic-scholar"
CROSSREF = "crossref"
SEARCH_SOURCES = (SEMANTIC_SCHOLAR, CROSSREF)


class Transient:
    """Singleton sentinel: no usable reply after retries exhausted."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TRANSIENT"

    def __bool__(self) -> bool:
        raise TypeError("check 'is TRANSIENT' before using this result as a boolean")


TRANSIENT = Transient()


class ResolutionKind(enum.Enum):
    RESOLVED = "resolved"
    NOT_FOUND = "not_found"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class ResolutionResult:
    """Outcome of resolving one DOI, with the terminal status and retry count."""

    kind: ResolutionKind
    final_http_status: int | None
    elapsed: float
    retries: int = 0


def doi_resolution_url(doi: str) -> str:
    return "https://doi.org/" + quote(doi, safe="-._;()/:")


def arxiv_query_url(arxiv_id: str) -> str:
    bare = strip_arxiv_version(arxiv_id)
    return "https://export.arxiv.org/api/query?" + urlencode(
        {"id_list": bare, "max_results": "1"}
    )


def crossref_search_url(query: str, limit: int) -> str:
    return "https://api.crossref.org/works?" + urlencode(
        {"query.bibliographic": query, "rows": str(limit), "select": "title,DOI"}
    )


def semantic_scholar_search_url(query: str, limit: int) -> str:
    return "https://api.semanticscholar.org/graph/v1/paper/search?" + urlencode(
        {"query": query, "limit": str(limit), "fields": "title,externalIds"}
    )


def strip_arxiv_version(arxiv_id: str) -> str:
    """Drop a trailing vN suffix; existence is version-insensitive."""
    base, _, version = arxiv_id.partition("v")
    if version.isdigit():
        return base
    return arxiv_id


def _parse_crossref_items(body: str) -> list[tuple[str, str | None]]:
    payload = json.loads(body)
    items = payload.get("message", {}).get("items", [])
    results = []
    for item in items:
        titles = item.get("title") or []
        if titles:
            results.append((titles[0], item.get("DOI")))
    return results


def _parse_semantic_scholar_items(body: str) -> list[tuple[str, str | None]]:
    payload = json.loads(body)
    results = []
    for item in payload.get("data") or []:
        title = item.get("title")
        if title:
            doi = (item.get("externalIds") or {}).get("DOI")
            results.append((title, doi))
    return results


_PARSERS = {
    CROSSREF: _parse_crossref_items,
    SEMANTIC_SCHOLAR: _parse_semantic_scholar_items,
}


class ResolverClients:
    """The four verification clients behind one rate-limited, cached fetch path.

    Safe for concurrent use: the limiter serializes permits per source, the
    cache locks per operation, and the backoff generator is guarded.
    """

    def __init__(
        self,
        transport: Transport,
        policy: TransportPolicy | None = None,
        cache: ResponseCache | None = None,
        clock: Clock | None = None,
        search_limit: int = 5,
    ):
        self.transport = transport
        self.policy = policy if policy is not None else TransportPolicy()
        self.cache = cache if cache is not None else ResponseCache()
        self.clock = clock if clock is not None else SystemClock()
        self.search_limit = search_limit
        self.limiter = RateLimiter(
            self.policy.per_source_min_interval_seconds, clock=self.clock
        )
        self._rng = random.Random(self.policy.rng_seed)

    @classmethod
    def from_config(
        cls,
        config: AuditConfig,
        transport: Transport,
        clock: Clock | None = None,
        cache: ResponseCache | None = None,
    ) -> "ResolverClients":
        policy = TransportPolicy(
            per_source_min_interval_seconds=dict(config.per_source_min_interval_seconds),
            backoff_initial_seconds=config.backoff_initial_seconds,
            backoff_max_seconds=config.backoff_max_seconds,
            max_retries=config.max_retries,
            rng_seed=config.rng_seed,
        )
        if cache is None:
            cache = ResponseCache(config.cache_path)
        return cls(
            transport,
            policy=policy,
            cache=cache,
            clock=clock,
            search_limit=config.search_limit,
        )

    # -- fetch path ---------------------------------------------------------

    def _follow_redirects(self, method: str, url: str) -> TransportReply:
        current = url
        reply = self.transport.request(method, current)
        for _ in range(MAX_REDIRECTS):
            if not reply.is_redirect:
                return reply
            current = urljoin(current, reply.location)
            reply = self.transport.request(method, current)
        return reply  # redirect cap hit; the 3xx reply is the terminal answer

    def _fetch(self, source: str, method: str, url: str) -> tuple[TransportReply, int]:
        """Terminal reply for one request, with the number of retries used.

        Raises TransientError once retries are exhausted (never cached);
        ConnectionRefused propagates immediately.
        """
        key = request_key(method, url)
        cached = self.cache.get(source, key)
        if cached is not None:
            return cached, 0
        attempt = 0
        while True:
            if self.limiter.configured(source):
                self.limiter.acquire(source)
            try:
                reply = self._follow_redirects(method, url)
            except TransientError:
                if attempt >= self.policy.max_retries:
                    raise
                self.clock.sleep(backoff_wait(attempt, self.policy, self._rng))
                attempt += 1
                continue
            if reply.status in RETRYABLE_STATUSES:
                if attempt >= self.policy.max_retries:
                    raise TransientError(
                        f"{key} still returning {reply.status} after {attempt} retries"
                    )
                self.clock.sleep(backoff_wait(attempt, self.policy, self._rng))
                attempt += 1
                continue
            self.cache.put(source, key, reply)
            return reply, attempt

    # -- the four clients ---------------------------------------------------

    def resolve_doi(self, doi: str) -> ResolutionResult:
        """Resolve a DOI, following redirects to the terminal reply.

        Resolved on terminal 2xx, and on terminal 3xx (the resolver answers
        known handles with a redirect, so a redirect is proof of existence).
        NotFound on 404/410 only. Anything else carries no evidence of
        absence and maps to the transient kind.
        """
        started = self.clock.now()
        try:
            reply, retries = self._fetch("doi", "GET", doi_resolution_url(doi))
        except (TransientError, ConnectionRefused):
            return ResolutionResult(
                kind=ResolutionKind.TRANSIENT,
                final_http_status=None,
                elapsed=self.clock.now() - started,
            )
        elapsed = self.clock.now() - started
        if 200 <= reply.status < 400:
            kind = ResolutionKind.RESOLVED
        elif reply.status in NOT_FOUND_STATUSES:
            kind = ResolutionKind.NOT_FOUND
        else:
            kind = ResolutionKind.TRANSIENT
        return ResolutionResult(
            kind=kind, final_http_status=reply.status, elapsed=elapsed, retries=retries
        )

    def arxiv_exists(self, arxiv_id: str) -> bool | Transient:
        """True iff the metadata service acknowledges the id (any version)."""
        bare = strip_arxiv_version(arxiv_id)
        try:
            reply, _ = self._fetch("arxiv", "GET", arxiv_query_url(arxiv_id))
        except (TransientError, ConnectionRefused):
            return TRANSIENT
        if reply.status == 200:
            return f"arxiv.org/abs/{bare}" in reply.body
        if reply.status in NOT_FOUND_STATUSES:
            return False
        return TRANSIENT

    def head_url(self, url: str) -> bool | Transient:
        """True iff a HEAD request ends below status 400 (redirects followed).

        Connection refused is a definitive False; retry exhaustion is
        TRANSIENT.
        """
        try:
            reply, _ = self._fetch("url", "HEAD", url)
        except ConnectionRefused:
            return False
        except TransientError:
            return TRANSIENT
        return reply.status < 400

    def search_title(
        self, source: str, query: str, limit: int | None = None
    ) -> list[MatchCandidate] | Transient:
        """Up to ``limit`` scored candidates for ``query`` from one source.

        An empty list is a definitive no-results answer; TRANSIENT means the
        source could not be consulted and must map to Unknown downstream,
        never Phantom.
        """
        if source not in SEARCH_SOURCES:
            raise ValueError(f"unknown search source {source!r}")
        if not query:
            raise ValueError("search query must be non-empty")
        if limit is None:
            limit = self.search_limit
        if source == CROSSREF:
            url = crossref_search_url(query, limit)
        else:
            url = semantic_scholar_search_url(query, limit)
        try:
            reply, _ = self._fetch(source, "GET", url)
        except (TransientError, ConnectionRefused):
            return TRANSIENT
        if reply.status != 200:
            return TRANSIENT
        try:
            items = _PARSERS[source](reply.body)
        except (json.JSONDecodeError, TypeError, AttributeError):
            return TRANSIENT
        candidates = []
        for title, doi in items[:limit]:
            candidates.append(
                MatchCandidate(
                    source=source,
                    candidate_title=title,
                    candidate_doi=doi,
                    similarity=title_similarity(query, title),
                )
            )
        return candidates
