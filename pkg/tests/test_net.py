import json
import random

import pytest

from refaudit.fuzzy import title_similarity
from refaudit.net.cache import ResponseCache
from refaudit.net.clients import (
    CROSSREF,
    SEMANTIC_SCHOLAR,
    TRANSIENT,
    ResolutionKind,
    ResolverClients,
    arxiv_query_url,
    crossref_search_url,
    doi_resolution_url,
    semantic_scholar_search_url,
)
from refaudit.net.throttle import (
    RateLimiter,
    SimulatedClock,
    TransportPolicy,
    UnconfiguredSourceError,
    backoff_wait,
)
from refaudit.net.transport import (
    ConnectionRefused,
    MissingFixtureError,
    ReplayTransport,
    ScriptedTransport,
    TransientError,
    TransportReply,
    load_fixture_file,
    write_fixture_file,
)


def make_clients(transport, intervals=None, max_retries=3, seed=7, cache=None):
    policy = TransportPolicy(
        per_source_min_interval_seconds=intervals if intervals is not None else {},
        max_retries=max_retries,
        rng_seed=seed,
    )
    return ResolverClients(
        transport, policy=policy, cache=cache, clock=SimulatedClock()
    )


def crossref_body(*titles_and_dois):
    return json.dumps(
        {
            "message": {
                "items": [
                    {"title": [title], "DOI": doi} for title, doi in titles_and_dois
                ]
            }
        }
    )


def s2_body(*titles_and_dois):
    return json.dumps(
        {
            "data": [
                {"title": title, "externalIds": {"DOI": doi} if doi else {}}
                for title, doi in titles_and_dois
            ]
        }
    )


class TestFixtureFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        write_fixture_file(
            path,
            [
                {"key": "GET https://x/1", "status": 200, "body": "hello"},
                {"key": "GET https://x/2", "status": 301, "location": "https://x/3"},
                {"key": "GET https://x/4", "error": "transient"},
            ],
        )
        fixtures = load_fixture_file(path)
        assert fixtures["GET https://x/1"] == [TransportReply(200, "hello")]
        assert fixtures["GET https://x/2"][0].location == "https://x/3"
        assert isinstance(fixtures["GET https://x/4"][0], TransientError)

    def test_reply_sequences_play_back_in_order(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        write_fixture_file(
            path,
            [
                {
                    "key": "GET https://x/busy",
                    "replies": [{"status": 429}, {"status": 200, "body": "ok"}],
                }
            ],
        )
        transport = ReplayTransport(path)
        assert transport.request("GET", "https://x/busy").status == 429
        assert transport.request("GET", "https://x/busy").status == 200
        assert transport.request("GET", "https://x/busy").status == 200

    def test_missing_key_fails_loudly(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        write_fixture_file(path, [{"key": "GET https://x/1", "status": 200}])
        transport = ReplayTransport(path)
        with pytest.raises(MissingFixtureError):
            transport.request("GET", "https://x/never-recorded")

    def test_corrupt_line_reports_line_number(self, tmp_path):
        path = tmp_path / "fixtures.jsonl"
        path.write_text('{"key": "GET https://x", "status": 200}\n{oops\n')
        with pytest.raises(ValueError, match=":2"):
            load_fixture_file(path)


class TestScriptedTransport:
    def test_sequence_then_repeat_last(self):
        transport = ScriptedTransport()
        transport.script(
            "GET https://x", TransportReply(429), TransportReply(200, "ok")
        )
        assert transport.request("GET", "https://x").status == 429
        assert transport.request("GET", "https://x").status == 200
        assert transport.request("GET", "https://x").status == 200
        assert transport.calls_matching("https://x") == 3


class TestRateLimiter:
    def test_semantic_scholar_permits_spaced_one_second(self):
        clock = SimulatedClock()
        limiter = RateLimiter({"semantic-scholar": 1.0}, clock=clock)
        stamps = [limiter.acquire("semantic-scholar") for _ in range(3)]
        assert stamps[1] - stamps[0] >= 1.0
        assert stamps[2] - stamps[1] >= 1.0

    def test_crossref_permits_spaced_tenth_second(self):
        clock = SimulatedClock()
        limiter = RateLimiter({"crossref": 0.1}, clock=clock)
        stamps = [limiter.acquire("crossref") for _ in range(3)]
        assert stamps[1] - stamps[0] >= 0.1
        assert stamps[2] - stamps[1] >= 0.1

    def test_sources_are_independent(self):
        clock = SimulatedClock()
        limiter = RateLimiter({"semantic-scholar": 1.0, "crossref": 0.1}, clock=clock)
        limiter.acquire("semantic-scholar")
        # A crossref permit right after must not wait out the 1 s interval.
        stamp = limiter.acquire("crossref")
        assert stamp == pytest.approx(0.0)

    def test_unconfigured_source_rejected(self):
        limiter = RateLimiter({}, clock=SimulatedClock())
        with pytest.raises(UnconfiguredSourceError):
            limiter.acquire("nowhere")


class TestBackoff:
    def test_first_retry_within_jitter_band(self):
        policy = TransportPolicy(backoff_initial_seconds=1.0, backoff_max_seconds=60.0)
        wait = backoff_wait(0, policy, random.Random(1))
        assert 1.0 <= wait <= 1.1

    def test_cap_binds_for_large_k(self):
        policy = TransportPolicy(backoff_initial_seconds=1.0, backoff_max_seconds=60.0)
        assert backoff_wait(10, policy, random.Random(1)) == 60.0

    def test_zero_base_gives_zero(self):
        policy = TransportPolicy(backoff_initial_seconds=0.0, backoff_max_seconds=60.0)
        assert backoff_wait(0, policy, random.Random(1)) == 0.0

    def test_deterministic_under_fixed_seed(self):
        policy = TransportPolicy()
        first = [backoff_wait(k, policy, random.Random(42)) for k in range(5)]
        second = [backoff_wait(k, policy, random.Random(42)) for k in range(5)]
        assert first == second


class TestResolveDoi:
    def test_resolved_on_200(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {doi_resolution_url('10.17605/OSF.IO/T8S53')}", TransportReply(200)
        )
        result = make_clients(transport).resolve_doi("10.17605/OSF.IO/T8S53")
        assert result.kind is ResolutionKind.RESOLVED
        assert result.final_http_status == 200

    def test_not_found_on_404(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/gone')}", TransportReply(404))
        result = make_clients(transport).resolve_doi("10.1234/gone")
        assert result.kind is ResolutionKind.NOT_FOUND
        assert result.final_http_status == 404

    def test_retries_through_429_and_records_count(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {doi_resolution_url('10.1234/busy')}",
            TransportReply(429),
            TransportReply(429),
            TransportReply(200),
        )
        result = make_clients(transport).resolve_doi("10.1234/busy")
        assert result.kind is ResolutionKind.RESOLVED
        assert result.retries == 2
        assert transport.calls_matching("10.1234/busy") == 3

    def test_transient_after_exhausting_retries(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/down')}", TransportReply(500))
        result = make_clients(transport, max_retries=2).resolve_doi("10.1234/down")
        assert result.kind is ResolutionKind.TRANSIENT
        assert transport.calls_matching("10.1234/down") == 3  # initial + 2 retries

    def test_redirect_chain_resolves(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {doi_resolution_url('10.1234/moved')}",
            TransportReply(302, location="https://publisher.example/landing"),
        )
        transport.script("GET https://publisher.example/landing", TransportReply(200))
        result = make_clients(transport).resolve_doi("10.1234/moved")
        assert result.kind is ResolutionKind.RESOLVED

    def test_definitive_403_is_inconclusive_not_not_found(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/blocked')}", TransportReply(403))
        result = make_clients(transport).resolve_doi("10.1234/blocked")
        assert result.kind is ResolutionKind.TRANSIENT
        assert result.final_http_status == 403


class TestArxivExists:
    def test_present(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {arxiv_query_url('2301.00001v2')}",
            TransportReply(200, body="<id>http://arxiv.org/abs/2301.00001v5</id>"),
        )
        assert make_clients(transport).arxiv_exists("2301.00001v2") is True

    def test_absent(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {arxiv_query_url('9901.99999')}",
            TransportReply(200, body="<title>Error</title>"),
        )
        assert make_clients(transport).arxiv_exists("9901.99999") is False

    def test_timeout_every_attempt_is_transient(self):
        transport = ScriptedTransport()
        transport.script(f"GET {arxiv_query_url('2301.00001')}", TransientError("boom"))
        assert make_clients(transport, max_retries=1).arxiv_exists("2301.00001") is TRANSIENT


class TestHeadUrl:
    def test_200_reachable(self):
        transport = ScriptedTransport()
        transport.script("HEAD https://example.org/x", TransportReply(200))
        assert make_clients(transport).head_url("https://example.org/x") is True

    def test_403_unreachable(self):
        transport = ScriptedTransport()
        transport.script("HEAD https://example.org/x", TransportReply(403))
        assert make_clients(transport).head_url("https://example.org/x") is False

    def test_redirect_chain_followed(self):
        transport = ScriptedTransport()
        transport.script(
            "HEAD https://example.org/old",
            TransportReply(301, location="https://example.org/new"),
        )
        transport.script("HEAD https://example.org/new", TransportReply(200))
        assert make_clients(transport).head_url("https://example.org/old") is True

    def test_connection_refused_is_definitively_false(self):
        transport = ScriptedTransport()
        transport.script("HEAD https://example.org/x", ConnectionRefused("nope"))
        assert make_clients(transport).head_url("https://example.org/x") is False

    def test_timeout_exhaustion_is_transient(self):
        transport = ScriptedTransport()
        transport.script("HEAD https://example.org/x", TransientError("slow"))
        assert make_clients(transport, max_retries=1).head_url("https://example.org/x") is TRANSIENT


class TestSearchTitle:
    def test_exact_hit_scores_100(self):
        query = "adaptive cache coherence protocols"
        transport = ScriptedTransport()
        transport.script(
            f"GET {crossref_search_url(query, 5)}",
            TransportReply(
                200, body=crossref_body(("Adaptive Cache Coherence Protocols", "10.1/x"))
            ),
        )
        clients = make_clients(transport)
        candidates = clients.search_title(CROSSREF, query)
        assert len(candidates) == 1
        assert candidates[0].similarity == 100.0
        assert candidates[0].candidate_doi == "10.1/x"

    def test_zero_hits_is_empty_list(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {semantic_scholar_search_url('q r s t', 5)}",
            TransportReply(200, body=s2_body()),
        )
        assert make_clients(transport).search_title(SEMANTIC_SCHOLAR, "q r s t") == []

    def test_scores_match_fuzzy_oracle(self):
        query = "neural routing of packets"
        titles = [
            "Neural Routing of Packets",
            "Neural Routing of Packet Streams",
            "A Completely Different Topic",
        ]
        transport = ScriptedTransport()
        transport.script(
            f"GET {semantic_scholar_search_url(query, 5)}",
            TransportReply(200, body=s2_body(*[(t, None) for t in titles])),
        )
        candidates = make_clients(transport).search_title(SEMANTIC_SCHOLAR, query)
        assert [c.similarity for c in candidates] == [
            title_similarity(query, t) for t in titles
        ]

    def test_exhaustion_is_transient_sentinel(self):
        transport = ScriptedTransport()
        transport.script(
            f"GET {crossref_search_url('some query here', 5)}", TransientError("x")
        )
        result = make_clients(transport, max_retries=0).search_title(
            CROSSREF, "some query here"
        )
        assert result is TRANSIENT

    def test_unknown_source_rejected(self):
        with pytest.raises(ValueError, match="source"):
            make_clients(ScriptedTransport()).search_title("google", "q")

    def test_respects_limit(self):
        query = "lots of results"
        body = crossref_body(*[(f"title number {i} of many", None) for i in range(9)])
        transport = ScriptedTransport()
        transport.script(f"GET {crossref_search_url(query, 2)}", TransportReply(200, body=body))
        candidates = make_clients(transport).search_title(CROSSREF, query, limit=2)
        assert len(candidates) == 2


class TestResponseCache:
    def test_second_identical_request_never_reaches_transport(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/cached')}", TransportReply(200))
        clients = make_clients(transport, cache=ResponseCache())
        first = clients.resolve_doi("10.1234/cached")
        calls_after_first = len(transport.calls)
        second = clients.resolve_doi("10.1234/cached")
        assert len(transport.calls) == calls_after_first
        assert clients.cache.hits == 1
        assert first.kind is second.kind

    def test_definitive_404_is_memoized(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/gone')}", TransportReply(404))
        clients = make_clients(transport, cache=ResponseCache())
        clients.resolve_doi("10.1234/gone")
        clients.resolve_doi("10.1234/gone")
        assert transport.calls_matching("10.1234/gone") == 1

    def test_transient_is_never_cached(self):
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/flaky')}", TransientError("x"))
        clients = make_clients(transport, max_retries=0, cache=ResponseCache())
        clients.resolve_doi("10.1234/flaky")
        clients.resolve_doi("10.1234/flaky")
        # Both calls hit the transport: nothing was memoized.
        assert transport.calls_matching("10.1234/flaky") == 2

    def test_durable_across_instances(self, tmp_path):
        cache_path = tmp_path / "cache.jsonl"
        transport = ScriptedTransport()
        transport.script(f"GET {doi_resolution_url('10.1234/kept')}", TransportReply(200))
        clients = make_clients(transport, cache=ResponseCache(cache_path))
        clients.resolve_doi("10.1234/kept")

        fresh_transport = ScriptedTransport()  # no scripts: any request would fail
        fresh = make_clients(fresh_transport, cache=ResponseCache(cache_path))
        result = fresh.resolve_doi("10.1234/kept")
        assert result.kind is ResolutionKind.RESOLVED
        assert fresh_transport.calls == []


class TestTransientSentinel:
    def test_boolean_use_is_rejected(self):
        with pytest.raises(TypeError):
            bool(TRANSIENT)

    def test_singleton(self):
        from refaudit.net.clients import Transient

        assert Transient() is TRANSIENT
