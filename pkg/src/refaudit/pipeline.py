"""Hybrid citation verification: the per-citation protocol and corpus audit.

Verification runs a strict priority ladder per citation and short-circuits
at the first conclusive stage:

1. DOI resolution (resolved => Valid at 100; definitive not-found falls
   straight through to title search; transient => Unknown).
2. arXiv existence (exists => Valid at 100; missing => Phantom at 0, with
   no title fallback -- deliberate asymmetry with the DOI branch).
3. URL reachability (reachable => Valid at 100; otherwise continue).
4. Space-ratio entropy filter (artifact => Unknown, note "PDF artifact").
5. Title search against both metadata sources; the maximum similarity is
   classified into Valid / Sloppy / Phantom bands.

A transient network failure is never evidence of absence: it maps to
Unknown. A Phantom verdict requires a definitive not-found or low-scoring
definitive search results.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from .extract import (
    extract_arxiv_id,
    extract_doi,
    extract_url,
    passes_entropy_filter,
    strip_identifiers,
)
from .fuzzy import best_match, normalize_title
from .model import (
    NOT_FOUND_STATUSES,
    AuditConfig,
    CitationRecord,
    PaperAudit,
    PhantomType,
    VerificationMethod,
    VerificationOutcome,
    VerificationStatus,
)
from .net.clients import SEARCH_SOURCES, TRANSIENT, ResolutionKind, ResolverClients

MAX_QUERY_CHARS = 300
_MIN_TITLE_WORDS = 4

# Punctuation dropped from derived queries (beyond plain title
# normalization) so queries line up with how indexes store titles.
_QUERY_PUNCT = ":;,!?\"'()[]{}"
_QUOTED_SEGMENT = re.compile(r"\"([^\"]+)\"|“([^”]+)”")
_PERIOD_SEGMENT = re.compile(r"[^.]+")


class ConfigurationError(ValueError):
    """The audit inputs are inconsistent (raised before any network work)."""


def classify(s_star: float, config: AuditConfig) -> VerificationStatus:
    """Band the maximum similarity score: Valid / Sloppy / Phantom.

    Boundaries are inclusive-lower: a score exactly at a threshold lands in
    the upper band.
    """
    if s_star >= config.tau_valid:
        return VerificationStatus.VALID
    if s_star >= config.tau_sloppy:
        return VerificationStatus.SLOPPY
    return VerificationStatus.PHANTOM


def categorize_phantom(outcome: VerificationOutcome, config: AuditConfig) -> PhantomType:
    """Diagnose a phantom's failure mode from its verification trace.

    A recorded not-found DOI resolution dominates; otherwise the ghost cut
    separates "some related content found" (syntax damage) from "nothing
    discernible" (likely fabrication). The cut is inclusive-lower.
    """
    if outcome.status is not VerificationStatus.PHANTOM:
        raise ValueError(f"cannot diagnose a {outcome.status.value} outcome as phantom")
    if outcome.doi_http_status in NOT_FOUND_STATUSES:
        return PhantomType.BROKEN_LINK
    if outcome.best_similarity >= config.ghost_cut:
        return PhantomType.SYNTAX_ERROR
    return PhantomType.GHOST


def _normalize_query(text: str) -> str:
    cleaned = text.translate({ord(ch): None for ch in _QUERY_PUNCT})
    return normalize_title(cleaned)[:MAX_QUERY_CHARS]


def derive_title_query(record: CitationRecord) -> str:
    """Best-effort title query for the fallback search.

    Uses the pre-parsed title hint when present. Otherwise strips
    identifiers and URLs from the raw text, skips a leading author-list
    segment, and returns the first period-delimited or quoted segment of at
    least four words; falls back to the whole stripped text, then to the
    raw text, so the result is always non-empty.
    """
    if record.title_hint:
        hint = _normalize_query(record.title_hint)
        if hint:
            return hint
    stripped = strip_identifiers(record.raw_text)

    segments: list[tuple[int, str]] = []
    for match in _QUOTED_SEGMENT.finditer(stripped):
        segments.append((match.start(), match.group(1) or match.group(2)))
    for match in _PERIOD_SEGMENT.finditer(stripped):
        segments.append((match.start(), match.group(0)))
    segments.sort(key=lambda item: item[0])

    for _, segment in segments:
        if len(segment.split()) >= _MIN_TITLE_WORDS:
            query = _normalize_query(segment)
            if query:
                return query
    query = _normalize_query(stripped)
    if query:
        return query
    # Raw text is non-empty by invariant; collapse whitespace and go with it.
    return re.sub(r"\s+", " ", record.raw_text).strip()[:MAX_QUERY_CHARS]


def _search_order(config: AuditConfig) -> list[str]:
    ordered = [s for s in config.source_priority if s in SEARCH_SOURCES]
    ordered.extend(s for s in SEARCH_SOURCES if s not in ordered)
    return ordered


def _title_search_stage(
    record: CitationRecord,
    config: AuditConfig,
    clients: ResolverClients,
    doi: str | None,
    doi_http_status: int | None,
    notes: list[str],
) -> VerificationOutcome:
    query = derive_title_query(record)
    candidates = []
    per_source_scores: dict[str, float] = {}
    any_transient = False
    for source in _search_order(config):
        result = clients.search_title(source, query, config.search_limit)
        if result is TRANSIENT:
            any_transient = True
            notes.append(f"transient: {source} search inconclusive")
            continue
        candidates.extend(result)
        if result:
            per_source_scores[source] = max(c.similarity for c in result)

    if candidates:
        _, s_star = best_match(query, candidates, config.source_priority)
    elif any_transient:
        # No scores and at least one source unreachable: inconclusive.
        return VerificationOutcome(
            citation_id=record.citation_id,
            status=VerificationStatus.UNKNOWN,
            best_similarity=0.0,
            method=VerificationMethod.NO_EVIDENCE,
            doi=doi,
            doi_http_status=doi_http_status,
            note="; ".join(notes),
        )
    else:
        # Both sources answered definitively with nothing.
        s_star = 0.0

    outcome = VerificationOutcome(
        citation_id=record.citation_id,
        status=classify(s_star, config),
        best_similarity=s_star,
        method=VerificationMethod.TITLE_SEARCH,
        doi=doi,
        doi_http_status=doi_http_status,
        per_source_scores=per_source_scores,
        note="; ".join(notes) if notes else None,
    )
    if outcome.status is VerificationStatus.PHANTOM:
        outcome = replace(outcome, phantom_type=categorize_phantom(outcome, config))
    return outcome


def verify_citation(
    record: CitationRecord, config: AuditConfig, clients: ResolverClients
) -> VerificationOutcome:
    """Run the verification ladder for one citation.

    Identifiers pre-extracted on the record win; otherwise they are
    extracted from the raw text. All failure modes are encoded in the
    returned outcome -- this never raises for network trouble.
    """
    doi = record.doi or extract_doi(record.raw_text)
    arxiv_id = record.arxiv_id or extract_arxiv_id(record.raw_text)
    url = record.url or extract_url(record.raw_text)
    notes: list[str] = []

    # Priority 1: DOI resolution.
    if doi:
        resolution = clients.resolve_doi(doi)
        if resolution.kind is ResolutionKind.RESOLVED:
            return VerificationOutcome(
                citation_id=record.citation_id,
                status=VerificationStatus.VALID,
                best_similarity=100.0,
                method=VerificationMethod.DOI_RESOLUTION,
                doi=doi,
                doi_http_status=resolution.final_http_status,
            )
        if resolution.kind is ResolutionKind.NOT_FOUND:
            # Broken identifier: jump straight to the title-search fallback.
            return _title_search_stage(
                record, config, clients, doi, resolution.final_http_status, notes
            )
        detail = (
            f"status {resolution.final_http_status}"
            if resolution.final_http_status is not None
            else "no reply"
        )
        return VerificationOutcome(
            citation_id=record.citation_id,
            status=VerificationStatus.UNKNOWN,
            best_similarity=0.0,
            method=VerificationMethod.NO_EVIDENCE,
            doi=doi,
            doi_http_status=resolution.final_http_status,
            note=f"transient: doi resolution inconclusive ({detail})",
        )

    # Priority 2: arXiv existence. A missing id is an immediate Phantom with
    # no title fallback.
    if arxiv_id:
        exists = clients.arxiv_exists(arxiv_id)
        if exists is TRANSIENT:
            return VerificationOutcome(
                citation_id=record.citation_id,
                status=VerificationStatus.UNKNOWN,
                best_similarity=0.0,
                method=VerificationMethod.NO_EVIDENCE,
                note="transient: arxiv lookup inconclusive",
            )
        if exists:
            return VerificationOutcome(
                citation_id=record.citation_id,
                status=VerificationStatus.VALID,
                best_similarity=100.0,
                method=VerificationMethod.ARXIV_LOOKUP,
            )
        outcome = VerificationOutcome(
            citation_id=record.citation_id,
            status=VerificationStatus.PHANTOM,
            best_similarity=0.0,
            method=VerificationMethod.ARXIV_LOOKUP,
        )
        return replace(outcome, phantom_type=categorize_phantom(outcome, config))

    # Priority 3: URL reachability. No else-branch: unreachable (or
    # inconclusive) falls through to the remaining stages.
    if url:
        reachable = clients.head_url(url)
        if reachable is TRANSIENT:
            notes.append("transient: url reachability inconclusive")
        elif reachable:
            return VerificationOutcome(
                citation_id=record.citation_id,
                status=VerificationStatus.VALID,
                best_similarity=100.0,
                method=VerificationMethod.URL_HEAD,
            )

    # Priority 4: entropy filter.
    if not passes_entropy_filter(record.raw_text, config.tau_rho):
        return VerificationOutcome(
            citation_id=record.citation_id,
            status=VerificationStatus.UNKNOWN,
            best_similarity=0.0,
            method=VerificationMethod.ENTROPY_REJECT,
            note="; ".join(notes + ["PDF artifact"]),
        )

    # Priority 5: fuzzy title matching.
    return _title_search_stage(record, config, clients, None, None, notes)


def reclassify_status(outcome: VerificationOutcome, config: AuditConfig) -> VerificationStatus:
    """Status the outcome would get under different thresholds.

    Identifier-verified outcomes, entropy rejects, and no-evidence Unknowns
    are threshold-invariant; only title-search outcomes re-band.
    """
    if outcome.method is VerificationMethod.TITLE_SEARCH:
        return classify(outcome.best_similarity, config)
    return outcome.status


def audit_corpus(
    records: list[CitationRecord],
    paper_dates: dict[str, float],
    config: AuditConfig,
    clients: ResolverClients,
    workers: int = 1,
) -> tuple[list[VerificationOutcome], list[PaperAudit]]:
    """Verify every record and aggregate per-paper audits.

    Outcomes are sorted by citation_id and audits by paper_id, so results
    are independent of completion order. Raises ConfigurationError (before
    any network work) on duplicate citation ids or missing paper dates.
    """
    seen: set[str] = set()
    for record in records:
        if record.citation_id in seen:
            raise ConfigurationError(f"duplicate citation_id {record.citation_id!r}")
        seen.add(record.citation_id)
        if record.paper_id not in paper_dates:
            raise ConfigurationError(
                f"paper {record.paper_id!r} has no submission date entry"
            )

    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(lambda r: verify_citation(r, config, clients), records)
            )
    else:
        outcomes = [verify_citation(record, config, clients) for record in records]
    outcomes.sort(key=lambda o: o.citation_id)

    paper_of = {r.citation_id: r.paper_id for r in records}
    grouped: dict[str, list[VerificationOutcome]] = {}
    for outcome in outcomes:
        grouped.setdefault(paper_of[outcome.citation_id], []).append(outcome)

    audits = []
    for paper_id in sorted(grouped):
        group = grouped[paper_id]
        counts = {status: 0 for status in VerificationStatus}
        for outcome in group:
            counts[outcome.status] += 1
        audits.append(
            PaperAudit(
                paper_id=paper_id,
                submission_month=paper_dates[paper_id],
                n_citations=len(group),
                counts=counts,
                phantom_rate=counts[VerificationStatus.PHANTOM] / len(group),
            )
        )
    return outcomes, audits
