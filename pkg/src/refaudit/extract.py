"""Deterministic lexical analysis of raw citation strings.

Identifier extraction (DOI / arXiv id / URL) and the space-ratio entropy
filter that separates whitespace-stripped extraction artifacts from
genuinely unmatchable citations. Everything here is a pure function of its
input.
"""

from __future__ import annotations

import re
from urllib.parse import urlparse

from .model import ARXIV_PATTERN, DOI_PATTERN

# Characters stripped from the tail of extracted identifiers/URLs. Fixed
# list: sentence periods, list separators, and closing brackets that the
# raw patterns would otherwise swallow.
_TRAILING_PUNCT = ".,;)]}"

_URL_RE = re.compile(r"https?://[^\s<>\"']+", re.IGNORECASE)

# Hosts whose URLs are owned by the identifier paths, not the URL path.
_EXCLUDED_URL_HOSTS = ("doi.org", "arxiv.org")

# How far around an arXiv-shaped number the "arXiv" cue may sit.
_ARXIV_CUE_WINDOW = 16

_WHITESPACE_RUN = re.compile(r"\s+")


def extract_doi(raw_text: str) -> str | None:
    """Return the first DOI in ``raw_text``, or None.

    Matching is case-insensitive against the DOI shape (``10.<4-9 digits>/
    <suffix>``); the returned string preserves its original case. Trailing
    sentence punctuation is stripped, and a candidate whose suffix vanishes
    after stripping is skipped. Leading ``doi:`` labels and resolver-URL
    prefixes never appear in the result because the match starts at ``10.``.
    """
    for match in DOI_PATTERN.finditer(raw_text):
        candidate = match.group(0).rstrip(_TRAILING_PUNCT)
        if DOI_PATTERN.fullmatch(candidate):
            return candidate
    return None


def extract_arxiv_id(raw_text: str) -> str | None:
    """Return the first new-style arXiv id in ``raw_text``, or None.

    The version suffix is preserved. A bare ``NNNN.NNNN`` number only counts
    when an "arXiv" cue (the token itself or an arxiv.org URL) appears within
    16 characters on either side; page/year artifacts like ``pp. 1234.5678``
    carry no cue and are rejected. Old-style ids (subject-class/YYMMNNN) are
    not recognized.
    """
    for match in ARXIV_PATTERN.finditer(raw_text):
        window = raw_text[
            max(0, match.start() - _ARXIV_CUE_WINDOW) : match.end() + _ARXIV_CUE_WINDOW
        ]
        if "arxiv" in window.lower():
            return match.group(0)
    return None


def extract_url(raw_text: str) -> str | None:
    """Return the first http(s) URL in ``raw_text``, or None.

    doi.org and arxiv.org URLs are skipped (the identifier paths own them).
    Trailing sentence punctuation is stripped from the match.
    """
    for match in _URL_RE.finditer(raw_text):
        candidate = match.group(0).rstrip(_TRAILING_PUNCT)
        host = (urlparse(candidate).hostname or "").lower()
        if any(host == h or host.endswith("." + h) for h in _EXCLUDED_URL_HOSTS):
            continue
        if host:
            return candidate
    return None


def strip_identifiers(raw_text: str) -> str:
    """Remove every URL, DOI, and cue-confirmed arXiv id from ``raw_text``.

    Used when deriving a title query: identifier strings would otherwise
    pollute the fuzzy comparison.
    """
    spans: list[tuple[int, int]] = []
    for match in _URL_RE.finditer(raw_text):
        spans.append(match.span())
    for match in DOI_PATTERN.finditer(raw_text):
        spans.append(match.span())
    for match in ARXIV_PATTERN.finditer(raw_text):
        window = raw_text[
            max(0, match.start() - _ARXIV_CUE_WINDOW) : match.end() + _ARXIV_CUE_WINDOW
        ]
        if "arxiv" in window.lower():
            spans.append(match.span())
    if not spans:
        return raw_text
    keep = []
    cursor = 0
    for start, end in sorted(spans):
        if start > cursor:
            keep.append(raw_text[cursor:start])
        cursor = max(cursor, end)
    keep.append(raw_text[cursor:])
    return "".join(keep)


def space_ratio(raw_text: str) -> float:
    """Fraction of characters that are spaces, after whitespace normalization.

    Runs of whitespace (tabs, newlines, multiple blanks) collapse to a single
    U+0020 first, so exotic-whitespace padding cannot inflate the ratio; only
    U+0020 is then counted, over the Unicode scalar count.

    Raises ValueError on empty input (a degenerate citation).
    """
    if not raw_text:
        raise ValueError("space_ratio of an empty citation string is undefined")
    normalized = _WHITESPACE_RUN.sub(" ", raw_text)
    return normalized.count(" ") / len(normalized)


def passes_entropy_filter(raw_text: str, tau_rho: float) -> bool:
    """True iff the space ratio of ``raw_text`` is at least ``tau_rho``.

    Citations failing the filter are whitespace-stripped extraction
    artifacts: fuzzy matching on them measures extraction damage, not
    existence, so the pipeline routes them to Unknown instead.
    """
    return space_ratio(raw_text) >= tau_rho
