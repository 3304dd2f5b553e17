"""String-distance kernel and title normalization for the fallback search.

Plain Levenshtein similarity (insertions + deletions + substitutions over
the longer length), not token-set or partial-ratio variants: the
classification thresholds are calibrated against this exact ratio. Lengths
are Unicode scalar counts, so mixed-script titles are not penalized by
encoding width.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_SURROUNDING_QUOTES = "\"'“”‘’«»{}"
_TERMINAL_PUNCT = ".,;:!?…"
_WHITESPACE_RUN = re.compile(r"\s+")

DEFAULT_SOURCE_PRIORITY = ("semantic-scholar", "crossref")


@dataclass(frozen=True)
class MatchCandidate:
    """One title-search hit from a metadata source, scored against the query."""

    source: str
    candidate_title: str
    candidate_doi: str | None = None
    similarity: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.similarity <= 100.0:
            raise ValueError(f"similarity {self.similarity} outside [0, 100]")


def levenshtein_distance(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming ``a`` into ``b``."""
    if a == b:
        return 0
    # Keep the shorter string in the inner row.
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


def similarity_ratio(a: str, b: str) -> float:
    """Similarity percentage: 100 * (1 - distance / max(len a, len b)).

    Raises ValueError when both strings are empty (the ratio is undefined).
    """
    max_len = max(len(a), len(b))
    if max_len == 0:
        raise ValueError("similarity of two empty strings is undefined")
    return 100.0 * (1.0 - levenshtein_distance(a, b) / max_len)


def normalize_title(raw: str) -> str:
    """Canonical comparison form of a title.

    Lowercase, whitespace runs collapsed, surrounding quotes/braces and
    terminal punctuation stripped, accented characters folded to their base
    letters where a standard decomposition exists.
    """
    text = _WHITESPACE_RUN.sub(" ", raw).strip()
    text = text.strip(_SURROUNDING_QUOTES).strip()
    text = text.rstrip(_TERMINAL_PUNCT).rstrip()
    decomposed = unicodedata.normalize("NFKD", text.lower())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def title_similarity(query: str, title: str) -> float:
    """Similarity percentage of two titles after normalization.

    Titles that both normalize to nothing score 0: no content, no match
    evidence.
    """
    norm_query = normalize_title(query)
    norm_title = normalize_title(title)
    if not norm_query and not norm_title:
        return 0.0
    return similarity_ratio(norm_query, norm_title)


def best_match(
    query: str,
    candidates: list[MatchCandidate],
    source_priority: tuple[str, ...] = DEFAULT_SOURCE_PRIORITY,
) -> tuple[MatchCandidate, float] | None:
    """Highest-scoring candidate against ``query``, with its score.

    Scores are recomputed on normalized titles. Ties break by source
    priority order, then lexicographic title, then source name, so the
    result is independent of candidate ordering. Returns None for an empty
    candidate list.
    """
    if not query:
        raise ValueError("best_match requires a non-empty query")
    if not candidates:
        return None

    def rank(candidate: MatchCandidate) -> tuple[float, int, str, str]:
        try:
            priority = source_priority.index(candidate.source)
        except ValueError:
            priority = len(source_priority)
        return (
            -title_similarity(query, candidate.candidate_title),
            priority,
            candidate.candidate_title,
            candidate.source,
        )

    winner = min(candidates, key=rank)
    return winner, title_similarity(query, winner.candidate_title)
