"""Input ingestion and the canonical per-citation outcome JSONL schema.

Corpus JSONL (schema_version 1): one object per line. Lines with a
``raw_text`` field are citations (fields mirror CitationRecord); lines with
``submission_month`` and no ``raw_text`` are paper metadata::

    {"citation_id": "p1:1", "paper_id": "p1", "raw_text": "...", "doi": null, ...}
    {"paper_id": "p1", "submission_month": 3.5}

Outcome JSONL (schema_version 1): one object per citation with a fixed
field order, so identical runs produce byte-identical files. Each row also
carries ``paper_id`` and ``submission_month`` so stored outcomes are
self-sufficient for replayed statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import (
    CitationRecord,
    PhantomType,
    VerificationMethod,
    VerificationOutcome,
    VerificationStatus,
)

OUTCOME_SCHEMA_VERSION = 1

_OUTCOME_FIELDS = (
    "schema_version",
    "citation_id",
    "paper_id",
    "submission_month",
    "status",
    "method",
    "best_similarity",
    "phantom_type",
    "doi",
    "doi_http_status",
    "per_source_scores",
    "note",
)

_CITATION_FIELDS = ("citation_id", "paper_id", "raw_text", "doi", "arxiv_id", "url", "title_hint")


class CorpusFormatError(ValueError):
    """A malformed input line; the message names the file and line number."""


@dataclass(frozen=True)
class OutcomeRow:
    """One stored outcome plus the paper context it was audited under."""

    outcome: VerificationOutcome
    paper_id: str | None
    submission_month: float | None


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    paper_id: str | None = None,
    submission_month: float | None = None,
) -> tuple[list[CitationRecord], dict[str, float]]:
    """Read citations plus per-paper dates from ``path``.

    ``jsonl`` is the canonical interchange format. ``plain-text`` takes one
    citation per line (blank lines skipped) and requires ``paper_id`` and
    ``submission_month`` for the whole file; citation ids are generated as
    ``<paper_id>:<line number>``.

    Raises CorpusFormatError on malformed lines or duplicate citation ids,
    naming the offending line.
    """
    if format == "jsonl":
        return _load_jsonl_corpus(path)
    if format == "plain-text":
        if paper_id is None or submission_month is None:
            raise CorpusFormatError(
                "plain-text corpora need an explicit paper id and submission month"
            )
        return _load_plain_text_corpus(path, paper_id, submission_month)
    raise CorpusFormatError(f"unknown corpus format {format!r}")


def _load_jsonl_corpus(path: str | Path) -> tuple[list[CitationRecord], dict[str, float]]:
    records: list[CitationRecord] = []
    seen_ids: dict[str, int] = {}
    paper_dates: dict[str, float] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"{path}:{lineno}: expected a JSON object")
            if "raw_text" in obj:
                try:
                    record = CitationRecord(
                        **{k: obj.get(k) for k in _CITATION_FIELDS if obj.get(k) is not None}
                    )
                except (TypeError, ValueError) as exc:
                    raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
                if record.citation_id in seen_ids:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: duplicate citation_id {record.citation_id!r} "
                        f"(first seen on line {seen_ids[record.citation_id]})"
                    )
                seen_ids[record.citation_id] = lineno
                records.append(record)
            elif "submission_month" in obj:
                try:
                    paper_dates[str(obj["paper_id"])] = float(obj["submission_month"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: bad paper metadata record: {exc}"
                    ) from exc
            else:
                raise CorpusFormatError(
                    f"{path}:{lineno}: neither a citation (raw_text) nor "
                    "paper metadata (submission_month)"
                )
    return records, paper_dates


def _load_plain_text_corpus(
    path: str | Path, paper_id: str, submission_month: float
) -> tuple[list[CitationRecord], dict[str, float]]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            records.append(
                CitationRecord(
                    citation_id=f"{paper_id}:{lineno}",
                    paper_id=paper_id,
                    raw_text=text,
                )
            )
    return records, {paper_id: submission_month}


def write_corpus(
    records: list[CitationRecord],
    paper_dates: dict[str, float],
    path: str | Path,
) -> None:
    """Serialize a corpus to canonical JSONL (citations, then paper dates)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            obj = {field: getattr(record, field) for field in _CITATION_FIELDS}
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
        for paper_id in sorted(paper_dates):
            handle.write(
                json.dumps(
                    {"paper_id": paper_id, "submission_month": paper_dates[paper_id]},
                    ensure_ascii=False,
                )
                + "\n"
            )


def outcome_to_dict(
    outcome: VerificationOutcome,
    paper_id: str | None = None,
    submission_month: float | None = None,
) -> dict:
    """Fixed-order JSON object for one outcome row."""
    return {
        "schema_version": OUTCOME_SCHEMA_VERSION,
        "citation_id": outcome.citation_id,
        "paper_id": paper_id,
        "submission_month": submission_month,
        "status": outcome.status.value,
        "method": outcome.method.value,
        "best_similarity": outcome.best_similarity,
        "phantom_type": outcome.phantom_type.value if outcome.phantom_type else None,
        "doi": outcome.doi,
        "doi_http_status": outcome.doi_http_status,
        "per_source_scores": {
            source: outcome.per_source_scores[source]
            for source in sorted(outcome.per_source_scores)
        },
        "note": outcome.note,
    }


def outcome_from_dict(obj: dict) -> OutcomeRow:
    month = obj.get("submission_month")
    return OutcomeRow(
        outcome=VerificationOutcome(
            citation_id=str(obj["citation_id"]),
            status=VerificationStatus(obj["status"]),
            best_similarity=float(obj["best_similarity"]),
            method=VerificationMethod(obj["method"]),
            phantom_type=PhantomType(obj["phantom_type"]) if obj.get("phantom_type") else None,
            doi=obj.get("doi"),
            doi_http_status=obj.get("doi_http_status"),
            per_source_scores=dict(obj.get("per_source_scores") or {}),
            note=obj.get("note"),
        ),
        paper_id=obj.get("paper_id"),
        submission_month=float(month) if month is not None else None,
    )


def write_outcomes(path: str | Path, rows: list[tuple]) -> None:
    """Write outcome rows as deterministic JSONL.

    ``rows`` holds (outcome, paper_id, submission_month) triples. Field
    order is fixed, floats use shortest round-trip formatting, and every
    line is newline-terminated.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for outcome, paper_id, month in rows:
            handle.write(
                json.dumps(outcome_to_dict(outcome, paper_id, month), ensure_ascii=False)
                + "\n"
            )


def read_outcomes(path: str | Path, field_map: dict[str, str] | None = None) -> list[OutcomeRow]:
    """Parse an outcome JSONL file back into rows.

    ``field_map`` renames foreign field names to the canonical schema
    (source-file name -> canonical name) before parsing, so externally
    produced per-citation records can be replayed without code changes.
    """
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if field_map:
                obj = {field_map.get(key, key): value for key, value in obj.items()}
            try:
                rows.append(outcome_from_dict(obj))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    return rows
