"""Domain types shared across the audit pipeline.

Everything here is an immutable value object: no I/O, no policy, safe to
share between concurrent workers. Similarity scores are percentages in
[0, 100] everywhere (never [0, 1] fractions) to keep one unit throughout;
rates (phantom rate, integrity levels) are fractions in [0, 1].
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

# Syntactic shape of a DOI: directory indicator "10.", a 4-9 digit registrant
# prefix, then a non-empty suffix. Matched case-insensitively; stored values
# preserve their original case.
DOI_PATTERN = re.compile(r"10\.\d{4,9}/[-._;()/:A-Za-z0-9]+")

# New-style arXiv identifier: YYMM.NNNN(N) with an optional version suffix.
ARXIV_PATTERN = re.compile(r"(?<!\d)\d{4}\.\d{4,5}(?:v\d+)?(?!\d)")


class VerificationStatus(str, enum.Enum):
    """Verdict for a single citation."""

    VALID = "valid"
    SLOPPY = "sloppy"
    PHANTOM = "phantom"
    UNKNOWN = "unknown"


class PhantomType(str, enum.Enum):
    """Diagnostic failure mode for a phantom citation.

    BROKEN_LINK: the stated DOI definitively failed to resolve (not found).
    SYNTAX_ERROR: moderate best similarity -- likely a real paper mangled by
        text extraction.
    GHOST: near-zero similarity to anything indexed -- likely fabricated.
    """

    BROKEN_LINK = "broken_link"
    SYNTAX_ERROR = "syntax_error"
    GHOST = "ghost"


class VerificationMethod(str, enum.Enum):
    """Which evidence path produced the verdict."""

    DOI_RESOLUTION = "doi_resolution"
    ARXIV_LOOKUP = "arxiv_lookup"
    URL_HEAD = "url_head"
    TITLE_SEARCH = "title_search"
    ENTROPY_REJECT = "entropy_reject"
    NO_EVIDENCE = "no_evidence"


# Methods whose Valid verdict comes from identifier resolution, not fuzzy
# matching; these are invariant under threshold changes.
IDENTIFIER_METHODS = frozenset(
    {
        VerificationMethod.DOI_RESOLUTION,
        VerificationMethod.ARXIV_LOOKUP,
        VerificationMethod.URL_HEAD,
    }
)

# HTTP statuses treated as a definitive "this identifier does not exist".
NOT_FOUND_STATUSES = frozenset({404, 410})


@dataclass(frozen=True)
class CitationRecord:
    """One bibliography entry: raw text plus any pre-extracted identifiers.

    ``doi``/``arxiv_id``/``url`` are optional pre-extracted identifiers (the
    pipeline falls back to extracting them from ``raw_text``). ``title_hint``
    carries a pre-parsed title when the input format supplies one.
    """

    citation_id: str
    paper_id: str
    raw_text: str
    doi: str | None = None
    arxiv_id: str | None = None
    url: str | None = None
    title_hint: str | None = None

    def __post_init__(self) -> None:
        if not self.citation_id:
            raise ValueError("citation_id must be non-empty")
        if not self.paper_id:
            raise ValueError("paper_id must be non-empty")
        if not self.raw_text.strip():
            raise ValueError(f"citation {self.citation_id!r}: raw_text is empty")
        if self.doi is not None and DOI_PATTERN.fullmatch(self.doi) is None:
            raise ValueError(
                f"citation {self.citation_id!r}: doi {self.doi!r} is not syntactically valid"
            )


@dataclass(frozen=True)
class VerificationOutcome:
    """The pipeline verdict for one citation, with its evidence trail.

    ``best_similarity`` is the maximum similarity percentage observed across
    metadata sources (100 for identifier-verified citations, 0 when nothing
    was found). ``per_source_scores`` keeps the best score per source so
    outcomes can be re-classified under different thresholds without new
    network calls. ``doi`` records the identifier that was checked, feeding
    the broken-link prefix diagnostics.
    """

    citation_id: str
    status: VerificationStatus
    best_similarity: float
    method: VerificationMethod
    phantom_type: PhantomType | None = None
    doi: str | None = None
    doi_http_status: int | None = None
    per_source_scores: dict[str, float] = field(default_factory=dict)
    note: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.best_similarity <= 100.0:
            raise ValueError(f"best_similarity {self.best_similarity} outside [0, 100]")
        for source, score in self.per_source_scores.items():
            if not 0.0 <= score <= 100.0:
                raise ValueError(f"score {score} for source {source!r} outside [0, 100]")
        if self.phantom_type is not None and self.status is not VerificationStatus.PHANTOM:
            raise ValueError("phantom_type present on a non-phantom outcome")
        if (
            self.phantom_type is PhantomType.BROKEN_LINK
            and self.doi_http_status not in NOT_FOUND_STATUSES
        ):
            raise ValueError("broken-link phantom without a recorded not-found resolution")
        if (
            self.method is VerificationMethod.ENTROPY_REJECT
            and self.status is not VerificationStatus.UNKNOWN
        ):
            raise ValueError("entropy-reject outcomes must be Unknown")
        if (
            self.status is VerificationStatus.VALID
            and self.method in IDENTIFIER_METHODS
            and self.best_similarity != 100.0
        ):
            raise ValueError("identifier-verified Valid outcome must carry similarity 100")


@dataclass(frozen=True)
class AuditConfig:
    """All tunable thresholds and client policies.

    Defaults reproduce the baseline operating point: Valid at >= 85, Sloppy
    at >= 50, space-ratio cutoff 0.10, ghost cut at 25, 95% intervals, and
    per-source politeness intervals of 1.0 s (semantic-scholar) / 0.1 s
    (crossref).
    """

    tau_valid: float = 85.0
    tau_sloppy: float = 50.0
    tau_rho: float = 0.10
    ghost_cut: float = 25.0
    z_score: float = 1.96
    backoff_initial_seconds: float = 1.0
    backoff_max_seconds: float = 60.0
    per_source_min_interval_seconds: dict[str, float] = field(
        default_factory=lambda: {"semantic-scholar": 1.0, "crossref": 0.1}
    )
    max_retries: int = 3
    search_limit: int = 5
    source_priority: tuple[str, ...] = ("semantic-scholar", "crossref")
    rng_seed: int | None = None
    cache_path: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.tau_sloppy < self.tau_valid <= 100.0:
            raise ValueError(
                f"need 0 < tau_sloppy < tau_valid <= 100, got {self.tau_sloppy}/{self.tau_valid}"
            )
        if not 0.0 <= self.ghost_cut < self.tau_sloppy:
            raise ValueError(f"need 0 <= ghost_cut < tau_sloppy, got {self.ghost_cut}")
        if not 0.0 < self.tau_rho < 1.0:
            raise ValueError(f"need 0 < tau_rho < 1, got {self.tau_rho}")
        if self.backoff_initial_seconds > self.backoff_max_seconds:
            raise ValueError("backoff_initial_seconds exceeds backoff_max_seconds")
        if self.backoff_initial_seconds < 0:
            raise ValueError("backoff_initial_seconds must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.search_limit < 1:
            raise ValueError("search_limit must be >= 1")
        for source, interval in self.per_source_min_interval_seconds.items():
            if interval <= 0:
                raise ValueError(f"min interval for {source!r} must be > 0")


@dataclass(frozen=True)
class PaperAudit:
    """Per-paper aggregation of verification outcomes."""

    paper_id: str
    submission_month: float
    n_citations: int
    counts: dict[VerificationStatus, int]
    phantom_rate: float

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if total != self.n_citations:
            raise ValueError(
                f"paper {self.paper_id!r}: counts sum to {total}, expected {self.n_citations}"
            )
        expected = self.counts.get(VerificationStatus.PHANTOM, 0) / self.n_citations
        if self.phantom_rate != expected:
            raise ValueError(
                f"paper {self.paper_id!r}: phantom_rate {self.phantom_rate} != {expected}"
            )


@dataclass(frozen=True)
class CorpusSummary:
    """Corpus-level counts, rates, and paper-level dispersion statistics.

    ``coefficient_of_variation`` is None when the mean paper rate is zero
    (the ratio is undefined there).
    """

    total_citations: int
    counts: dict[VerificationStatus, int]
    percentages: dict[VerificationStatus, float]
    corpus_phantom_rate: float
    wilson_low: float
    wilson_high: float
    mean_paper_rate: float
    sd_paper_rate: float
    median_paper_rate: float
    min_paper_rate: float
    max_paper_rate: float
    iqr_low: float
    iqr_high: float
    coefficient_of_variation: float | None


@dataclass(frozen=True)
class TrendFit:
    """Least-squares line through (submission month, phantom rate in pp).

    intercept and residual_sd are in percentage points; slope is percentage
    points per month.
    """

    intercept: float
    slope: float
    r_squared: float
    p_value_slope: float
    residual_sd: float


@dataclass(frozen=True)
class DecayParams:
    """Inputs to the citation-integrity decay projections."""

    p: float
    g0: float = 1.0
    alpha: float = 1.0
    horizon: int = 4

    def __post_init__(self) -> None:
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"phantom rate p must be in [0, 1), got {self.p}")
        if not 0.0 <= self.g0 <= 1.0:
            raise ValueError(f"initial integrity g0 must be in [0, 1], got {self.g0}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"inheritance share alpha must be in [0, 1], got {self.alpha}")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")


@dataclass(frozen=True)
class DecayResult:
    """Projected integrity series (index = generation, starting at 0)."""

    series: list[float]
    half_life: float
    equilibrium: float | None
