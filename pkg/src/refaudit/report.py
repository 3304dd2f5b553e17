"""Deterministic artifact emission for audit and replay runs.

All delimited artifacts (outcome JSONL, CSVs) are byte-stable across runs
with identical inputs: fixed field order, shortest round-trip float
formatting, ``\\n`` newlines, and no timestamps (wall-clock details go to a
separate run log). Figure-data CSVs are derived from the same in-memory
aggregates as the summary, so the files always reconcile exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from . import stats
from .corpus_io import OutcomeRow, write_outcomes
from .model import (
    AuditConfig,
    CorpusSummary,
    PaperAudit,
    PhantomType,
    TrendFit,
    VerificationMethod,
    VerificationStatus,
)

DEFAULT_TOP_N = 15
DEFAULT_WARN_THRESHOLD_PCT = 5.0

# Threshold grid spanning the plausible operating range, centered on the
# baseline (85, 50).
DEFAULT_SWEEP_GRID = [
    (80.0, 45.0),
    (85.0, 50.0),
    (90.0, 55.0),
    (90.0, 50.0),
    (85.0, 55.0),
]

_STATUS_ORDER = (
    VerificationStatus.VALID,
    VerificationStatus.SLOPPY,
    VerificationStatus.UNKNOWN,
    VerificationStatus.PHANTOM,
)

_PHANTOM_ORDER = (PhantomType.SYNTAX_ERROR, PhantomType.BROKEN_LINK, PhantomType.GHOST)


@dataclass(frozen=True)
class ReportResult:
    """What the CLI needs after emission: the headline rate and file list."""

    corpus_phantom_rate: float
    total_citations: int
    files: list[str]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def audits_from_rows(rows: list[OutcomeRow]) -> list[PaperAudit] | None:
    """Reconstruct per-paper audits from stored outcome rows.

    Returns None when no row carries paper context (foreign datasets may
    omit it); rows missing context are skipped otherwise.
    """
    grouped: dict[str, list[OutcomeRow]] = {}
    for row in rows:
        if row.paper_id is not None and row.submission_month is not None:
            grouped.setdefault(row.paper_id, []).append(row)
    if not grouped:
        return None
    audits = []
    for paper_id in sorted(grouped):
        group = grouped[paper_id]
        counts = {status: 0 for status in VerificationStatus}
        for row in group:
            counts[row.outcome.status] += 1
        audits.append(
            PaperAudit(
                paper_id=paper_id,
                submission_month=group[0].submission_month,
                n_citations=len(group),
                counts=counts,
                phantom_rate=counts[VerificationStatus.PHANTOM] / len(group),
            )
        )
    return audits


def write_papers_csv(path: Path, audits: list[PaperAudit]) -> None:
    rows = [
        [
            a.paper_id,
            a.submission_month,
            a.n_citations,
            a.counts[VerificationStatus.VALID],
            a.counts[VerificationStatus.SLOPPY],
            a.counts[VerificationStatus.UNKNOWN],
            a.counts[VerificationStatus.PHANTOM],
            a.phantom_rate,
        ]
        for a in audits
    ]
    _write_csv(
        path,
        [
            "paper_id",
            "submission_month",
            "n_citations",
            "n_valid",
            "n_sloppy",
            "n_unknown",
            "n_phantom",
            "phantom_rate",
        ],
        rows,
    )


def timeline_rows(audits: list[PaperAudit]) -> list[list]:
    ordered = sorted(audits, key=lambda a: (a.submission_month, a.paper_id))
    return [[a.submission_month, a.paper_id, a.phantom_rate, a.n_citations] for a in ordered]


def monthly_status_rows(rows: list[OutcomeRow]) -> list[list]:
    buckets: dict[int, dict[VerificationStatus, int]] = {}
    for row in rows:
        if row.submission_month is None:
            continue
        bucket = buckets.setdefault(
            math.floor(row.submission_month), {status: 0 for status in VerificationStatus}
        )
        bucket[row.outcome.status] += 1
    return [
        [month] + [buckets[month][status] for status in _STATUS_ORDER]
        for month in sorted(buckets)
    ]


def phantom_category_rows(rows: list[OutcomeRow]) -> list[list]:
    counts = {ptype: 0 for ptype in PhantomType}
    for row in rows:
        if row.outcome.phantom_type is not None:
            counts[row.outcome.phantom_type] += 1
    return [[ptype.value, counts[ptype]] for ptype in _PHANTOM_ORDER]


def top_paper_rows(audits: list[PaperAudit], top_n: int) -> list[list]:
    ordered = sorted(audits, key=lambda a: (-a.phantom_rate, a.paper_id))[:top_n]
    return [
        [rank, a.paper_id, a.phantom_rate, a.n_citations]
        for rank, a in enumerate(ordered, start=1)
    ]


def summary_rows(
    rows: list[OutcomeRow],
    summary: CorpusSummary | None,
    trend: TrendFit | None,
    config: AuditConfig,
    warn_threshold_pct: float,
    top_n: int,
    z_score: float,
    prior_valid: float | None = None,
) -> list[list]:
    outcomes = [row.outcome for row in rows]
    total = len(outcomes)
    counts = {status: 0 for status in VerificationStatus}
    for outcome in outcomes:
        counts[outcome.status] += 1
    rate = counts[VerificationStatus.PHANTOM] / total
    wilson_low, wilson_high = stats.wilson_ci(
        counts[VerificationStatus.PHANTOM], total, z_score
    )
    entropy_rejects = sum(
        1 for o in outcomes if o.method is VerificationMethod.ENTROPY_REJECT
    )
    no_evidence = sum(1 for o in outcomes if o.method is VerificationMethod.NO_EVIDENCE)

    out: list[list] = [["schema_version", 1], ["total_citations", total]]
    for status in _STATUS_ORDER:
        out.append([f"count_{status.value}", counts[status]])
    for status in _STATUS_ORDER:
        out.append([f"pct_{status.value}", 100.0 * counts[status] / total])
    out += [
        ["corpus_phantom_rate", rate],
        ["wilson_low", wilson_low],
        ["wilson_high", wilson_high],
        ["unknown_entropy_reject_count", entropy_rejects],
        ["unknown_no_evidence_count", no_evidence],
    ]
    if prior_valid is not None:
        p_unknown = counts[VerificationStatus.UNKNOWN] / total
        out += [
            ["bayes_prior_valid", prior_valid],
            [
                "adjusted_phantom_rate",
                stats.adjusted_phantom_rate(rate, p_unknown, prior_valid),
            ],
        ]
    if summary is not None:
        out += [
            ["mean_paper_rate", summary.mean_paper_rate],
            ["sd_paper_rate", summary.sd_paper_rate],
            ["median_paper_rate", summary.median_paper_rate],
            ["min_paper_rate", summary.min_paper_rate],
            ["max_paper_rate", summary.max_paper_rate],
            ["iqr_low", summary.iqr_low],
            ["iqr_high", summary.iqr_high],
            ["coefficient_of_variation", summary.coefficient_of_variation],
        ]
    out.append(["trend_available", "true" if trend is not None else "false"])
    if trend is not None:
        out += [
            ["trend_intercept_pp", trend.intercept],
            ["trend_slope_pp_per_month", trend.slope],
            ["trend_r_squared", trend.r_squared],
            ["trend_p_value_slope", trend.p_value_slope],
            ["trend_residual_sd_pp", trend.residual_sd],
        ]
    out += [
        ["config_tau_valid", config.tau_valid],
        ["config_tau_sloppy", config.tau_sloppy],
        ["config_tau_rho", config.tau_rho],
        ["config_ghost_cut", config.ghost_cut],
        ["config_z_score", config.z_score],
        ["config_warn_threshold_pct", warn_threshold_pct],
        ["config_top_n", top_n],
    ]
    return out


def fit_trend_from_audits(audits: list[PaperAudit] | None) -> TrendFit | None:
    """Trend over (month, rate in pp) when the data can support one."""
    if audits is None or len(audits) < 3:
        return None
    months = {a.submission_month for a in audits}
    if len(months) < 2:
        return None
    return stats.fit_trend([(a.submission_month, 100.0 * a.phantom_rate) for a in audits])


def write_sweep_csv(path: Path, sweep: list[tuple[float, float, float]]) -> None:
    _write_csv(
        path,
        ["tau_valid", "tau_sloppy", "phantom_rate"],
        [list(row) for row in sweep],
    )


def emit_artifacts(
    out_dir: str | Path,
    rows: list[OutcomeRow],
    config: AuditConfig,
    warn_threshold_pct: float = DEFAULT_WARN_THRESHOLD_PCT,
    top_n: int = DEFAULT_TOP_N,
    include_outcomes: bool = True,
    sweep_grid: list[tuple[float, float]] | None = None,
    render_figures: bool = True,
    prior_valid: float | None = None,
) -> ReportResult:
    """Write the full artifact set for one run into ``out_dir``.

    Always: summary.csv, phantom_categories.csv. With paper context:
    papers.csv, timeline.csv, monthly_status.csv, top_papers.csv, and the
    trend rows in the summary. ``include_outcomes`` additionally writes
    outcomes.jsonl (audit runs; replay runs already have one).
    """
    if not rows:
        raise ValueError("cannot emit a report for an empty outcome set")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    if include_outcomes:
        write_outcomes(out / "outcomes.jsonl", [(r.outcome, r.paper_id, r.submission_month) for r in rows])
        files.append("outcomes.jsonl")

    audits = audits_from_rows(rows)
    summary = stats.paper_level_summary(audits, config.z_score) if audits else None
    trend = fit_trend_from_audits(audits)

    if audits:
        write_papers_csv(out / "papers.csv", audits)
        _write_csv(
            out / "timeline.csv",
            ["submission_month", "paper_id", "phantom_rate", "n_citations"],
            timeline_rows(audits),
        )
        _write_csv(
            out / "monthly_status.csv",
            ["month", "n_valid", "n_sloppy", "n_unknown", "n_phantom"],
            monthly_status_rows(rows),
        )
        _write_csv(
            out / "top_papers.csv",
            ["rank", "paper_id", "phantom_rate", "n_citations"],
            top_paper_rows(audits, top_n),
        )
        files += ["papers.csv", "timeline.csv", "monthly_status.csv", "top_papers.csv"]

    _write_csv(
        out / "phantom_categories.csv",
        ["phantom_type", "count"],
        phantom_category_rows(rows),
    )
    files.append("phantom_categories.csv")

    broken_links = [
        row.outcome
        for row in rows
        if row.outcome.phantom_type is PhantomType.BROKEN_LINK and row.outcome.doi
    ]
    if broken_links:
        _write_csv(
            out / "broken_link_patterns.csv",
            ["pattern", "count"],
            [list(item) for item in stats.doi_prefix_patterns(broken_links)],
        )
        files.append("broken_link_patterns.csv")

    _write_csv(
        out / "summary.csv",
        ["key", "value"],
        summary_rows(
            rows,
            summary,
            trend,
            config,
            warn_threshold_pct,
            top_n,
            config.z_score,
            prior_valid=prior_valid,
        ),
    )
    files.append("summary.csv")

    if sweep_grid:
        sweep = stats.sensitivity_sweep([r.outcome for r in rows], sweep_grid, config)
        write_sweep_csv(out / "sweep.csv", sweep)
        files.append("sweep.csv")

    outcomes = [row.outcome for row in rows]
    total = len(outcomes)
    phantoms = sum(1 for o in outcomes if o.status is VerificationStatus.PHANTOM)

    if render_figures:
        from . import figures

        rendered = figures.render_all(
            out,
            timeline=timeline_rows(audits) if audits else [],
            monthly=monthly_status_rows(rows) if audits else [],
            categories=phantom_category_rows(rows),
            top_papers=top_paper_rows(audits, top_n) if audits else [],
            trend=trend,
        )
        files += rendered

    return ReportResult(
        corpus_phantom_rate=phantoms / total,
        total_citations=total,
        files=files,
    )
