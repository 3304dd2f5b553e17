"""Corpus-level estimation: rates, intervals, regression, and sensitivity.

Everything here is a pure computation over immutable inputs. The slope
p-value uses an in-package Student-t CDF (regularized incomplete beta via
Lentz's continued fraction) so no statistics dependency is required;
accuracy is well inside 1e-6 absolute for the degrees of freedom seen here.
"""

from __future__ import annotations

import math
import statistics

from .model import (
    AuditConfig,
    CorpusSummary,
    PaperAudit,
    PhantomType,
    TrendFit,
    VerificationOutcome,
    VerificationStatus,
)
from .pipeline import reclassify_status

# Registrant prefixes common enough that a bare "prefix + empty suffix" DOI
# is read as a truncation rather than an exotic identifier.
KNOWN_REGISTRAR_PREFIXES = frozenset(
    {"10.48550", "10.18653", "10.1145", "10.1109", "10.1007", "10.1016", "10.1038"}
)


def corpus_phantom_rate(audits: list[PaperAudit]) -> float:
    """Citation-weighted phantom fraction: total phantoms / total citations."""
    total = sum(a.n_citations for a in audits)
    if total < 1:
        raise ValueError("corpus phantom rate needs at least one citation")
    phantoms = sum(a.counts.get(VerificationStatus.PHANTOM, 0) for a in audits)
    return phantoms / total


def wilson_ci(successes: int, n: int, z: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Chosen over the normal approximation for its coverage near 0 and 1; the
    interval always contains successes/n and stays inside [0, 1].
    """
    if n < 1:
        raise ValueError("wilson_ci needs n >= 1")
    if not 0 <= successes <= n:
        raise ValueError(f"successes {successes} outside [0, {n}]")
    if z <= 0:
        raise ValueError("z must be > 0")
    p_hat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    margin = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))
    # The interval provably contains p_hat and sits inside [0, 1]; the
    # clamps only repair last-ulp rounding.
    low = max(0.0, min(center - margin, p_hat))
    high = min(1.0, max(center + margin, p_hat))
    return low, high


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iterations = 300
    eps = 1e-14
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iterations + 1):
        m2 = 2 * m
        # Even step.
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        # Odd step.
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) via the continued fraction, switching tails for stability."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def two_sided_t_p_value(t_stat: float, df: int) -> float:
    """P(|T| >= |t|) for a Student-t variable with ``df`` degrees of freedom.

    Equals I_x(df/2, 1/2) with x = df / (df + t^2).
    """
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isinf(t_stat):
        return 0.0
    x = df / (df + t_stat * t_stat)
    return regularized_incomplete_beta(x, df / 2.0, 0.5)


def fit_trend(points: list[tuple[float, float]]) -> TrendFit:
    """Ordinary least squares through (month, rate) points.

    Rates are conventionally in percentage points, making the slope
    pp/month. The residual SD uses the n-2 denominator and the slope
    p-value a two-sided t-test with n-2 df. A zero-variance response gets
    r_squared = 0 (the fit explains nothing).
    """
    n = len(points)
    if n < 3:
        raise ValueError("trend fit needs at least 3 points")
    xs = [t for t, _ in points]
    ys = [y for _, y in points]
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0.0:
        raise ValueError("trend fit needs at least two distinct abscissae")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x

    sse = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    sst = sum((y - mean_y) ** 2 for y in ys)
    r_squared = 0.0 if sst == 0.0 else 1.0 - sse / sst
    residual_sd = math.sqrt(sse / (n - 2))

    se_slope = residual_sd / math.sqrt(sxx)
    if se_slope == 0.0:
        p_value = 1.0 if slope == 0.0 else 0.0
    else:
        p_value = two_sided_t_p_value(slope / se_slope, n - 2)
    return TrendFit(
        intercept=intercept,
        slope=slope,
        r_squared=r_squared,
        p_value_slope=p_value,
        residual_sd=residual_sd,
    )


def paper_level_summary(audits: list[PaperAudit], z_score: float = 1.96) -> CorpusSummary:
    """Corpus counts plus unweighted dispersion of per-paper phantom rates.

    The SD uses the sample (n-1) denominator; quartiles use inclusive
    linear interpolation. A single paper gets SD 0 by convention and no
    coefficient of variation when the mean is zero.
    """
    if not audits:
        raise ValueError("paper_level_summary needs at least one audit")
    total = sum(a.n_citations for a in audits)
    counts = {status: 0 for status in VerificationStatus}
    for audit in audits:
        for status, count in audit.counts.items():
            counts[status] += count
    percentages = {status: 100.0 * counts[status] / total for status in VerificationStatus}

    rates = [a.phantom_rate for a in audits]
    mean_rate = sum(rates) / len(rates)
    sd_rate = statistics.stdev(rates) if len(rates) > 1 else 0.0
    if len(rates) > 1:
        q1, _, q3 = statistics.quantiles(rates, n=4, method="inclusive")
    else:
        q1 = q3 = rates[0]

    rate = corpus_phantom_rate(audits)
    low, high = wilson_ci(counts[VerificationStatus.PHANTOM], total, z_score)
    return CorpusSummary(
        total_citations=total,
        counts=counts,
        percentages=percentages,
        corpus_phantom_rate=rate,
        wilson_low=low,
        wilson_high=high,
        mean_paper_rate=mean_rate,
        sd_paper_rate=sd_rate,
        median_paper_rate=statistics.median(rates),
        min_paper_rate=min(rates),
        max_paper_rate=max(rates),
        iqr_low=q1,
        iqr_high=q3,
        coefficient_of_variation=(sd_rate / mean_rate) if mean_rate > 0 else None,
    )


def sensitivity_sweep(
    outcomes: list[VerificationOutcome],
    grid: list[tuple[float, float]],
    base_config: AuditConfig | None = None,
) -> list[tuple[float, float, float]]:
    """Phantom rate at each (tau_valid, tau_sloppy) grid point.

    Re-bands stored title-search scores without any network access;
    identifier-verified and entropy-rejected outcomes are threshold-
    invariant. Returns (tau_valid, tau_sloppy, phantom_rate) rows in grid
    order.
    """
    if not outcomes:
        raise ValueError("sensitivity sweep needs at least one outcome")
    if base_config is None:
        base_config = AuditConfig()
    rows = []
    for tau_valid, tau_sloppy in grid:
        # ghost_cut plays no role in rate counting; keep it below tau_sloppy
        # so the config stays valid at low grid points.
        config = AuditConfig(
            tau_valid=tau_valid,
            tau_sloppy=tau_sloppy,
            tau_rho=base_config.tau_rho,
            ghost_cut=min(base_config.ghost_cut, tau_sloppy / 2.0),
            z_score=base_config.z_score,
        )
        phantoms = sum(
            1
            for outcome in outcomes
            if reclassify_status(outcome, config) is VerificationStatus.PHANTOM
        )
        rows.append((tau_valid, tau_sloppy, phantoms / len(outcomes)))
    return rows


def adjusted_phantom_rate(p_phantom: float, p_unknown: float, prior_valid: float) -> float:
    """Phantom rate after attributing (1 - prior) of the Unknowns to phantoms."""
    for name, value in (
        ("p_phantom", p_phantom),
        ("p_unknown", p_unknown),
        ("prior_valid", prior_valid),
    ):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    if p_phantom + p_unknown > 1.0 + 1e-12:
        raise ValueError("p_phantom + p_unknown exceeds 1")
    return p_phantom + (1.0 - prior_valid) * p_unknown


def _doi_suffix(doi: str) -> str:
    _, _, suffix = doi.partition("/")
    return suffix


def is_truncated_doi(doi: str) -> bool:
    """Heuristic truncation signature: the DOI ends mid-token.

    Trailing separator ("/" or "."), a suffix shorter than 4 characters, or
    a known registrar prefix with no suffix at all.
    """
    if doi.endswith("/") or doi.endswith("."):
        return True
    prefix, _, suffix = doi.partition("/")
    if len(suffix) < 4:
        return True
    return prefix in KNOWN_REGISTRAR_PREFIXES and not suffix


def doi_prefix_patterns(outcomes: list[VerificationOutcome]) -> list[tuple[str, int]]:
    """Fabrication patterns among broken-link phantoms.

    Truncated DOIs are bucketed by their full (truncated) string, tagged
    "(truncated)"; every DOI also feeds a registrar-prefix histogram. Rows
    are sorted by count (descending), then label.
    """
    truncated: dict[str, int] = {}
    prefixes: dict[str, int] = {}
    for outcome in outcomes:
        if outcome.phantom_type is not PhantomType.BROKEN_LINK:
            raise ValueError("doi_prefix_patterns expects broken-link phantoms only")
        if not outcome.doi:
            raise ValueError(f"outcome {outcome.citation_id!r} has no recorded DOI")
        doi = outcome.doi
        if is_truncated_doi(doi):
            label = f"{doi} (truncated)"
            truncated[label] = truncated.get(label, 0) + 1
        prefix = doi.partition("/")[0]
        prefixes[prefix] = prefixes.get(prefix, 0) + 1
    rows = list(truncated.items()) + list(prefixes.items())
    rows.sort(key=lambda item: (-item[1], item[0]))
    return rows
