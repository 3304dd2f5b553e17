"""Render the report's figure data to PNG files.

Purely presentational: every number plotted here comes from the same
aggregates written to the figure-data CSVs, so the images never disagree
with the delimited artifacts. Rendering is skippable (``--no-figures``) and
the PNGs sit outside the byte-determinism contract.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .model import TrendFit

_STATUS_COLORS = {
    "n_valid": "#2a9d8f",
    "n_sloppy": "#e9c46a",
    "n_unknown": "#8d99ae",
    "n_phantom": "#e76f51",
}

_CATEGORY_COLORS = {
    "syntax_error": "#e9c46a",
    "broken_link": "#e76f51",
    "ghost": "#6d597a",
}


def render_all(
    out_dir: Path,
    timeline: list[list],
    monthly: list[list],
    categories: list[list],
    top_papers: list[list],
    trend: TrendFit | None,
) -> list[str]:
    """Write the available figures; returns the relative file names."""
    figures_dir = Path(out_dir) / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)
    rendered = []
    if timeline:
        _render_timeline(figures_dir / "timeline.png", timeline, monthly, trend)
        rendered.append("figures/timeline.png")
    if any(count for _, count in categories):
        _render_categories(figures_dir / "phantom_categories.png", categories)
        rendered.append("figures/phantom_categories.png")
    if top_papers:
        _render_top_papers(figures_dir / "top_papers.png", top_papers)
        rendered.append("figures/top_papers.png")
    return rendered


def _render_timeline(
    path: Path, timeline: list[list], monthly: list[list], trend: TrendFit | None
) -> None:
    fig, (ax_rate, ax_monthly) = plt.subplots(
        2, 1, figsize=(9, 7), height_ratios=[2, 1], sharex=True
    )
    months = [row[0] for row in timeline]
    rates = [100.0 * row[2] for row in timeline]
    sizes = [max(12.0, 1.2 * row[3]) for row in timeline]
    ax_rate.scatter(months, rates, s=sizes, alpha=0.6, color="#264653", edgecolors="none")
    if trend is not None and months:
        xs = [min(months), max(months)]
        ax_rate.plot(
            xs,
            [trend.intercept + trend.slope * x for x in xs],
            linestyle="--",
            color="#e76f51",
            label=f"trend {trend.slope:+.2f} pp/month (R²={trend.r_squared:.3f})",
        )
        ax_rate.legend(loc="upper right", fontsize=9)
    ax_rate.set_ylabel("phantom rate (%)")
    ax_rate.set_title("Per-paper phantom rate over time")

    if monthly:
        xs = [row[0] for row in monthly]
        bottoms = [0.0] * len(monthly)
        for idx, key in enumerate(("n_valid", "n_sloppy", "n_unknown", "n_phantom")):
            values = [row[idx + 1] for row in monthly]
            ax_monthly.bar(
                xs,
                values,
                bottom=bottoms,
                color=_STATUS_COLORS[key],
                label=key[2:],
                width=0.8,
            )
            bottoms = [b + v for b, v in zip(bottoms, values)]
        ax_monthly.legend(loc="upper right", fontsize=8, ncol=4)
    ax_monthly.set_xlabel("months since study start")
    ax_monthly.set_ylabel("citations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_categories(path: Path, categories: list[list]) -> None:
    labels = [name for name, count in categories if count]
    counts = [count for _, count in categories if count]
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.pie(
        counts,
        labels=[f"{name} ({count})" for name, count in zip(labels, counts)],
        colors=[_CATEGORY_COLORS.get(name, "#777777") for name in labels],
        autopct="%.1f%%",
        wedgeprops={"width": 0.45},
        startangle=90,
    )
    ax.set_title("Phantom failure modes")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_top_papers(path: Path, top_papers: list[list]) -> None:
    # Rows arrive ranked best-first; draw rank 1 at the top.
    labels = [row[1] for row in reversed(top_papers)]
    rates = [100.0 * row[2] for row in reversed(top_papers)]
    fig, ax = plt.subplots(figsize=(8, max(3.0, 0.4 * len(labels) + 1.5)))
    max_rate = max(rates) if rates else 1.0
    colors = [
        (0.3 + 0.6 * (r / max_rate if max_rate else 0.0), 0.45, 0.35) for r in rates
    ]
    ax.barh(labels, rates, color=colors)
    ax.set_xlabel("phantom rate (%)")
    ax.set_title(f"Top {len(labels)} papers by phantom rate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
