"""Command-line surface: audit, replay, decay, and sweep subcommands.

Exit codes: 0 success, 1 operational error, 2 phantom-rate warning (the
corpus rate exceeded --warn-threshold; submission-gate automation keys off
this code). Config precedence: CLI flags > --config file > built-in
defaults; the effective analysis config is echoed into summary.csv.

Environment variables (live transport only): REFAUDIT_CONTACT (politeness
mailto for the User-Agent) and SEMANTIC_SCHOLAR_API_KEY.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .corpus_io import CorpusFormatError, OutcomeRow, load_corpus, read_outcomes
from .decay import project
from .model import AuditConfig, DecayParams
from .net.clients import ResolverClients
from .net.throttle import SimulatedClock, SystemClock
from .net.transport import LiveTransport, MissingFixtureError, ReplayTransport
from .pipeline import ConfigurationError, audit_corpus
from .report import (
    DEFAULT_SWEEP_GRID,
    DEFAULT_TOP_N,
    DEFAULT_WARN_THRESHOLD_PCT,
    emit_artifacts,
    write_sweep_csv,
)
from .stats import sensitivity_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARNING = 2

_CONFIG_FIELDS = (
    "tau_valid",
    "tau_sloppy",
    "tau_rho",
    "ghost_cut",
    "z_score",
    "max_retries",
    "search_limit",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refaudit",
        description="Verify bibliography references against scholarly metadata "
        "services and report phantom-citation statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="verify a corpus and emit report artifacts")
    p_audit.add_argument("--input", required=True, help="corpus file")
    p_audit.add_argument(
        "--format", choices=("jsonl", "plain-text"), default="jsonl", help="corpus format"
    )
    p_audit.add_argument("--paper-id", help="paper id for plain-text corpora")
    p_audit.add_argument(
        "--date", type=float, help="submission month for plain-text corpora"
    )
    p_audit.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p_audit)
    p_audit.add_argument(
        "--transport",
        choices=("live", "replay"),
        default="live",
        help="live HTTP or recorded-fixture replay",
    )
    p_audit.add_argument("--fixtures", help="fixture file for --transport replay")
    p_audit.add_argument(
        "--clock",
        choices=("system", "simulated"),
        default="system",
        help="simulated clock is for replay testing only",
    )
    p_audit.add_argument("--workers", type=int, default=1, help="concurrent verifiers")
    p_audit.add_argument(
        "--warn-threshold",
        type=float,
        default=DEFAULT_WARN_THRESHOLD_PCT,
        help="warning exit (code 2) when the phantom rate exceeds this percent",
    )
    p_audit.add_argument("--top-n", type=int, default=DEFAULT_TOP_N)
    p_audit.add_argument(
        "--prior-valid",
        type=float,
        help="also report the unknown-adjusted phantom rate under this prior",
    )
    p_audit.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_audit.set_defaults(func=cmd_audit)

    p_replay = sub.add_parser(
        "replay", help="recompute statistics from stored outcomes, no network"
    )
    p_replay.add_argument("--input", required=True, help="outcome JSONL file")
    p_replay.add_argument("--out", required=True, help="output directory")
    p_replay.add_argument(
        "--field-map", help="JSON file renaming foreign field names to the schema"
    )
    _add_config_flags(p_replay)
    p_replay.add_argument("--grid", help="sweep grid, e.g. '80:45,85:50,90:55'")
    p_replay.add_argument("--top-n", type=int, default=DEFAULT_TOP_N)
    p_replay.add_argument(
        "--warn-threshold", type=float, default=DEFAULT_WARN_THRESHOLD_PCT
    )
    p_replay.add_argument("--prior-valid", type=float)
    p_replay.add_argument("--no-figures", action="store_true")
    p_replay.set_defaults(func=cmd_replay)

    p_decay = sub.add_parser("decay", help="closed-form citation-integrity projections")
    p_decay.add_argument("--phantom-rate", type=float, default=0.17)
    p_decay.add_argument("--initial-integrity", type=float, default=1.0)
    p_decay.add_argument("--alpha", type=float, default=1.0, help="inherited share")
    p_decay.add_argument("--horizon", type=int, default=4, help="generations")
    p_decay.add_argument("--out", help="directory for decay.csv (otherwise stdout only)")
    p_decay.set_defaults(func=cmd_decay)

    p_sweep = sub.add_parser(
        "sweep", help="phantom-rate sensitivity over a threshold grid"
    )
    p_sweep.add_argument("--input", required=True, help="outcome JSONL file")
    p_sweep.add_argument("--field-map")
    p_sweep.add_argument("--grid", help="e.g. '80:45,85:50,90:55'")
    p_sweep.add_argument("--out", help="directory for sweep.csv (otherwise stdout only)")
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--tau-valid", type=float, dest="tau_valid")
    parser.add_argument("--tau-sloppy", type=float, dest="tau_sloppy")
    parser.add_argument("--tau-rho", type=float, dest="tau_rho")
    parser.add_argument("--ghost-cut", type=float, dest="ghost_cut")
    parser.add_argument("--z-score", type=float, dest="z_score")
    parser.add_argument("--max-retries", type=int, dest="max_retries")
    parser.add_argument("--search-limit", type=int, dest="search_limit")
    parser.add_argument("--seed", type=int, help="jitter RNG seed")
    parser.add_argument("--cache", help="durable response cache path")


def resolve_config(args: argparse.Namespace) -> AuditConfig:
    """Merge defaults, config file, and explicit flags (highest wins)."""
    data: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as handle:
            data.update(json.load(handle))
    if "source_priority" in data:
        data["source_priority"] = tuple(data["source_priority"])
    for field in _CONFIG_FIELDS:
        value = getattr(args, field, None)
        if value is not None:
            data[field] = value
    if getattr(args, "seed", None) is not None:
        data["rng_seed"] = args.seed
    if getattr(args, "cache", None) is not None:
        data["cache_path"] = args.cache
    return AuditConfig(**data)


def _parse_grid(text: str | None) -> list[tuple[float, float]]:
    if not text:
        return list(DEFAULT_SWEEP_GRID)
    grid = []
    for chunk in text.split(","):
        tau_valid, _, tau_sloppy = chunk.partition(":")
        grid.append((float(tau_valid), float(tau_sloppy)))
    return grid


def _build_clients(args: argparse.Namespace, config: AuditConfig) -> ResolverClients:
    if args.transport == "replay":
        if not args.fixtures:
            raise ConfigurationError("--transport replay requires --fixtures")
        transport = ReplayTransport(args.fixtures)
    else:
        if args.clock == "simulated":
            raise ConfigurationError("--clock simulated only makes sense with replay")
        transport = LiveTransport()
    clock = SimulatedClock() if args.clock == "simulated" else SystemClock()
    return ResolverClients.from_config(config, transport, clock=clock)


def cmd_audit(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    records, paper_dates = load_corpus(
        args.input,
        format=args.format,
        paper_id=args.paper_id,
        submission_month=args.date,
    )
    clients = _build_clients(args, config)
    started = time.time()
    outcomes, audits = audit_corpus(
        records, paper_dates, config, clients, workers=args.workers
    )
    elapsed = time.time() - started

    paper_of = {r.citation_id: r.paper_id for r in records}
    rows = [
        OutcomeRow(o, paper_of[o.citation_id], paper_dates[paper_of[o.citation_id]])
        for o in outcomes
    ]
    result = emit_artifacts(
        args.out,
        rows,
        config,
        warn_threshold_pct=args.warn_threshold,
        top_n=args.top_n,
        include_outcomes=True,
        render_figures=not args.no_figures,
        prior_valid=args.prior_valid,
    )
    _write_run_log(
        Path(args.out) / "run.log",
        command="audit",
        elapsed=elapsed,
        transport=args.transport,
        n_citations=result.total_citations,
        n_papers=len(audits),
        cache_hits=clients.cache.hits,
        cache_misses=clients.cache.misses,
    )

    rate_pct = 100.0 * result.corpus_phantom_rate
    print(
        f"audited {result.total_citations} citations across {len(audits)} papers: "
        f"phantom rate {rate_pct:.2f}%"
    )
    print(f"artifacts written to {args.out}: {', '.join(result.files)}")
    if rate_pct > args.warn_threshold:
        print(
            f"WARNING: phantom rate {rate_pct:.2f}% exceeds threshold "
            f"{args.warn_threshold:.2f}%",
            file=sys.stderr,
        )
        return EXIT_WARNING
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    field_map = None
    if args.field_map:
        with open(args.field_map, encoding="utf-8") as handle:
            field_map = json.load(handle)
    rows = read_outcomes(args.input, field_map=field_map)
    if not rows:
        raise ConfigurationError(f"{args.input} holds no outcome rows")
    result = emit_artifacts(
        args.out,
        rows,
        config,
        warn_threshold_pct=args.warn_threshold,
        top_n=args.top_n,
        include_outcomes=False,
        sweep_grid=_parse_grid(args.grid),
        render_figures=not args.no_figures,
        prior_valid=args.prior_valid,
    )
    print(
        f"replayed {result.total_citations} stored outcomes: "
        f"phantom rate {100.0 * result.corpus_phantom_rate:.2f}%"
    )
    print(f"artifacts written to {args.out}: {', '.join(result.files)}")
    return EXIT_OK


def cmd_decay(args: argparse.Namespace) -> int:
    params = DecayParams(
        p=args.phantom_rate,
        g0=args.initial_integrity,
        alpha=args.alpha,
        horizon=args.horizon,
    )
    result = project(params)

    print(f"phantom rate p = {params.p}, initial integrity = {params.g0}")
    print(f"half-life: {result.half_life:.2f} generations")
    if result.equilibrium is not None:
        print(
            f"equilibrium integrity (alpha={params.alpha}): "
            f"{100.0 * result.equilibrium:.1f}%"
        )
    print("generation  integrity")
    for t, value in enumerate(result.series):
        if t == 0:
            continue  # reporting starts at the first hand-off
        print(f"{t:>10}  {100.0 * value:.1f}%")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = [["generation", "integrity"]]
        lines += [[t, value] for t, value in enumerate(result.series) if t > 0]
        import csv

        with open(out / "decay.csv", "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            for line in lines:
                writer.writerow([repr(c) if isinstance(c, float) else str(c) for c in line])
            writer.writerow(["half_life", repr(result.half_life)])
            if result.equilibrium is not None:
                writer.writerow(["equilibrium", repr(result.equilibrium)])
        print(f"wrote {out / 'decay.csv'}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    field_map = None
    if args.field_map:
        with open(args.field_map, encoding="utf-8") as handle:
            field_map = json.load(handle)
    rows = read_outcomes(args.input, field_map=field_map)
    if not rows:
        raise ConfigurationError(f"{args.input} holds no outcome rows")
    sweep = sensitivity_sweep([r.outcome for r in rows], _parse_grid(args.grid), config)
    print("tau_valid,tau_sloppy,phantom_rate")
    for tau_valid, tau_sloppy, rate in sweep:
        print(f"{tau_valid!r},{tau_sloppy!r},{rate!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(out / "sweep.csv", sweep)
        print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def _write_run_log(path: Path, **fields) -> None:
    # Wall-clock details live here, away from the deterministic artifacts.
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps({"timestamp": stamp, **fields}) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ConfigurationError,
        CorpusFormatError,
        MissingFixtureError,
        FileNotFoundError,
        IsADirectoryError,
        PermissionError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
