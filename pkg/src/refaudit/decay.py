"""Closed-form projections of citation-integrity decay across generations.

If each generation of literature inherits its citations from the previous
one and a fraction p of links break per hand-off, the share of verifiable
citations decays geometrically; with partial inheritance (a fraction alpha
inherited, the rest newly generated) the share settles at a positive
equilibrium instead. Closed forms plus recurrence iteration only -- no
stochastic simulation.
"""

from __future__ import annotations

import math

from .model import DecayParams, DecayResult


def decay_series(g0: float, p: float, horizon: int) -> list[float]:
    """Integrity share per generation: g0 * (1-p)^t for t = 0..horizon.

    Index 0 is the starting level; reporting layers that count from the
    first hand-off skip it.
    """
    _check_fraction("g0", g0)
    _check_rate(p)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    return [g0 * (1.0 - p) ** t for t in range(horizon + 1)]


def half_life(p: float) -> float:
    """Generations until integrity halves: ln(0.5) / ln(1-p).

    Requires 0 < p < 1. Not rounded: fractional generations are meaningful.
    As p approaches 0 the value grows without bound (a large finite float).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"half-life needs 0 < p < 1, got {p}")
    return math.log(0.5) / math.log(1.0 - p)


def equilibrium(alpha: float, p: float) -> float:
    """Long-run integrity under partial inheritance.

    G* = (1-alpha)(1-p) / (1 - alpha(1-p)): the unique fixed point of the
    partial-inheritance recurrence. alpha = 0 gives 1-p (all citations
    fresh); alpha = 1 degenerates to the pure ratchet, whose only fixed
    point is 0.
    """
    _check_fraction("alpha", alpha)
    _check_rate(p)
    if alpha == 1.0:
        return 0.0
    return (1.0 - alpha) * (1.0 - p) / (1.0 - alpha * (1.0 - p))


def partial_inheritance_series(g0: float, alpha: float, p: float, horizon: int) -> list[float]:
    """Iterate G_{t+1} = alpha * G_t * (1-p) + (1-alpha) * (1-p).

    Newly generated citations enter at integrity 1-p. With alpha = 1 this
    collapses to the pure decay series; with alpha < 1 it converges
    monotonically to equilibrium(alpha, p).
    """
    _check_fraction("g0", g0)
    _check_fraction("alpha", alpha)
    _check_rate(p)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    fresh = (1.0 - alpha) * (1.0 - p)
    series = [g0]
    current = g0
    for _ in range(horizon):
        current = alpha * current * (1.0 - p) + fresh
        series.append(current)
    return series


def project(params: DecayParams) -> DecayResult:
    """Full projection for one parameter set.

    The half-life is reported only for p > 0 (flat series never halve);
    the equilibrium only applies under partial inheritance (alpha < 1).
    """
    if params.alpha == 1.0:
        series = decay_series(params.g0, params.p, params.horizon)
        eq = None
    else:
        series = partial_inheritance_series(
            params.g0, params.alpha, params.p, params.horizon
        )
        eq = equilibrium(params.alpha, params.p)
    life = half_life(params.p) if 0.0 < params.p < 1.0 else math.inf
    return DecayResult(series=series, half_life=life, equilibrium=eq)


def _check_fraction(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def _check_rate(p: float) -> None:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"phantom rate p must be in [0, 1), got {p}")
