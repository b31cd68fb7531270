"""Explicit separating sets ``{ln L > c}`` and the strong-arbitrage verdict.

For each alpha the set ``A = {y : ln(dQ_mixed/dQ_drift)(y) > c}`` is
evaluated on draws from both grid laws.  Entire asymptotic separation shows
up as ``Q_mixed(A) -> 1`` and ``Q_drift(A) -> 0``; the complement gives the
mirror-image sets, so the direction chosen here is immaterial.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .fbm import sample_drifted_bm_increments, sample_mixed_increments
from .market import DEFAULT_ALPHAS, market_measures
from .measures import (
    DichotomyVerdict,
    GaussianMeasure,
    Verdict,
    check_alpha_grid,
    dichotomy_classify,
    gaussian_kl,
    log_likelihood_ratio,
    loglr_moments,
)
from .numerics import SeededStream
from .params import ModelParams

MIN_COUNT = 100
SUCCESS_PROB = 0.99
FAILURE_PROB = 0.01

_MIXED_LABEL = 11
_DRIFT_LABEL = 12


class SaaConclusion(str, enum.Enum):
    SAA_EVIDENCE = "SAA-evidence"
    NO_SAA_EVIDENCE = "no-SAA-evidence"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SeparationRow:
    alpha: float
    threshold: float
    p_mixed: float
    p_mixed_se: float
    p_drift: float
    p_drift_se: float
    samples: int

    @property
    def gap(self) -> float:
        return self.p_mixed - self.p_drift

    @property
    def gap_se(self) -> float:
        return math.hypot(self.p_mixed_se, self.p_drift_se)


@dataclass(frozen=True)
class SeparationReport:
    rows: tuple[SeparationRow, ...]
    verdict: DichotomyVerdict
    saa_conclusion: SaaConclusion


def _proportion(hits: np.ndarray) -> tuple[float, float]:
    p = float(np.mean(hits))
    return p, math.sqrt(p * (1.0 - p) / hits.size)


def _row(alpha, threshold, llr_mixed, llr_drift) -> SeparationRow:
    # strict inequality: the boundary ln L == c is excluded from the set
    p_mixed, se_mixed = _proportion(llr_mixed > threshold)
    p_drift, se_drift = _proportion(llr_drift > threshold)
    return SeparationRow(
        alpha=float(alpha),
        threshold=float(threshold),
        p_mixed=p_mixed,
        p_mixed_se=se_mixed,
        p_drift=p_drift,
        p_drift_se=se_drift,
        samples=int(llr_mixed.size),
    )


def _check_count(count: int) -> int:
    if int(count) != count or count < MIN_COUNT:
        raise DomainError(f"count must be an integer >= {MIN_COUNT}, got {count}")
    return int(count)


def separating_set_probabilities(
    params: ModelParams,
    n: int,
    threshold: float,
    count: int,
    stream: SeededStream,
) -> SeparationRow:
    """Estimate both measures of ``{ln L > threshold}`` for one market.

    Draws come from the path-level samplers (fBm plus Brownian increments,
    and drifted Brownian increments) on independent sub-streams.
    """
    count = _check_count(count)
    if n < 1 or (n == 1 and params.mu != 0.0):
        raise DomainError("separation needs n >= 2, or n = 1 with mu = 0")
    mixed, drifted = market_measures(params, n)
    y_mixed = sample_mixed_increments(params, n, count, stream.spawn(_MIXED_LABEL)).data
    y_drift = sample_drifted_bm_increments(params, n, count, stream.spawn(_DRIFT_LABEL)).data
    return _row(
        params.alpha,
        threshold,
        log_likelihood_ratio(mixed, drifted, y_mixed),
        log_likelihood_ratio(mixed, drifted, y_drift),
    )


def measure_pair_probabilities(
    p1: GaussianMeasure,
    p2: GaussianMeasure,
    threshold: float,
    count: int,
    stream: SeededStream,
    alpha: float = math.nan,
) -> SeparationRow:
    """Same estimate for an arbitrary pair of Gaussian measures."""
    count = _check_count(count)
    y1 = p1.sample(count, stream.spawn(_MIXED_LABEL))
    y2 = p2.sample(count, stream.spawn(_DRIFT_LABEL))
    return _row(alpha, threshold, log_likelihood_ratio(p1, p2, y1), log_likelihood_ratio(p1, p2, y2))


def resolve_threshold(policy: float | str, p1: GaussianMeasure, p2: GaussianMeasure) -> float:
    """``"auto"`` means 0; ``"midpoint"`` is halfway between the means of ln L under each law."""
    if isinstance(policy, str):
        if policy == "auto":
            return 0.0
        if policy == "midpoint":
            return 0.5 * (gaussian_kl(p1, p2) - gaussian_kl(p2, p1))
        raise DomainError(f"unknown threshold policy {policy!r}")
    policy = float(policy)
    if math.isnan(policy):
        raise DomainError("threshold must not be NaN")
    return policy


def conclude(
    verdict: DichotomyVerdict,
    rows: Sequence[SeparationRow],
    success_prob: float = SUCCESS_PROB,
    failure_prob: float = FAILURE_PROB,
) -> SaaConclusion:
    last = rows[-1]
    if verdict.verdict is Verdict.ENTIRELY_SEPARABLE_TREND:
        if last.p_mixed >= success_prob and last.p_drift <= failure_prob:
            return SaaConclusion.SAA_EVIDENCE
        return SaaConclusion.INCONCLUSIVE
    if verdict.verdict is Verdict.CONTIGUITY_COMPATIBLE:
        return SaaConclusion.NO_SAA_EVIDENCE
    return SaaConclusion.INCONCLUSIVE


MeasureFactory = Callable[[float], tuple[GaussianMeasure, GaussianMeasure]]


def saa_experiment(
    hurst: float,
    mu: float,
    sigma: float,
    n: int,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    count: int = 10_000,
    stream: SeededStream | None = None,
    threshold: float | str = "auto",
    measures: MeasureFactory | None = None,
    success_prob: float = SUCCESS_PROB,
    failure_prob: float = FAILURE_PROB,
) -> SeparationReport:
    """Run the separation experiment along an alpha grid.

    Every alpha reuses the same sub-streams (common random numbers), which
    keeps the gap ``p_mixed - p_drift`` smooth along the grid.  ``measures``
    replaces the market laws by an arbitrary ``alpha -> (p1, p2)`` family;
    draws are then taken from those Gaussian measures directly.
    """
    alphas = check_alpha_grid(alphas, min_length=3)
    stream = stream if stream is not None else SeededStream(0)
    rows = []
    sweep = []
    for alpha in alphas:
        if measures is None:
            params = ModelParams(hurst=hurst, alpha=alpha, mu=mu, sigma=sigma)
            p1, p2 = market_measures(params, n)
            c = resolve_threshold(threshold, p1, p2)
            row = separating_set_probabilities(params, n, c, count, stream)
        else:
            p1, p2 = measures(alpha)
            c = resolve_threshold(threshold, p1, p2)
            row = measure_pair_probabilities(p1, p2, c, count, stream, alpha=alpha)
        rows.append(row)
        sweep.append((alpha, loglr_moments(p1, p2)))
    verdict = dichotomy_classify(sweep)
    return SeparationReport(
        rows=tuple(rows),
        verdict=verdict,
        saa_conclusion=conclude(verdict, rows, success_prob, failure_prob),
    )
