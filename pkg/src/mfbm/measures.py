"""Gaussian measures on R^n: relative entropy, log-likelihood ratios and
the contiguity / separation classifier.

All entropies are in nats.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DimensionMismatch, InsufficientData, InvalidGrid, InvalidPartition
from .numerics import CholeskyFactor, SeededStream, as_symmetric, cholesky_factor, spd_solve

_LN_PHI_CLAMP = 700.0


@dataclass(frozen=True)
class GaussianMeasure:
    """Normal law with a positive-definite covariance; the factor is cached."""

    mean: np.ndarray
    cov: np.ndarray
    factor: CholeskyFactor = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cov = as_symmetric(self.cov)
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        if mean.shape != (cov.shape[0],):
            raise DimensionMismatch(f"mean has shape {mean.shape}, covariance is {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "factor", cholesky_factor(cov))

    @classmethod
    def centred(cls, cov) -> GaussianMeasure:
        cov = np.atleast_2d(cov)
        return cls(np.zeros(cov.shape[0]), cov)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    def sample(self, count: int, stream: SeededStream) -> np.ndarray:
        z = stream.normal_block((int(count), self.n))
        return self.mean + z @ self.factor.lower.T

    def logpdf(self, y) -> np.ndarray:
        """Log-density at each row of ``y`` (or at a single vector)."""
        y = np.asarray(y, dtype=np.float64)
        single = y.ndim == 1
        y = np.atleast_2d(y)
        if y.shape[1] != self.n:
            raise DimensionMismatch(f"points have dimension {y.shape[1]}, measure has {self.n}")
        u = self.factor.whiten((y - self.mean).T)
        out = -0.5 * (np.sum(u * u, axis=0) + self.factor.logdet + self.n * math.log(2.0 * math.pi))
        return out[0] if single else out


def _check_pair(p1: GaussianMeasure, p2: GaussianMeasure) -> None:
    if p1.n != p2.n:
        raise DimensionMismatch(f"measures have dimensions {p1.n} and {p2.n}")


def gaussian_kl(p1: GaussianMeasure, p2: GaussianMeasure) -> float:
    """Relative entropy ``H(p1 | p2)``.

    ``0.5 * [tr(S2^-1 S1) - n + d^T S2^-1 d + logdet S2 - logdet S1]`` with
    ``d = m2 - m1``.
    """
    _check_pair(p1, p2)
    if p1 is p2 or _same(p1, p2):
        return 0.0
    trace_term = float(np.trace(spd_solve(p2.factor, p1.cov)))
    d = p2.mean - p1.mean
    quad = float(d @ spd_solve(p2.factor, d))
    return 0.5 * (trace_term - p1.n + quad + p2.factor.logdet - p1.factor.logdet)


def _same(p1: GaussianMeasure, p2: GaussianMeasure) -> bool:
    return np.array_equal(p1.mean, p2.mean) and np.array_equal(p1.cov, p2.cov)


def log_likelihood_ratio(p1: GaussianMeasure, p2: GaussianMeasure, y) -> np.ndarray:
    """``ln(dp1/dp2)`` at ``y`` (a vector, or one vector per row)."""
    _check_pair(p1, p2)
    return p1.logpdf(y) - p2.logpdf(y)


@dataclass(frozen=True)
class LogLRStats:
    """Mean and variance of ``ln(dp1/dp2)`` under ``p1``."""

    mean_under_p1: float
    var_under_p1: float


def loglr_moments(p1: GaussianMeasure, p2: GaussianMeasure) -> LogLRStats:
    """Closed-form moments of the log-likelihood ratio under ``p1``.

    Works in coordinates whitened by ``p2``: with ``A = L2^-1 L1`` and
    ``M = A A^T`` (similar to ``S2^-1 S1``) and ``e = L2^-1 (m1 - m2)``,

        mean = 0.5 * (tr M - n + |e|^2 - ln det M)
        var  = 0.5 * |I - M|_F^2 + e^T M e
    """
    _check_pair(p1, p2)
    if _same(p1, p2):
        return LogLRStats(0.0, 0.0)
    a = p2.factor.whiten(p1.factor.lower)
    m = a @ a.T
    e = p2.factor.whiten(p1.mean - p2.mean)
    n = p1.n
    logdet_ratio = p1.factor.logdet - p2.factor.logdet
    mean = 0.5 * (float(np.sum(a * a)) - n + float(e @ e) - logdet_ratio)
    resid = np.eye(n) - m
    var = 0.5 * float(np.sum(resid * resid)) + float(e @ m @ e)
    return LogLRStats(mean_under_p1=max(mean, 0.0), var_under_p1=max(var, 0.0))


@dataclass(frozen=True)
class McKlEstimate:
    """Two Monte Carlo estimates of ``H(p1 | p2)``.

    ``forward`` averages ``ln phi`` over draws from ``p1``; ``tilted``
    averages ``phi ln phi`` over draws from ``p2``.  ``overflow_flagged`` is
    set when some ``ln phi`` exceeded the clamp used before exponentiating.
    """

    forward: float
    forward_se: float
    tilted: float
    tilted_se: float
    count: int
    overflow_flagged: bool = False


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def phi_log_phi(ln_phi: np.ndarray) -> tuple[np.ndarray, bool]:
    """``phi * ln(phi)`` from ``ln(phi)``, clamping ``ln(phi)`` at 700 first.

    Returns the values and whether the clamp was hit.
    """
    ln_phi = np.asarray(ln_phi, dtype=np.float64)
    overflow = bool(np.any(ln_phi > _LN_PHI_CLAMP))
    ln_phi = np.minimum(ln_phi, _LN_PHI_CLAMP)
    return np.exp(ln_phi) * ln_phi, overflow


def mc_kl_check(
    p1: GaussianMeasure, p2: GaussianMeasure, count: int, stream: SeededStream
) -> McKlEstimate:
    _check_pair(p1, p2)
    if count < 2:
        raise InsufficientData("count must be at least 2")
    y1 = p1.sample(count, stream.spawn(1))
    y2 = p2.sample(count, stream.spawn(2))
    forward, forward_se = _mean_se(log_likelihood_ratio(p1, p2, y1))
    values, overflow = phi_log_phi(log_likelihood_ratio(p1, p2, y2))
    tilted, tilted_se = _mean_se(values)
    return McKlEstimate(forward, forward_se, tilted, tilted_se, int(count), overflow)


# ---------------------------------------------------------------------------
# Partition entropy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Half-open axis-aligned cell ``[lower_i, upper_i)``; bounds may be infinite."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def contains(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(y)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((y >= lo) & (y < hi), axis=1)


@dataclass(frozen=True)
class GridPartition:
    """Product partition from strictly increasing interior cut points per axis."""

    cuts: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        cuts = tuple(tuple(float(c) for c in axis) for axis in self.cuts)
        for k, axis in enumerate(cuts):
            if not all(math.isfinite(c) for c in axis):
                raise InvalidPartition(f"axis {k}: cut points must be finite")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise InvalidPartition(f"axis {k}: cut points must be strictly increasing")
        object.__setattr__(self, "cuts", cuts)

    @property
    def n(self) -> int:
        return len(self.cuts)

    def cells(self) -> list[Box]:
        edges = [(-math.inf, *axis, math.inf) for axis in self.cuts]
        intervals = [list(zip(e[:-1], e[1:])) for e in edges]
        return [
            Box(tuple(iv[0] for iv in combo), tuple(iv[1] for iv in combo))
            for combo in itertools.product(*intervals)
        ]


def validate_partition(cells: Sequence[Box], n: int) -> None:
    """Check that ``cells`` tile R^n exactly once.

    Every cell bound is a grid line, so it suffices to test one interior
    point of each elementary grid cell for coverage by exactly one box.
    """
    if not cells:
        raise InvalidPartition("partition is empty")
    for c in cells:
        if len(c.lower) != n or len(c.upper) != n:
            raise InvalidPartition(f"cell {c} does not have dimension {n}")
        if any(not lo < hi for lo, hi in zip(c.lower, c.upper)):
            raise InvalidPartition(f"cell {c} is empty")
    reps = []
    for k in range(n):
        lines = sorted({b for c in cells for b in (c.lower[k], c.upper[k]) if math.isfinite(b)})
        if not lines:
            reps.append([0.0])
            continue
        pts = [lines[0] - 1.0]
        pts += [0.5 * (a + b) for a, b in zip(lines, lines[1:])]
        pts.append(lines[-1] + 1.0)
        reps.append(pts)
    points = np.array(list(itertools.product(*reps)), dtype=np.float64)
    hits = np.zeros(len(points), dtype=int)
    for c in cells:
        hits += c.contains(points)
    if np.any(hits == 0):
        raise InvalidPartition(f"gap: point {points[np.argmax(hits == 0)].tolist()} is not covered")
    if np.any(hits > 1):
        raise InvalidPartition(f"overlap: point {points[np.argmax(hits > 1)].tolist()} is covered twice")


@dataclass(frozen=True)
class PartitionEntropy:
    """``sum_j P1(F_j) ln(P1(F_j) / P2(F_j))`` with its standard error (0 when exact)."""

    value: float
    se: float
    p1_masses: np.ndarray
    p2_masses: np.ndarray


def _xlogy_ratio(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    out = np.zeros_like(q1)
    pos = q1 > 0
    with np.errstate(divide="ignore"):
        out[pos] = q1[pos] * (np.log(q1[pos]) - np.log(q2[pos]))
    return out


def _cell_masses_1d(p: GaussianMeasure, cells: Sequence[Box]) -> np.ndarray:
    m = p.mean[0]
    s = math.sqrt(p.cov[0, 0])
    lo = np.array([c.lower[0] for c in cells])
    hi = np.array([c.upper[0] for c in cells])
    return ndtr((hi - m) / s) - ndtr((lo - m) / s)


def _cell_index(y: np.ndarray, cells: Sequence[Box]) -> np.ndarray:
    idx = np.full(y.shape[0], -1)
    for j, c in enumerate(cells):
        idx[c.contains(y)] = j
    return idx


def partition_kl(
    p1: GaussianMeasure,
    p2: GaussianMeasure,
    partition: GridPartition | Sequence[Box],
    count: int = 100_000,
    stream: SeededStream | None = None,
) -> PartitionEntropy:
    """Relative entropy of the two measures restricted to a finite partition.

    In one dimension the cell masses come from normal CDF differences and
    the result is exact.  In higher dimension masses are estimated from
    ``count`` draws of each measure and a delta-method standard error is
    returned.  Never exceeds ``gaussian_kl(p1, p2)`` beyond estimation error.
    """
    _check_pair(p1, p2)
    cells = partition.cells() if isinstance(partition, GridPartition) else list(partition)
    validate_partition(cells, p1.n)
    if p1.n == 1:
        q1 = _cell_masses_1d(p1, cells)
        q2 = _cell_masses_1d(p2, cells)
        return PartitionEntropy(float(np.sum(_xlogy_ratio(q1, q2))), 0.0, q1, q2)

    if stream is None:
        raise ValueError("a stream is required for Monte Carlo partition entropy (n >= 2)")
    k = len(cells)
    i1 = _cell_index(p1.sample(count, stream.spawn(1)), cells)
    i2 = _cell_index(p2.sample(count, stream.spawn(2)), cells)
    q1 = np.bincount(i1, minlength=k) / count
    q2 = np.bincount(i2, minlength=k) / count
    value = float(np.sum(_xlogy_ratio(q1, q2)))
    if not math.isfinite(value):
        return PartitionEntropy(value, math.inf, q1, q2)
    # delta method on two independent multinomial estimates
    pos = q1 > 0
    g1 = np.zeros(k)
    g2 = np.zeros(k)
    g1[pos] = np.log(q1[pos] / q2[pos]) + 1.0
    g2[pos] = -q1[pos] / q2[pos]
    var1 = (np.sum(q1 * g1**2) - np.sum(q1 * g1) ** 2) / count
    var2 = (np.sum(q2 * g2**2) - np.sum(q2 * g2) ** 2) / count
    return PartitionEntropy(value, math.sqrt(max(var1 + var2, 0.0)), q1, q2)


# ---------------------------------------------------------------------------
# Dichotomy classifier
# ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    ENTIRELY_SEPARABLE_TREND = "EntirelySeparableTrend"
    CONTIGUITY_COMPATIBLE = "ContiguityCompatible"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DichotomyVerdict:
    verdict: Verdict
    evidence: tuple[tuple[float, float, float], ...]


GROWTH_FACTOR = 10.0
BOUNDED_FACTOR = 2.0


def check_alpha_grid(alphas: Sequence[float], min_length: int = 1) -> list[float]:
    alphas = [float(a) for a in alphas]
    if len(alphas) < min_length:
        raise InsufficientData(f"alpha grid needs at least {min_length} points, got {len(alphas)}")
    if any(not (math.isfinite(a) and a > 0) for a in alphas):
        raise InvalidGrid("alpha values must be positive and finite")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise InvalidGrid("alpha grid must be strictly increasing")
    return alphas


def dichotomy_classify(
    sweep: Sequence[tuple[float, LogLRStats]],
    growth_factor: float = GROWTH_FACTOR,
    bounded_factor: float = BOUNDED_FACTOR,
) -> DichotomyVerdict:
    """Finite-grid reading of the Gaussian contiguity / separation dichotomy.

    ``EntirelySeparableTrend`` when the entropy strictly increases over the
    last half of the grid and the final value is at least ``growth_factor``
    times the first; ``ContiguityCompatible`` when the largest entropy is at
    most ``bounded_factor`` times the smallest; otherwise ``Inconclusive``.
    The rule is a heuristic: the dichotomy itself concerns the limit.
    """
    if len(sweep) < 3:
        raise InsufficientData(f"classifier needs at least 3 grid points, got {len(sweep)}")
    check_alpha_grid([a for a, _ in sweep])
    evidence = tuple((float(a), s.mean_under_p1, s.var_under_p1) for a, s in sweep)
    h = [e[1] for e in evidence]
    tail = h[len(h) - math.ceil(len(h) / 2):]
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    if increasing and h[-1] >= growth_factor * h[0]:
        verdict = Verdict.ENTIRELY_SEPARABLE_TREND
    elif max(h) <= bounded_factor * min(h):
        verdict = Verdict.CONTIGUITY_COMPATIBLE
    else:
        verdict = Verdict.INCONCLUSIVE
    return DichotomyVerdict(verdict, evidence)
