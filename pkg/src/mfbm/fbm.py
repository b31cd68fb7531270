"""Fractional Brownian motion increments on the uniform grid of [0, 1]."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError, NotPositiveDefinite
from .numerics import SeededStream, cholesky_factor
from .params import ModelParams

logger = logging.getLogger(__name__)

# stream labels; distinct so fBm, Brownian and drifted-Brownian draws never share indices
_FBM_LABEL = 1
_BM_LABEL = 2
_DRIFT_LABEL = 3


@dataclass(frozen=True)
class FbmCovariance:
    hurst: float
    n: int
    matrix: np.ndarray


@dataclass(frozen=True)
class IncrementSample:
    """``count`` rows, each one realization of the ``n`` grid increments.

    ``ridge`` is the diagonal jitter that had to be added to the fBm
    covariance before it could be factored (0.0 in the normal case).
    """

    data: np.ndarray
    ridge: float = 0.0

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


def _check_grid(hurst: float, n: int) -> None:
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")


def increment_autocovariance(hurst: float, n: int) -> np.ndarray:
    """Lag-``k`` covariance of the increments, ``k = 0, ..., n - 1``."""
    _check_grid(hurst, n)
    k = np.arange(n, dtype=np.float64)
    two_h = 2.0 * hurst
    gamma = 0.5 * (np.abs(k + 1.0) ** two_h + np.abs(k - 1.0) ** two_h - 2.0 * k**two_h)
    return gamma * float(n) ** (-two_h)


def fbm_increment_covariance(hurst: float, n: int) -> FbmCovariance:
    """Covariance matrix of ``Z_{i/n} - Z_{(i-1)/n}``, ``i = 1..n``.

    Built from the stationary-increment form rather than by differencing the
    fBm covariance, which cancels four large terms for big ``n``.  The
    trace is ``n**(1 - 2H)`` and the entries sum to ``Var(Z_1) = 1``.
    """
    _check_grid(hurst, n)
    matrix = toeplitz(increment_autocovariance(hurst, n))
    return FbmCovariance(hurst=float(hurst), n=int(n), matrix=matrix)


def fbm_cholesky(cov: FbmCovariance) -> tuple[np.ndarray, float]:
    """Lower factor of the fBm increment covariance and the ridge used.

    For H close to 1 the matrix is positive definite but numerically
    borderline; one retry with ridge ``1e-12 * tr / n`` is allowed.
    """
    try:
        return cholesky_factor(cov.matrix).lower, 0.0
    except NotPositiveDefinite:
        ridge = 1e-12 * float(np.trace(cov.matrix)) / cov.n
        logger.warning("fBm covariance (H=%s, n=%d) needed ridge %.3e", cov.hurst, cov.n, ridge)
        lower = cholesky_factor(cov.matrix + ridge * np.eye(cov.n)).lower
        return lower, ridge


def _check_count(count: int) -> int:
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count}")
    return int(count)


def _apply_lower(z: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """``z @ lower.T`` accumulated column by column.

    Unlike a BLAS product, each output row depends only on its own input
    row, so results do not change with how rows are chunked.
    """
    out = np.zeros_like(z)
    for j in range(lower.shape[1]):
        out += z[:, j : j + 1] * lower[:, j]
    return out


def _row_chunks(count: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(int(workers), count))
    edges = np.linspace(0, count, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _fill_rows(count: int, workers: int, fill) -> np.ndarray:
    chunks = _row_chunks(count, workers)
    if len(chunks) == 1:
        return fill(*chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return np.concatenate(list(pool.map(lambda c: fill(*c), chunks)))


def sample_mixed_increments(
    params: ModelParams, n: int, count: int, stream: SeededStream, workers: int = 1
) -> IncrementSample:
    """Draw grid increments of ``alpha * Z^H + B``.

    Each row is ``alpha * L z + w / sqrt(n)`` with ``L L^T = C_n`` and
    ``z``, ``w`` standard normal vectors taken from two disjoint sub-streams,
    so the population covariance is ``I / n + alpha**2 C_n``.  Row ``r``
    uses stream indices ``r * n ... r * n + n - 1``; the output is
    bit-identical for any ``workers``.
    """
    count = _check_count(count)
    cov = fbm_increment_covariance(params.hurst, n)
    lower, ridge = fbm_cholesky(cov)
    z_stream = stream.spawn(_FBM_LABEL)
    w_stream = stream.spawn(_BM_LABEL)
    scale = 1.0 / np.sqrt(cov.n)

    def fill(r0: int, r1: int) -> np.ndarray:
        shape = (r1 - r0, cov.n)
        z = z_stream.normal_block(shape, start=r0 * cov.n)
        w = w_stream.normal_block(shape, start=r0 * cov.n)
        return params.alpha * _apply_lower(z, lower) + w * scale

    return IncrementSample(data=_fill_rows(count, workers, fill), ridge=ridge)


def sample_drifted_bm_increments(
    params: ModelParams, n: int, count: int, stream: SeededStream, workers: int = 1
) -> IncrementSample:
    """Draw grid increments of a Brownian motion with drift ``-mu * alpha / sigma``.

    Coordinates are independent ``N(-mu alpha / (sigma n), 1 / n)``.
    """
    if params.sigma <= 0.0:
        raise DomainError(f"sigma must be > 0, got {params.sigma}")
    _check_grid(0.5, n)
    count = _check_count(count)
    n = int(n)
    w_stream = stream.spawn(_DRIFT_LABEL)
    shift = -params.drift_per_step / n
    scale = 1.0 / np.sqrt(n)

    def fill(r0: int, r1: int) -> np.ndarray:
        return shift + w_stream.normal_block((r1 - r0, n), start=r0 * n) * scale

    return IncrementSample(data=_fill_rows(count, workers, fill))
