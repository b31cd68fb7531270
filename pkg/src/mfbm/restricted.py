"""The two-date restricted market ``t in {0, 1}`` with ``n = 1`` and ``mu = 0``.

``S_1 = exp(sigma (Z + B / alpha) - sigma**2 / (2 alpha**2))`` with ``Z``, ``B``
independent standard normal.  Besides the Wiener measure, the exponential
tilt ``dP~/dP = g(X)``, ``X = exp(sigma Z)``, ``g = exp(-x) / h(x)`` with
``h`` the lognormal density of ``X``, is a second equivalent martingale
measure, for every alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError
from .measures import check_alpha_grid
from .numerics import SeededStream

MIN_COUNT = 10_000
DEFAULT_ALPHAS = (10.0, 30.0, 100.0)
DEFAULT_DELTA = 0.1

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# sub-stream labels
_EXP_LABEL = 21
_TILTED_B_LABEL = 22
_Z_LABEL = 23
_B_LABEL = 24


def _check_sigma(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError(f"sigma must be > 0, got {sigma}")


def _positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0.0)):
        raise DomainError("x must be strictly positive")
    return x


def log_lognormal_density(x, sigma: float):
    _check_sigma(sigma)
    x = _positive(x)
    lx = np.log(x)
    return -0.5 * (lx / sigma) ** 2 - _LOG_SQRT_2PI - math.log(sigma) - lx


def lognormal_density(x, sigma: float):
    """Density of ``exp(sigma Z)``, ``Z ~ N(0, 1)``."""
    return np.exp(log_lognormal_density(x, sigma))


def log_tilt_weight(x, sigma: float):
    return -_positive(x) - log_lognormal_density(x, sigma)


def tilt_weight(x, sigma: float):
    """``g(x) = exp(-x) / h(x)``, exponentiated from the log domain.

    Positive in exact arithmetic; in float64 it underflows to 0 once
    ``ln g < -745`` (``x`` near 1e3 for ``sigma = 1``).
    """
    with np.errstate(over="ignore"):
        return np.exp(log_tilt_weight(x, sigma))


def tilt_moment(sigma: float, power: int = 0, nodes: int = 10_000, lo: float = 1e-12, hi: float = 1e3) -> float:
    """``int x**power g(x) h(x) dx`` by the trapezoid rule in ``u = ln x``.

    Naive Monte Carlo of ``E_P[g(X)]`` has infinite variance because ``g``
    blows up at 0; on the log grid the integrand decays at both ends and
    the trapezoid rule converges fast.  ``power`` 0 and 1 both integrate to 1.
    """
    u = np.linspace(math.log(lo), math.log(hi), nodes)
    x = np.exp(u)
    log_f = log_tilt_weight(x, sigma) + log_lognormal_density(x, sigma) + (power + 1) * u
    return float(trapezoid(np.exp(log_f), u))


@dataclass(frozen=True)
class RestrictedRow:
    alpha: float
    e_s1: float
    e_s1_se: float
    up_prob: float
    up_prob_se: float
    down_prob: float
    down_prob_se: float


@dataclass(frozen=True)
class RestrictedReport:
    """Martingale and two-sided-risk evidence for the restricted market.

    ``tilt_positive`` records that ``g > 0`` on a log grid over
    ``[1e-6, 1e3]``, checked as a finite ``ln g`` because ``g`` itself
    underflows near the top of that range.  Mutual contiguity of the tilted
    and original laws follows from this equivalence and is not tested
    statistically.
    """

    sigma: float
    delta: float
    count: int
    tilt_mass: float
    tilt_first_moment: float
    tilt_positive: bool
    rows: tuple[RestrictedRow, ...]

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(r.alpha for r in self.rows)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def _prop_se(hits: np.ndarray) -> tuple[float, float]:
    p = float(np.mean(hits))
    return p, math.sqrt(p * (1.0 - p) / hits.size)


def restricted_market_report(
    sigma: float = 1.0,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    delta: float = DEFAULT_DELTA,
    count: int = 1_000_000,
    stream: SeededStream | None = None,
) -> RestrictedReport:
    """Evaluate the restricted market along ``alphas``.

    ``E_P~[S_1]`` is sampled under the tilted measure itself: there ``X`` is
    Exponential(1) and ``B`` is still standard normal, so
    ``S_1 = X exp(sigma B / alpha - sigma**2 / (2 alpha**2))``.  The tail
    probabilities ``P(S_1 > 1 + delta)`` and ``P(S_1 < 1 - delta)`` use the
    original measure.  All alphas share the same draws.
    """
    _check_sigma(sigma)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if int(count) != count or count < MIN_COUNT:
        raise DomainError(f"count must be an integer >= {MIN_COUNT}, got {count}")
    alphas = check_alpha_grid(alphas)
    count = int(count)
    stream = stream if stream is not None else SeededStream(0)

    x_tilted = -np.log(stream.spawn(_EXP_LABEL).uniforms(0, count))
    b_tilted = stream.spawn(_TILTED_B_LABEL).normals(0, count)
    z = stream.spawn(_Z_LABEL).normals(0, count)
    b = stream.spawn(_B_LABEL).normals(0, count)

    grid = np.geomspace(1e-6, 1e3, 2001)
    rows = []
    for alpha in alphas:
        comp = sigma**2 / (2.0 * alpha**2)
        e_s1, e_se = _mean_se(x_tilted * np.exp(sigma * b_tilted / alpha - comp))
        s1 = np.exp(sigma * (z + b / alpha) - comp)
        up, up_se = _prop_se(s1 > 1.0 + delta)
        down, down_se = _prop_se(s1 < 1.0 - delta)
        rows.append(RestrictedRow(alpha, e_s1, e_se, up, up_se, down, down_se))
    return RestrictedReport(
        sigma=float(sigma),
        delta=float(delta),
        count=count,
        tilt_mass=tilt_moment(sigma, 0),
        tilt_first_moment=tilt_moment(sigma, 1),
        tilt_positive=bool(np.all(np.isfinite(log_tilt_weight(grid, sigma)))),
        rows=tuple(rows),
    )
