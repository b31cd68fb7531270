"""Grid measures of the mixed fractional Black-Scholes market.

On the grid ``{0, 1/n, ..., 1}`` the increments of the canonical process are
centred normal with covariance ``S0 = I/n + alpha**2 C_n`` under the
objective law, and normal with mean ``-(mu alpha / (sigma n)) 1`` and
covariance ``S1 = I/n + (a_n / n) 1 1^T``, ``a_n = mu**2 alpha**2 / (sigma**2 n)``,
under the martingale measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .fbm import fbm_increment_covariance
from .measures import GaussianMeasure, check_alpha_grid, gaussian_kl, loglr_moments
from .numerics import symmetric_eigenvalues
from .params import ModelParams

DEFAULT_ALPHAS = tuple(2.0**k for k in range(6))


def _check_n(n: int, minimum: int = 1) -> int:
    if int(n) != n or n < minimum:
        raise DomainError(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def drift_scale(params: ModelParams, n: int) -> float:
    """``a_n = mu**2 alpha**2 / (sigma**2 n)``."""
    return params.drift_per_step**2 / n


@dataclass(frozen=True)
class ModelMatrices:
    n: int
    sigma0: np.ndarray
    sigma1: np.ndarray
    a_n: float


def build_model_matrices(params: ModelParams, n: int) -> ModelMatrices:
    n = _check_n(n)
    c = fbm_increment_covariance(params.hurst, n).matrix
    eye = np.eye(n) / n
    a_n = drift_scale(params, n)
    sigma0 = eye + params.alpha**2 * c
    sigma1 = eye + (a_n / n) * np.ones((n, n))
    return ModelMatrices(n=n, sigma0=sigma0, sigma1=sigma1, a_n=a_n)


def market_measures(params: ModelParams, n: int) -> tuple[GaussianMeasure, GaussianMeasure]:
    """(objective, martingale) laws of the grid increments."""
    mats = build_model_matrices(params, n)
    mixed = GaussianMeasure(np.zeros(mats.n), mats.sigma0)
    drifted = GaussianMeasure(np.full(mats.n, -params.drift_per_step / mats.n), mats.sigma1)
    return mixed, drifted


def wiener_measure(n: int) -> GaussianMeasure:
    n = _check_n(n)
    return GaussianMeasure(np.zeros(n), np.eye(n) / n)


@dataclass(frozen=True)
class Sigma1ClosedForm:
    eigenvalues: np.ndarray
    logdet: float
    inverse: np.ndarray


def sigma1_closed_form(params: ModelParams, n: int) -> Sigma1ClosedForm:
    """Spectrum, log-determinant and inverse of ``S1`` without factorization.

    ``S1 = (I + a_n 1 1^T) / n`` is a rank-one update of a multiple of the
    identity: eigenvalue ``1/n`` on the complement of ``1`` and ``1/n + a_n``
    along it.
    """
    n = _check_n(n)
    return sigma1_closed_form_from_scale(drift_scale(params, n), n)


def sigma1_closed_form_from_scale(a_n: float, n: int) -> Sigma1ClosedForm:
    eig = np.full(n, 1.0 / n)
    eig[-1] += a_n
    eig.sort()
    logdet = math.log1p(n * a_n) - n * math.log(n)
    inverse = n * (np.eye(n) - (a_n / (n * a_n + 1.0)) * np.ones((n, n)))
    return Sigma1ClosedForm(eigenvalues=eig, logdet=logdet, inverse=inverse)


def _drift_correction(params: ModelParams) -> float:
    """``-mu^2 a^4 / (mu^2 a^2 + s^2) + ln((mu^2 a^2 + s^2) / s^2)``, before halving."""
    m2a2 = (params.mu * params.alpha) ** 2
    s2 = params.sigma**2
    return -m2a2 * params.alpha**2 / (m2a2 + s2) + math.log1p(m2a2 / s2)


def _check_entropy_scope(params: ModelParams, n: int) -> int:
    n = _check_n(n)
    if n == 1 and params.mu != 0.0:
        raise DomainError("n = 1 is only supported with mu = 0")
    return n


def relative_entropy_grid(params: ModelParams, n: int) -> float:
    """Entropy of the objective grid law relative to the martingale grid law.

    Uses the spectrum ``lambda_i`` of ``C_n``:

        0.5 * [sum_i (n a^2 l_i - ln(1 + n a^2 l_i))
               - mu^2 a^4 / (mu^2 a^2 + s^2) + ln((mu^2 a^2 + s^2) / s^2)]

    which avoids forming ``S1^-1 S0`` explicitly.
    """
    n = _check_entropy_scope(params, n)
    lam = symmetric_eigenvalues(fbm_increment_covariance(params.hurst, n).matrix)
    x = n * params.alpha**2 * lam
    return 0.5 * (float(np.sum(x - np.log1p(x))) + _drift_correction(params))


def theta(hurst: float, n: int) -> float:
    return float(n) ** (2.0 - 2.0 * hurst) - 1.0


def entropy_lower_bound(params: ModelParams, n: int, lambda_max: float | None = None) -> float:
    """``0.5 * (theta_n a^2 - n ln(1 + n a^2 lambda_max))``; may be negative for small alpha."""
    n = _check_n(n, minimum=2)
    if lambda_max is None:
        lambda_max = float(symmetric_eigenvalues(fbm_increment_covariance(params.hurst, n).matrix)[-1])
    a2 = params.alpha**2
    return 0.5 * (theta(params.hurst, n) * a2 - n * math.log1p(n * a2 * lambda_max))


def entropy_wrt_wiener(params: ModelParams, n: int) -> float:
    mixed, _ = market_measures(params, n)
    return gaussian_kl(mixed, wiener_measure(n))


def wiener_relation_residual(params: ModelParams, n: int) -> float:
    """Entropy against the martingale law minus (Wiener entropy + drift correction).

    Both entropies go through the generic Gaussian formula; only the drift
    correction is taken in closed form.
    """
    n = _check_n(n, minimum=2)
    mixed, drifted = market_measures(params, n)
    lhs = gaussian_kl(mixed, drifted)
    rhs = gaussian_kl(mixed, wiener_measure(n)) + 0.5 * _drift_correction(params)
    return lhs - rhs


@dataclass(frozen=True)
class EntropyRow:
    alpha: float
    n: int
    hurst: float
    mu: float
    sigma: float
    entropy: float
    lower_bound: float
    entropy_wrt_wiener: float
    theta_n: float
    lambda_max: float
    loglr_variance: float


def entropy_sweep(
    hurst: float,
    mu: float,
    sigma: float,
    n: int,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
) -> list[EntropyRow]:
    """One :class:`EntropyRow` per alpha, in grid order.

    ``lower_bound`` is NaN for ``n = 1``, where the bound is not defined.
    """
    alphas = check_alpha_grid(alphas)
    template = ModelParams(hurst=hurst, alpha=alphas[0], mu=mu, sigma=sigma)
    n = _check_entropy_scope(template, n)
    lam_max = float(symmetric_eigenvalues(fbm_increment_covariance(hurst, n).matrix)[-1])
    rows = []
    for alpha in alphas:
        p = template.with_alpha(alpha)
        mixed, drifted = market_measures(p, n)
        rows.append(
            EntropyRow(
                alpha=alpha,
                n=n,
                hurst=hurst,
                mu=mu,
                sigma=sigma,
                entropy=relative_entropy_grid(p, n),
                lower_bound=entropy_lower_bound(p, n, lam_max) if n >= 2 else math.nan,
                entropy_wrt_wiener=gaussian_kl(mixed, wiener_measure(n)),
                theta_n=theta(hurst, n),
                lambda_max=lam_max,
                loglr_variance=loglr_moments(mixed, drifted).var_under_p1,
            )
        )
    return rows
