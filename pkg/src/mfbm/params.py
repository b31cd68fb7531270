"""Parameters of one mixed fractional Black-Scholes market."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Hurst index, mixing scale ``alpha``, drift ``mu`` and volatility ``sigma``.

    The price is driven by ``alpha * Z^H + B``; only ``3/4 < H < 1`` is
    accepted, the range in which that process is equivalent to a Brownian
    motion.
    """

    hurst: float
    alpha: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("hurst", "alpha", "mu", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.75 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0.75, 1), got {self.hurst}")
        if self.alpha <= 0.0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if self.sigma <= 0.0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def with_alpha(self, alpha: float) -> ModelParams:
        return replace(self, alpha=float(alpha))

    @property
    def drift_per_step(self) -> float:
        """``mu * alpha / sigma``, the drift removed by the martingale measure."""
        return self.mu * self.alpha / self.sigma
