"""Dense symmetric linear algebra and counter-based random streams.

Matrices are plain ``numpy`` arrays; :func:`as_symmetric` is the single
entry point that validates shape and enforces exact symmetry.  Determinants
are only ever produced in log form from a Cholesky factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import ndtri

from .errors import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite

_U64 = (1 << 64) - 1
_TWO_M53 = 2.0**-53


def as_symmetric(a) -> np.ndarray:
    """Return a float64 copy of ``a`` with ``a[i, j] == a[j, i]`` exactly.

    Raises
    ------
    DimensionMismatch
        If ``a`` is not a non-empty square 2-D array.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower Cholesky factor with its log-determinant."""

    lower: np.ndarray
    logdet: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def solve(self, b) -> np.ndarray:
        return cho_solve((self.lower, True), np.asarray(b, dtype=np.float64))

    def whiten(self, x) -> np.ndarray:
        """Solve ``lower @ out = x`` (columns of ``x`` are vectors)."""
        return solve_triangular(self.lower, np.asarray(x, dtype=np.float64), lower=True)


def cholesky_factor(s) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix.

    A pivot ``L[i, i]**2`` at or below ``n * eps * max(diag(S))`` is treated as
    a failure, so numerically singular inputs raise instead of producing a
    factor with a meaningless log-determinant.
    """
    s = as_symmetric(s)
    n = s.shape[0]
    max_diag = float(np.max(np.diag(s)))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    try:
        lower = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(lower) ** 2
    tol = n * np.finfo(np.float64).eps * max_diag
    if np.any(pivots <= tol):
        i = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {i} is {pivots[i]:.3e}, below tolerance {tol:.3e}")
    logdet = 2.0 * float(np.sum(np.log(np.diag(lower))))
    return CholeskyFactor(lower=lower, logdet=logdet)


def symmetric_eigenvalues(s) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in ascending order."""
    s = as_symmetric(s)
    try:
        return np.linalg.eigvalsh(s)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None


def spd_solve(s, b) -> np.ndarray:
    """Solve ``S x = b`` for positive-definite ``S``."""
    factor = s if isinstance(s, CholeskyFactor) else cholesky_factor(s)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != factor.n:
        raise DimensionMismatch(f"rhs has length {b.shape[0]}, matrix is {factor.n}x{factor.n}")
    return factor.solve(b)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeededStream:
    """A counter-based stream of standard-normal variates.

    Draw ``i`` depends only on ``(seed, tag, i)``: the 64-bit word at
    position ``i`` of a Philox4x64 stream keyed by ``(seed, tag)`` is mapped
    to a uniform on the open interval (0, 1) and pushed through the normal
    quantile function.  Any partition of an index range into chunks yields
    bit-identical values.
    """

    seed: int
    tag: int = 0

    def __post_init__(self):
        for name in ("seed", "tag"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def spawn(self, label: int) -> SeededStream:
        """Derived stream with a distinct tag; same seed."""
        return SeededStream(self.seed, _splitmix64(int(self.tag) ^ _splitmix64(int(label))))

    def raw(self, start: int, count: int) -> np.ndarray:
        if start < 0 or count < 0:
            raise ValueError("start and count must be non-negative")
        block, offset = divmod(int(start), 4)
        key = np.array([self.seed, self.tag], dtype=np.uint64)
        counter = np.array([block & _U64, block >> 64, 0, 0], dtype=np.uint64)
        gen = np.random.Philox(key=key, counter=counter)
        return gen.random_raw(offset + int(count))[offset:]

    def uniforms(self, start: int, count: int) -> np.ndarray:
        """Uniforms on (0, 1), never exactly 0 or 1."""
        return ((self.raw(start, count) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53

    def normals(self, start: int, count: int) -> np.ndarray:
        return ndtri(self.uniforms(start, count))

    def normal_block(self, shape: tuple[int, ...], start: int = 0) -> np.ndarray:
        """Row-major array of draws ``start, start + 1, ...`` reshaped to ``shape``."""
        return self.normals(start, int(np.prod(shape))).reshape(shape)


def normal_draw(stream: SeededStream, index: int) -> float:
    return float(stream.normals(index, 1)[0])
