"""Sample moments and the dense linear algebra shared by the estimators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import NotPositiveDefiniteError, ValidationError

MAXIMUM_LIKELIHOOD = "maximum-likelihood"
TMFG_LOGO = "tmfg-logo"
ESTIMATORS = (MAXIMUM_LIKELIHOOD, TMFG_LOGO)


def _as_rows(returns):
    x = getattr(returns, "returns", returns)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValidationError("returns must be a 2-D array (rows = observations)")
    return x


def symmetrize(a):
    return 0.5 * (a + a.T)


def sample_mean(returns) -> np.ndarray:
    x = _as_rows(returns)
    if x.shape[0] < 1:
        raise ValidationError("cannot take the mean of an empty slice")
    return x.mean(axis=0)


def ml_covariance(returns) -> np.ndarray:
    """Maximum-likelihood covariance (divisor T, not T-1)."""
    x = _as_rows(returns)
    t = x.shape[0]
    if t < 2:
        raise ValidationError(f"need at least 2 observations for a covariance, got {t}")
    centered = x - x.mean(axis=0)
    return symmetrize(centered.T @ centered / t)


def correlation_from_covariance(cov, labels=None) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    var = np.diag(cov)
    bad = np.flatnonzero(~(var > 0))
    if bad.size:
        i = int(bad[0])
        name = labels[i] if labels is not None else i
        raise ValidationError(f"asset {name} has zero variance")
    sd = np.sqrt(var)
    corr = symmetrize(cov / np.outer(sd, sd))
    np.fill_diagonal(corr, 1.0)
    return corr


def mahalanobis_sq(x, mean, precision) -> float:
    """Quadratic form ``(x - mean) J (x - mean)'``."""
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    precision = np.asarray(precision, dtype=float)
    n = mean.shape[0]
    if x.shape != (n,) or precision.shape != (n, n):
        raise ValidationError(
            f"dimension mismatch: x {x.shape}, mean {mean.shape}, precision {precision.shape}"
        )
    d = x - mean
    return float(d @ precision @ d)


def cholesky(matrix, what="matrix"):
    """Lower Cholesky factor; raises :class:`NotPositiveDefiniteError`."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise NotPositiveDefiniteError(f"{what} has non-finite entries")
    try:
        lower = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{what} is not positive definite") from None
    # a pivot at rounding level means the matrix is numerically singular
    pivots = np.diag(lower) ** 2
    if pivots.size and pivots.min() <= pivots.max() * pivots.size * np.finfo(float).eps:
        raise NotPositiveDefiniteError(f"{what} is numerically singular")
    return lower


def inverse_spd(matrix, what="matrix") -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix via Cholesky."""
    lower = cholesky(matrix, what)
    inv = linalg.cho_solve((lower, True), np.eye(lower.shape[0]))
    return symmetrize(inv)


def logdet_spd(matrix, what="matrix") -> float:
    lower = cholesky(matrix, what)
    return float(2.0 * np.sum(np.log(np.diag(lower))))


@dataclass
class MomentEstimate:
    mean: np.ndarray
    covariance: np.ndarray
    precision: np.ndarray
    estimator: str
    train_window: int
    graph: object = field(default=None, repr=False)

    @property
    def n(self):
        return self.mean.shape[0]


def fit_maximum_likelihood(returns) -> MomentEstimate:
    """Sample mean, ML covariance and its dense inverse.

    Raises :class:`NotPositiveDefiniteError` when the covariance is singular
    (T <= n or collinear columns); there is no pseudo-inverse fallback.
    """
    x = _as_rows(returns)
    cov = ml_covariance(x)
    precision = inverse_spd(cov, "maximum-likelihood covariance")
    return MomentEstimate(sample_mean(x), cov, precision, MAXIMUM_LIKELIHOOD, x.shape[0])
