"""Unconstrained minimum-variance weights and realized portfolio statistics."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import NotPositiveDefiniteError, ValidationError
from .moments import _as_rows

DEFAULT_ZERO_THRESHOLD = 1e-12


@dataclass
class WeightVector:
    weights: np.ndarray
    estimator: str = ""
    train_window: int | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1:
            raise ValidationError("weights must be a vector")
        if abs(self.weights.sum() - 1.0) > 1e-10:
            raise ValidationError(f"weights sum to {self.weights.sum()!r}, not 1")


@dataclass
class PortfolioStats:
    realized_volatility: float
    n_long: int
    n_short: int
    weight_min: float
    weight_max: float
    weight_std: float

    def to_dict(self):
        return asdict(self)


def min_variance_weights(precision, estimator="", train_window=None) -> WeightVector:
    """``w = J 1 / (1' J 1)``, taken straight from the precision matrix.

    Only the precision enters; the mean estimate plays no role.
    """
    precision = np.asarray(precision, dtype=float)
    if precision.ndim != 2 or precision.shape[0] != precision.shape[1]:
        raise ValidationError(f"precision must be square, got shape {precision.shape}")
    row_sums = precision.sum(axis=1)
    total = row_sums.sum()
    if not np.isfinite(total) or total <= 0:
        raise NotPositiveDefiniteError(f"1'J1 = {total!r} is not positive")
    w = row_sums / total
    # renormalize to wash out the rounding in the division
    w = w / w.sum()
    return WeightVector(w, estimator, train_window)


def _weights(weights):
    return weights.weights if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)


def portfolio_returns(weights, returns) -> np.ndarray:
    x = _as_rows(returns)
    w = _weights(weights)
    if x.shape[1] != w.shape[0]:
        raise ValidationError(f"{w.shape[0]} weights for {x.shape[1]} assets")
    return x @ w


def realized_stats(
    weights, test, zero_threshold=DEFAULT_ZERO_THRESHOLD, annualize=None
) -> PortfolioStats:
    """Out-of-sample statistics of a fixed-weight portfolio.

    Volatility is the population (divide-by-T) standard deviation of the
    per-period portfolio returns, multiplied by ``sqrt(annualize)`` when an
    annualization factor (e.g. 252) is given.
    """
    x = _as_rows(test)
    if x.shape[0] == 0:
        raise ValidationError("empty test slice")
    w = _weights(weights)
    r = portfolio_returns(w, x)
    vol = float(np.std(r))
    if annualize:
        vol *= float(np.sqrt(annualize))
    return PortfolioStats(
        realized_volatility=vol,
        n_long=int(np.sum(w > zero_threshold)),
        n_short=int(np.sum(w < -zero_threshold)),
        weight_min=float(w.min()),
        weight_max=float(w.max()),
        weight_std=float(w.std()),
    )


def expected_variance(weights, cov) -> float:
    """Model variance ``w S w'``."""
    w = _weights(weights)
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (w.shape[0], w.shape[0]):
        raise ValidationError(f"{w.shape[0]} weights for covariance of shape {cov.shape}")
    return float(w @ cov @ w)
