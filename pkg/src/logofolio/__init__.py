"""Sparse TMFG-LoGo precision estimation and minimum-variance portfolios."""

from .errors import NotPositiveDefiniteError, ParseError, ValidationError
from .market_data import PricePanel, ReturnsPanel, load_prices, load_returns, screen_universe, to_returns
from .moments import (
    MomentEstimate,
    correlation_from_covariance,
    fit_maximum_likelihood,
    mahalanobis_sq,
    ml_covariance,
    sample_mean,
)
from .tmfg import FilteredGraph, build_tmfg, gain, verify_chordal
from .logo import SparsePrecision, fit_tmfg_logo, logo_covariance, logo_precision
from .likelihood import LikelihoodReport, normal_loglik, score_panel, student_t_loglik
from .portfolio import PortfolioStats, WeightVector, expected_variance, min_variance_weights, realized_stats

__version__ = "0.1.0"

__all__ = [
    "NotPositiveDefiniteError",
    "ParseError",
    "ValidationError",
    "PricePanel",
    "ReturnsPanel",
    "load_prices",
    "load_returns",
    "screen_universe",
    "to_returns",
    "MomentEstimate",
    "correlation_from_covariance",
    "fit_maximum_likelihood",
    "mahalanobis_sq",
    "ml_covariance",
    "sample_mean",
    "FilteredGraph",
    "build_tmfg",
    "gain",
    "verify_chordal",
    "SparsePrecision",
    "fit_tmfg_logo",
    "logo_covariance",
    "logo_precision",
    "LikelihoodReport",
    "normal_loglik",
    "score_panel",
    "student_t_loglik",
    "PortfolioStats",
    "WeightVector",
    "expected_variance",
    "min_variance_weights",
    "realized_stats",
]
