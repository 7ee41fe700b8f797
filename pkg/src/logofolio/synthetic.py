"""Seeded synthetic return panels with known ground truth."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .logo import logo_precision
from .market_data import ReturnsPanel
from .moments import correlation_from_covariance, inverse_spd
from .tmfg import FilteredGraph, build_tmfg

STRUCTURES = ("iid-normal", "sparse-chordal", "regime-switch")
START_DATE = dt.date(2000, 1, 3)


@dataclass
class ChordalModel:
    mean: np.ndarray
    covariance: np.ndarray
    precision: np.ndarray
    graph: FilteredGraph


def business_days(count, start=START_DATE):
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(count), roll="forward")
    return [d.item() for d in days]


def sparse_chordal_model(n, rng, n_factors=3) -> ChordalModel:
    """Gaussian model whose precision is supported on a TMFG.

    A factor-model correlation matrix is filtered with TMFG and LoGo; the
    resulting precision, rescaled by daily volatilities between 1% and 3%,
    is the ground truth. Its off-support entries are exactly zero.
    """
    loadings = rng.normal(0.4, 0.3, size=(n, n_factors))
    idio = rng.uniform(0.3, 1.0, size=n)
    corr = correlation_from_covariance(loadings @ loadings.T + np.diag(idio))
    graph = build_tmfg(corr)
    unit_precision = logo_precision(corr, graph).matrix
    vol = rng.uniform(0.01, 0.03, size=n)
    precision = unit_precision / np.outer(vol, vol)
    covariance = inverse_spd(precision, "synthetic precision")
    mean = rng.normal(3e-4, 2e-4, size=n)
    return ChordalModel(mean, covariance, precision, graph)


def _draw(model, size, rng):
    lower = np.linalg.cholesky(model.covariance)
    z = rng.standard_normal((size, model.mean.shape[0]))
    return model.mean + z @ lower.T


def make_synthetic_panel(
    n, T, structure="iid-normal", rng_seed=0, *, scale=1.0, switch_at=None, start=START_DATE
) -> ReturnsPanel:
    """Draw a T x n returns panel.

    ``iid-normal`` is independent N(0, scale^2) noise. ``sparse-chordal`` draws
    from :func:`sparse_chordal_model`. ``regime-switch`` concatenates two
    independently parameterized sparse-chordal segments, switching at row
    ``switch_at`` (default ``T // 2``).
    """
    if structure not in STRUCTURES:
        raise ValidationError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")
    min_n = 1 if structure == "iid-normal" else 4
    if n < min_n or T < 2:
        raise ValidationError(f"{structure} needs n >= {min_n} and T >= 2, got n={n}, T={T}")
    rng = np.random.default_rng(rng_seed)
    if structure == "iid-normal":
        x = scale * rng.standard_normal((T, n))
    elif structure == "sparse-chordal":
        x = _draw(sparse_chordal_model(n, rng), T, rng)
    else:
        cut = T // 2 if switch_at is None else int(switch_at)
        if not 0 < cut < T:
            raise ValidationError(f"switch_at must lie strictly inside (0, {T}), got {cut}")
        first, second = sparse_chordal_model(n, rng), sparse_chordal_model(n, rng)
        x = np.vstack([_draw(first, cut, rng), _draw(second, T - cut, rng)])
    width = max(3, len(str(n - 1)))
    tickers = [f"S{i:0{width}d}" for i in range(n)]
    return ReturnsPanel(business_days(T, start), tickers, x)
