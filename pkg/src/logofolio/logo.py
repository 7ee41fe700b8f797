"""LoGo sparse precision on a TMFG support.

The precision is the sum of the inverted clique covariance blocks minus the
sum of the inverted separator blocks, each embedded at its own indices.
For a chordal support this is the maximum-likelihood precision of the
decomposable Gaussian model: its inverse reproduces the input covariance
on every clique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefiniteError, ValidationError
from .moments import (
    TMFG_LOGO,
    MomentEstimate,
    _as_rows,
    correlation_from_covariance,
    inverse_spd,
    ml_covariance,
    sample_mean,
    symmetrize,
)
from .tmfg import FilteredGraph, build_tmfg


@dataclass(frozen=True)
class SparsePrecision:
    matrix: np.ndarray
    support: FilteredGraph

    @property
    def n(self):
        return self.matrix.shape[0]


def _block_inverse(cov, idx, kind):
    block = cov[np.ix_(idx, idx)]
    try:
        return inverse_spd(block, f"{kind} {tuple(idx)} covariance block")
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(f"singular {kind} {tuple(idx)}: {exc}") from None


def logo_precision(cov, graph: FilteredGraph) -> SparsePrecision:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValidationError(f"covariance must be square, got shape {cov.shape}")
    if graph.n != cov.shape[0]:
        raise ValidationError(f"graph has {graph.n} vertices but covariance is {cov.shape[0]}x{cov.shape[0]}")
    j = np.zeros_like(cov)
    for clique in graph.cliques:
        idx = list(clique)
        j[np.ix_(idx, idx)] += _block_inverse(cov, idx, "clique")
    for sep in graph.separators:
        idx = list(sep)
        j[np.ix_(idx, idx)] -= _block_inverse(cov, idx, "separator")
    return SparsePrecision(symmetrize(j), graph)


def logo_covariance(precision: SparsePrecision) -> np.ndarray:
    """Dense covariance implied by a LoGo precision."""
    return inverse_spd(precision.matrix, "LoGo precision")


def fit_tmfg_logo(returns, score="sum", seed="heuristic") -> MomentEstimate:
    """Mean, TMFG support on sample correlations, and LoGo precision."""
    x = _as_rows(returns)
    labels = getattr(returns, "tickers", None)
    cov = ml_covariance(x)
    graph = build_tmfg(correlation_from_covariance(cov, labels), score=score, seed=seed)
    sparse = logo_precision(cov, graph)
    return MomentEstimate(
        mean=sample_mean(x),
        covariance=logo_covariance(sparse),
        precision=sparse.matrix,
        estimator=TMFG_LOGO,
        train_window=x.shape[0],
        graph=graph,
    )
