"""Elliptical log-likelihood scoring.

Both scores drop the additive normalization constant (k = 0), so only
differences between estimators or windows under the *same* model are
meaningful. The normal score keeps ``ln|J|`` with coefficient one and the
Mahalanobis term unhalved; the Student-t score uses ``ln|J| / 2`` and a
``nu - 2`` scale so that ``J`` is the inverse covariance. The two models are
therefore on different scales and are never compared with each other.

``n`` in the Student-t exponent is the dimension of the observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .moments import _as_rows, cholesky, logdet_spd, mahalanobis_sq

NORMAL = "normal"
STUDENT_T = "student-t"
MODELS = (NORMAL, STUDENT_T)
DEFAULT_NU = 3.0


def _check_nu(nu):
    if nu is None:
        raise ValidationError("student-t model requires degrees of freedom nu")
    if not nu > 2:
        raise ValidationError(f"degrees of freedom must exceed 2, got {nu}")


def normal_loglik(x, mean, precision) -> float:
    logdet = logdet_spd(precision, "precision")
    return logdet - mahalanobis_sq(x, mean, precision)


def student_t_loglik(x, mean, precision, nu=DEFAULT_NU) -> float:
    _check_nu(nu)
    logdet = logdet_spd(precision, "precision")
    n = np.asarray(mean).shape[0]
    d2 = mahalanobis_sq(x, mean, precision)
    return 0.5 * logdet - 0.5 * (n + nu) * np.log1p(d2 / (nu - 2.0))


@dataclass
class LikelihoodReport:
    per_observation: np.ndarray
    model: str
    estimator: str = ""
    window: int | None = None
    nu: float | None = None

    @property
    def total(self):
        return float(np.sum(self.per_observation))

    @property
    def mean(self):
        return self.total / len(self.per_observation)

    @property
    def count(self):
        return len(self.per_observation)

    @property
    def model_label(self):
        return f"student-t({self.nu:g})" if self.model == STUDENT_T else self.model

    def to_dict(self, per_observation=True):
        out = {
            "model": self.model_label,
            "estimator": self.estimator,
            "window": self.window,
            "k": 0.0,
            "count": self.count,
            "mean": self.mean,
            "total": self.total,
        }
        if per_observation:
            out["per_observation"] = [float(v) for v in self.per_observation]
        return out


def score_rows(x, mean, precision, model=NORMAL, nu=None) -> np.ndarray:
    """Vectorized per-row log-likelihoods (one Cholesky for all rows)."""
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}; expected one of {MODELS}")
    if model == STUDENT_T:
        _check_nu(nu)
    x = _as_rows(x)
    mean = np.asarray(mean, dtype=float)
    n = mean.shape[0]
    if x.shape[1] != n or np.shape(precision) != (n, n):
        raise ValidationError(
            f"dimension mismatch: rows have {x.shape[1]} columns, estimate has {n}"
        )
    lower = cholesky(precision, "precision")
    logdet = 2.0 * np.sum(np.log(np.diag(lower)))
    # d2 = |L' (x - mu)|^2 with J = L L'
    z = lower.T @ (x - mean).T
    d2 = np.einsum("ij,ij->j", z, z)
    if model == NORMAL:
        return logdet - d2
    return 0.5 * logdet - 0.5 * (n + nu) * np.log1p(d2 / (nu - 2.0))


def score_panel(rows, estimate, model=NORMAL, nu=None) -> LikelihoodReport:
    if model == STUDENT_T:
        _check_nu(nu)
    x = _as_rows(rows)
    if x.shape[0] < 1:
        raise ValidationError("nothing to score")
    values = score_rows(x, estimate.mean, estimate.precision, model, nu)
    return LikelihoodReport(
        per_observation=values,
        model=model,
        estimator=estimate.estimator,
        window=estimate.train_window,
        nu=nu if model == STUDENT_T else None,
    )
