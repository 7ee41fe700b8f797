"""Resampling experiment: random universes and trading days, nested train
windows ending at the trading day, and a fixed test slice right after it.

For every (window, estimator) cell the experiment fits the mean and the
precision, scores the train and test rows, forms the minimum-variance
portfolio and measures it on the test rows.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import ValidationError
from .likelihood import DEFAULT_NU, MODELS, NORMAL, STUDENT_T, score_panel
from .logo import fit_tmfg_logo
from .moments import ESTIMATORS, MAXIMUM_LIKELIHOOD, TMFG_LOGO, fit_maximum_likelihood
from .portfolio import DEFAULT_ZERO_THRESHOLD, PortfolioStats, min_variance_weights, realized_stats
from .tmfg import SCORES, SEEDS

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_WINDOWS = (101, 150, 250, 500, 1000, 1500)


@dataclass
class ExperimentConfig:
    n_resamplings: int = 100
    universe_size: int = 100
    train_windows: tuple = DEFAULT_WINDOWS
    test_length: int = 500
    model: str = NORMAL
    nu: float = DEFAULT_NU
    rng_seed: int | None = None
    fine_window_step: int | None = None
    fine_window_range: tuple = (125, 1500)
    allow_near_singular: bool = False
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD
    annualize: float | None = None
    tmfg_score: str = "sum"
    tmfg_seed: str = "heuristic"
    workers: int = 1

    def __post_init__(self):
        self.train_windows = tuple(int(w) for w in self.train_windows)
        self.fine_window_range = tuple(int(w) for w in self.fine_window_range)
        self.validate()

    @property
    def windows(self):
        """Train windows in ascending order, including the fine sweep if enabled."""
        ws = set(self.train_windows)
        if self.fine_window_step:
            lo, hi = self.fine_window_range
            ws.update(range(lo, hi + 1, self.fine_window_step))
        return tuple(sorted(ws))

    def validate(self, n_tickers=None):
        if self.n_resamplings < 1:
            raise ValidationError("n_resamplings must be at least 1")
        if self.test_length < 1:
            raise ValidationError("test_length must be at least 1")
        if self.universe_size < 2:
            raise ValidationError("universe_size must be at least 2")
        if not self.train_windows:
            raise ValidationError("train_windows is empty")
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.model == STUDENT_T and not self.nu > 2:
            raise ValidationError(f"nu must exceed 2, got {self.nu}")
        if self.fine_window_step is not None:
            lo, hi = self.fine_window_range
            if self.fine_window_step < 1 or lo < 2 or hi < lo:
                raise ValidationError("invalid fine window sweep")
        if self.tmfg_score not in SCORES or self.tmfg_seed not in SEEDS:
            raise ValidationError("invalid TMFG options")
        if min(self.windows) < 2:
            raise ValidationError("train windows must contain at least 2 rows")
        short = [w for w in self.windows if w < self.universe_size + 1]
        if short and not self.allow_near_singular:
            raise ValidationError(
                f"train windows {short} have fewer than universe_size + 1 = "
                f"{self.universe_size + 1} rows; set allow_near_singular to run them"
            )
        if n_tickers is not None and self.universe_size > n_tickers:
            raise ValidationError(
                f"universe_size {self.universe_size} exceeds the {n_tickers} available tickers"
            )

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["train_windows"] = list(self.train_windows)
        out["fine_window_range"] = list(self.fine_window_range)
        return out

    @classmethod
    def from_mapping(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            if path.suffix.lower() == ".json":
                data = json.loads(text)
            else:
                data = tomllib.loads(text)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ValidationError(f"cannot parse config {path}: {exc}") from None
        return cls.from_mapping(data)


@dataclass
class LikelihoodSummary:
    mean: float
    total: float
    count: int
    per_observation: np.ndarray | None = None

    @classmethod
    def from_report(cls, report, keep_series):
        series = np.asarray(report.per_observation) if keep_series else None
        return cls(report.mean, report.total, report.count, series)

    def to_dict(self):
        out = {"mean": self.mean, "total": self.total, "count": self.count}
        if self.per_observation is not None:
            out["per_observation"] = [float(v) for v in self.per_observation]
        return out

    @classmethod
    def from_dict(cls, data):
        series = data.get("per_observation")
        return cls(
            data["mean"], data["total"], data["count"],
            None if series is None else np.asarray(series, dtype=float),
        )


@dataclass
class Cell:
    window: int
    estimator: str
    failed: bool = False
    error: str | None = None
    in_sample: LikelihoodSummary | None = None
    out_of_sample: LikelihoodSummary | None = None
    weights: np.ndarray | None = None
    stats: PortfolioStats | None = None

    def to_dict(self):
        return {
            "window": self.window,
            "estimator": self.estimator,
            "failed": self.failed,
            "error": self.error,
            "in_sample": None if self.in_sample is None else self.in_sample.to_dict(),
            "out_of_sample": None if self.out_of_sample is None else self.out_of_sample.to_dict(),
            "weights": None if self.weights is None else [float(w) for w in self.weights],
            "stats": None if self.stats is None else self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            window=int(data["window"]),
            estimator=data["estimator"],
            failed=bool(data["failed"]),
            error=data.get("error"),
            in_sample=None if data.get("in_sample") is None else LikelihoodSummary.from_dict(data["in_sample"]),
            out_of_sample=None if data.get("out_of_sample") is None else LikelihoodSummary.from_dict(data["out_of_sample"]),
            weights=None if data.get("weights") is None else np.asarray(data["weights"], dtype=float),
            stats=None if data.get("stats") is None else PortfolioStats(**data["stats"]),
        )


@dataclass
class ResampleRecord:
    resampling_id: int
    trading_day: dt.date
    trading_index: int
    tickers: list
    model: str
    cells: list = field(default_factory=list)

    def cell(self, window, estimator):
        for c in self.cells:
            if c.window == window and c.estimator == estimator:
                return c
        raise KeyError((window, estimator))

    def to_dict(self):
        return {
            "resampling_id": self.resampling_id,
            "trading_day": self.trading_day.isoformat(),
            "trading_index": self.trading_index,
            "model": self.model,
            "tickers": list(self.tickers),
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)

    @classmethod
    def from_dict(cls, data):
        return cls(
            resampling_id=int(data["resampling_id"]),
            trading_day=dt.date.fromisoformat(data["trading_day"]),
            trading_index=int(data["trading_index"]),
            tickers=list(data["tickers"]),
            model=data["model"],
            cells=[Cell.from_dict(c) for c in data["cells"]],
        )


def write_records(records, path):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


def read_records(path):
    with Path(path).open(encoding="utf-8") as fh:
        return [ResampleRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


_FITTERS = {
    MAXIMUM_LIKELIHOOD: lambda train, cfg: fit_maximum_likelihood(train),
    TMFG_LOGO: lambda train, cfg: fit_tmfg_logo(train, score=cfg.tmfg_score, seed=cfg.tmfg_seed),
}


def _run_cell(train, test, window, estimator, config):
    nu = config.nu if config.model == STUDENT_T else None
    try:
        est = _FITTERS[estimator](train, config)
        ins = score_panel(train, est, config.model, nu)
        outs = score_panel(test, est, config.model, nu)
        weights = min_variance_weights(est.precision, estimator, window)
        st = realized_stats(weights, test, config.zero_threshold, config.annualize)
    except (np.linalg.LinAlgError, ValidationError) as exc:
        return Cell(window, estimator, failed=True, error=f"{type(exc).__name__}: {exc}")
    return Cell(
        window,
        estimator,
        in_sample=LikelihoodSummary.from_report(ins, keep_series=False),
        out_of_sample=LikelihoodSummary.from_report(outs, keep_series=True),
        weights=weights.weights,
        stats=st,
    )


def admissible_days(n_rows, config):
    """Row indices ``d`` with ``max(windows)`` rows before and ``test_length`` from ``d`` on."""
    lo = max(config.windows)
    hi = n_rows - config.test_length
    if hi < lo:
        raise ValidationError(
            f"no admissible trading day: need {lo} train rows plus {config.test_length} "
            f"test rows, panel has {n_rows}"
        )
    return lo, hi


def split_rows(day, window, test_length):
    """Train rows are the ``window`` rows before ``day``; test rows start at ``day``."""
    return slice(day - window, day), slice(day, day + test_length)


def run_resampling(panel, config, resampling_id, seed_seq) -> ResampleRecord:
    rng = np.random.default_rng(seed_seq)
    n_rows, n_tickers = panel.returns.shape
    lo, hi = admissible_days(n_rows, config)
    universe = np.sort(rng.choice(n_tickers, size=config.universe_size, replace=False))
    day = int(rng.integers(lo, hi, endpoint=True))
    x = panel.returns[:, universe]
    record = ResampleRecord(
        resampling_id=resampling_id,
        trading_day=panel.dates[day - 1],
        trading_index=day,
        tickers=[panel.tickers[i] for i in universe],
        model=config.model if config.model == NORMAL else f"student-t({config.nu:g})",
    )
    for window in config.windows:
        train_rows, test_rows = split_rows(day, window, config.test_length)
        train, test = x[train_rows], x[test_rows]
        for estimator in ESTIMATORS:
            record.cells.append(_run_cell(train, test, window, estimator, config))
    return record


def _child_seeds(config):
    if config.rng_seed is None:
        raise ValidationError("rng_seed must be set for a reproducible run")
    return np.random.SeedSequence(config.rng_seed).spawn(config.n_resamplings)


def _run_one(args):
    return run_resampling(*args)


def run_experiment(panel, config: ExperimentConfig) -> list:
    """Run every resampling; records come back ordered by resampling id.

    Each resampling draws its universe and trading day from its own child
    seed, so results do not depend on ``config.workers``.
    """
    config.validate(n_tickers=panel.returns.shape[1])
    admissible_days(panel.returns.shape[0], config)
    jobs = [(panel, config, rid, seq) for rid, seq in enumerate(_child_seeds(config))]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]


# --- aggregation -----------------------------------------------------------


def box_stats(values):
    """Quartiles, 1.5 IQR whiskers and outliers of a sample."""
    v = np.sort(np.asarray(values, dtype=float))
    q25, median, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    iqr = q75 - q25
    inside = v[(v >= q25 - 1.5 * iqr) & (v <= q75 + 1.5 * iqr)]
    return {
        "count": int(v.size),
        "mean": float(v.mean()),
        "q25": float(q25),
        "median": float(median),
        "q75": float(q75),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(o) for o in v[(v < q25 - 1.5 * iqr) | (v > q75 + 1.5 * iqr)]],
    }


def curve_box_stats(matrix):
    """Column-wise :func:`box_stats` of a resamplings x positions matrix, without outlier lists."""
    m = np.asarray(matrix, dtype=float)
    q25, median, q75 = np.quantile(m, [0.25, 0.5, 0.75], axis=0)
    iqr = q75 - q25
    inside = (m >= q25 - 1.5 * iqr) & (m <= q75 + 1.5 * iqr)
    return {
        "mean": m.mean(axis=0),
        "q25": q25,
        "median": median,
        "q75": q75,
        "whisker_low": np.where(inside, m, np.inf).min(axis=0),
        "whisker_high": np.where(inside, m, -np.inf).max(axis=0),
    }


def trend_t_stat(curve):
    """t-statistic of the least-squares slope of ``curve`` against position."""
    y = np.asarray(curve, dtype=float)
    fit = stats.linregress(np.arange(1, y.size + 1), y)
    return float(fit.slope / fit.stderr) if fit.stderr > 0 else 0.0


@dataclass
class ExperimentReport:
    model: str
    n_records: int
    windows: tuple
    cells: list
    curves: dict
    weight_histograms: dict
    n_failed: int

    def cell(self, window, estimator):
        for c in self.cells:
            if c["window"] == window and c["estimator"] == estimator:
                return c
        raise KeyError((window, estimator))

    def to_dict(self):
        return {
            "model": self.model,
            "k": 0.0,
            "n_records": self.n_records,
            "n_failed": self.n_failed,
            "windows": list(self.windows),
            "cells": self.cells,
            "curves": {
                f"{w}|{e}": {k: [float(x) for x in v] for k, v in curve.items()}
                for (w, e), curve in self.curves.items()
            },
            "weight_histograms": {str(w): h for w, h in self.weight_histograms.items()},
        }


def _summary(values):
    v = np.asarray(values, dtype=float)
    return {
        "mean": float(v.mean()),
        "std": float(v.std()),
        "q05": float(np.quantile(v, 0.05)),
        "q25": float(np.quantile(v, 0.25)),
        "median": float(np.quantile(v, 0.5)),
        "q75": float(np.quantile(v, 0.75)),
        "q95": float(np.quantile(v, 0.95)),
    }


def aggregate(records, histogram_bins=50) -> ExperimentReport:
    if not records:
        raise ValidationError("no records to aggregate")
    windows = sorted({c.window for r in records for c in r.cells})
    cells, curves, histograms = [], {}, {}
    n_failed = 0
    for window in windows:
        pooled = {}
        for estimator in ESTIMATORS:
            ok = []
            failed = 0
            for r in records:
                try:
                    c = r.cell(window, estimator)
                except KeyError:
                    continue
                if c.failed:
                    failed += 1
                else:
                    ok.append(c)
            n_failed += failed
            entry = {"window": window, "estimator": estimator, "n_ok": len(ok), "n_failed": failed}
            if ok:
                w = np.concatenate([c.weights for c in ok])
                pooled[estimator] = w
                series = np.vstack([c.out_of_sample.per_observation for c in ok])
                curve = curve_box_stats(series)
                curves[(window, estimator)] = curve
                entry.update(
                    in_sample_mean_loglik=_summary([c.in_sample.mean for c in ok]),
                    in_sample_total_loglik=_summary([c.in_sample.total for c in ok]),
                    out_of_sample_mean_loglik=_summary([c.out_of_sample.mean for c in ok]),
                    out_of_sample_total_loglik=_summary([c.out_of_sample.total for c in ok]),
                    realized_volatility=box_stats([c.stats.realized_volatility for c in ok]),
                    n_long_mean=float(np.mean([c.stats.n_long for c in ok])),
                    n_short_mean=float(np.mean([c.stats.n_short for c in ok])),
                    weights={
                        "mean": float(w.mean()),
                        "std": float(w.std()),
                        "min": float(w.min()),
                        "max": float(w.max()),
                        "max_abs": float(np.abs(w).max()),
                    },
                    curve_slope_t=trend_t_stat(curve["mean"]),
                )
            cells.append(entry)
        if pooled:
            edges = np.histogram_bin_edges(np.concatenate(list(pooled.values())), bins=histogram_bins)
            histograms[window] = {
                "edges": [float(e) for e in edges],
                **{est: [int(k) for k in np.histogram(w, bins=edges)[0]] for est, w in pooled.items()},
            }
    return ExperimentReport(
        model=records[0].model,
        n_records=len(records),
        windows=tuple(windows),
        cells=cells,
        curves=curves,
        weight_histograms=histograms,
        n_failed=n_failed,
    )
