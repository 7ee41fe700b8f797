"""Write aggregate JSON and the CSV plot-data tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .moments import ESTIMATORS

AGGREGATE_FILE = "aggregate.json"
TABLES = (
    "likelihood_vs_window.csv",
    "volatility_vs_window.csv",
    "positions_vs_window.csv",
    "weight_histogram.csv",
    "per_observation_likelihood.csv",
)


def _fmt(v):
    return repr(float(v))


def _writer(path):
    fh = Path(path).open("w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_aggregate(report, out_dir):
    path = Path(out_dir) / AGGREGATE_FILE
    path.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


def write_tables(report, out_dir):
    out_dir = Path(out_dir)
    ok = [c for c in report.cells if c["n_ok"]]
    written = []

    path = out_dir / "likelihood_vs_window.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["window", "estimator", "sample", "aggregate", "mean", "std", "q05", "q25", "median", "q75", "q95", "n_ok", "n_failed"])
        for c in ok:
            for sample in ("in_sample", "out_of_sample"):
                for agg in ("mean", "total"):
                    s = c[f"{sample}_{agg}_loglik"]
                    w.writerow([c["window"], c["estimator"], sample, agg,
                                *(_fmt(s[k]) for k in ("mean", "std", "q05", "q25", "median", "q75", "q95")),
                                c["n_ok"], c["n_failed"]])
    written.append(path)

    path = out_dir / "volatility_vs_window.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["window", "estimator", "mean", "q25", "median", "q75", "whisker_low", "whisker_high", "n_outliers", "outliers"])
        for c in ok:
            b = c["realized_volatility"]
            w.writerow([c["window"], c["estimator"],
                        *(_fmt(b[k]) for k in ("mean", "q25", "median", "q75", "whisker_low", "whisker_high")),
                        len(b["outliers"]), " ".join(_fmt(o) for o in b["outliers"])])
    written.append(path)

    path = out_dir / "positions_vs_window.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["window", "estimator", "n_long_mean", "n_short_mean", "weight_std", "weight_min", "weight_max", "weight_max_abs"])
        for c in ok:
            ws = c["weights"]
            w.writerow([c["window"], c["estimator"], _fmt(c["n_long_mean"]), _fmt(c["n_short_mean"]),
                        _fmt(ws["std"]), _fmt(ws["min"]), _fmt(ws["max"]), _fmt(ws["max_abs"])])
    written.append(path)

    path = out_dir / "weight_histogram.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["window", "bin_left", "bin_right", *ESTIMATORS])
        for window, hist in report.weight_histograms.items():
            edges = hist["edges"]
            for k in range(len(edges) - 1):
                w.writerow([window, _fmt(edges[k]), _fmt(edges[k + 1]),
                            *(hist[e][k] if e in hist else "" for e in ESTIMATORS)])
    written.append(path)

    path = out_dir / "per_observation_likelihood.csv"
    fh, w = _writer(path)
    keys = ("mean", "q25", "median", "q75", "whisker_low", "whisker_high")
    with fh:
        w.writerow(["window", "estimator", "position", *keys])
        for (window, estimator), curve in report.curves.items():
            for pos in range(len(curve["mean"])):
                w.writerow([window, estimator, pos + 1, *(_fmt(curve[k][pos]) for k in keys)])
    written.append(path)
    return written
