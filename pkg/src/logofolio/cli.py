"""Command-line entry point.

    logofolio ingest --prices prices.csv --out returns.csv
    logofolio estimate --returns returns.csv --window 250 --estimator tmfg-logo --out est/
    logofolio experiment --returns returns.csv --config exp.toml --out run/ --seed 1
    logofolio report --records run/records.jsonl --out run/
    logofolio synth --n 150 --T 3000 --structure sparse-chordal --seed 1 --out returns.csv

Exit codes: 0 success, 2 I/O error, 3 validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import os
import secrets
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .experiment import ExperimentConfig, aggregate, read_records, run_experiment, write_records
from .logo import fit_tmfg_logo
from .market_data import DEFAULT_MAX_ABS_RETURN, load_prices, load_returns, save_returns, screen_universe, to_returns
from .moments import fit_maximum_likelihood
from .report import TABLES, write_aggregate, write_tables
from .synthetic import STRUCTURES, make_synthetic_panel

logger = logging.getLogger("logofolio")

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4
ESTIMATOR_FLAGS = {"ml": "maximum-likelihood", "tmfg-logo": "tmfg-logo"}
RECORDS_FILE = "records.jsonl"
MANIFEST_FILE = "manifest.json"


def _sha256(path):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now():
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _write_matrix(path, labels, matrix):
    matrix = np.atleast_2d(matrix)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(labels) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_ingest(args):
    prices = load_prices(args.prices)
    screened = screen_universe(prices, args.max_abs_return, require_full_history=not args.allow_gaps)
    returns = to_returns(screened)
    save_returns(returns, args.out)
    print(f"kept {len(screened.tickers)} of {len(prices.tickers)} tickers")
    dropped = sorted(set(prices.tickers) - set(screened.tickers))
    if dropped:
        logger.info("dropped: %s", ", ".join(dropped))
    return EXIT_OK


def cmd_estimate(args):
    panel = load_returns(args.returns)
    end = dt.date.fromisoformat(args.end_date) if args.end_date else panel.dates[-1]
    stop = sum(1 for d in panel.dates if d <= end)
    if args.window > stop:
        raise ValidationError(
            f"insufficient history: window needs {args.window} rows, {stop} available up to {end.isoformat()}"
        )
    train = panel.rows(stop - args.window, stop)
    estimator = ESTIMATOR_FLAGS[args.estimator]
    est = fit_maximum_likelihood(train) if estimator == "maximum-likelihood" else fit_tmfg_logo(train)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels = list(panel.tickers)
    # stage everything, then move into place, so a failure leaves no partial output
    with tempfile.TemporaryDirectory(dir=out) as tmp:
        tmp = Path(tmp)
        _write_matrix(tmp / "mean.csv", labels, est.mean)
        _write_matrix(tmp / "covariance.csv", labels, est.covariance)
        _write_matrix(tmp / "precision.csv", labels, est.precision)
        meta = {
            "estimator": estimator,
            "window": args.window,
            "first_date": train.dates[0].isoformat(),
            "end_date": train.dates[-1].isoformat(),
            "tickers": labels,
        }
        (tmp / "estimate.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
        if est.graph is not None:
            (tmp / "graph.json").write_text(est.graph.to_json() + "\n", encoding="utf-8")
        for f in sorted(tmp.iterdir()):
            os.replace(f, out / f.name)
    print(f"wrote {estimator} estimate over {args.window} rows ending {train.dates[-1].isoformat()} to {out}")
    return EXIT_OK


def _experiment_config(args):
    data = {}
    if args.config:
        data = ExperimentConfig.from_file(args.config).to_dict()
    for flag, key in (("seed", "rng_seed"), ("model", "model"), ("nu", "nu"), ("annualize", "annualize"), ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    if data.get("rng_seed") is None:
        data["rng_seed"] = secrets.randbits(63)
        logger.info("no seed given; generated %d", data["rng_seed"])
    return ExperimentConfig.from_mapping(data)


def _emit_report(records, out):
    report = aggregate(records)
    paths = [write_aggregate(report, out), *write_tables(report, out)]
    return report, paths


def cmd_experiment(args):
    panel = load_returns(args.returns)
    config = _experiment_config(args)
    config.validate(n_tickers=len(panel.tickers))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "artifact_version": __version__,
        "command": "experiment",
        "config": config.to_dict(),
        "rng_seed": config.rng_seed,
        "input": {"path": str(args.returns), "sha256": _sha256(args.returns)},
        "started_at": _now(),
        "outputs": [RECORDS_FILE, "aggregate.json", *TABLES],
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    records = run_experiment(panel, config)
    write_records(records, out / RECORDS_FILE)
    report, _ = _emit_report(records, out)
    print(f"{len(records)} resamplings x {len(config.windows)} windows; {report.n_failed} failed cells; output in {out}")
    return EXIT_OK


def cmd_report(args):
    records = read_records(args.records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report, paths = _emit_report(records, out)
    print(f"aggregated {report.n_records} records into {len(paths)} files in {out}")
    return EXIT_OK


def cmd_synth(args):
    panel = make_synthetic_panel(
        args.n, args.T, args.structure, args.seed, scale=args.scale, switch_at=args.switch_at
    )
    save_returns(panel, args.out)
    print(f"wrote {args.T} x {args.n} {args.structure} returns to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="logofolio", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="screen a price CSV and write simple returns")
    p.add_argument("--prices", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-abs-return", type=float, default=DEFAULT_MAX_ABS_RETURN)
    p.add_argument("--allow-gaps", action="store_true", help="keep tickers with missing cells")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate", help="fit mean, covariance and precision on one window")
    p.add_argument("--returns", required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--end-date", help="last train date (ISO-8601); defaults to the last row")
    p.add_argument("--estimator", choices=sorted(ESTIMATOR_FLAGS), default="tmfg-logo")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run the resampling experiment")
    p.add_argument("--returns", required=True)
    p.add_argument("--config", help="TOML or JSON file with ExperimentConfig keys")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--model", choices=["normal", "student-t"])
    p.add_argument("--nu", type=float)
    p.add_argument("--annualize", type=float, help="annualization factor for volatility, e.g. 252")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="re-aggregate a records file")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write a seeded synthetic returns panel")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--structure", choices=STRUCTURES, default="sparse-chordal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--switch-at", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    # LinAlgError subclasses ValueError, so it is caught first
    try:
        return args.func(args)
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
