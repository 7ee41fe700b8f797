"""Price panel ingestion, universe screening and simple returns.

The on-disk format is a wide CSV: a ``date`` column with ISO-8601 dates
followed by one column per ticker. Empty cells are read as missing values
and survive loading; :func:`screen_universe` decides what to do with them.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

DEFAULT_MAX_ABS_RETURN = 0.5


def _check_dates(dates):
    for prev, cur in zip(dates, dates[1:]):
        if cur == prev:
            raise ValidationError(f"duplicate date {cur.isoformat()}")
        if cur < prev:
            raise ValidationError(
                f"dates not strictly increasing ({prev.isoformat()} then {cur.isoformat()})"
            )


@dataclass(frozen=True)
class PricePanel:
    """T x n closing prices; NaN marks a missing cell."""

    dates: tuple
    tickers: tuple
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "prices", prices)
        if prices.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers"
            )
        if len(set(self.tickers)) != len(self.tickers):
            raise ValidationError("duplicate ticker")
        _check_dates(self.dates)
        observed = prices[~np.isnan(prices)]
        if np.any(observed <= 0) or np.any(np.isinf(observed)):
            raise ValidationError("non-positive price")

    @property
    def shape(self):
        return self.prices.shape

    def select(self, tickers):
        idx = [self.tickers.index(t) for t in tickers]
        return PricePanel(self.dates, tuple(tickers), self.prices[:, idx])


@dataclass(frozen=True)
class ReturnsPanel:
    """(T-1) x n simple returns aligned with the later date of each pair."""

    dates: tuple
    tickers: tuple
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "returns", returns)
        if returns.ndim != 2 or returns.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError(
                f"returns matrix shape {returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers"
            )
        _check_dates(self.dates)

    @property
    def shape(self):
        return self.returns.shape

    def __len__(self):
        return len(self.dates)

    def rows(self, start, stop):
        return ReturnsPanel(self.dates[start:stop], self.tickers, self.returns[start:stop])

    def columns(self, index):
        index = list(index)
        return ReturnsPanel(self.dates, [self.tickers[i] for i in index], self.returns[:, index])


def _parse_date(text, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"invalid ISO-8601 date {text!r}", line) from None


def _read_wide_csv(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if len(header) < 2 or header[0].strip().lower() != "date":
            raise ParseError("header must be 'date' followed by at least one ticker", 1)
        tickers = [h.strip() for h in header[1:]]
        if any(not t for t in tickers):
            raise ParseError("empty ticker name in header", 1)
        if len(set(tickers)) != len(tickers):
            raise ParseError("duplicate ticker in header", 1)
        dates, rows = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            dates.append(_parse_date(row[0], line))
            values = []
            for cell in row[1:]:
                cell = cell.strip()
                if not cell:
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"cannot parse number {cell!r}", line) from None
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", 2)
    return dates, tickers, np.array(rows, dtype=float)


def load_prices(path) -> PricePanel:
    """Read a wide-format price CSV into a :class:`PricePanel`."""
    dates, tickers, prices = _read_wide_csv(path)
    return PricePanel(dates, tickers, prices)


def load_returns(path) -> ReturnsPanel:
    """Read a returns file written by :func:`save_returns`."""
    dates, tickers, returns = _read_wide_csv(path)
    if np.isnan(returns).any():
        raise ValidationError("returns file contains missing cells")
    return ReturnsPanel(dates, tickers, returns)


def _write_wide_csv(path, dates, tickers, values):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *tickers])
        for d, row in zip(dates, values):
            writer.writerow([d.isoformat(), *(repr(float(v)) for v in row)])


def save_prices(panel: PricePanel, path):
    _write_wide_csv(path, panel.dates, panel.tickers, panel.prices)


def save_returns(panel: ReturnsPanel, path):
    _write_wide_csv(path, panel.dates, panel.tickers, panel.returns)


def _ratio_returns(prices):
    return prices[1:] / prices[:-1] - 1.0


def screen_universe(
    panel: PricePanel,
    max_abs_return: float = DEFAULT_MAX_ABS_RETURN,
    require_full_history: bool = True,
) -> PricePanel:
    """Keep tickers that trade continuously and show no abnormal daily move.

    A ticker is dropped when it has a missing cell (if ``require_full_history``)
    or when any daily simple return, measured between consecutive observed
    prices, exceeds ``max_abs_return`` in absolute value.
    """
    if max_abs_return <= 0:
        raise ValidationError("max_abs_return must be positive")
    keep = []
    for j, ticker in enumerate(panel.tickers):
        col = panel.prices[:, j]
        observed = col[~np.isnan(col)]
        if require_full_history and observed.size != col.size:
            continue
        if observed.size < 2:
            continue
        if np.max(np.abs(_ratio_returns(observed))) > max_abs_return:
            continue
        keep.append(ticker)
    if not keep:
        raise ValidationError("empty universe after screening")
    return panel.select(keep)


def to_returns(panel: PricePanel) -> ReturnsPanel:
    """Simple returns ``P[t+1] / P[t] - 1`` dated at ``t+1``."""
    if len(panel.dates) < 2:
        raise ValidationError("need at least two price rows to form returns")
    if np.isnan(panel.prices).any():
        raise ValidationError("price panel has missing cells; screen it first")
    return ReturnsPanel(panel.dates[1:], panel.tickers, _ratio_returns(panel.prices))
