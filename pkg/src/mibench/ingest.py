"""Daily price CSVs to aligned log-return pairs."""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sampling import Sample

DEFAULT_DATE_COLUMN = "Date"
DEFAULT_PRICE_COLUMN = "Adj Close"


class PriceFileError(ValueError):
    """A price CSV violates the expected format; ``lineno`` is 1-based."""

    def __init__(self, path, lineno: int | None, message: str):
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple[dt.date, ...]
    prices: tuple[float, ...]
    symbol: str = ""

    def __post_init__(self):
        if len(self.dates) != len(self.prices):
            raise ValueError("dates and prices differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValueError(f"dates must be strictly increasing: {a} then {b}")
        for d, p in zip(self.dates, self.prices):
            if not (p > 0 and math.isfinite(p)):
                raise ValueError(f"price on {d} must be finite and > 0, got {p}")

    def __len__(self) -> int:
        return len(self.prices)


def load_price_csv(
    path,
    date_column: str = DEFAULT_DATE_COLUMN,
    price_column: str = DEFAULT_PRICE_COLUMN,
    symbol: str | None = None,
) -> PriceSeries:
    """Read a comma-separated file with ISO dates and one price column.

    Rows must be in strictly increasing date order; weekends and holidays are
    simply absent.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PriceFileError(path, None, "file is empty")
        header = [h.strip() for h in header]
        for col in (date_column, price_column):
            if col not in header:
                raise PriceFileError(path, 1, f"missing column {col!r}; header is {header}")
        di, pi = header.index(date_column), header.index(price_column)

        dates: list[dt.date] = []
        prices: list[float] = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise PriceFileError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[di].strip())
            except ValueError:
                raise PriceFileError(path, lineno, f"bad date {row[di]!r}") from None
            try:
                price = float(row[pi])
            except ValueError:
                raise PriceFileError(path, lineno, f"bad price {row[pi]!r}") from None
            if not (price > 0 and math.isfinite(price)):
                raise PriceFileError(path, lineno, f"price must be finite and > 0, got {row[pi]!r}")
            if dates and day == dates[-1]:
                raise PriceFileError(path, lineno, f"duplicate date {day}")
            if dates and day < dates[-1]:
                raise PriceFileError(path, lineno, f"date {day} is earlier than {dates[-1]}")
            dates.append(day)
            prices.append(price)

    if not dates:
        raise PriceFileError(path, None, "no data rows")
    return PriceSeries(tuple(dates), tuple(prices), symbol if symbol is not None else path.stem)


def write_price_csv(series: PriceSeries, path, date_column: str = DEFAULT_DATE_COLUMN,
                    price_column: str = DEFAULT_PRICE_COLUMN) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([date_column, price_column])
        for d, p in zip(series.dates, series.prices):
            writer.writerow([d.isoformat(), repr(p)])


def log_returns(series: PriceSeries) -> list[tuple[dt.date, float]]:
    """r_t = ln(P_t / P_{t-1}), dated at t."""
    if len(series) < 2:
        raise ValueError(f"need at least 2 prices for returns, got {len(series)}")
    p = series.prices
    return [(series.dates[t], math.log(p[t] / p[t - 1])) for t in range(1, len(p))]


def align_pairs(a: list[tuple[dt.date, float]], b: list[tuple[dt.date, float]]) -> Sample:
    """Inner join on date, chronological."""
    lookup = dict(b)
    joined = [(d, va, lookup[d]) for d, va in a if d in lookup]
    joined.sort(key=lambda t: t[0])
    if len(joined) < 2:
        raise ValueError(f"series share {len(joined)} date(s); need at least 2")
    return Sample(
        np.array([t[1] for t in joined]),
        np.array([t[2] for t in joined]),
        {"ingested": True, "dates": [t[0].isoformat() for t in joined]},
    )


def pearson(s: Sample) -> float:
    return float(np.corrcoef(s.x, s.y)[0, 1])
