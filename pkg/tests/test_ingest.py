import datetime as dt
import math

import numpy as np
import pytest

from mibench.ingest import (
    PriceFileError,
    PriceSeries,
    align_pairs,
    load_price_csv,
    log_returns,
    pearson,
    write_price_csv,
)

D = [dt.date(2020, 1, 2), dt.date(2020, 1, 3), dt.date(2020, 1, 6)]


def test_three_rows(write_prices):
    s = load_price_csv(write_prices("abc.csv", D, [100, 105, 102]))
    assert len(s) == 3
    assert s.prices == (100.0, 105.0, 102.0)
    assert s.dates == tuple(D)
    assert s.symbol == "abc"


def test_yahoo_header(write_prices):
    rows = [f"{d},1,2,0.5,{p},{p},1000" for d, p in zip(D, [10, 11, 12])]
    path = write_prices("y.csv", [r.split(",", 1)[0] for r in rows], [r.split(",", 1)[1] for r in rows],
                        header="Date,Open,High,Low,Close,Adj Close,Volume")
    assert load_price_csv(path).prices == (10.0, 11.0, 12.0)


def test_custom_columns(write_prices):
    path = write_prices("c.csv", D, [1, 2, 3], header="day,close")
    assert len(load_price_csv(path, date_column="day", price_column="close")) == 3


def test_shuffled_dates_rejected(write_prices):
    with pytest.raises(PriceFileError, match=":3:"):
        load_price_csv(write_prices("s.csv", [D[1], D[0], D[2]], [1, 2, 3]))


def test_duplicate_date_rejected(write_prices):
    with pytest.raises(PriceFileError, match="duplicate"):
        load_price_csv(write_prices("d.csv", [D[0], D[0], D[2]], [1, 2, 3]))


@pytest.mark.parametrize("price", ["0", "-4", "abc", "nan"])
def test_bad_price_rejected_with_line(write_prices, price):
    with pytest.raises(PriceFileError, match=":3:"):
        load_price_csv(write_prices("p.csv", D, ["1", price, "3"]))


def test_bad_date_rejected(write_prices):
    with pytest.raises(PriceFileError, match=":2:.*bad date"):
        load_price_csv(write_prices("b.csv", ["01/02/2020"], [1]))


def test_short_row_rejected(tmp_path):
    p = tmp_path / "short.csv"
    p.write_text("Date,Adj Close\n2020-01-02,1\n2020-01-03\n")
    with pytest.raises(PriceFileError, match=":3:"):
        load_price_csv(p)


@pytest.mark.parametrize("content", ["", "Date,Adj Close\n"])
def test_empty_rejected(tmp_path, content):
    p = tmp_path / "empty.csv"
    p.write_text(content)
    with pytest.raises(PriceFileError):
        load_price_csv(p)


def test_missing_column(write_prices):
    with pytest.raises(PriceFileError, match="Adj Close"):
        load_price_csv(write_prices("m.csv", D, [1, 2, 3], header="Date,Close"))


def test_roundtrip(tmp_path, rng):
    prices = tuple(float(v) for v in 50 * np.exp(np.cumsum(rng.standard_normal(40) * 0.02)))
    dates = tuple(dt.date(2021, 1, 1) + dt.timedelta(days=i) for i in range(40))
    series = PriceSeries(dates, prices, "rt")
    write_price_csv(series, tmp_path / "rt.csv")
    assert load_price_csv(tmp_path / "rt.csv") == series


def test_log_returns_e():
    s = PriceSeries((D[0], D[1]), (1.0, math.e))
    assert log_returns(s) == [(D[1], 1.0)]


def test_log_returns_values():
    r = log_returns(PriceSeries(tuple(D), (100.0, 105.0, 102.0)))
    assert [d for d, _ in r] == D[1:]
    assert r[0][1] == pytest.approx(0.04879016416943205, abs=1e-15)
    assert r[1][1] == pytest.approx(-0.028987536873252395, abs=1e-15)


def test_log_returns_constant():
    assert [v for _, v in log_returns(PriceSeries(tuple(D), (5.0, 5.0, 5.0)))] == [0.0, 0.0]


def test_log_returns_too_short():
    with pytest.raises(ValueError):
        log_returns(PriceSeries((D[0],), (1.0,)))


def _rets(dates, start=0.0):
    return [(d, start + i) for i, d in enumerate(dates)]


def test_align_identical_dates():
    days = [dt.date(2020, 1, i) for i in range(1, 11)]
    s = align_pairs(_rets(days), _rets(days, 100))
    assert s.n == 10
    np.testing.assert_array_equal(s.y - s.x, 100)


def test_align_inner_join_chronological():
    a_days = [dt.date(2020, 1, i) for i in (1, 2, 3, 5, 8)]
    b_days = [dt.date(2020, 1, i) for i in (2, 3, 4, 5, 9)]
    s = align_pairs(_rets(a_days), list(reversed(_rets(b_days, 100))))
    assert s.provenance["dates"] == ["2020-01-02", "2020-01-03", "2020-01-05"]
    # pairs never cross dates
    assert s.pairs == [(1.0, 100.0), (2.0, 101.0), (3.0, 103.0)]


@pytest.mark.parametrize("b_days", [[dt.date(2021, 1, 1), dt.date(2021, 1, 2)], [dt.date(2020, 1, 1), dt.date(2021, 1, 2)]])
def test_align_too_small(b_days):
    a = _rets([dt.date(2020, 1, 1), dt.date(2020, 1, 2)])
    with pytest.raises(ValueError):
        align_pairs(a, _rets(b_days))


def spreadsheet_correl(xs, ys):
    # CORREL as a spreadsheet computes it: sums of deviations
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    return sxy / math.sqrt(sxx * syy)


def test_fixture_pearson_matches_spreadsheet(fixture_dir):
    a = load_price_csv(fixture_dir / "HTA.csv")
    b = load_price_csv(fixture_dir / "HTB.csv")
    s = align_pairs(log_returns(a), log_returns(b))
    assert s.n < len(a) - 1  # the files drop different days
    assert pearson(s) == pytest.approx(spreadsheet_correl(s.x.tolist(), s.y.tolist()), abs=1e-12)
