"""Regenerate the synthetic heavy-tailed price pair in data/fixtures/.

Daily log returns are bivariate Student-t (nu=3, scale correlation 0.4,
scale 0.012) on business days from 2000-01-03; each file drops a different
handful of days so the two series have to be aligned.
"""
import argparse
import datetime as dt
from pathlib import Path

import numpy as np

from mibench.ingest import PriceSeries, write_price_csv
from mibench.sampling import DistributionSpec, sample

ap = argparse.ArgumentParser()
ap.add_argument("--days", type=int, default=3000)
ap.add_argument("--seed", type=int, default=20171108)
ap.add_argument("--outdir", default=str(Path(__file__).resolve().parents[1] / "data" / "fixtures"))
args = ap.parse_args()

spec = DistributionSpec("student_t", rho=0.4, nu=3.0, sigma=(0.012, 0.012))
s = sample(spec, args.days, args.seed)

days, d = [], dt.date(2000, 1, 3)
while len(days) < args.days + 1:
    if d.weekday() < 5:
        days.append(d)
    d += dt.timedelta(days=1)

rng = np.random.default_rng(args.seed)
outdir = Path(args.outdir)
outdir.mkdir(parents=True, exist_ok=True)
for name, start, rets in (("HTA", 40.0, s.x), ("HTB", 60.0, s.y)):
    prices = start * np.exp(np.concatenate([[0.0], np.cumsum(rets)]))
    keep = np.ones(len(days), dtype=bool)
    keep[rng.choice(np.arange(1, len(days)), size=15, replace=False)] = False
    series = PriceSeries(
        tuple(day for day, k in zip(days, keep) if k),
        tuple(round(float(p), 6) for p, k in zip(prices, keep) if k),
        name,
    )
    write_price_csv(series, outdir / f"{name}.csv")
    print(f"wrote {outdir / (name + '.csv')} ({len(series)} rows)")
