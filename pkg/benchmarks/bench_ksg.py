"""Wall time of one KSG estimate per backend over a range of N.

    python3 benchmarks/bench_ksg.py --n 1000,3000,10000 --repeat 3
"""
import argparse
import time

from mibench.estimators import ksg_mi, ksg_mi_naive
from mibench.neighbors import BACKENDS
from mibench.sampling import DistributionSpec, sample

NAIVE_MAX_N = 3000
PYTHON_MAX_N = 30_000


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - t0)
    return min(times), value


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", default="1000,3000,10000,30000,100000")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    spec = DistributionSpec("normal", rho=0.5)
    routes = sorted(BACKENDS) + ["naive"]
    print(f"{'N':>8} " + " ".join(f"{r:>12}" for r in routes) + "   value")
    for n in (int(v) for v in args.n.split(",")):
        s = sample(spec, n, args.seed)
        cols, value = [], None
        for r in routes:
            if (r == "naive" and n > NAIVE_MAX_N) or (r == "python" and n > PYTHON_MAX_N):
                cols.append(f"{'-':>12}")
                continue
            fn = (lambda: ksg_mi_naive(s, args.k)) if r == "naive" else (lambda r=r: ksg_mi(s, args.k, backend=r))
            t, value = best_of(fn, args.repeat)
            cols.append(f"{t * 1e3:>10.1f}ms")
        print(f"{n:>8} " + " ".join(cols) + f"   {value:.6f}")


if __name__ == "__main__":
    main()
