"""Acceptance criteria at desk scale. Run with ``pytest tests/test_acceptance.py -s``
to see the per-criterion lines as they happen; they are also repeated in the
terminal summary."""
import csv
import io
import json
import math

import mpmath
import numpy as np
import pytest

from mibench.analytic import analytic_mi_gauss, analytic_mi_student
from mibench.cli import main
from mibench.estimators import EstimatorConfig, ksg_mi, ksg_mi_naive
from mibench.harness import ExperimentConfig, run_ci_experiment
from mibench.neighbors import BACKENDS
from mibench.sampling import DistributionSpec, Sample, with_transform

SEED = 20240601
GAUSS_HALF = 0.143841
NORMAL = DistributionSpec("normal", rho=0.5)
LOGNORMAL = DistributionSpec("lognormal", rho=0.5)
STUDENT = DistributionSpec("student_t", rho=0.5, nu=3.0)


def mp_student(nu, rho):
    mpmath.mp.dps = 40
    nu, rho = mpmath.mpf(nu), mpmath.mpf(rho)
    return float(
        -mpmath.log(1 - rho**2) / 2
        + 2 * mpmath.log(mpmath.sqrt(nu / (2 * mpmath.pi)) * mpmath.beta(nu / 2, mpmath.mpf(1) / 2))
        - (2 + nu) / nu
        + (1 + nu) * (mpmath.digamma((nu + 1) / 2) - mpmath.digamma(nu / 2))
    )


def run(*argv):
    return main([str(a) for a in argv])


def ci(spec, n_grid, reps, estimator=EstimatorConfig()):
    return run_ci_experiment(ExperimentConfig(spec, estimator, n_grid, reps, SEED))


def cell_text(c, analytic):
    return f"mean={c.mean:.5f} CI=[{c.q_lo:.5f}, {c.q_hi:.5f}] analytic={analytic:.5f}"


@pytest.fixture(scope="module")
def normal_sweep(tmp_path_factory):
    """CLI sweep shared by criteria 4 and 10."""
    out = tmp_path_factory.mktemp("acc") / "normal.csv"
    assert run("sweep", "--rho", 0.5, "--n-grid", "1000,3000,10000,30000", "--replicates", 100,
               "--seed", SEED, "--out", out) == 0
    return out


def test_c01_gaussian_oracle(criterion):
    v = analytic_mi_gauss(0.5).value
    criterion(1, abs(v - GAUSS_HALF) <= 5e-6, f"analytic_mi_gauss(0.5)={v:.10f}")


def test_c02_student_oracle(criterion):
    v = analytic_mi_student(3, 0.5).value
    ref = mp_student(3, 0.5)
    far = analytic_mi_student(1e6, 0.5).value
    ok = abs(v - ref) <= 1e-10 and abs(far - GAUSS_HALF) < 1e-4
    criterion(2, ok, f"nu=3: {v:.14f} vs mpmath {ref:.14f}; nu=1e6: {far:.8f}")


def test_c03_ksg_correctness(criterion):
    g = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(50):
        n = int(g.integers(10, 501))
        k = int(g.integers(1, 9))
        s = Sample(g.standard_normal(n), g.standard_normal(n) + g.uniform(-1, 1) * g.standard_normal(n))
        ref = ksg_mi_naive(s, k)
        for b in BACKENDS:
            worst = max(worst, abs(ksg_mi(s, k, backend=b) - ref))
    hand = ksg_mi(Sample(np.array([0.0, 1, 3, 7]), np.array([0.0, 1, 3, 7])), 1)
    ok = worst <= 1e-12 and abs(hand - 11 / 6) <= 1e-12
    criterion(3, ok, f"max |index - naive|={worst:.2e} over {sorted(BACKENDS)}; hand example={hand:.15f}")


def test_c04_unbiased_regime(criterion, normal_sweep):
    rows = {int(r["N"]): r for r in csv.DictReader(io.StringIO(normal_sweep.read_text()))}
    r = rows[10_000]
    mean, lo, hi = float(r["mean"]), float(r["q05"]), float(r["q95"])
    parts = [f"normal mean={mean:.5f} CI=[{lo:.5f}, {hi:.5f}]"]
    ok = abs(mean - GAUSS_HALF) <= 0.01 and lo <= GAUSS_HALF <= hi

    c = ci(LOGNORMAL, (10_000,), 100).cells[0]
    ok &= abs(c.mean - GAUSS_HALF) <= 0.01 and c.covers(GAUSS_HALF)
    parts.append("lognormal " + cell_text(c, GAUSS_HALF))

    st_ref = mp_student(3, 0.5)
    c = ci(STUDENT, (10_000,), 100).cells[0]
    ok &= abs(c.mean - st_ref) <= 0.02 and c.covers(st_ref)
    parts.append("student_t " + cell_text(c, st_ref))
    criterion(4, ok, "; ".join(parts))


def test_c05_negative_estimates(criterion):
    c = ci(NORMAL, (100,), 200).cells[0]
    neg = int(np.sum(c.estimates < 0))
    criterion(5, neg >= 1, f"N=100 R=200: min={c.estimates.min():.5f}, {neg} negative replicates")


def test_c06_sqrt_n_scaling(criterion):
    res = ci(NORMAL, (2_500, 10_000), 200)
    w1, w2 = res.cell(2_500).width, res.cell(10_000).width
    ratio = w1 / w2
    criterion(6, 1.5 <= ratio <= 2.7, f"width(2500)={w1:.5f} width(10000)={w2:.5f} ratio={ratio:.3f}")


def test_c07_cube_bias(criterion):
    st_ref = mp_student(3, 0.5)
    c = ci(with_transform(STUDENT, "cube"), (30_000,), 50).cells[0]
    ln = ci(with_transform(LOGNORMAL, "cube"), (30_000,), 50).cells[0]
    ok = not c.covers(st_ref) and abs(ln.mean - GAUSS_HALF) > 0.01
    criterion(7, ok, f"cube student_t {cell_text(c, st_ref)}; cube lognormal mean={ln.mean:.5f}")


def test_c08_transform_asymmetry(criterion):
    cube = ci(with_transform(NORMAL, "cube"), (10_000,), 100).cells[0].mean - GAUSS_HALF
    root = ci(with_transform(NORMAL, "cube_root"), (10_000,), 100).cells[0].mean - GAUSS_HALF
    criterion(8, abs(root) < abs(cube), f"bias cube={cube:+.5f} cube_root={root:+.5f}")


def test_c09_plugin_inferiority(criterion):
    ksg = ci(LOGNORMAL, (10_000,), 100).cells[0].mean - GAUSS_HALF
    plug = ci(LOGNORMAL, (10_000,), 100, EstimatorConfig("plugin")).cells[0].mean - GAUSS_HALF
    mm = ci(LOGNORMAL, (10_000,), 100, EstimatorConfig("plugin", miller_madow=True)).cells[0].mean - GAUSS_HALF
    ok = abs(plug) > abs(ksg) and abs(mm) > 0.01
    criterion(9, ok, f"bias ksg={ksg:+.5f} plugin={plug:+.5f} plugin+MM={mm:+.5f}")


def test_c10_extrapolation(criterion, normal_sweep, tmp_path, capsys):
    capsys.readouterr()
    assert run("extrapolate", normal_sweep, "--json") == 0
    fit = json.loads(capsys.readouterr().out)[0]

    lin = tmp_path / "lin.csv"
    lin.write_text("N,mean\n" + "".join(f"{n},{0.14 + 10 / n!r}\n" for n in (100, 1000, 10_000)))
    assert run("extrapolate", lin, "--json") == 0
    exact = json.loads(capsys.readouterr().out)[0]
    ok = (abs(fit["intercept"] - GAUSS_HALF) <= 0.01 and abs(exact["intercept"] - 0.14) <= 1e-12
          and exact["rms_residual"] <= 1e-12)
    criterion(10, ok, f"sweep intercept={fit['intercept']:.5f}; collinear intercept={exact['intercept']!r} "
                      f"rms={exact['rms_residual']:.1e}")


def test_c11_determinism(criterion, tmp_path, fixture_dir):
    d = tmp_path
    commands = {
        "sweep": ["sweep", "--dist", "student", "--transform", "cube", "--n-grid", "100,300,1000",
                  "--replicates", 20, "--seed", SEED, "--out", d / "sweep.csv"],
        "sweep-json": ["sweep", "--estimator", "plugin", "--mm", "--n-grid", "100,1000", "--replicates", 5,
                       "--format", "json", "--units", "bits", "--out", d / "sweep.json"],
        "stocks": ["stocks", fixture_dir / "HTA.csv", fixture_dir / "HTB.csv", "--bootstrap", 10,
                   "--lengths", "500,2970", "--seed", SEED, "--out", d / "stocks.csv"],
        "extrapolate": ["extrapolate", d / "sweep.csv", "--append", d / "corrected.csv"],
        "simulate": ["simulate", "--dist", "lognormal", "--n", 300, "--seed", SEED, "--out", d / "xy.csv"],
    }
    outputs = {"sweep": "sweep.csv", "sweep-json": "sweep.json", "stocks": "stocks.csv",
               "extrapolate": "corrected.csv", "simulate": "xy.csv"}
    bad = []
    for name, argv in commands.items():
        assert run(*argv) == 0
        out = d / outputs[name]
        replayed = d / ("replay-" + outputs[name])
        assert run("replay", d / (outputs[name] + ".manifest.json"), "--out", replayed) == 0
        if replayed.read_bytes() != out.read_bytes():
            bad.append(f"{name} replay")

    for workers in (2, 4):
        w = d / f"sweep-w{workers}.csv"
        run(*commands["sweep"][:-1], w, "--workers", workers)
        if w.read_bytes() != (d / "sweep.csv").read_bytes():
            bad.append(f"sweep workers={workers}")
        s = d / f"stocks-w{workers}.csv"
        run(*commands["stocks"][:-1], s, "--workers", workers)
        if s.read_bytes() != (d / "stocks.csv").read_bytes():
            bad.append(f"stocks workers={workers}")
    criterion(11, not bad, f"{len(commands)} manifest replays and worker counts 1/2/4 byte-identical"
              if not bad else "mismatch: " + ", ".join(bad))
