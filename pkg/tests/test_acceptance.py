"""Acceptance suite: one PASS/FAIL line per criterion (see the terminal summary).

Tolerances are fixed in advance; pinned oracle values come from
``tests/oracles/compute_oracles.py``.  Criterion 6 runs the desk-scale
simulation and takes roughly ten minutes on one core.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from lamx import (
    BiasConfig,
    BoundSpec,
    ExperimentConfig,
    KinkMap,
    Loss,
    Sample,
    c_hat,
    coord_map,
    estimate_minimax,
    gn_hat,
    linear_map,
    max_map,
    minimax_bound,
    parse_gmap,
    run_experiment,
    slope_scale,
)
from lamx.bias import b_hat_detail
from lamx.bound import b_pop_detail
from lamx.cli import main
from lamx.gmap import dderiv, random_gmap
from lamx.sampling import draw_xi, make_rng, mvn_sample
from lamx.verify import equivariance_errors, random_points

DESIGN_SIGMA = np.array([[2.0, 0.5], [0.5, 4.0]])

# max_z |gn_hat(z) - g~0(z)| / eps at eps = 1e-2 for both cases below (oracle)
GN_CONSTANT = {2: 100.0, 3: 100.0}


def test_c1_equivariance_suite(report):
    t0 = time.perf_counter()
    rng = make_rng(2024)
    worst: dict[str, float] = {}
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        g = random_gmap(rng, d, depth=3)
        X = random_points(rng, 1000, d)
        Z = random_points(rng, 1000, d)
        c = rng.normal(scale=5.0, size=1000)
        u = rng.uniform(0.0, 10.0, size=1000)
        for k, v in equivariance_errors(g, X, Z, c, u).items():
            worst[k] = max(worst.get(k, 0.0), v)
    secs = time.perf_counter() - t0
    ok = all(v <= 1e-9 for v in worst.values()) and secs <= 30.0
    report("1 equivariance", ok, f"max relative error {max(worst.values()):.1e}, {secs:.1f}s")
    assert ok


@pytest.mark.parametrize("d", [2, 3])
def test_c2_gn_hat_consistency(report, d):
    beta = np.array([0.0, 0.03, -0.02][:d])
    direction = np.array([-2.0, 2.0, 1.0][:d])
    z = np.outer(np.linspace(-1.0, 1.0, 21), direction)
    g = max_map(d)
    errs = {}
    for eps in (1e-2, 1e-3, 1e-4):
        errs[eps] = float(np.max(np.abs(gn_hat(g, beta, eps, z) - dderiv(g, beta, z))))
    ok = all(e <= 2.0 * eps * GN_CONSTANT[d] for eps, e in errs.items())
    detail = ", ".join(f"eps={k:g}: {v:.2e}" for k, v in errs.items())
    report(f"2 gn_hat d={d}", ok, detail)
    assert ok


def test_c3_tied_max_bound(report):
    t0 = time.perf_counter()
    spec = BoundSpec(max_map(2), KinkMap.make_identity(), (0.0, 0.0), np.eye(2),
                     Loss.power(2.0), mc_size=100_000)
    res = minimax_bound(spec)
    secs = time.perf_counter() - t0
    ok = abs(res.value - 1.0) <= 0.05 and abs(res.c_star) <= 0.05 and secs <= 120
    report("3 tied max bound", ok, f"value={res.value:.4f}, c*={res.c_star:.3f}, {secs:.1f}s")
    assert ok


def test_c4_affine_reduction(report):
    t0 = time.perf_counter()
    s = np.array([0.3, 0.7])
    g = linear_map(s)
    n = 300
    sample = Sample(mvn_sample([0.2, -0.1], DESIGN_SIGMA, n, make_rng(77)))
    cfg = BiasConfig(L=1000, seed=5)
    rep = estimate_minimax(sample, g, KinkMap.make_identity(), Loss.power(2.0), cfg)
    step = 2 * cfg.M1 / (cfg.c_grid - 1)
    # the empirical minimiser of mean((s'W + c)^2) is -mean(s'W): SE = sqrt(s'Sigma s / L)
    se = math.sqrt(float(s @ rep.sigma_hat @ s) / cfg.L)
    expected = float(s @ rep.beta_hat + rep.c_hat / math.sqrt(n))
    secs = time.perf_counter() - t0
    ok = (abs(rep.c_hat) <= step + 3 * se and abs(rep.theta_hat - expected) <= 1e-12
          and secs <= 60)
    report("4 affine", ok, f"c_hat={rep.c_hat:.4f} (band {step + 3 * se:.4f}), "
           f"estimate gap {abs(rep.theta_hat - expected):.1e}, {secs:.1f}s")
    assert ok


def test_c5_power_scaling(report):
    g = max_map(2)
    xi = draw_xi(2000, 2, 11)
    # M1 large so the truncation min(tau, M1) does not bind at s = 2
    cfg = BiasConfig(L=2000, M1=200.0, c_grid=801, n_starts=2)
    lo = Loss.power(2.0)
    beta = np.array([0.0, 0.05])
    base = c_hat(1.0, g, lo, beta, DESIGN_SIGMA, 300, cfg, xi=xi).B_min
    gaps = {}
    for s in (0.5, 2.0):
        val = c_hat(s, g, lo, beta, DESIGN_SIGMA, 300, cfg, xi=xi).B_min
        gaps[s] = abs(val - s * s * base) / (s * s * base)
    ok = all(v <= 0.02 for v in gaps.values())
    report("5 power scaling", ok, ", ".join(f"s={k}: {v:.2e}" for k, v in gaps.items()))
    assert ok


@pytest.fixture(scope="module")
def desk_curve():
    cfg = ExperimentConfig(n=300, reps=2000, delta0_grid=(-10, -5, -2, 0, 2, 5, 10),
                           Sigma=DESIGN_SIGMA, bias=BiasConfig(L=1000))
    t0 = time.perf_counter()
    curve = run_experiment(cfg, threads=1)
    return curve, time.perf_counter() - t0


def test_c6a_tails(report, desk_curve):
    curve, secs = desk_curve
    hi = curve.get(10, "minimax").scaled_mse
    lo = curve.get(-10, "minimax").scaled_mse
    ok = abs(hi - 4.0) <= 0.25 and abs(lo - 2.0) <= 0.15
    report("6a tails", ok, f"mse(10)={hi:.3f}, mse(-10)={lo:.3f}, run {secs:.0f}s")
    assert ok


def test_c6b_fixed_beats_minimax_at_zero(report, desk_curve):
    curve, _ = desk_curve
    f, m = curve.get(0, "fixed_bias").scaled_mse, curve.get(0, "minimax").scaled_mse
    ok = f < m
    report("6b fixed < minimax at 0", ok, f"fixed={f:.3f}, minimax={m:.3f}")
    assert ok


def test_c6c_biases_at_zero(report, desk_curve):
    curve, _ = desk_curve
    bf, bm = curve.get(0, "fixed_bias").scaled_bias, curve.get(0, "minimax").scaled_bias
    ok = abs(bf) <= 0.1 and bm > 0.3
    report("6c biases at 0", ok, f"fixed={bf:.3f}, minimax={bm:.3f}")
    assert ok


def test_c6d_selective_worse_somewhere(report, desk_curve):
    curve, _ = desk_curve
    pairs = {d: (curve.get(d, "selective_bias").scaled_mse, curve.get(d, "minimax").scaled_mse)
             for d in (2, 5)}
    ok = any(s > m for s, m in pairs.values())
    report("6d selective worse at 2 or 5", ok,
           ", ".join(f"d0={d}: sel={s:.3f} mx={m:.3f}" for d, (s, m) in pairs.items()))
    assert ok


def test_tails_agree_with_plug_in(report, desk_curve):
    # harness invariant, checked on the desk run: far from the tie the minimax and
    # selective estimators track the plug-in; fixed-bias keeps its full shift
    curve, _ = desk_curve
    gaps = {}
    for d in (-10, 10):
        ref = curve.get(d, "plug_in").scaled_mse
        for name in ("minimax", "selective_bias"):
            gaps[(d, name)] = abs(curve.get(d, name).scaled_mse - ref) / ref
    ok = all(v <= 0.05 for v in gaps.values())
    report("harness tails within 5%", ok,
           ", ".join(f"{n}@{d}: {v:.1%}" for (d, n), v in gaps.items()))
    assert ok


CASES = [
    ("affine", linear_map([0.3, 0.7]), KinkMap.make_identity(), (0.1, -0.2), DESIGN_SIGMA),
    ("max equal", max_map(2), KinkMap.make_identity(), (0.0, 0.0), np.eye(2)),
    ("max unequal", max_map(2), KinkMap.make_identity(), (0.0, 0.0),
     np.array([[1.0, 0.3], [0.3, 3.0]])),
    ("max-of-min", parse_gmap("max(min(x1, x2), x3)"), KinkMap.make_identity(),
     (0.0, 0.0, -1.0), np.eye(3) + 0.2),
    ("abs of coord", coord_map(1, 1), KinkMap.abs(0.5), (0.5,), np.array([[2.0]])),
]


@pytest.mark.parametrize("name,g,f,beta0,sigma", CASES, ids=[c[0] for c in CASES])
def test_c7_empirical_vs_population(report, name, g, f, beta0, sigma):
    loss = Loss.power(2.0, trunc=8.0)
    s = slope_scale(f, float(g(np.array(beta0))))
    c = 0.5
    emp = b_hat_detail(c, s, g, loss, beta0, sigma, BiasConfig(L=100_000, M1=8.0, seed=101),
                       eps_n=1e-4)
    pop = b_pop_detail(c, s, BoundSpec(g, f, beta0, sigma, loss, mc_size=100_000, seed=202))
    z = abs(emp.value - pop.value) / math.hypot(emp.se, pop.se)
    ok = z <= 3.0
    report(f"7 {name}", ok, f"b_hat={emp.value:.4f}, b_pop={pop.value:.4f}, |z|={z:.2f}")
    assert ok


def _cells(text: str):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


def test_c8_determinism(report, tmp_path):
    cfg = tmp_path / "sim.ini"
    cfg.write_text("[experiment]\nn = 300\nreps = 12\ndelta0 = [-5, 0, 5]\n\n[bias]\nL = 300\n",
                   encoding="utf-8")
    outs = {}
    for tag, threads in (("a", 1), ("b", 1), ("c", 8)):
        path = tmp_path / f"{tag}.csv"
        assert main(["simulate", "--config", str(cfg), "--threads", str(threads),
                     "--out", str(path)]) == 0
        outs[tag] = path.read_bytes()
    same = outs["a"] == outs["b"]
    head_a, rows_a = _cells(outs["a"].decode())
    head_c, rows_c = _cells(outs["c"].decode())
    worst = 0.0
    for ra, rc in zip(rows_a, rows_c):
        for x, y in zip(ra, rc):
            try:
                fx, fy = float(x), float(y)
            except ValueError:
                assert x == y
                continue
            worst = max(worst, abs(fx - fy) / max(abs(fx), abs(fy), 1e-300))
    ok = same and head_a == head_c and len(rows_a) == len(rows_c) and worst <= 1e-12
    report("8 determinism", ok, f"rerun identical={same}, threads 1 vs 8 max rel {worst:.1e}")
    assert ok
