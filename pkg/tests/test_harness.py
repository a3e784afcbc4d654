import csv
import io
import math

import numpy as np
import pytest

from lamx.bias import BiasConfig
from lamx.errors import InputError
from lamx.harness import CSV_COLUMNS, ExperimentConfig, generate_sample, run_experiment

TINY = BiasConfig(L=200, c_grid=81, r_grid=5, n_starts=1, refine_rounds=1)


def tiny(**kw):
    base = dict(n=200, reps=6, delta0_grid=(-4.0, 0.0, 4.0), bias=TINY)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(InputError) as exc:
        ExperimentConfig(reps=0, n=1, delta0_grid=(), design="theta3")
    for part in ("reps", "n must", "empty", "design"):
        assert part in str(exc.value)
    with pytest.raises(InputError):
        ExperimentConfig(Sigma=((1.0, 1.0), (1.0, 1.0)))
    big = ExperimentConfig.full_scale_config()
    assert big.reps == 20000 and len(big.delta0_grid) == 41


def test_designs():
    c1, c2 = tiny(), tiny(design="theta2")
    np.testing.assert_allclose(c1.beta(10.0), [0.0, 10.0 / math.sqrt(200)])
    np.testing.assert_allclose(c2.beta(10.0), [10.0 / math.sqrt(200), 0.0])
    assert c1.estimators == ("minimax", "fixed_bias", "selective_bias", "plug_in")
    assert c2.estimators == ("minimax", "plug_in")
    s = generate_sample(2.0, 50, c1.Sigma, 1, 0, 0, 0)
    assert s.observations.shape == (50, 2)


def test_run_is_deterministic_and_thread_independent():
    cfg = tiny()
    a = run_experiment(cfg, threads=1, chunk=4)
    b = run_experiment(cfg, threads=2, chunk=3)
    assert a.to_csv() == b.to_csv()
    assert a.mean_c_hat == b.mean_c_hat
    assert len(a.rows) == 3 * 4
    assert all(r.reps_used == 6 and r.failures == 0 for r in a.rows)


def test_fast_mode_and_theta2():
    a = run_experiment(tiny(fast_mode=True))
    b = run_experiment(tiny(fast_mode=False))
    assert a.to_csv() != b.to_csv()
    t2 = run_experiment(tiny(design="theta2"))
    # far left of the kink relu(beta1) is flat: plug-in and minimax both give 0
    left = t2.get(-4.0, "minimax")
    assert left.scaled_mse == pytest.approx(t2.get(-4.0, "plug_in").scaled_mse)


def test_csv_layout():
    curve = run_experiment(tiny(reps=3, delta0_grid=(0.0,)))
    text = curve.to_csv(("config_sha256=abc",))
    lines = text.splitlines()
    assert lines[0] == "# config_sha256=abc"
    assert tuple(lines[1].split(",")) == CSV_COLUMNS
    assert "\r" not in text
    long = list(csv.reader(io.StringIO(curve.to_long_csv())))
    assert long[0] == ["delta0", "estimator", "metric", "value", "se"]
    assert len(long) == 1 + 2 * 4
