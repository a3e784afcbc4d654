import math

import numpy as np
import pytest

from lamx.bias import BiasConfig
from lamx.errors import AssumptionError, InputError, UnsupportedDesignError
from lamx.estim import (
    Sample,
    estimate_fixed_bias,
    estimate_from_moments,
    estimate_minimax,
    estimate_selective_bias,
    fit_moments,
    max_bias_term,
    selective_indicator,
)
from lamx.gmap import coord_map, max_map
from lamx.kink import KinkMap
from lamx.loss import Loss
from lamx.sampling import draw_xi, make_rng, mvn_sample

SIGMA = np.array([[2.0, 0.5], [0.5, 4.0]])
SQ = Loss.power(2.0)
CFG = BiasConfig(L=300, c_grid=81, r_grid=5, n_starts=1)


def sample(n=300, mean=(0.0, 0.0), seed=1):
    return Sample(mvn_sample(mean, SIGMA, n, make_rng(seed)))


def test_sample_validation():
    with pytest.raises(InputError):
        Sample(np.zeros((1, 2)))
    with pytest.raises(InputError):
        Sample(np.array([[0.0, np.nan], [1.0, 2.0]]))
    assert Sample(np.arange(5.0)).d == 1


def test_fit_moments_and_singular_covariance():
    s = sample()
    beta, sig = fit_moments(s)
    np.testing.assert_allclose(beta, s.observations.mean(axis=0))
    np.testing.assert_allclose(sig, np.cov(s.observations, rowvar=False, ddof=1))
    x = np.random.default_rng(0).normal(size=(50, 1))
    with pytest.raises(AssumptionError) as exc:
        fit_moments(Sample(np.hstack([x, x])))
    assert "beta_hat" in exc.value.context and "sigma_hat" in exc.value.context


def test_minimax_estimate_assembly():
    s = sample(mean=(0.0, 0.05))
    rep = estimate_minimax(s, max_map(2), KinkMap.make_identity(), SQ, CFG)
    assert rep.theta_hat == pytest.approx(rep.plug_in + rep.c_hat / math.sqrt(s.n), abs=1e-15)
    assert rep.plug_in == pytest.approx(rep.beta_hat.max())
    assert rep.s_hat == 1.0
    keys = [k for k, _ in rep.as_rows()]
    assert keys[:4] == ["theta_hat", "plug_in", "c_hat", "s_hat"]
    assert "sigma_hat_12" in keys


def test_unit_scale_shortcut_gives_same_constant():
    # relu in its linear regime: s_hat = 1 for identity and relu alike; with
    # a1 = 3, s_hat = 3 and the power-loss shortcut reuses the unit-scale constant
    beta, sig = np.array([2.0, 1.0]), SIGMA
    xi = draw_xi(CFG.L, 2, 0)
    f3 = KinkMap(3.0, 0.0, 0.0, 0.0)
    r1 = estimate_from_moments(beta, sig, 300, max_map(2), KinkMap.make_identity(), SQ, CFG,
                               xi=xi)
    r3 = estimate_from_moments(beta, sig, 300, max_map(2), f3, SQ, CFG, xi=xi)
    assert r3.s_hat == 3.0 and r3.unit_scale_shortcut
    assert r3.c_hat == r1.c_hat
    assert r3.theta_hat == pytest.approx(3.0 * (2.0 + r1.c_hat / math.sqrt(300)))


def test_zero_slope_estimate_is_flagged():
    rep = estimate_from_moments(np.array([-1.0, 0.0]), SIGMA, 300, coord_map(1, 2),
                                KinkMap.relu(), SQ, CFG)
    assert rep.degenerate and rep.c_hat == 0.0 and rep.theta_hat == 0.0


def test_competitors():
    s = sample(mean=(0.0, 0.0))
    xi = draw_xi(500, 2, 3)
    beta, sig = fit_moments(s)
    b_f = max_bias_term(sig, xi)
    assert b_f > 0
    fixed = estimate_fixed_bias(s, 500, 3)
    assert fixed == pytest.approx(beta.max() - b_f / math.sqrt(s.n))
    sel = estimate_selective_bias(s, 500, 3)
    expect = fixed if selective_indicator(beta, s.n) else beta.max()
    assert sel == pytest.approx(expect)
    far = sample(mean=(0.0, 3.0))
    assert estimate_selective_bias(far, 500, 3) == pytest.approx(fit_moments(far)[0].max())
    with pytest.raises(UnsupportedDesignError):
        estimate_fixed_bias(Sample(np.random.default_rng(1).normal(size=(20, 3))), 10, 0)


def test_selective_threshold_is_strict():
    n = 1000
    cut = 1.7 / n ** (1 / 3)
    assert selective_indicator(np.array([0.0, cut * 0.999]), n)
    assert not selective_indicator(np.array([0.0, cut * 1.001]), n)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        estimate_minimax(sample(), max_map(3), KinkMap.make_identity(), SQ, CFG)
