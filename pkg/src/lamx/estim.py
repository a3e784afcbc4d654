"""Minimax estimator and the two bias-reduction competitors for ``max(beta)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bias import BiasConfig, RiskSurfaceResult, c_hat as compute_c_hat
from .errors import AssumptionError, InputError, UnsupportedDesignError
from .gmap import GMap, evaluate
from .kink import KinkMap, eval_f, s_hat as compute_s_hat
from .loss import Loss
from .sampling import EIG_FLOOR, draw_xi, sym_sqrt

SELECTIVE_THRESHOLD = 1.7


@dataclass(frozen=True)
class Sample:
    observations: np.ndarray

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.ndim != 2:
            raise InputError("observations must be an n x d matrix")
        if obs.shape[0] < 2:
            raise InputError(f"need n >= 2 observations, got {obs.shape[0]}")
        if not np.all(np.isfinite(obs)):
            raise InputError("observations contain non-finite values")
        object.__setattr__(self, "observations", obs)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def d(self) -> int:
        return self.observations.shape[1]


@dataclass
class EstimateReport:
    theta_hat: float
    beta_hat: np.ndarray
    sigma_hat: np.ndarray
    c_hat: float
    s_hat: float
    plug_in: float
    n: int
    eps_n: float
    eta: float
    L: int
    seed: int
    unit_scale_shortcut: bool = False
    degenerate: bool = False
    surface: RiskSurfaceResult | None = field(default=None, repr=False)

    def as_rows(self) -> list[tuple[str, object]]:
        rows = [("theta_hat", self.theta_hat), ("plug_in", self.plug_in),
                ("c_hat", self.c_hat), ("s_hat", self.s_hat), ("n", self.n)]
        rows += [(f"beta_hat_{i + 1}", v) for i, v in enumerate(self.beta_hat)]
        d = len(self.beta_hat)
        rows += [(f"sigma_hat_{i + 1}{j + 1}", self.sigma_hat[i, j])
                 for i in range(d) for j in range(d)]
        rows += [("eps_n", self.eps_n), ("eta", self.eta), ("L", self.L), ("seed", self.seed),
                 ("unit_scale_shortcut", int(self.unit_scale_shortcut)),
                 ("degenerate", int(self.degenerate))]
        return rows


def fit_moments(sample: Sample) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and covariance (divisor ``n - 1``); a singular covariance is an error."""
    x = sample.observations
    beta = x.mean(axis=0)
    sigma = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= EIG_FLOOR:
        raise AssumptionError(
            f"sample covariance is not invertible (smallest eigenvalue {w[0]:.3g})",
            assumption="Assumption 3", beta_hat=beta, sigma_hat=sigma,
        )
    return beta, sigma


def estimate_from_moments(beta_hat, sigma_hat, n: int, g: GMap, f: KinkMap, loss: Loss,
                          cfg: BiasConfig, *, xi=None,
                          unit_scale_shortcut: bool = True) -> EstimateReport:
    """``f(g(beta_hat) + c_hat(s_hat) / sqrt(n))`` from any efficient ``beta_hat``.

    For power losses the adjustment computed at scale 1 is used whenever
    ``s_hat > 0`` (the minimiser of the surface does not depend on the
    scale); pass ``unit_scale_shortcut=False`` to simulate at ``s_hat``.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    sigma_hat = np.atleast_2d(np.asarray(sigma_hat, dtype=float))
    eps = cfg.eps_for(n)
    g_b = float(evaluate(g, beta_hat))
    s = compute_s_hat(f, g_b, eps)
    shortcut = unit_scale_shortcut and loss.family == "power" and s > 0
    if s == 0.0:
        sym_sqrt(sigma_hat, "Sigma_hat")
        surface, c, degenerate, eta = None, 0.0, True, cfg.eta_for(n)
    else:
        surface = compute_c_hat(1.0 if shortcut else s, g, loss, beta_hat, sigma_hat, n, cfg,
                                xi=xi, eps_n=eps)
        c, degenerate, eta = surface.c_hat, surface.degenerate, surface.eta
    theta = float(eval_f(f, g_b + c / math.sqrt(n)))
    L = cfg.L if xi is None else int(np.shape(xi)[0])
    return EstimateReport(
        theta_hat=theta, beta_hat=beta_hat, sigma_hat=sigma_hat, c_hat=c, s_hat=s,
        plug_in=float(eval_f(f, g_b)), n=n, eps_n=eps, eta=eta, L=L, seed=cfg.seed,
        unit_scale_shortcut=shortcut, degenerate=degenerate, surface=surface,
    )


def estimate_minimax(sample: Sample, g: GMap, f: KinkMap, loss: Loss, cfg: BiasConfig,
                     **kwargs) -> EstimateReport:
    if sample.d != g.dim:
        raise InputError(f"data have {sample.d} columns but g acts on R^{g.dim}")
    beta, sigma = fit_moments(sample)
    return estimate_from_moments(beta, sigma, sample.n, g, f, loss, cfg, **kwargs)


def max_bias_term(sigma_hat, xi) -> float:
    """``(1/L) sum_i max(Sigma_hat^{1/2} xi_i)``, the simulated bias of ``max(beta_hat)``."""
    w = np.asarray(xi, dtype=float) @ sym_sqrt(sigma_hat, "Sigma_hat")
    return float(w.max(axis=1).mean())


def _competitor_inputs(sample: Sample, L: int, seed: int, xi):
    if sample.d != 2:
        raise UnsupportedDesignError(
            f"the bias-reduction competitors are defined for max(beta1, beta2); got d={sample.d}"
        )
    beta, sigma = fit_moments(sample)
    if xi is None:
        xi = draw_xi(L, 2, seed)
    return beta, sigma, xi


def estimate_fixed_bias(sample: Sample, L: int, seed: int, *, xi=None) -> float:
    beta, sigma, xi = _competitor_inputs(sample, L, seed, xi)
    return float(beta.max() - max_bias_term(sigma, xi) / math.sqrt(sample.n))


def selective_indicator(beta_hat, n: int) -> bool:
    # strict inequality: a gap exactly at the threshold gets no adjustment
    return bool(abs(beta_hat[1] - beta_hat[0]) < SELECTIVE_THRESHOLD / n ** (1.0 / 3.0))


def estimate_selective_bias(sample: Sample, L: int, seed: int, *, xi=None) -> float:
    beta, sigma, xi = _competitor_inputs(sample, L, seed, xi)
    if not selective_indicator(beta, sample.n):
        return float(beta.max())
    return float(beta.max() - max_bias_term(sigma, xi) / math.sqrt(sample.n))
