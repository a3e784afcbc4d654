"""Monte Carlo comparison of the minimax estimator with bias-reduced competitors.

Design: ``X_i ~ N(beta, Sigma)`` i.i.d., ``i = 1..n``.  For ``design="theta1"``
the target is ``max(beta1, beta2)`` with ``beta = (0, delta0 / sqrt(n))``; for
``design="theta2"`` it is ``max(beta1, 0)`` with ``beta = (delta0 / sqrt(n), 0)``.

Seeds form a tree under ``master_seed``: replication ``rep`` at grid index
``i`` draws its data from stream ``(i, rep, 0)`` and its simulation draws from
``(i, rep, 1)``.  In fast mode one simulation matrix, stream ``(2**31,)``, is
shared by every replication.  Results are reduced in (grid index, replication)
order with compensated summation, so the worker count never changes them.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bias import BiasConfig
from .errors import AssumptionError, InputError
from .estim import (
    Sample,
    estimate_from_moments,
    fit_moments,
    max_bias_term,
    selective_indicator,
)
from .gmap import GMap, coord_map, evaluate, max_map
from .kink import KinkMap, eval_f
from .loss import Loss
from .sampling import check_covariance, draw_xi, make_rng, mvn_sample, sym_sqrt

DESIGN_SIGMA = ((2.0, 0.5), (0.5, 4.0))
SHARED_XI_KEY = 2**31
CSV_COLUMNS = ("delta0", "estimator", "scaled_mse", "scaled_mse_se", "scaled_bias",
               "scaled_bias_se", "reps_used", "failures")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 300
    reps: int = 2000
    delta0_grid: tuple = tuple(np.linspace(-10.0, 10.0, 11))
    Sigma: tuple = DESIGN_SIGMA
    design: str = "theta1"
    loss: Loss = Loss.power(2.0)
    bias: BiasConfig = BiasConfig(L=1000)
    master_seed: int = 12345
    fast_mode: bool = False

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise InputError("; ".join(problems))
        object.__setattr__(self, "delta0_grid", tuple(float(v) for v in self.delta0_grid))
        object.__setattr__(self, "Sigma", tuple(map(tuple, np.asarray(self.Sigma, float))))

    def problems(self) -> list[str]:
        out = []
        if self.reps < 1:
            out.append(f"reps must be >= 1, got {self.reps}")
        if self.n < 2:
            out.append(f"n must be >= 2, got {self.n}")
        if len(self.delta0_grid) == 0:
            out.append("delta0 grid is empty")
        if self.design not in ("theta1", "theta2"):
            out.append(f"design must be theta1 or theta2, got {self.design!r}")
        try:
            sigma = check_covariance(self.Sigma)
            if sigma.shape != (2, 2):
                out.append("Sigma must be 2 x 2")
            else:
                sym_sqrt(sigma)
        except (InputError, AssumptionError) as exc:
            out.append(str(exc))
        return out

    @classmethod
    def full_scale_config(cls, **overrides) -> "ExperimentConfig":
        """20000 replications on a 41-point grid over [-10, 10]."""
        base = dict(reps=20000, delta0_grid=tuple(np.linspace(-10.0, 10.0, 41)))
        base.update(overrides)
        return cls(**base)

    @property
    def g(self) -> GMap:
        return max_map(2) if self.design == "theta1" else coord_map(1, 2)

    @property
    def f(self) -> KinkMap:
        return KinkMap.make_identity() if self.design == "theta1" else KinkMap.relu()

    @property
    def estimators(self) -> tuple[str, ...]:
        if self.design == "theta1":
            return ("minimax", "fixed_bias", "selective_bias", "plug_in")
        return ("minimax", "plug_in")

    def beta(self, delta0: float) -> np.ndarray:
        shift = delta0 / math.sqrt(self.n)
        return np.array([0.0, shift]) if self.design == "theta1" else np.array([shift, 0.0])


@dataclass(frozen=True)
class RiskRow:
    delta0: float
    estimator: str
    scaled_mse: float
    scaled_mse_se: float
    scaled_bias: float
    scaled_bias_se: float
    reps_used: int
    failures: int


@dataclass
class RiskCurve:
    rows: list[RiskRow]
    mean_c_hat: dict = field(default_factory=dict)

    def get(self, delta0: float, estimator: str) -> RiskRow:
        for row in self.rows:
            if row.estimator == estimator and math.isclose(row.delta0, delta0, abs_tol=1e-12):
                return row
        raise KeyError((delta0, estimator))

    def to_csv(self, comments: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r.delta0), r.estimator, _fmt(r.scaled_mse), _fmt(r.scaled_mse_se),
                        _fmt(r.scaled_bias), _fmt(r.scaled_bias_se), r.reps_used, r.failures])
        return buf.getvalue()

    def to_long_csv(self, comments: tuple[str, ...] = ()) -> str:
        """One row per (delta0, estimator, metric) for external plotting tools."""
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("delta0", "estimator", "metric", "value", "se"))
        for r in self.rows:
            w.writerow([_fmt(r.delta0), r.estimator, "scaled_mse", _fmt(r.scaled_mse),
                        _fmt(r.scaled_mse_se)])
            w.writerow([_fmt(r.delta0), r.estimator, "scaled_bias", _fmt(r.scaled_bias),
                        _fmt(r.scaled_bias_se)])
        return buf.getvalue()


def _fmt(x) -> str:
    return repr(float(x))


def generate_sample(delta0: float, n: int, Sigma, seed: int, *key: int,
                    design: str = "theta1") -> Sample:
    shift = delta0 / math.sqrt(n)
    mean = [0.0, shift] if design == "theta1" else [shift, 0.0]
    return Sample(mvn_sample(mean, Sigma, n, make_rng(seed, *key)))


def _one_rep(cfg: ExperimentConfig, i: int, rep: int, shared_xi) -> np.ndarray:
    """Scaled errors of every estimator plus the bias constant; NaNs on failure."""
    delta0 = cfg.delta0_grid[i]
    out = np.full(len(cfg.estimators) + 1, np.nan)
    sample = generate_sample(delta0, cfg.n, cfg.Sigma, cfg.master_seed, i, rep, 0,
                             design=cfg.design)
    try:
        beta_hat, sigma_hat = fit_moments(sample)
    except AssumptionError:
        return out
    xi = shared_xi if shared_xi is not None else \
        draw_xi(cfg.bias.L, 2, cfg.master_seed, i, rep, 1)
    g, f, rn = cfg.g, cfg.f, math.sqrt(cfg.n)
    theta = float(eval_f(f, evaluate(g, cfg.beta(delta0))))
    rep_mx = estimate_from_moments(beta_hat, sigma_hat, cfg.n, g, f, cfg.loss, cfg.bias, xi=xi)
    values = {"minimax": rep_mx.theta_hat, "plug_in": rep_mx.plug_in}
    if cfg.design == "theta1":
        b_f = max_bias_term(sigma_hat, xi)
        top = float(beta_hat.max())
        values["fixed_bias"] = top - b_f / rn
        values["selective_bias"] = top - b_f / rn if selective_indicator(beta_hat, cfg.n) else top
    for k, name in enumerate(cfg.estimators):
        out[k] = rn * (values[name] - theta)
    out[-1] = rep_mx.c_hat
    return out


def _run_chunk(args) -> tuple[int, int, np.ndarray]:
    cfg, i, start, stop, shared_xi = args
    return i, start, np.vstack([_one_rep(cfg, i, rep, shared_xi) for rep in range(start, stop)])


def _tasks(cfg: ExperimentConfig, shared_xi, chunk: int):
    for i in range(len(cfg.delta0_grid)):
        for start in range(0, cfg.reps, chunk):
            yield cfg, i, start, min(start + chunk, cfg.reps), shared_xi


def _summary(x: np.ndarray) -> tuple[float, float]:
    m = x.size
    mean = math.fsum(x) / m
    if m < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2) / (m - 1)
    return mean, math.sqrt(var / m)


def run_experiment(cfg: ExperimentConfig, threads: int = 1, chunk: int = 50) -> RiskCurve:
    """Risk and bias curves (scaled by ``n`` and ``sqrt(n)``) over the ``delta0`` grid.

    Replications whose sample covariance is singular are excluded and counted
    in ``failures``.
    """
    shared = draw_xi(cfg.bias.L, 2, cfg.master_seed, SHARED_XI_KEY) if cfg.fast_mode else None
    k = len(cfg.estimators)
    results = np.full((len(cfg.delta0_grid), cfg.reps, k + 1), np.nan)
    tasks = list(_tasks(cfg, shared, chunk))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(_run_chunk, tasks))
    else:
        done = [_run_chunk(t) for t in tasks]
    for i, start, block in done:
        results[i, start:start + block.shape[0]] = block
    rows, mean_c = [], {}
    for i, delta0 in enumerate(cfg.delta0_grid):
        ok = ~np.isnan(results[i, :, 0])
        failures = int((~ok).sum())
        if ok.any():
            mean_c[delta0] = math.fsum(results[i, ok, -1]) / int(ok.sum())
        for j, name in enumerate(cfg.estimators):
            e = results[i, ok, j]
            if e.size == 0:
                rows.append(RiskRow(delta0, name, math.nan, math.nan, math.nan, math.nan, 0,
                                    failures))
                continue
            mse, mse_se = _summary(e * e)
            bias, bias_se = _summary(e)
            rows.append(RiskRow(delta0, name, mse, mse_se, bias, bias_se, int(e.size), failures))
    return RiskCurve(rows, mean_c)


def with_bias(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, bias=replace(cfg.bias, **changes))
