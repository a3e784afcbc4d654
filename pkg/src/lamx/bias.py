"""Simulated risk surface and the bias-adjustment constant.

For draws ``xi_i ~ N(0, I_d)``, ``i = 1..L``, and the data-driven derivative
approximation ``gn(z) = g(z + (beta_hat - g(beta_hat)) / eps_n)`` the
simulated surface is

    B(c; a) = sup_{r in [-M1, M1]^d} (1/L) sum_i min(tau(a |gn(S xi_i + r) - gn(r) + c|), M1)

with ``S`` the symmetric square root of ``Sigma_hat``.  The adjustment
``c_hat`` is the midpoint of the set of grid values of ``c`` whose surface
value lies within ``eta`` of the grid minimum.  All points of the ``c`` grid
and all candidate shifts share the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .gmap import GMap, gn_offset
from .loss import Loss
from .sampling import draw_xi, sym_sqrt
from .surface import SearchSettings, ShiftObjective, SupEnvelope


@dataclass(frozen=True)
class BiasConfig:
    """Simulation and search knobs for the bias adjustment.

    ``eps_n`` defaults to ``eps_scale * n**(-eps_power)`` (``n**(-1/3)``);
    ``eps_rule="log"`` switches to ``n**(-1/2) * log(n)``.  ``eta`` defaults to
    ``n**(-1/12) + L**(-1/4)``, which goes to zero while
    ``eta * eps_n * sqrt(n)`` and ``eta * sqrt(L)`` diverge.
    """

    L: int = 1000
    M1: float = 8.0
    eps_rule: str = "power"
    eps_power: float = 1.0 / 3.0
    eps_scale: float = 1.0
    eps_n: float | None = None
    eta_n_power: float = 1.0 / 12.0
    eta_L_power: float = 0.25
    eta: float | None = None
    c_grid: int = 401
    r_grid: int = 9
    n_starts: int = 5
    max_iter: int = 200
    xtol: float = 1e-3
    ftol: float = 1e-7
    refine_rounds: int = 2
    antithetic: bool = False
    seed: int = 0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise InputError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.L < 1:
            out.append(f"L must be >= 1, got {self.L}")
        if not self.M1 > 0:
            out.append(f"M1 must be positive, got {self.M1}")
        if self.c_grid < 2 or self.r_grid < 2:
            out.append("grid resolutions must be >= 2")
        if self.eps_rule not in ("power", "log"):
            out.append(f"eps_rule must be 'power' or 'log', got {self.eps_rule!r}")
        if self.eps_n is not None and not self.eps_n > 0:
            out.append(f"eps_n must be positive, got {self.eps_n}")
        if self.eta is not None and not self.eta >= 0:
            out.append(f"eta must be non-negative, got {self.eta}")
        if self.antithetic and self.L % 2:
            out.append("antithetic draws need an even L")
        if self.n_starts < 0 or self.max_iter < 1 or self.refine_rounds < 0:
            out.append("n_starts, refine_rounds must be >= 0 and max_iter >= 1")
        return out

    def eps_for(self, n: int) -> float:
        if self.eps_n is not None:
            return float(self.eps_n)
        if n < 1:
            raise InputError(f"sample size must be >= 1, got {n}")
        if self.eps_rule == "log":
            return max(math.log(n), 1.0) / math.sqrt(n)
        return self.eps_scale * n ** (-self.eps_power)

    def eta_for(self, n: int) -> float:
        if self.eta is not None:
            return float(self.eta)
        return n ** (-self.eta_n_power) + self.L ** (-self.eta_L_power)

    @property
    def search(self) -> SearchSettings:
        return SearchSettings(self.r_grid, self.n_starts, self.max_iter, self.xtol, self.ftol)

    def c_values(self) -> np.ndarray:
        return np.linspace(-self.M1, self.M1, self.c_grid)

    def draws(self, d: int) -> np.ndarray:
        return draw_xi(self.L, d, self.seed, antithetic=self.antithetic)


@dataclass
class BHatDetail:
    value: float
    argsup_r: np.ndarray
    se: float
    grid_values: np.ndarray
    n_evals: int


@dataclass
class RiskSurfaceResult:
    c_hat: float
    E_hat_lo: float
    E_hat_hi: float
    B_min: float
    c_values: np.ndarray
    b_values: np.ndarray
    in_E_hat: np.ndarray
    argsup_r: np.ndarray | None
    eta: float
    eps_n: float
    a: float
    L: int
    M1: float
    seed: int
    n_evals: int = 0
    n_refined: int = 0
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)


def _problem(a, g: GMap, loss: Loss, beta_hat, sigma_hat, cfg: BiasConfig, eps_n, xi):
    if not a >= 0:
        raise InputError(f"a must be non-negative, got {a}")
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != (g.dim,):
        raise InputError(f"beta_hat must have length {g.dim}")
    root = sym_sqrt(sigma_hat, "Sigma_hat")
    if root.shape[0] != g.dim:
        raise InputError(f"Sigma_hat must be {g.dim} x {g.dim}")
    xi = cfg.draws(g.dim) if xi is None else np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[1] != g.dim:
        raise InputError(f"xi must have shape (L, {g.dim})")
    off = gn_offset(g, beta_hat, eps_n)
    return ShiftObjective(g, xi @ root, loss, a, cfg.M1, offset=off)


def _eps(cfg: BiasConfig, n, eps_n):
    if eps_n is not None:
        if not eps_n > 0:
            raise InputError(f"eps_n must be positive, got {eps_n}")
        return float(eps_n)
    if n is None:
        raise InputError("pass either the sample size n or eps_n")
    return cfg.eps_for(n)


def b_hat_detail(c: float, a: float, g: GMap, loss: Loss, beta_hat, sigma_hat,
                 cfg: BiasConfig, *, n: int | None = None, eps_n: float | None = None,
                 xi=None) -> BHatDetail:
    if abs(c) > cfg.M1:
        raise InputError(f"c must lie in [-M1, M1] = [{-cfg.M1}, {cfg.M1}], got {c}")
    obj = _problem(a, g, loss, beta_hat, sigma_hat, cfg, _eps(cfg, n, eps_n), xi)
    env = SupEnvelope(obj, cfg.M1, np.array([float(c)]), cfg.search)
    grid_values = env.rows[: env.n_grid, 0].copy()
    env.refine(0)
    i = int(env.argsup()[0])
    losses = obj.losses(env.increments_for(i), c)
    return BHatDetail(
        value=float(env.envelope()[0]),
        argsup_r=env.shifts[i],
        se=float(losses.std(ddof=1) / math.sqrt(losses.size)) if losses.size > 1 else 0.0,
        grid_values=grid_values,
        n_evals=obj.n_evals,
    )


def b_hat(c: float, a: float, g: GMap, loss: Loss, beta_hat, sigma_hat,
          cfg: BiasConfig, *, n: int | None = None, eps_n: float | None = None,
          xi=None) -> float:
    """Simulated worst-case risk at a single bias constant ``c``."""
    return b_hat_detail(c, a, g, loss, beta_hat, sigma_hat, cfg, n=n, eps_n=eps_n, xi=xi).value


def near_minimizers(values: np.ndarray, eta: float) -> np.ndarray:
    return values <= values.min() + eta


def c_hat(a: float, g: GMap, loss: Loss, beta_hat, sigma_hat, n: int,
          cfg: BiasConfig, *, xi=None, eps_n: float | None = None) -> RiskSurfaceResult:
    """Bias adjustment: midpoint of the near-minimiser set of the simulated surface.

    The search is refined (multistart Nelder-Mead) at the current grid
    minimiser and at both ends of the near-minimiser set, for up to
    ``cfg.refine_rounds`` rounds or until those points stop moving.
    """
    if n < 1:
        raise InputError(f"sample size must be >= 1, got {n}")
    eps = _eps(cfg, n, eps_n)
    eta = cfg.eta_for(n)
    cs = cfg.c_values()
    obj = _problem(a, g, loss, beta_hat, sigma_hat, cfg, eps, xi)
    if a == 0:
        zeros = np.zeros_like(cs)
        return RiskSurfaceResult(
            0.0, float(cs[0]), float(cs[-1]), 0.0, cs, zeros, np.ones(cs.size, bool), None,
            eta, eps, 0.0, obj.L, cfg.M1, cfg.seed, degenerate=True,
            notes=["a = 0: every c minimises the surface; c_hat set to 0"],
        )
    env = SupEnvelope(obj, cfg.M1, cs, cfg.search)
    done: set[int] = set()
    for _ in range(cfg.refine_rounds):
        B = env.envelope()
        idx = np.flatnonzero(near_minimizers(B, eta))
        probes = {int(np.argmin(B)), int(idx[0]), int(idx[-1])} - done
        if not probes:
            break
        for j in sorted(probes):
            env.refine(j)
            done.add(j)
    B = env.envelope()
    inE = near_minimizers(B, eta)
    idx = np.flatnonzero(inE)
    lo, hi = float(cs[idx[0]]), float(cs[idx[-1]])
    jmin = int(np.argmin(B))
    return RiskSurfaceResult(
        c_hat=0.5 * (lo + hi), E_hat_lo=lo, E_hat_hi=hi, B_min=float(B[jmin]),
        c_values=cs, b_values=B, in_E_hat=inE,
        argsup_r=env.shifts[int(env.argsup()[jmin])],
        eta=eta, eps_n=eps, a=float(a), L=obj.L, M1=cfg.M1, seed=cfg.seed,
        n_evals=obj.n_evals, n_refined=env.n_refined,
    )
