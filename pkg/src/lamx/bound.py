"""Population risk bound ``B(c; a)`` built from the analytic directional derivative.

    B(c; a) = sup_{r in R^d} E tau(a |g0(Z + r) - g0(r) + c|),   Z ~ N(0, Sigma),

where ``g0(z)`` is the directional derivative of ``g`` at the true parameter.
The expectation is a Monte Carlo average; the supremum over ``R^d`` is
approximated on the box ``[-R, R]^d`` plus the exact limits of the objective
as ``r -> inf`` along each sign pattern in ``{-1, 0, 1}^d``.  Those limits are
available in closed form: along ``t * rho`` the increment converges to the
directional derivative of ``g0`` at ``rho`` in the direction ``Z``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .gmap import GMap, evaluate
from .kink import KinkMap, slope_scale
from .loss import Loss
from .sampling import draw_xi, sym_sqrt
from .surface import SearchSettings, ShiftObjective, SupEnvelope


@dataclass(frozen=True)
class BoundSpec:
    g: GMap
    f: KinkMap
    beta0: tuple
    Sigma: tuple
    loss: Loss
    mc_size: int = 100_000
    M1: float = 8.0
    c_grid: int = 401
    r_grid: int = 9
    n_starts: int = 5
    max_iter: int = 200
    refine_rounds: int = 2
    box: float | None = None
    limit_probes: bool = True
    seed: int = 0

    def __post_init__(self):
        beta0 = tuple(float(v) for v in np.asarray(self.beta0, dtype=float).ravel())
        sigma = np.atleast_2d(np.asarray(self.Sigma, dtype=float))
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "Sigma", tuple(map(tuple, sigma)))
        if len(beta0) != self.g.dim or sigma.shape != (self.g.dim, self.g.dim):
            raise InputError(f"beta0 and Sigma must match the map dimension {self.g.dim}")
        if self.mc_size < 2 or self.c_grid < 2 or self.r_grid < 2:
            raise InputError("mc_size and grid resolutions must be >= 2")
        if not self.M1 > 0:
            raise InputError("M1 must be positive")
        sym_sqrt(sigma)

    @property
    def sigma(self) -> np.ndarray:
        return np.array(self.Sigma)

    @property
    def radius(self) -> float:
        if self.box is not None:
            return float(self.box)
        return max(self.M1, 8.0 * math.sqrt(float(np.max(np.diag(self.sigma)))))

    @property
    def search(self) -> SearchSettings:
        return SearchSettings(self.r_grid, self.n_starts, self.max_iter)

    def c_values(self) -> np.ndarray:
        return np.linspace(-self.M1, self.M1, self.c_grid)


@dataclass
class BPopDetail:
    value: float
    se: float
    source: object


@dataclass
class BoundResult:
    c_star: float
    value: float
    s: float
    se: float
    eta: float
    c_values: np.ndarray
    b_values: np.ndarray
    in_set: np.ndarray
    mc_size: int
    seed: int
    degenerate: bool = False


def limit_maps(h: GMap) -> list[GMap]:
    """Distinct limit increments ``z -> h'(rho; z)`` over sign patterns ``rho``."""
    seen, out = set(), []
    for rho in itertools.product((-1.0, 0.0, 1.0), repeat=h.dim):
        rho = np.array(rho)
        if np.all(rho == rho[0]):
            continue
        lm = h.derivative_map(rho)
        key = str(lm)
        if key not in seen:
            seen.add(key)
            out.append(lm)
    return out


def _envelope(spec: BoundSpec, a: float, cs: np.ndarray) -> tuple[SupEnvelope, ShiftObjective]:
    if not a >= 0:
        raise InputError(f"a must be non-negative, got {a}")
    h = spec.g.derivative_map(np.array(spec.beta0))
    Z = draw_xi(spec.mc_size, spec.g.dim, spec.seed) @ sym_sqrt(spec.sigma)
    obj = ShiftObjective(h, Z, spec.loss, a, spec.loss.trunc)
    lims = limit_maps(h) if spec.limit_probes else ()
    return SupEnvelope(obj, spec.radius, cs, spec.search, lims), obj


def _se(obj: ShiftObjective, env: SupEnvelope, i: int, c: float) -> float:
    v = obj.losses(env.increments_for(i), c)
    return float(v.std(ddof=1) / math.sqrt(v.size))


def b_pop_detail(c: float, a: float, spec: BoundSpec) -> BPopDetail:
    env, obj = _envelope(spec, a, np.array([float(c)]))
    env.refine(0)
    i = int(env.argsup()[0])
    return BPopDetail(float(env.envelope()[0]), _se(obj, env, i, c), env.sources[i])


def b_pop(c: float, a: float, spec: BoundSpec) -> float:
    """Monte Carlo value of the population worst-case risk at bias constant ``c``."""
    return b_pop_detail(c, a, spec).value


def minimax_bound(spec: BoundSpec) -> BoundResult:
    """``inf_c B(c; s)`` with ``s`` the slope scale of ``f`` at ``g(beta0)``.

    ``c_star`` is the midpoint of the grid points within ``eta = 2 * SE`` of
    the grid minimum, SE being the Monte Carlo standard error of the
    minimal value.
    """
    beta0 = np.array(spec.beta0)
    s = slope_scale(spec.f, float(evaluate(spec.g, beta0)))
    cs = spec.c_values()
    if s == 0.0:
        zeros = np.zeros_like(cs)
        return BoundResult(0.0, 0.0, 0.0, 0.0, 0.0, cs, zeros, np.ones(cs.size, bool),
                           spec.mc_size, spec.seed, degenerate=True)
    env, obj = _envelope(spec, s, cs)
    done: set[int] = set()
    for _ in range(spec.refine_rounds):
        B = env.envelope()
        j = int(np.argmin(B))
        eta = 2.0 * _se(obj, env, int(env.argsup()[j]), float(cs[j]))
        idx = np.flatnonzero(B <= B[j] + eta)
        probes = {j, int(idx[0]), int(idx[-1])} - done
        if not probes:
            break
        for p in sorted(probes):
            env.refine(p)
            done.add(p)
    B = env.envelope()
    j = int(np.argmin(B))
    se = _se(obj, env, int(env.argsup()[j]), float(cs[j]))
    eta = 2.0 * se
    inset = B <= B[j] + eta
    idx = np.flatnonzero(inset)
    return BoundResult(
        c_star=0.5 * float(cs[idx[0]] + cs[idx[-1]]), value=float(B[j]), s=s, se=se,
        eta=eta, c_values=cs, b_values=B, in_set=inset, mc_size=spec.mc_size, seed=spec.seed,
    )
