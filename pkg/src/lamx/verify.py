"""Self-checks of the package's mathematical invariants with fixed seeds.

``run_checks("quick")`` takes well under a minute; ``"full"`` adds larger
randomised suites and the Monte Carlo bound checks.  Each check returns
``(passed, detail)``; :func:`run_checks` returns one :class:`CheckResult`
per check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import bias, bound, gmap, loss as loss_mod
from .kink import KinkMap
from .sampling import draw_xi, make_rng

REL_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name} ({self.seconds:.2f}s): {self.detail}"


def random_points(rng: np.random.Generator, n: int, d: int, tie_fraction: float = 0.25):
    """Gaussian points; a fraction get two coordinates forced equal to exercise ties."""
    x = rng.normal(scale=3.0, size=(n, d))
    if d > 1:
        k = int(n * tie_fraction)
        i = rng.integers(0, d, size=k)
        j = (i + rng.integers(1, d, size=k)) % d
        x[np.arange(k), j] = x[np.arange(k), i]
    return x


def equivariance_errors(g, X, Z, c, u) -> dict[str, float]:
    """Largest scaled violation of each identity over the stacked points.

    Each residual is divided by ``1 + |c| + |x| + |z|`` (scaled by ``1 + u``
    where ``u`` multiplies), so a threshold of ``1e-9`` is a relative tolerance.
    """
    nx = np.abs(X).max(axis=1)
    nz = np.abs(Z).max(axis=1)
    scale = 1.0 + np.abs(c) + nx + nz
    ones = np.ones(g.dim)
    gx = gmap.evaluate(g, X)
    dd = gmap.dderiv(g, X, Z)
    cc = c[:, None]
    uu = u[:, None]
    out = {
        "translation": np.abs(gmap.evaluate(g, X + cc * ones) - (gx + c)) / scale,
        "scale": np.abs(gmap.evaluate(g, uu * X) - u * gx) / ((1 + u) * scale),
        "deriv_at_origin": np.abs(gmap.dderiv(g, np.zeros(g.dim), Z) - gmap.evaluate(g, Z)) / scale,
        "deriv_shift_point": np.abs(gmap.dderiv(g, X + cc * ones, Z) - dd) / scale,
        "deriv_shift_direction": np.abs(gmap.dderiv(g, X, Z + cc * ones) - (dd + c)) / scale,
        "deriv_scale_both": np.abs(gmap.dderiv(g, uu * X, uu * Z) - u * dd) / ((1 + u) * scale),
        "deriv_scale_direction": np.abs(gmap.dderiv(g, X, uu * Z) - u * dd) / ((1 + u) * scale),
    }
    return {k: float(v.max()) for k, v in out.items()}


def check_equivariance(n_maps: int, n_points: int, seed: int = 1) -> tuple[bool, str]:
    rng = make_rng(seed)
    worst = {}
    for _ in range(n_maps):
        d = int(rng.integers(1, 7))
        g = gmap.random_gmap(rng, d, depth=3)
        X = random_points(rng, n_points, d)
        Z = random_points(rng, n_points, d)
        c = rng.normal(scale=5.0, size=n_points)
        u = rng.uniform(0.0, 10.0, size=n_points)
        for k, v in equivariance_errors(g, X, Z, c, u).items():
            worst[k] = max(worst.get(k, 0.0), v)
    bad = {k: v for k, v in worst.items() if not v <= REL_TOL}
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    if bad:
        detail = f"violated: {', '.join(bad)}; {detail}"
    return not bad, f"{n_maps} maps x {n_points} points; {detail}"


def check_lipschitz_and_fd(n_maps: int, n_points: int, seed: int = 2) -> tuple[bool, str]:
    rng = make_rng(seed)
    worst_lip, worst_fd = -np.inf, 0.0
    t = 1e-8
    for _ in range(n_maps):
        d = int(rng.integers(1, 7))
        g = gmap.random_gmap(rng, d, depth=3)
        X = random_points(rng, n_points, d)
        Z1 = rng.normal(size=(n_points, d))
        Z2 = rng.normal(size=(n_points, d))
        gap = np.abs(gmap.dderiv(g, X, Z1) - gmap.dderiv(g, X, Z2))
        bound_ = g.lipschitz * np.abs(Z1 - Z2).max(axis=1)
        worst_lip = max(worst_lip, float((gap - bound_).max()))
        fd = (gmap.evaluate(g, X + t * Z1) - gmap.evaluate(g, X)) / t
        scale = 1.0 + np.abs(X).max(axis=1) + np.abs(Z1).max(axis=1)
        worst_fd = max(worst_fd, float((np.abs(fd - gmap.dderiv(g, X, Z1)) / scale).max()))
    ok = worst_lip <= 1e-12 and worst_fd <= 1e-5
    return ok, f"max(|dg| - K|dz|)={worst_lip:.1e}, finite-difference gap={worst_fd:.1e}"


def check_loss(n_pairs: int, seed: int = 3) -> tuple[bool, str]:
    rng = make_rng(seed)
    worst = 0.0
    for lo in (loss_mod.Loss.power(2.0), loss_mod.Loss.absolute(), loss_mod.Loss.power(3.0),
               loss_mod.Loss.huber(1.5)):
        for M in (0.5, 5.0, 50.0):
            x = rng.normal(scale=4.0, size=n_pairs)
            y = rng.normal(scale=4.0, size=n_pairs)
            lhs = np.abs(loss_mod.tau_trunc(lo, M, x) - loss_mod.tau_trunc(lo, M, y))
            worst = max(worst, float((lhs - lo.lipschitz(M) * np.abs(x - y)).max()))
            grid = np.sort(np.abs(x))
            if np.any(np.diff(loss_mod.tau_trunc(lo, M, grid)) < 0):
                return False, f"{lo} truncated at {M} not monotone"
            if np.any(loss_mod.tau_trunc(lo, M, x) > loss_mod.tau_trunc(lo, 2 * M, x)):
                return False, f"{lo} not monotone in M"
        if loss_mod.tau(lo, 0.0) != 0.0:
            return False, f"{lo}: tau(0) != 0"
    return worst <= 1e-9, f"Lipschitz excess {worst:.1e}"


def check_kink(n_pairs: int, seed: int = 4) -> tuple[bool, str]:
    rng = make_rng(seed)
    for f in (KinkMap.relu(), KinkMap.abs(0.5), KinkMap(2.0, -0.5, 1.0, 3.0)):
        x = rng.normal(scale=3.0, size=n_pairs)
        y = rng.normal(scale=3.0, size=n_pairs)
        if np.any(np.abs(f(x) - f(y)) > f.max_slope * np.abs(x - y) + 1e-12):
            return False, f"{f} not a {f.max_slope}-contraction"
        if f(f.xbar) != f.fxbar:
            return False, f"{f} discontinuous at the kink"
    return True, "contraction and continuity hold"


def check_draws() -> tuple[bool, str]:
    a = draw_xi(64, 3, 99)
    b = draw_xi(64, 3, 99)
    return bool(np.array_equal(a, b)), "identical seeds give identical draws"


def check_surface(seed: int = 5) -> tuple[bool, str]:
    g = gmap.max_map(2)
    sig = np.array([[1.0, 0.3], [0.3, 2.0]])
    beta = np.array([0.0, 0.1])
    cfg = bias.BiasConfig(L=400, c_grid=41, r_grid=5, n_starts=1, seed=seed)
    small = bias.c_hat(1.0, g, loss_mod.Loss.power(2.0), beta, sig, 300,
                       replace(cfg, M1=4.0))
    lo = bias.c_hat(1.0, g, loss_mod.Loss.power(2.0), beta, sig, 300, cfg)
    ok = bool(np.all(lo.b_values >= 0)) and lo.E_hat_lo <= lo.c_hat <= lo.E_hat_hi
    ok &= small.E_hat_lo <= small.c_hat <= small.E_hat_hi
    return ok, f"c_hat={lo.c_hat:.3f} in [{lo.E_hat_lo:.2f}, {lo.E_hat_hi:.2f}]"


def check_truncation_order(seed: int = 6) -> tuple[bool, str]:
    g = gmap.max_map(2)
    sig = np.eye(2)
    beta = np.zeros(2)
    xi = draw_xi(500, 2, seed)
    vals = []
    for M1 in (2.0, 4.0):
        cfg = bias.BiasConfig(L=500, M1=M1, r_grid=5, n_starts=0)
        vals.append(bias.b_hat(0.5, 1.0, g, loss_mod.Loss.power(2.0), beta, sig, cfg,
                               n=300, xi=xi))
    return vals[0] <= vals[1], f"B(M1=2)={vals[0]:.4f} <= B(M1=4)={vals[1]:.4f}"


def check_tied_max_bound(mc_size: int = 100_000) -> tuple[bool, str]:
    spec = bound.BoundSpec(gmap.max_map(2), KinkMap.make_identity(), (0.0, 0.0), np.eye(2),
                           loss_mod.Loss.power(2.0), mc_size=mc_size)
    res = bound.minimax_bound(spec)
    ok = abs(res.value - 1.0) <= 0.05 and abs(res.c_star) <= 0.05
    return ok, f"value={res.value:.4f}, c*={res.c_star:.3f} (expected 1, 0)"


def check_power_scaling() -> tuple[bool, str]:
    g = gmap.max_map(2)
    sig = np.eye(2)
    xi = draw_xi(2000, 2, 11)
    cfg = bias.BiasConfig(L=2000, M1=40.0, c_grid=201, r_grid=9, n_starts=2)
    lo = loss_mod.Loss.power(2.0)
    base = bias.c_hat(1.0, g, lo, np.zeros(2), sig, 300, cfg, xi=xi).B_min
    worst = 0.0
    for s in (0.5, 2.0):
        val = bias.c_hat(s, g, lo, np.zeros(2), sig, 300, cfg, xi=xi).B_min
        worst = max(worst, abs(val - s * s * base) / (s * s * base))
    return worst <= 0.02, f"max relative gap {worst:.2e}"


QUICK = [
    ("gmap_equivariance_derivative", lambda: check_equivariance(200, 200)),
    ("gmap_lipschitz_finite_difference", lambda: check_lipschitz_and_fd(100, 200)),
    ("loss_properties", lambda: check_loss(10_000)),
    ("kink_properties", lambda: check_kink(10_000)),
    ("draw_determinism", check_draws),
    ("bias_surface_sanity", check_surface),
    ("bias_truncation_order", check_truncation_order),
]

FULL = [
    ("gmap_equivariance_derivative_large", lambda: check_equivariance(1000, 1000)),
    ("gmap_lipschitz_finite_difference_large", lambda: check_lipschitz_and_fd(500, 1000)),
    ("loss_properties_large", lambda: check_loss(100_000)),
    ("power_scaling", check_power_scaling),
    ("tied_max_bound", check_tied_max_bound),
]


def run_checks(level: str = "quick") -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    checks = QUICK + (FULL if level == "full" else [])
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, reported as such
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results


def all_passed(results) -> bool:
    return all(r.passed for r in results)


__all__ = ["CheckResult", "run_checks", "all_passed", "equivariance_errors"]
