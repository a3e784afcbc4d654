"""Worst-case shift search shared by the simulated and population risk surfaces.

Both surfaces have the form

    B(c) = sup_r  mean_i  min(tau(a |h(W_i + r) - h(r) + c|), M)

for an equivariant map ``h`` and a fixed draw matrix ``W``.  Translation
equivariance makes the objective constant along ``r + t*1``, so every shift is
first moved to its centred representative ``r - (max r + min r)/2``; this keeps
it in the box and lets equivalent grid points be evaluated once.

The supremum is approximated by a pool of candidate shifts: a coarse grid,
optional limit directions (``r -> inf`` along a pattern), and bounded
Nelder-Mead refinements started from the best pool members at selected
``c`` values.  The envelope over the pool is the reported surface, so it never
falls below any coarse-grid value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .loss import Loss, prefix_sums, risk_over_shifts, tau

_ROW_CHUNK = 16


@dataclass(frozen=True)
class SearchSettings:
    grid_pts: int = 9
    n_starts: int = 5
    max_iter: int = 200
    xtol: float = 1e-3
    ftol: float = 1e-7

    def __post_init__(self):
        if self.grid_pts < 2:
            raise ValueError("grid_pts must be >= 2")
        if self.n_starts < 0 or self.max_iter < 1:
            raise ValueError("n_starts must be >= 0 and max_iter >= 1")


def centre(r: np.ndarray) -> np.ndarray:
    r = np.atleast_2d(r)
    return r - 0.5 * (r.max(axis=1, keepdims=True) + r.min(axis=1, keepdims=True))


def canonical_grid(d: int, box: float, pts: int) -> np.ndarray:
    """Distinct centred representatives of the ``pts**d`` grid on ``[-box, box]^d``."""
    axis = np.linspace(-box, box, pts)
    grid = np.array(list(itertools.product(axis, repeat=d)))
    c = centre(grid)
    _, first = np.unique(np.round(c, 12), axis=0, return_index=True)
    return c[np.sort(first)]


class ShiftObjective:
    """``Phi(c, r)`` for a map ``h``, draws ``W`` (L x d) and an inner offset.

    ``offset`` is added to every argument of ``h``; the simulated surface uses
    it to turn ``g`` into the data-driven derivative approximation.
    """

    def __init__(self, h, W: np.ndarray, loss: Loss, a: float, M: float = math.inf,
                 offset: np.ndarray | None = None):
        self.h = h
        self.W = np.asarray(W, dtype=float)
        self.loss = loss
        self.a = float(a)
        self.M = float(M)
        self.offset = np.zeros(self.W.shape[1]) if offset is None else np.asarray(offset, float)
        self.n_evals = 0

    @property
    def L(self) -> int:
        return self.W.shape[0]

    def increments(self, r: np.ndarray) -> np.ndarray:
        z = r + self.offset
        return self.h(self.W + z) - self.h(z)

    def losses(self, d: np.ndarray, c: float) -> np.ndarray:
        v = tau(self.loss, self.a * (d + c))
        return np.minimum(v, self.M) if math.isfinite(self.M) else v

    def value(self, r: np.ndarray, c: float) -> float:
        self.n_evals += 1
        return float(self.losses(self.increments(r), c).mean())

    def curve(self, d: np.ndarray, cs: np.ndarray) -> np.ndarray:
        ds = np.sort(d)
        return risk_over_shifts(self.loss, ds, cs, self.a, self.M, prefix_sums(ds))


class SupEnvelope:
    """Pool of candidate shifts and their risk curves over a fixed ``c`` grid."""

    def __init__(self, obj: ShiftObjective, box: float, cs: np.ndarray,
                 settings: SearchSettings, limit_maps=()):
        self.obj = obj
        self.box = float(box)
        self.cs = np.asarray(cs, dtype=float)
        self.settings = settings
        d = obj.W.shape[1]
        self.shifts: list[np.ndarray | None] = []
        self.sources: list[object] = []
        grid = canonical_grid(d, self.box, settings.grid_pts)
        rows = [self._curves(grid[i:i + _ROW_CHUNK]) for i in range(0, len(grid), _ROW_CHUNK)]
        self.rows = np.vstack(rows)
        self.shifts.extend(grid)
        self.sources.extend(["grid"] * len(grid))
        self.n_grid = len(grid)
        for lm in limit_maps:
            # r -> inf along a pattern: the increment tends to lm(W)
            self._append(None, obj.curve(lm(obj.W), self.cs)[None, :], lm)
        self.n_refined = 0

    def _curves(self, R: np.ndarray) -> np.ndarray:
        inc = self.obj.h(self.obj.W[None, :, :] + (R + self.obj.offset)[:, None, :]) \
            - self.obj.h(R + self.obj.offset)[:, None]
        return np.vstack([self.obj.curve(row, self.cs) for row in inc])

    def _append(self, r, row, source):
        self.rows = np.vstack([self.rows, row])
        self.shifts.append(r)
        self.sources.append(source)

    def refine(self, j: int) -> None:
        """Nelder-Mead from the best ``n_starts`` box candidates at ``cs[j]``."""
        s = self.settings
        if s.n_starts == 0:
            return
        box_idx = [i for i, r in enumerate(self.shifts) if r is not None]
        order = sorted(box_idx, key=lambda i: (-self.rows[i, j], i))[: s.n_starts]
        d = self.obj.W.shape[1]
        c = float(self.cs[j])
        step = self.box / max(s.grid_pts - 1, 1)
        bounds = [(-self.box, self.box)] * d
        for i in order:
            x0 = np.clip(self.shifts[i], -self.box, self.box)
            simplex = [x0]
            for k in range(d):
                v = x0.copy()
                v[k] = v[k] + step if v[k] + step <= self.box else v[k] - step
                simplex.append(v)
            res = minimize(
                lambda r: -self.obj.value(np.clip(r, -self.box, self.box), c),
                x0, method="Nelder-Mead", bounds=bounds,
                options={"maxiter": s.max_iter, "xatol": s.xtol, "fatol": s.ftol,
                         "initial_simplex": np.array(simplex)},
            )
            r = centre(np.clip(res.x, -self.box, self.box))[0]
            self._append(r, self._curves(r[None, :]), "refine")
            self.n_refined += 1

    def envelope(self) -> np.ndarray:
        return self.rows.max(axis=0)

    def argsup(self) -> np.ndarray:
        return self.rows.argmax(axis=0)

    def increments_for(self, i: int) -> np.ndarray:
        r = self.shifts[i]
        if r is None:
            return self.sources[i](self.obj.W)
        return self.obj.increments(r)
