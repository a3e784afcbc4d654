"""Loss functions ``tau(|d - theta|)`` and their truncations ``min(tau, M)``.

Power losses ``|x|^k`` cover the squared and absolute error cases; the Huber
loss is an extra member of the admissible class (increasing on ``[0, inf)``,
zero at zero, truncations Lipschitz).  The 0-1 testing loss is rejected.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError, InputError

FAMILIES = ("power", "huber")


@dataclass(frozen=True)
class Loss:
    family: str = "power"
    k: float = 2.0
    delta: float = 1.0
    trunc: float = math.inf

    def __post_init__(self):
        if self.family in ("indicator", "zero_one", "testing"):
            raise AssumptionError(
                "the hypothesis-testing loss 1{|d - theta| > c} is not admissible",
                assumption="Assumption 4",
            )
        if self.family not in FAMILIES:
            raise InputError(f"unknown loss family {self.family!r}")
        if self.family == "power" and not self.k >= 1:
            raise InputError(f"power loss needs k >= 1, got {self.k}")
        if self.family == "huber" and not self.delta > 0:
            raise InputError(f"huber loss needs delta > 0, got {self.delta}")
        if not self.trunc > 0:
            raise InputError(f"truncation level must be positive, got {self.trunc}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "trunc", float(self.trunc))

    @classmethod
    def power(cls, k: float = 2.0, trunc: float = math.inf) -> "Loss":
        return cls("power", k=k, trunc=trunc)

    @classmethod
    def absolute(cls, trunc: float = math.inf) -> "Loss":
        return cls("power", k=1.0, trunc=trunc)

    @classmethod
    def huber(cls, delta: float = 1.0, trunc: float = math.inf) -> "Loss":
        return cls("huber", delta=delta, trunc=trunc)

    def __call__(self, x):
        return tau_trunc(self, self.trunc, x) if math.isfinite(self.trunc) else tau(self, x)

    def lipschitz(self, M: float) -> float:
        """Lipschitz constant of ``min(tau, M)`` on the real line."""
        if self.family == "huber":
            return self.delta
        return self.k * M ** ((self.k - 1.0) / self.k)

    def __str__(self) -> str:
        if self.family == "huber":
            return f"huber(delta={self.delta!r})"
        return "abs" if self.k == 1.0 else f"power(k={self.k!r})"


def tau(loss: Loss, x):
    """Untruncated loss of ``|x|``; ``+inf`` maps to ``+inf``."""
    ax = np.abs(np.asarray(x, dtype=float))
    if loss.family == "huber":
        d = loss.delta
        return np.where(ax <= d, 0.5 * ax * ax, d * (ax - 0.5 * d))
    if loss.k == 2.0:
        return ax * ax
    if loss.k == 1.0:
        return ax
    return ax**loss.k


def tau_trunc(loss: Loss, M: float, x):
    if not M > 0:
        raise InputError(f"truncation level must be positive, got {M}")
    return np.minimum(tau(loss, x), M)


def risk_over_shifts(loss: Loss, d_sorted: np.ndarray, shifts: np.ndarray,
                     a: float = 1.0, M: float = math.inf,
                     prefix: tuple | None = None) -> np.ndarray:
    """``mean_i min(tau(a |D_i + c|), M)`` for every ``c`` in ``shifts``.

    ``d_sorted`` must be sorted ascending.  Squared and absolute power losses
    use prefix sums over the sorted sample (O(log L) per shift); other losses
    fall back to dense evaluation.
    """
    shifts = np.asarray(shifts, dtype=float)
    L = d_sorted.size
    if a == 0.0:
        return np.zeros(shifts.shape)
    if loss.family != "power" or loss.k not in (1.0, 2.0):
        out = np.empty(shifts.shape)
        for j, c in enumerate(shifts):
            out[j] = np.minimum(tau(loss, a * (d_sorted + c)), M).mean()
        return out
    if prefix is None:
        prefix = prefix_sums(d_sorted)
    p1, p2 = prefix
    k = loss.k
    half = (M ** (1.0 / k)) / a if math.isfinite(M) else math.inf
    lo = np.searchsorted(d_sorted, -shifts - half, side="right")
    hi = np.searchsorted(d_sorted, -shifts + half, side="left")
    hi = np.maximum(hi, lo)
    m = hi - lo
    s1 = p1[hi] - p1[lo]
    if k == 2.0:
        s2 = p2[hi] - p2[lo]
        inner = a * a * (s2 + 2.0 * shifts * s1 + m * shifts * shifts)
    else:
        mid = np.clip(np.searchsorted(d_sorted, -shifts, side="left"), lo, hi)
        upper = (p1[hi] - p1[mid]) + (hi - mid) * shifts
        lower = (p1[mid] - p1[lo]) + (mid - lo) * shifts
        inner = a * (upper - lower)
    capped = (L - m) * M if math.isfinite(M) else 0.0
    return (np.maximum(inner, 0.0) + capped) / L


def prefix_sums(d_sorted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p1 = np.concatenate([[0.0], np.cumsum(d_sorted)])
    p2 = np.concatenate([[0.0], np.cumsum(d_sorted * d_sorted)])
    return p1, p2


def parse_loss(text: str, trunc: float = math.inf) -> Loss:
    """``power(k=2)`` | ``abs`` | ``huber(delta=1.0)``; ``indicator(...)`` is refused."""
    text = text.strip()
    try:
        node = ast.parse(text, mode="eval").body
    except SyntaxError:
        raise InputError(f"malformed loss specification {text!r}") from None
    if isinstance(node, ast.Name):
        name, kwargs = node.id, {}
    elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.args:
        name = node.func.id
        try:
            kwargs = {kw.arg: float(ast.literal_eval(kw.value)) for kw in node.keywords}
        except (ValueError, TypeError):
            raise InputError(f"loss parameters must be numbers in {text!r}") from None
    else:
        raise InputError(f"malformed loss specification {text!r}")
    if name in ("abs", "absolute"):
        return Loss.absolute(trunc=trunc)
    if name in ("square", "squared"):
        return Loss.power(2.0, trunc=trunc)
    if name == "power":
        return Loss.power(kwargs.get("k", 2.0), trunc=trunc)
    if name == "huber":
        return Loss.huber(kwargs.get("delta", 1.0), trunc=trunc)
    return Loss(name)
