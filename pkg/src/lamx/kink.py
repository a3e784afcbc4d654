"""Piecewise-linear outer transform ``f`` with a single kink, and its slope scale."""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class KinkMap:
    """``f(x) = a1 (x - xbar) + fxbar`` for ``x >= xbar``, ``a2 (x - xbar) + fxbar`` below.

    ``identity=True`` marks ``f(x) = x`` with no kink at all; its slope scale
    is 1 everywhere and no band is ever applied around ``xbar``.
    """

    a1: float = 1.0
    a2: float = 1.0
    xbar: float = 0.0
    fxbar: float = 0.0
    identity: bool = False

    def __post_init__(self):
        for name in ("a1", "a2", "xbar", "fxbar"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.a1 == 0.0 and self.a2 == 0.0:
            raise InputError("f must be non-constant (a1 = a2 = 0 given)")
        if self.identity and not (self.a1 == self.a2 == 1.0 and self.fxbar == self.xbar):
            raise InputError("identity f requires a1 = a2 = 1 and f(xbar) = xbar")

    @classmethod
    def make_identity(cls) -> "KinkMap":
        return cls(1.0, 1.0, 0.0, 0.0, identity=True)

    @classmethod
    def relu(cls, xbar: float = 0.0) -> "KinkMap":
        return cls(1.0, 0.0, xbar, 0.0)

    @classmethod
    def abs(cls, xbar: float = 0.0) -> "KinkMap":
        return cls(1.0, -1.0, xbar, 0.0)

    def __call__(self, x):
        return eval_f(self, x)

    @property
    def max_slope(self) -> float:
        return max(abs(self.a1), abs(self.a2))

    def __str__(self) -> str:
        if self.identity:
            return "identity"
        return f"pwl(a1={self.a1!r}, a2={self.a2!r}, xbar={self.xbar!r}, fxbar={self.fxbar!r})"


def eval_f(f: KinkMap, x):
    x = np.asarray(x, dtype=float)
    if f.identity:
        return x + 0.0
    dx = x - f.xbar
    return np.where(dx >= 0, f.a1 * dx, f.a2 * dx) + f.fxbar


def slope_scale(f: KinkMap, g_beta0: float) -> float:
    """Population slope scale; the comparison with ``xbar`` is exact."""
    if f.identity:
        return 1.0
    if g_beta0 > f.xbar:
        return abs(f.a1)
    if g_beta0 < f.xbar:
        return abs(f.a2)
    return f.max_slope


def s_hat(f: KinkMap, g_beta_hat: float, eps_n: float) -> float:
    """Estimated slope scale: the band ``[xbar - eps_n, xbar + eps_n]`` (closed)
    is treated as the kink regime."""
    if not eps_n > 0:
        raise InputError(f"eps_n must be positive, got {eps_n}")
    if f.identity:
        return 1.0
    if g_beta_hat > f.xbar + eps_n:
        return abs(f.a1)
    if g_beta_hat < f.xbar - eps_n:
        return abs(f.a2)
    return f.max_slope


_KINK_ARGS = {
    "relu": ("xbar",),
    "abs": ("xbar",),
    "pwl": ("a1", "a2", "xbar", "fxbar"),
}


def parse_kink(text: str) -> KinkMap:
    """``identity`` | ``relu(xbar=0)`` | ``abs(xbar=0)`` | ``pwl(a1=.., a2=.., xbar=.., fxbar=..)``."""
    text = text.strip()
    if text in ("identity", "id"):
        return KinkMap.make_identity()
    try:
        node = ast.parse(text, mode="eval").body
    except SyntaxError:
        raise InputError(f"malformed f specification {text!r}") from None
    if isinstance(node, ast.Name):
        name, kwargs = node.id, {}
    elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.args:
        name = node.func.id
        try:
            kwargs = {k.arg: float(ast.literal_eval(k.value)) for k in node.keywords}
        except (ValueError, TypeError):
            raise InputError(f"f parameters must be numbers in {text!r}") from None
    else:
        raise InputError(f"malformed f specification {text!r}")
    if name not in _KINK_ARGS:
        raise InputError(f"unknown f family {name!r}; use identity, relu, abs or pwl")
    unknown = set(kwargs) - set(_KINK_ARGS[name])
    if unknown:
        raise InputError(f"unexpected f parameters {sorted(unknown)} for {name}")
    if name == "pwl":
        missing = {"a1", "a2", "xbar"} - set(kwargs)
        if missing:
            raise InputError(f"pwl needs {sorted(missing)}")
        return KinkMap(kwargs["a1"], kwargs["a2"], kwargs["xbar"], kwargs.get("fxbar", 0.0))
    return getattr(KinkMap, name)(kwargs.get("xbar", 0.0))
