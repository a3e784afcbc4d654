"""Translation-scale equivariant maps ``g: R^d -> R`` as expression trees.

A map is built from four node types, each of which preserves both
``g(x + c*1) = g(x) + c`` and ``g(u*x) = u*g(x)`` for ``u >= 0``:

* :class:`Coord` -- a single coordinate ``x_i`` (1-based, as in ``x1``),
* :class:`Affine` -- ``sum_k s_k * child_k`` with ``sum_k s_k = 1``,
* :class:`Max` / :class:`Min` -- pointwise extremum of the children.

Sums such as ``max(x1) + max(x2)`` are deliberately not constructible: they
break translation equivariance.  Write ``affine(0.5*max(...), 0.5*max(...))``.

Evaluation and directional derivatives are vectorised over leading axes, so
``x`` can be a single point of shape ``(d,)`` or a stack of shape ``(..., d)``.

>>> g = parse_gmap("max(min(x1, x2), x3)")
>>> float(g([1.0, 2.0, 0.5]))
1.0
>>> float(max_map(2).dderiv([1.0, 0.0], [5.0, 100.0]))
5.0
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError

TIE_TOL = 1e-10
WEIGHT_TOL = 1e-12
PARSE_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Coord:
    index: int

    def __post_init__(self):
        if not isinstance(self.index, (int, np.integer)) or self.index < 1:
            raise InputError(f"coordinate index must be a positive integer, got {self.index!r}")
        object.__setattr__(self, "index", int(self.index))


@dataclass(frozen=True)
class Affine:
    weights: tuple
    children: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        ch = tuple(self.children)
        if not ch:
            raise InputError("affine node needs at least one child")
        if len(w) != len(ch):
            raise InputError(f"affine node has {len(w)} weights for {len(ch)} children")
        if not all(np.isfinite(w)):
            raise InputError("affine weights must be finite")
        if abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise InputError(
                f"affine weights sum to {sum(w)!r}; they must sum to 1 (s in S1)"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "children", ch)


@dataclass(frozen=True)
class Max:
    children: tuple

    def __post_init__(self):
        ch = tuple(self.children)
        if not ch:
            raise InputError("max needs at least one child")
        object.__setattr__(self, "children", ch)


@dataclass(frozen=True)
class Min:
    children: tuple

    def __post_init__(self):
        ch = tuple(self.children)
        if not ch:
            raise InputError("min needs at least one child")
        object.__setattr__(self, "children", ch)


Node = Union[Coord, Affine, Max, Min]


@dataclass(frozen=True)
class GMap:
    """An equivariant map on ``R^dim``; validated once, immutable afterwards."""

    root: Node
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InputError(f"dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        for node in _walk(self.root):
            if isinstance(node, Coord) and node.index > self.dim:
                raise InputError(f"coordinate x{node.index} outside dimension {self.dim}")
            if not isinstance(node, (Coord, Affine, Max, Min)):
                raise InputError(f"unsupported node {node!r}")

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def dderiv(self, x, z, tie_tol: float = TIE_TOL) -> np.ndarray:
        return dderiv(self, x, z, tie_tol)

    def derivative_map(self, x, tie_tol: float = TIE_TOL) -> "GMap":
        return derivative_map(self, x, tie_tol)

    @property
    def lipschitz(self) -> float:
        return _lipschitz(self.root)

    def __str__(self) -> str:
        return _to_text(self.root)


def _walk(node):
    yield node
    for child in getattr(node, "children", ()):
        yield from _walk(child)


# -- construction helpers ----------------------------------------------------

def max_map(d: int) -> GMap:
    return GMap(Max(tuple(Coord(i) for i in range(1, d + 1))), d)


def min_map(d: int) -> GMap:
    return GMap(Min(tuple(Coord(i) for i in range(1, d + 1))), d)


def linear_map(s) -> GMap:
    """``g(x) = s'x`` for a weight vector on the unit-sum hyperplane."""
    s = np.asarray(s, dtype=float).ravel()
    return GMap(Affine(tuple(s), tuple(Coord(i) for i in range(1, s.size + 1))), s.size)


def coord_map(i: int, d: int) -> GMap:
    return GMap(Coord(i), d)


# -- evaluation ----------------------------------------------------------------

def _as_points(g: GMap, x, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != g.dim:
        raise InputError(f"{name} must have trailing dimension {g.dim}, got shape {x.shape}")
    return x


def _eval(node, x):
    if isinstance(node, Coord):
        return x[..., node.index - 1]
    if isinstance(node, Affine):
        acc = node.weights[0] * _eval(node.children[0], x)
        for w, child in zip(node.weights[1:], node.children[1:]):
            acc = acc + w * _eval(child, x)
        return acc
    reduce = np.maximum if isinstance(node, Max) else np.minimum
    out = _eval(node.children[0], x)
    for child in node.children[1:]:
        out = reduce(out, _eval(child, x))
    return out


def evaluate(g: GMap, x) -> np.ndarray:
    """Value of ``g`` at ``x`` (shape ``(..., d)``); result has shape ``(...)``."""
    return _eval(g.root, _as_points(g, x))


# -- directional derivatives -----------------------------------------------------

def _tie_set(values, extreme, tol):
    return np.abs(values - extreme) <= tol


def _dd(node, x, z, tol):
    # returns (value at x, one-sided derivative at x in direction z)
    if isinstance(node, Coord):
        return x[..., node.index - 1], z[..., node.index - 1]
    parts = [_dd(child, x, z, tol) for child in node.children]
    if isinstance(node, Affine):
        val = node.weights[0] * parts[0][0]
        der = node.weights[0] * parts[0][1]
        for w, (v, dv) in zip(node.weights[1:], parts[1:]):
            val = val + w * v
            der = der + w * dv
        return val, der
    vals = np.stack(np.broadcast_arrays(*[p[0] for p in parts]))
    ders = np.stack(np.broadcast_arrays(*[p[1] for p in parts]))
    sign = 1.0 if isinstance(node, Max) else -1.0
    ext = sign * (sign * vals).max(axis=0)
    return ext, _tie_extreme(_tie_set(vals, ext, tol), ders, sign)


def _tie_extreme(active, ders, sign):
    # Max (sign +1) takes the largest derivative over the tie set, Min the smallest
    return sign * np.where(active, sign * ders, -np.inf).max(axis=0)


def dderiv(g: GMap, x, z, tie_tol: float = TIE_TOL) -> np.ndarray:
    """One-sided directional derivative ``lim_{t->0+} (g(x + t z) - g(x)) / t``.

    Computed analytically: at a Max (Min) node the derivative is the max (min)
    of the children's derivatives over the children attaining the extremum at
    ``x``, ties being resolved with absolute tolerance ``tie_tol``.
    ``x`` and ``z`` broadcast against each other.
    """
    x = _as_points(g, x)
    z = _as_points(g, z, "z")
    x, z = np.broadcast_arrays(x, z)
    return _dd(g.root, x, z, tie_tol)[1]


def _prune(node, x, tol):
    if isinstance(node, Coord):
        return float(x[node.index - 1]), node
    parts = [_prune(child, x, tol) for child in node.children]
    if isinstance(node, Affine):
        val = sum(w * v for w, (v, _) in zip(node.weights, parts))
        return val, Affine(node.weights, tuple(p[1] for p in parts))
    vals = np.array([p[0] for p in parts])
    ext = vals.max() if isinstance(node, Max) else vals.min()
    kept = tuple(p[1] for p, a in zip(parts, _tie_set(vals, ext, tol)) if a)
    if len(kept) == 1:
        return float(ext), kept[0]
    return float(ext), type(node)(kept)


def derivative_map(g: GMap, x, tie_tol: float = TIE_TOL) -> GMap:
    """The map ``z -> dderiv(g, x, z)`` as a GMap (inactive branches pruned).

    For a single base point this is much cheaper to evaluate on many
    directions than :func:`dderiv`, and it is itself equivariant.
    """
    x = _as_points(g, x)
    if x.ndim != 1:
        raise InputError("derivative_map needs a single base point")
    return GMap(_prune(g.root, x, tie_tol)[1], g.dim)


def gn_offset(g: GMap, beta_hat, eps_n: float) -> np.ndarray:
    """``(beta_hat - g(beta_hat) * 1) / eps_n``, the shift inside ``gn_hat``."""
    if not eps_n > 0:
        raise InputError(f"eps_n must be positive, got {eps_n}")
    beta_hat = _as_points(g, beta_hat, "beta_hat")
    return (beta_hat - evaluate(g, beta_hat)) / eps_n


def gn_hat(g: GMap, beta_hat, eps_n: float, z) -> np.ndarray:
    """Data-driven approximation ``g(z + (beta_hat - g(beta_hat)) / eps_n)``
    of the directional derivative of ``g`` at the unknown true parameter."""
    return evaluate(g, _as_points(g, z, "z") + gn_offset(g, beta_hat, eps_n))


def _lipschitz(node) -> float:
    if isinstance(node, Coord):
        return 1.0
    ks = [_lipschitz(child) for child in node.children]
    if isinstance(node, Affine):
        return float(sum(abs(w) * k for w, k in zip(node.weights, ks)))
    return max(ks)


# -- text form -----------------------------------------------------------------

def _to_text(node) -> str:
    if isinstance(node, Coord):
        return f"x{node.index}"
    if isinstance(node, Affine):
        terms = ", ".join(f"{w!r}*{_to_text(c)}" for w, c in zip(node.weights, node.children))
        return f"affine({terms})"
    name = "max" if isinstance(node, Max) else "min"
    return f"{name}({', '.join(_to_text(c) for c in node.children)})"


_COORD = re.compile(r"x(\d+)\Z")


def _number(node) -> float | None:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _number(node.operand)
        if v is not None:
            return -v if isinstance(node.op, ast.USub) else v
    return None


def _term(node, text):
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        left, right = _number(node.left), _number(node.right)
        if left is not None:
            return left, _build(node.right, text)
        if right is not None:
            return right, _build(node.left, text)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -1.0, _build(node.operand, text)
    return 1.0, _build(node, text)


def _build(node, text):
    if isinstance(node, ast.Name):
        m = _COORD.match(node.id)
        if not m:
            raise InputError(f"unknown name {node.id!r} in {text!r}; use x1, x2, ...")
        return Coord(int(m.group(1)))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name = node.func.id.lower()
        if not node.args:
            raise InputError(f"{name}() needs arguments in {text!r}")
        if name in ("max", "min"):
            kids = tuple(_build(a, text) for a in node.args)
            return Max(kids) if name == "max" else Min(kids)
        if name == "affine":
            terms = [_term(a, text) for a in node.args]
            total = sum(w for w, _ in terms)
            if abs(total - 1.0) > PARSE_WEIGHT_TOL:
                raise InputError(
                    f"affine weights sum to {total:g} in {text!r}; "
                    "weights must lie in S1 (sum to 1)"
                )
            return Affine(tuple(w / total for w, _ in terms), tuple(n for _, n in terms))
    raise InputError(f"cannot parse {ast.unparse(node)!r} in {text!r}")


def parse_gmap(text: str, dim: int | None = None) -> GMap:
    """Parse ``max(x1, x2)``, ``min(max(x1,x2), x3)``, ``affine(0.5*x1, 0.5*x2)`` ...

    Affine weights within 1e-9 of summing to one are accepted and rescaled to
    sum to one exactly; anything further off is rejected.  ``dim`` defaults to
    the largest coordinate index mentioned.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise InputError(f"malformed map expression {text!r}: {exc.msg}") from None
    root = _build(tree, text)
    used = max(n.index for n in _walk(root) if isinstance(n, Coord))
    return GMap(root, used if dim is None else dim)


def random_gmap(rng: np.random.Generator, dim: int, depth: int = 3) -> GMap:
    """Random map with at most ``depth`` levels of combinators (for property checks)."""

    def grow(level):
        if level == 0 or (level < depth and rng.random() < 0.2):
            return Coord(int(rng.integers(1, dim + 1)))
        kind = int(rng.integers(3))
        kids = tuple(grow(level - 1) for _ in range(int(rng.integers(2, 5))))
        if kind == 0:
            w = rng.normal(size=len(kids))
            w[-1] = 1.0 - w[:-1].sum()
            if abs(w.sum() - 1.0) > WEIGHT_TOL:
                w = np.ones(len(kids)) / len(kids)
            return Affine(tuple(w), kids)
        return Max(kids) if kind == 1 else Min(kids)

    return GMap(grow(depth), dim)
