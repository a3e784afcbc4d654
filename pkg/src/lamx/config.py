"""Run configuration: one INI-style file with ``key = value`` entries in sections.

Sections and keys (all optional unless a subcommand needs them)::

    [model]       g, f, loss, trunc_M
    [bias]        L, M1, eps_rule, eps_power, eps_scale, eps_n, eta, c_grid, r_grid,
                  n_starts, max_iter, refine_rounds, antithetic, seed, a
    [data]        input (CSV path), or beta_hat, Sigma_hat, n
    [bound]       beta0, Sigma, mc_size, M1, c_grid, r_grid, n_starts, box,
                  limit_probes, seed
    [experiment]  n, reps, delta0 (list) or delta0_min/delta0_max/delta0_points,
                  Sigma, design, master_seed, fast_mode, full_scale
    [output]      out, plot_data

Relative paths are resolved against the directory of the config file.
Parsing never stops at the first problem: :func:`parse_config` raises one
:class:`ConfigError` listing every violation.
"""

from __future__ import annotations

import ast
import configparser
import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bias import BiasConfig
from .bound import BoundSpec
from .errors import AssumptionError, ConfigError, InputError
from .gmap import GMap, parse_gmap
from .harness import ExperimentConfig
from .kink import KinkMap, parse_kink
from .loss import Loss, parse_loss
from .sampling import check_covariance, sym_sqrt

SECTIONS = {
    "model": {"g", "f", "loss", "trunc_m"},
    "bias": {"l", "m1", "eps_rule", "eps_power", "eps_scale", "eps_n", "eta", "c_grid",
             "r_grid", "n_starts", "max_iter", "refine_rounds", "antithetic", "seed", "a"},
    "data": {"input", "beta_hat", "sigma_hat", "n"},
    "bound": {"beta0", "sigma", "mc_size", "m1", "c_grid", "r_grid", "n_starts", "box",
              "limit_probes", "seed"},
    "experiment": {"n", "reps", "delta0", "delta0_min", "delta0_max", "delta0_points",
                   "sigma", "design", "master_seed", "fast_mode", "full_scale"},
    "output": {"out", "plot_data"},
}

_BIAS_KEYS = {"l": ("L", int), "m1": ("M1", float), "eps_rule": ("eps_rule", str),
              "eps_power": ("eps_power", float), "eps_scale": ("eps_scale", float),
              "eps_n": ("eps_n", float), "eta": ("eta", float), "c_grid": ("c_grid", int),
              "r_grid": ("r_grid", int), "n_starts": ("n_starts", int),
              "max_iter": ("max_iter", int), "refine_rounds": ("refine_rounds", int),
              "antithetic": ("antithetic", "bool"), "seed": ("seed", int)}


@dataclass
class RunConfig:
    path: Path | None
    config_hash: str
    g: GMap | None = None
    f: KinkMap = KinkMap.make_identity()
    loss: Loss = Loss.power(2.0)
    bias: BiasConfig = BiasConfig()
    a: float | None = None
    data_path: Path | None = None
    beta_hat: np.ndarray | None = None
    sigma_hat: np.ndarray | None = None
    n: int | None = None
    bound: BoundSpec | None = None
    experiment: ExperimentConfig | None = None
    full_scale: bool = False
    out: Path | None = None
    plot_data: Path | None = None


class _Collector:
    def __init__(self):
        self.problems: list[str] = []

    def get(self, section, key, kind, where):
        raw = section.get(key)
        if raw is None:
            return None
        raw = raw.strip()
        try:
            if kind == "bool":
                return section.getboolean(key)
            if kind is int:
                return int(raw)
            if kind is float:
                return float(raw)
            if kind == "vector":
                return np.asarray(ast.literal_eval(raw), dtype=float).ravel()
            if kind == "matrix":
                return np.atleast_2d(np.asarray(ast.literal_eval(raw), dtype=float))
            return raw
        except (ValueError, SyntaxError, TypeError):
            name = getattr(kind, "__name__", kind)
            self.problems.append(f"[{where}] {key} = {raw!r} is not a valid {name}")
            return None

    def attempt(self, fn, *args, prefix=""):
        try:
            return fn(*args)
        except (InputError, AssumptionError) as exc:
            self.problems.append(f"{prefix}{exc}")
            return None


def _covariance(col: _Collector, sigma, where: str, dim: int | None):
    if sigma is None:
        return None
    try:
        sigma = check_covariance(sigma)
        if dim is not None and sigma.shape != (dim, dim):
            col.problems.append(f"[{where}] Sigma must be {dim} x {dim}, got {sigma.shape}")
            return None
        sym_sqrt(sigma)
    except AssumptionError:
        col.problems.append(f"[{where}] Assumption 3: Sigma not invertible")
        return None
    except InputError as exc:
        col.problems.append(f"[{where}] {exc}")
        return None
    return sigma


def _csv_columns(path: Path) -> int | None:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
        return len(header)
    except (OSError, StopIteration):
        return None


def parse_config(path, text: str | None = None) -> RunConfig:
    """Read and validate a run configuration; raise ConfigError with every problem."""
    path = Path(path) if path is not None else None
    if text is None:
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ConfigError([f"cannot read config file {path}: {exc.strerror}"]) from None
        text = raw.decode("utf-8")
    else:
        raw = text.encode("utf-8")
    base = path.parent if path is not None else Path(".")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path) if path else "<config>")
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from None

    col = _Collector()
    cfg = RunConfig(path=path, config_hash=hashlib.sha256(raw).hexdigest())

    for name in parser.sections():
        if name not in SECTIONS:
            col.problems.append(f"unknown section [{name}]")
            continue
        for key in parser[name]:
            if key not in SECTIONS[name]:
                col.problems.append(f"[{name}] unknown key {key!r}")

    model = parser["model"] if parser.has_section("model") else {}
    trunc = math.inf
    if model:
        t = col.get(model, "trunc_m", float, "model")
        if t is not None:
            if t > 0:
                trunc = t
            else:
                col.problems.append("[model] trunc_M must be positive")
        if model.get("g"):
            cfg.g = col.attempt(parse_gmap, model["g"], prefix="[model] g: ")
        if model.get("f"):
            f = col.attempt(parse_kink, model["f"], prefix="[model] f: ")
            cfg.f = f if f is not None else cfg.f
        if model.get("loss"):
            lo = col.attempt(parse_loss, model["loss"], trunc, prefix="[model] loss: ")
            cfg.loss = lo if lo is not None else cfg.loss
        elif math.isfinite(trunc):
            cfg.loss = Loss.power(2.0, trunc=trunc)

    bias_kwargs = {}
    if parser.has_section("bias"):
        sec = parser["bias"]
        for key, (field, kind) in _BIAS_KEYS.items():
            v = col.get(sec, key, kind, "bias")
            if v is not None:
                bias_kwargs[field] = v
        a = col.get(sec, "a", float, "bias")
        if a is not None:
            if a < 0:
                col.problems.append("[bias] a must be non-negative")
            cfg.a = a
    try:
        cfg.bias = BiasConfig(**bias_kwargs)
    except InputError as exc:
        col.problems.extend(f"[bias] {p}" for p in str(exc).split("; "))
    M1 = bias_kwargs.get("M1", BiasConfig.M1)
    if math.isfinite(cfg.loss.trunc) and M1 < cfg.loss.trunc:
        col.problems.append(
            f"need M1 >= M, but M1 = {M1:g} < loss truncation M = {cfg.loss.trunc:g}"
        )

    if parser.has_section("data"):
        sec = parser["data"]
        if sec.get("input"):
            p = Path(sec["input"].strip())
            cfg.data_path = p if p.is_absolute() else base / p
            ncol = _csv_columns(cfg.data_path)
            if ncol is None:
                col.problems.append(f"[data] cannot read input file {cfg.data_path}")
            elif cfg.g is not None and ncol != cfg.g.dim:
                col.problems.append(
                    f"[data] input has {ncol} columns but g acts on R^{cfg.g.dim}"
                )
        cfg.beta_hat = col.get(sec, "beta_hat", "vector", "data")
        dim = cfg.g.dim if cfg.g is not None else None
        if cfg.beta_hat is not None and dim is not None and cfg.beta_hat.size != dim:
            col.problems.append(f"[data] beta_hat must have length {dim}")
        cfg.sigma_hat = _covariance(col, col.get(sec, "sigma_hat", "matrix", "data"),
                                    "data", dim)
        cfg.n = col.get(sec, "n", int, "data")
        if cfg.n is not None and cfg.n < 1:
            col.problems.append("[data] n must be >= 1")

    if parser.has_section("bound"):
        sec = parser["bound"]
        beta0 = col.get(sec, "beta0", "vector", "bound")
        dim = cfg.g.dim if cfg.g is not None else None
        sigma = _covariance(col, col.get(sec, "sigma", "matrix", "bound"), "bound", dim)
        if cfg.g is None:
            col.problems.append("[bound] needs [model] g")
        elif beta0 is None or sigma is None:
            if beta0 is None:
                col.problems.append("[bound] beta0 is required")
            if sec.get("sigma") is None:
                col.problems.append("[bound] Sigma is required")
        elif beta0.size != cfg.g.dim:
            col.problems.append(f"[bound] beta0 must have length {cfg.g.dim}")
        else:
            kw = {}
            for key, field, kind in (("mc_size", "mc_size", int), ("m1", "M1", float),
                                     ("c_grid", "c_grid", int), ("r_grid", "r_grid", int),
                                     ("n_starts", "n_starts", int), ("box", "box", float),
                                     ("limit_probes", "limit_probes", "bool"),
                                     ("seed", "seed", int)):
                v = col.get(sec, key, kind, "bound")
                if v is not None:
                    kw[field] = v
            cfg.bound = col.attempt(
                lambda: BoundSpec(cfg.g, cfg.f, tuple(beta0), sigma, cfg.loss, **kw),
                prefix="[bound] ",
            )

    if parser.has_section("experiment"):
        sec = parser["experiment"]
        kw = {}
        for key, field, kind in (("n", "n", int), ("reps", "reps", int),
                                 ("design", "design", str), ("master_seed", "master_seed", int),
                                 ("fast_mode", "fast_mode", "bool")):
            v = col.get(sec, key, kind, "experiment")
            if v is not None:
                kw[field] = v
        full = col.get(sec, "full_scale", "bool", "experiment")
        cfg.full_scale = bool(full)
        grid = col.get(sec, "delta0", "vector", "experiment")
        lo = col.get(sec, "delta0_min", float, "experiment")
        hi = col.get(sec, "delta0_max", float, "experiment")
        pts = col.get(sec, "delta0_points", int, "experiment")
        if grid is None and None not in (lo, hi, pts):
            grid = np.linspace(lo, hi, pts)
        if grid is not None:
            kw["delta0_grid"] = tuple(grid)
        sigma = _covariance(col, col.get(sec, "sigma", "matrix", "experiment"),
                            "experiment", 2)
        if sigma is not None:
            kw["Sigma"] = sigma
        kw["loss"] = cfg.loss
        kw["bias"] = cfg.bias
        if cfg.full_scale:
            kw.setdefault("reps", 20000)
            kw.setdefault("delta0_grid", tuple(np.linspace(-10.0, 10.0, 41)))
        cfg.experiment = col.attempt(lambda: ExperimentConfig(**kw), prefix="[experiment] ")

    if parser.has_section("output"):
        sec = parser["output"]
        for key in ("out", "plot_data"):
            if sec.get(key):
                p = Path(sec[key].strip())
                setattr(cfg, key, p if p.is_absolute() else base / p)

    if col.problems:
        raise ConfigError(col.problems)
    return cfg
