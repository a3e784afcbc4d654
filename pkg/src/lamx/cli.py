"""Command line entry point: ``lamx <subcommand> --config FILE [--out FILE]``.

Subcommands: ``estimate``, ``bias-adjust``, ``risk-bound``, ``simulate`` and
``verify``.  Every CSV written starts with a ``# config_sha256=...`` line.
Without ``--out`` (or ``[output] out`` in the config) the CSV goes to stdout.

Exit codes: 0 success, 2 configuration error, 3 numerical or assumption
error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bias import c_hat
from .bound import minimax_bound
from .config import RunConfig, parse_config
from .errors import AssumptionError, ConfigError, InputError
from .estim import Sample, estimate_from_moments, fit_moments
from .gmap import evaluate
from .harness import run_experiment
from .kink import s_hat
from .verify import all_passed, run_checks

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _header(cfg: RunConfig) -> str:
    return f"# config_sha256={cfg.config_hash}\n"


def _require(cfg: RunConfig, *fields: str) -> None:
    missing = [f for f in fields if getattr(cfg, f) is None]
    if missing:
        labels = {"g": "[model] g", "bound": "[bound] section", "experiment":
                  "[experiment] section"}
        raise ConfigError([f"{labels.get(m, m)} is required for this subcommand"
                           for m in missing])


def read_observations(path: Path) -> Sample:
    try:
        obs = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, encoding="utf-8")
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read observations from {path}: {exc}") from None
    return Sample(obs)


def _moments(cfg: RunConfig, input_path: Path | None):
    path = input_path or cfg.data_path
    if path is not None:
        sample = read_observations(path)
        if sample.d != cfg.g.dim:
            raise InputError(f"data have {sample.d} columns but g acts on R^{cfg.g.dim}")
        beta, sigma = fit_moments(sample)
        return beta, sigma, sample.n
    if cfg.beta_hat is None or cfg.sigma_hat is None or cfg.n is None:
        raise ConfigError(["[data] needs either input, or beta_hat, Sigma_hat and n"])
    return cfg.beta_hat, cfg.sigma_hat, cfg.n


def cmd_estimate(cfg: RunConfig, args) -> int:
    _require(cfg, "g")
    beta, sigma, n = _moments(cfg, args.input)
    rep = estimate_from_moments(beta, sigma, n, cfg.g, cfg.f, cfg.loss, cfg.bias)
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = _writer(buf)
    w.writerow(("key", "value"))
    for k, v in rep.as_rows():
        w.writerow((k, _num(v)))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_bias_adjust(cfg: RunConfig, args) -> int:
    _require(cfg, "g")
    beta, sigma, n = _moments(cfg, args.input)
    a = cfg.a
    if a is None:
        a = s_hat(cfg.f, float(evaluate(cfg.g, beta)), cfg.bias.eps_for(n))
    res = c_hat(a, cfg.g, cfg.loss, beta, sigma, n, cfg.bias)
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = _writer(buf)
    w.writerow(("c", "b_hat", "in_E_hat"))
    for c, b, e in zip(res.c_values, res.b_values, res.in_E_hat):
        w.writerow((_num(c), _num(b), int(e)))
    buf.write(f"# summary c_hat={_num(res.c_hat)},eta={_num(res.eta)},L={res.L},"
              f"M1={_num(res.M1)},seed={res.seed},a={_num(a)}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_risk_bound(cfg: RunConfig, args) -> int:
    _require(cfg, "bound")
    res = minimax_bound(cfg.bound)
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = _writer(buf)
    w.writerow(("c", "B"))
    for c, b in zip(res.c_values, res.b_values):
        w.writerow((_num(c), _num(b)))
    buf.write(f"# summary c_star={_num(res.c_star)},value={_num(res.value)},s={_num(res.s)},"
              f"mc_size={res.mc_size},seed={res.seed}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    _require(cfg, "experiment")
    exp = cfg.experiment
    if args.full_scale and not cfg.full_scale:
        exp = replace(exp, reps=20000, delta0_grid=tuple(np.linspace(-10.0, 10.0, 41)))
    curve = run_experiment(exp, threads=max(1, args.threads))
    comments = (f"config_sha256={cfg.config_hash}",
                f"design={exp.design},n={exp.n},reps={exp.reps},L={exp.bias.L},"
                f"master_seed={exp.master_seed},fast_mode={int(exp.fast_mode)}")
    means = ";".join(f"{_num(k)}:{_num(v)}" for k, v in curve.mean_c_hat.items())
    text = curve.to_csv(comments) + f"# summary mean_c_hat={means}\n"
    _emit(text, args.out)
    plot = args.plot_data or cfg.plot_data
    if plot is not None:
        _emit(curve.to_long_csv(comments), plot)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(args.level)
    lines = "".join(r.line() + "\n" for r in results)
    ok = all_passed(results)
    lines += f"{'PASS' if ok else 'FAIL'} verify level={args.level} " \
             f"({sum(r.passed for r in results)}/{len(results)} checks)\n"
    _emit(lines, args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamx", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", type=Path, required=config_required,
                        help="INI-style run configuration")
        sp.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")

    for name in ("estimate", "bias-adjust"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--input", type=Path, default=None,
                        help="CSV of observations (overrides [data] input)")
    common(sub.add_parser("risk-bound"))
    sp = sub.add_parser("simulate")
    common(sp)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--plot-data", type=Path, default=None,
                    help="also write a long-format CSV for plotting tools")
    sp.add_argument("--full-scale", action="store_true",
                    help="20000 replications on a 41-point grid")
    sp = sub.add_parser("verify")
    common(sp, config_required=False)
    sp.add_argument("--level", choices=("quick", "full"), default="quick")
    return p


COMMANDS = {"estimate": cmd_estimate, "bias-adjust": cmd_bias_adjust,
            "risk-bound": cmd_risk_bound, "simulate": cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = parse_config(args.config)
        if args.out is None:
            args.out = cfg.out
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (AssumptionError, InputError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
