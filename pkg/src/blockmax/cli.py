"""Command line interface: ``python -m blockmax <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

import numpy as np

from . import asymvar, harness
from .blocks import MODES, block_maxima
from .dependence import COPULA_FAMILIES, InnovationCopula, Stdf
from .tsgen import ModelSpec, generate, rng_stream
from .ustat import get_kernel, u_statistic


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def parse_copula_spec(spec: str) -> Stdf:
    """``independence``, ``comonotone`` or ``logistic:THETA``."""
    name, _, arg = spec.partition(":")
    if name == "independence" and not arg:
        return Stdf.independence(2)
    if name == "comonotone" and not arg:
        return Stdf.comonotone(2)
    if name in ("logistic", "gumbel") and arg:
        return Stdf.logistic(float(arg), 2)
    raise harness.ConfigError(f"bad copula spec {spec!r}; use independence, comonotone or logistic:THETA")


def cmd_asymvar(args) -> int:
    if args.kernel == "variance":
        if args.gamma is None or args.copula is not None:
            raise harness.ConfigError("--kernel variance needs --gamma")
        res = asymvar.asymvar_variance_kernel(args.gamma)
        param = repr(args.gamma)
    else:
        if args.copula is None or args.gamma is not None:
            raise harness.ConfigError("--kernel kendall needs --copula")
        L = parse_copula_spec(args.copula)
        res = asymvar.sigma2_kendall(L, args.n_mc, rng_stream(args.seed))
        param = args.copula
    row = res.csv_row()
    header = ["kernel", "param"] + list(row)
    _emit(_csv(header, [[args.kernel, param] + list(row.values())]), args.output)
    return 0


def cmd_ratio_curve(args) -> int:
    if args.steps < 1:
        raise harness.ConfigError("--steps must be >= 1")
    grid = np.linspace(args.gamma_min, args.gamma_max, args.steps)
    rows = asymvar.ratio_curve(grid)
    text = asymvar.write_ratio_curve(rows)
    _emit(text, args.output)
    return 0


def cmd_truth(args) -> int:
    cfg = harness.load_config(args.config)
    seed = cfg.truth_seed if args.seed is None else args.seed
    tv = harness.estimate_truth(cfg.model, cfg.r, cfg.estimand, cfg.truth_n, seed)
    _emit(_csv(["estimand", "value", "se", "n_truth", "seed"],
               [[tv.estimand, repr(tv.value), repr(tv.se), tv.n_truth, tv.seed]]), args.output)
    return 0


def cmd_simulate(args) -> int:
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    rows = harness.run_experiment(cfg)
    _emit(harness.metrics_csv(rows), args.output)
    return 0


def cmd_blockmax(args) -> int:
    x = harness.read_series_csv(args.input)
    sample = block_maxima(x, args.r, args.mode)
    _emit(harness.blockmax_csv(sample), args.output)
    return 0


def _read_any(path: str) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline().split(",")[0].strip()
    if first == "t":
        return harness.read_series_csv(path)
    return harness.read_blockmax_csv(path)


def cmd_ustat(args) -> int:
    kern = get_kernel(args.kernel)
    x = _read_any(args.input)
    res = u_statistic(x, kern)
    _emit(_csv(["kernel", "value", "n_blocks", "pair_count"],
               [[res.kernel, repr(res.value), res.n_blocks, res.pair_count]]), args.output)
    return 0


def cmd_generate(args) -> int:
    dim = 1 if args.copula == "none" else 2
    copula = InnovationCopula.from_tau(args.copula, args.tau) if dim == 2 else InnovationCopula()
    marginal = args.marginal or ("gpd" if dim == 1 else "native")
    spec = ModelSpec(args.temporal, args.param if args.temporal != "iid" else 0.0, marginal, args.gamma,
                     dim=dim, copula=copula, piecewise=args.piecewise)
    x = generate(spec, args.n, rng_stream(args.seed))
    _emit(harness.series_csv(x), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockmax", description="Disjoint and sliding block maxima estimators.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=None, help="random seed")
        sp.add_argument("--output", "-o", default=None, help="output file (default stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = add("asymvar", cmd_asymvar, "asymptotic variances for a kernel")
    sp.add_argument("--kernel", choices=["variance", "kendall"], required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--copula")
    sp.add_argument("--n-mc", type=int, default=4_000_000)

    sp = add("ratio-curve", cmd_ratio_curve, "sigma2_db / sigma2_sb of the variance kernel over a gamma grid")
    sp.add_argument("--gamma-min", type=float, required=True)
    sp.add_argument("--gamma-max", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)

    sp = add("truth", cmd_truth, "simulate the target value of an experiment")
    sp.add_argument("--config", required=True)

    sp = add("simulate", cmd_simulate, "run an experiment and write metrics CSV")
    sp.add_argument("--config", required=True)

    sp = add("blockmax", cmd_blockmax, "block maxima of a t,x1[,x2] series")
    sp.add_argument("--input", required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--mode", choices=MODES, required=True)

    sp = add("ustat", cmd_ustat, "U-statistic of a block maxima or series file")
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--input", required=True)

    sp = add("generate", cmd_generate, "simulate a series as t,x1[,x2] CSV")
    sp.add_argument("--temporal", choices=["iid", "armax", "car"], default="iid")
    sp.add_argument("--param", type=float, default=0.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--marginal", choices=["gpd", "frechet1", "native"])
    sp.add_argument("--copula", choices=("none",) + COPULA_FAMILIES, default="none")
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--piecewise", type=int)
    sp.add_argument("--n", type=int, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is None and args.command in ("asymvar", "generate"):
        args.seed = 0
    try:
        return args.func(args)
    except (harness.ConfigError, ValueError, OSError) as exc:
        print(f"blockmax {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
