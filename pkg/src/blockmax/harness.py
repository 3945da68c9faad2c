"""Monte Carlo experiments comparing disjoint and sliding block maxima estimators.

An experiment fixes a model, a block size ``r`` and a grid of block counts
``m``. For every ``m`` it simulates ``N`` series of length ``m r``, evaluates
the estimator for each requested mode on the same series, and reports MSE,
squared bias and variance against a simulated truth.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .blocks import block_maxima
from .dependence import COPULA_FAMILIES, InnovationCopula, copula_tau
from .tsgen import ModelSpec, derive_seed, generate, generate_paths, rng_stream
from .ustat import bias_reduced_sliding, kendall_kernel, kendall_tau, pwm_kernel, pwm_orderstat, u_statistic, \
    variance_kernel

ESTIMANDS = ("variance", "kendall_tau", "pwm1")
ALL_MODES = ("disjoint", "sliding", "bias_reduced_sliding")
METRICS_HEADER = ["estimand", "model", "gamma", "ts_param", "m", "mode", "mse", "bias_sq", "variance", "mse_ratio"]
_TRUTH_BATCH = 20_000
_TRUTH_GROUPS = 20


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    r: int
    m_grid: tuple
    N: int
    estimand: str = "variance"
    modes: tuple = ("disjoint", "sliding")
    master_seed: int = 0
    truth_n: int = 1_000_000
    truth_seed: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.r < 1:
            raise ConfigError("r must be >= 1")
        if not self.m_grid or any(m < 1 for m in self.m_grid):
            raise ConfigError("m_grid must be a non-empty list of positive integers")
        if self.estimand not in ESTIMANDS:
            raise ConfigError(f"estimand must be one of {ESTIMANDS}")
        if not self.modes or any(md not in ALL_MODES for md in self.modes):
            raise ConfigError(f"modes must be a non-empty subset of {ALL_MODES}")
        if self.estimand == "kendall_tau" and self.model.dim != 2:
            raise ConfigError("kendall_tau needs a bivariate model")
        if self.estimand != "kendall_tau" and self.model.dim != 1:
            raise ConfigError(f"{self.estimand} needs a univariate model")
        if self.truth_n < 1000:
            raise ConfigError("truth.n must be >= 1000")


@dataclass(frozen=True)
class TruthValue:
    estimand: str
    value: float
    n_truth: int
    seed: int
    se: float = float("nan")


@dataclass(frozen=True)
class MetricsRow:
    estimand: str
    model: str
    gamma: float
    ts_param: float
    m: int
    mode: str
    mse: float
    bias_sq: float
    variance: float
    mse_ratio: float

    def as_list(self):
        return [self.estimand, self.model, repr(self.gamma), repr(self.ts_param), str(self.m), self.mode,
                repr(self.mse), repr(self.bias_sq), repr(self.variance), repr(self.mse_ratio)]


# -- configuration ----------------------------------------------------------

_KEYS = {
    "model.temporal", "model.alpha", "model.phi", "model.gamma", "model.copula", "model.tau",
    "model.marginal", "model.piecewise", "r", "m_grid", "N", "estimand", "modes", "master_seed",
    "truth.n", "truth.seed",
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _parse_text(text: str) -> dict:
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            return _flatten(json.loads(stripped))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    return raw


def _list(v, conv):
    if isinstance(v, (list, tuple)):
        return tuple(conv(x) for x in v)
    items = [s for s in str(v).replace("[", "").replace("]", "").replace(",", " ").split() if s]
    return tuple(conv(s) for s in items)


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"expected an integer, got {v}")
    return int(f)


def config_from_mapping(raw: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from flat ``key -> value`` pairs."""
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        temporal = str(raw.get("model.temporal", "iid"))
        if temporal == "iid":
            param = 0.0
        elif temporal == "armax":
            param = float(raw["model.alpha"])
        elif temporal == "car":
            param = float(raw["model.phi"])
        else:
            raise ConfigError(f"unknown model.temporal {temporal!r}")
        family = str(raw.get("model.copula", "none"))
        dim = 1 if family == "none" else 2
        copula = InnovationCopula()
        if dim == 2:
            if family not in COPULA_FAMILIES:
                raise ConfigError(f"unknown model.copula {family!r}")
            copula = InnovationCopula.from_tau(family, float(raw.get("model.tau", 0.0)))
        piece = raw.get("model.piecewise")
        model = ModelSpec(
            temporal=temporal,
            param=param,
            marginal=str(raw.get("model.marginal", "gpd" if dim == 1 else "native")),
            gamma=float(raw.get("model.gamma", 0.0)),
            dim=dim,
            copula=copula,
            piecewise=None if piece in (None, "", "none") else _int(piece),
        )
        return ExperimentConfig(
            model=model,
            r=_int(raw["r"]),
            m_grid=_list(raw["m_grid"], _int),
            N=_int(raw["N"]),
            estimand=str(raw.get("estimand", "variance")),
            modes=_list(raw.get("modes", "disjoint,sliding"), str),
            master_seed=_int(raw.get("master_seed", 0)),
            truth_n=_int(raw.get("truth.n", 1_000_000)),
            truth_seed=_int(raw.get("truth.seed", 1)),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) or a JSON object."""
    return config_from_mapping(_parse_text(text))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize ``cfg`` as ``key = value`` lines accepted by :func:`parse_config`."""
    mdl = cfg.model
    lines = [f"model.temporal = {mdl.temporal}"]
    if mdl.temporal == "armax":
        lines.append(f"model.alpha = {mdl.param!r}")
    elif mdl.temporal == "car":
        lines.append(f"model.phi = {mdl.param!r}")
    lines.append(f"model.gamma = {mdl.gamma!r}")
    lines.append(f"model.marginal = {mdl.marginal}")
    if mdl.dim == 2:
        lines.append(f"model.copula = {mdl.copula.family}")
        lines.append(f"model.tau = {copula_tau(mdl.copula)!r}")
    if mdl.piecewise is not None:
        lines.append(f"model.piecewise = {mdl.piecewise}")
    lines += [
        f"r = {cfg.r}",
        f"m_grid = {', '.join(str(m) for m in cfg.m_grid)}",
        f"N = {cfg.N}",
        f"estimand = {cfg.estimand}",
        f"modes = {', '.join(cfg.modes)}",
        f"master_seed = {cfg.master_seed}",
        f"truth.n = {cfg.truth_n}",
        f"truth.seed = {cfg.truth_seed}",
    ]
    return "\n".join(lines) + "\n"


# -- estimators -------------------------------------------------------------


def _point_estimate(maxima: np.ndarray, estimand: str) -> float:
    if estimand == "variance":
        return u_statistic(maxima, variance_kernel()).value
    if estimand == "kendall_tau":
        return kendall_tau(maxima)
    return pwm_orderstat(maxima, 1)


def estimate(series, r: int, mode: str, estimand: str) -> float:
    """Block maxima estimate of ``estimand`` from one series."""
    if mode == "bias_reduced_sliding":
        sample = block_maxima(series, r, "sliding")
        kern = {"variance": variance_kernel(), "kendall_tau": kendall_kernel(), "pwm1": pwm_kernel(2)}[estimand]
        value = bias_reduced_sliding(sample, kern).value
        return 2 * value - 1 if estimand == "kendall_tau" else value
    return _point_estimate(block_maxima(series, r, mode).maxima, estimand)


def estimate_truth(model: ModelSpec, r: int, estimand: str, n_truth: int, seed: int) -> TruthValue:
    """Simulated value of ``estimand`` for one block maximum ``M_r``.

    Draws ``n_truth`` independent stretches of length ``r`` (so the block
    maxima are exactly i.i.d.) and applies the empirical estimator; ``se``
    is a batch-means standard error over 20 groups.
    """
    if n_truth < 1000:
        raise ValueError("n_truth must be >= 1000")
    rng = rng_stream(seed)
    base = replace(model, piecewise=None)
    parts = []
    for lo in range(0, n_truth, _TRUTH_BATCH):
        k = min(_TRUTH_BATCH, n_truth - lo)
        parts.append(generate_paths(base, k, r, rng).max(axis=1))
    maxima = np.concatenate(parts)
    value = _point_estimate(maxima, estimand)
    groups = [_point_estimate(g, estimand) for g in np.array_split(maxima, _TRUTH_GROUPS)]
    se = float(np.std(groups, ddof=1)) / math.sqrt(_TRUTH_GROUPS)
    return TruthValue(estimand, float(value), n_truth, seed, se)


def summarize(estimates: Sequence[float], truth: float):
    """``(mse, bias_sq, variance)`` of ``estimates`` about ``truth``."""
    x = np.asarray(estimates, dtype=float)
    if x.size == 0:
        raise ValueError("no estimates to summarize")
    mean = math.fsum(x.tolist()) / x.size
    mse = math.fsum(((x - truth) ** 2).tolist()) / x.size
    var = math.fsum(((x - mean) ** 2).tolist()) / x.size
    return mse, (mean - truth) ** 2, var


def _replicate_range(cfg: ExperimentConfig, m_index: int, lo: int, hi: int):
    m = cfg.m_grid[m_index]
    out = []
    for i in range(lo, hi):
        rng = rng_stream(derive_seed(cfg.master_seed, i, m_index))
        x = generate(cfg.model, m * cfg.r, rng)
        out.append([estimate(x, cfg.r, mode, cfg.estimand) for mode in cfg.modes])
    return out


def worker_count() -> int:
    """Worker processes from ``BLOCKMAX_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("BLOCKMAX_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BLOCKMAX_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("BLOCKMAX_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def simulate_estimates(cfg: ExperimentConfig, workers: Optional[int] = None):
    """Estimates indexed as ``[m_index][replication][mode_index]``."""
    workers = worker_count() if workers is None else workers
    chunk = max(1, min(50, cfg.N // max(1, 4 * workers)))
    tasks = [(k, lo, min(cfg.N, lo + chunk)) for k in range(len(cfg.m_grid)) for lo in range(0, cfg.N, chunk)]
    if workers <= 1:
        parts = [_replicate_range(cfg, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            # map returns results in task order, so the fold below is deterministic
            parts = list(ex.map(_replicate_range, *zip(*[(cfg, *t) for t in tasks])))
    out = [[] for _ in cfg.m_grid]
    for (k, _, _), part in zip(tasks, parts):
        out[k].extend(part)
    return out


def run_experiment(cfg: ExperimentConfig, truth: Optional[TruthValue] = None,
                   workers: Optional[int] = None) -> list:
    """Metrics for every ``(m, mode)``; deterministic in ``cfg`` whatever the worker count."""
    if truth is None:
        truth = estimate_truth(cfg.model, cfg.r, cfg.estimand, cfg.truth_n, cfg.truth_seed)
    est = simulate_estimates(cfg, workers)
    rows = []
    for k, m in enumerate(cfg.m_grid):
        arr = np.asarray(est[k])
        stats = {mode: summarize(arr[:, j], truth.value) for j, mode in enumerate(cfg.modes)}
        ref = stats["sliding"][0] if "sliding" in stats else float("nan")
        for mode in cfg.modes:
            mse, b2, var = stats[mode]
            ratio = mse / ref if ref > 0 else float("nan")
            rows.append(MetricsRow(cfg.estimand, cfg.model.label, cfg.model.gamma, cfg.model.param, m, mode,
                                   mse, b2, var, ratio))
    return rows


def metrics_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for row in rows:
        w.writerow(row.as_list())
    return buf.getvalue()


def write_metrics_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(metrics_csv(rows))


def read_series_csv(path: str) -> np.ndarray:
    """Read a ``t,x1[,x2]`` series file into an ``(n, d)`` matrix."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t" or any(h != f"x{j}" for j, h in enumerate(header[1:], 1)) or len(header) < 2:
        raise ValueError(f"{path}: expected header 't,x1[,x2,...]'")
    data = np.array([[float(v) for v in row[1:]] for row in rows[1:] if row], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path} has no data rows")
    return data


def series_csv(x) -> str:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{j + 1}" for j in range(x.shape[1])])
    for t, row in enumerate(x, 1):
        w.writerow([t] + [repr(float(v)) for v in row])
    return buf.getvalue()


def read_blockmax_csv(path: str) -> np.ndarray:
    """Read a ``start,x1[,x2]`` block-maxima file."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0].strip() != "start":
        raise ValueError(f"{path}: expected header 'start,x1[,x2,...]'")
    return np.array([[float(v) for v in row[1:]] for row in rows[1:] if row], dtype=float)


def blockmax_csv(sample) -> str:
    """Block maxima as ``start,x1[,x2]`` with 1-based start positions."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start"] + [f"x{j + 1}" for j in range(sample.dim)])
    for s, row in zip(sample.starts, sample.maxima):
        w.writerow([int(s) + 1] + [repr(float(v)) for v in row])
    return buf.getvalue()
