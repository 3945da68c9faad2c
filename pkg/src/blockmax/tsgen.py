"""Seeded simulation of the stationary time-series models used in the experiments.

Models:

* ``iid``: i.i.d. unit Frechet variables.
* ``armax``: ``Y_t = max(alpha Y_{t-1}, (1 - alpha) W_t)`` with unit Frechet
  innovations, unit Frechet margins and extremal index ``1 - alpha``.
* ``car``: ``Y_t = phi Y_{t-1} + W_t`` with standard Cauchy innovations,
  Cauchy(0, 1/(1 - phi)) margins and extremal index ``1 - phi``.

Margins are then mapped to GPD(0, 1, gamma) (or another target) by a
probability-integral transform computed on the survival scale. Every
generator has a batch form producing ``(n_paths, n)`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import signal

from .dependence import InnovationCopula, copula_sample
from .evd import GevParams, gpd_isf

TEMPORAL = ("iid", "armax", "car")
MARGINALS = ("gpd", "frechet1", "gev", "native")

_MASK = (1 << 64) - 1
_CHUNK = 256
# bivariate paths start marginally stationary and are burned in until param^J < this
_BURN_TOL = 1e-17


@dataclass(frozen=True)
class ModelSpec:
    """A data-generating process.

    ``param`` is ``alpha`` for ARMAX and ``phi`` for CAR. ``marginal='native'``
    keeps the model's own margins (Frechet or Cauchy). ``piecewise`` is an
    optional season length: the series is then a concatenation of
    independent stretches of that length.
    """

    temporal: str = "iid"
    param: float = 0.0
    marginal: str = "gpd"
    gamma: float = 0.0
    gev: Optional[GevParams] = None
    dim: int = 1
    copula: InnovationCopula = field(default_factory=InnovationCopula)
    piecewise: Optional[int] = None

    def __post_init__(self):
        if self.temporal not in TEMPORAL:
            raise ValueError(f"temporal must be one of {TEMPORAL}")
        if self.temporal == "iid" and self.param != 0:
            raise ValueError("the iid model takes no parameter")
        if not 0 <= self.param < 1:
            raise ValueError("alpha / phi must lie in [0, 1)")
        if self.marginal not in MARGINALS:
            raise ValueError(f"marginal must be one of {MARGINALS}")
        if self.marginal == "gev" and self.gev is None:
            raise ValueError("marginal 'gev' needs GevParams")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.piecewise is not None and self.piecewise < 1:
            raise ValueError("season length must be >= 1")

    @property
    def label(self) -> str:
        if self.temporal == "iid":
            return "iid"
        return f"{self.temporal}({self.param:g})"

    @property
    def source(self) -> str:
        return "cauchy" if self.temporal == "car" else "frechet1"

    @property
    def source_scale(self) -> float:
        return 1.0 / (1.0 - self.param) if self.temporal == "car" else 1.0


# -- seeding ----------------------------------------------------------------


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, replication: int, stream: int = 0) -> int:
    """64-bit seed for ``(replication, stream)`` derived from ``master``.

    Each argument is folded in through a splitmix64 finalizer, which is a
    bijection on 64-bit words, so seeds never collide across replications
    for a fixed master and stream.
    """
    s = _splitmix64(int(master) & _MASK)
    s = _splitmix64(s ^ (int(replication) & _MASK))
    return _splitmix64(s ^ (int(stream) & _MASK))


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic PCG64 generator for ``(seed, stream)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & _MASK, int(stream)])))


# -- innovations and recursions ---------------------------------------------


def _frechet(rng, size):
    return 1.0 / rng.standard_exponential(size)


def _cauchy(rng, size, scale=1.0):
    return scale * np.tan(np.pi * (rng.random(size) - 0.5))


def _armax_recursion(y_prev, w, alpha: float):
    """Run the ARMAX recursion from state ``y_prev`` (shape ``(P,)``) over innovations ``w`` (``(P, n)``).

    Works in log space: within a chunk starting after state ``y``,
    ``log Y_u = u log(alpha) + max(log y, cummax_s(log((1-alpha) W_s) - s log(alpha)))``.
    Chunking keeps the offsets ``s log(alpha)`` small.
    """
    w = np.atleast_2d(w)
    if alpha == 0:
        return w.copy()
    la = math.log(alpha)
    lw = np.log1p(-alpha) + np.log(w)
    out = np.empty_like(w)
    state = np.log(np.asarray(y_prev, dtype=float))
    n = w.shape[1]
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        u = np.arange(1, hi - lo + 1) * la
        run = np.maximum.accumulate(lw[:, lo:hi] - u, axis=1)
        logy = u + np.maximum(state[:, None], run)
        out[:, lo:hi] = np.exp(logy)
        state = logy[:, -1]
    return out


def _car_recursion(y_prev, w, phi: float):
    w = np.atleast_2d(w)
    if phi == 0:
        return w.copy()
    zi = (phi * np.asarray(y_prev, dtype=float))[:, None]
    out, _ = signal.lfilter([1.0], [1.0, -phi], w, axis=1, zi=zi)
    return out


def armax_paths(n_paths: int, n: int, alpha: float, rng) -> np.ndarray:
    """``(n_paths, n)`` ARMAX(alpha) paths with exact unit Frechet stationary start."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    y0 = _frechet(rng, n_paths)
    if n == 1:
        return y0[:, None]
    w = _frechet(rng, (n_paths, n - 1))
    return np.column_stack([y0, _armax_recursion(y0, w, alpha)])


def car_paths(n_paths: int, n: int, phi: float, rng) -> np.ndarray:
    """``(n_paths, n)`` CAR(phi) paths started from the stationary Cauchy(0, 1/(1-phi))."""
    if not 0 <= phi < 1:
        raise ValueError("phi must lie in [0, 1)")
    y0 = _cauchy(rng, n_paths, 1.0 / (1.0 - phi))
    if n == 1:
        return y0[:, None]
    w = _cauchy(rng, (n_paths, n - 1))
    return np.column_stack([y0, _car_recursion(y0, w, phi)])


def gen_armax(n: int, alpha: float, rng) -> np.ndarray:
    """One ARMAX(alpha) path of length ``n`` with unit Frechet margins."""
    return armax_paths(1, n, alpha, rng)[0]


def gen_car(n: int, phi: float, rng) -> np.ndarray:
    """One CAR(phi) path of length ``n`` with Cauchy(0, 1/(1 - phi)) margins."""
    return car_paths(1, n, phi, rng)[0]


# -- margins ----------------------------------------------------------------


def _survival(series, source: str, scale: float):
    y = np.asarray(series, dtype=float)
    if source == "frechet1":
        with np.errstate(divide="ignore"):
            return np.where(y > 0, -np.expm1(-1.0 / np.where(y > 0, y, 1.0)), 1.0)
    if source == "cauchy":
        # arctan(scale / y) / pi keeps relative precision for large positive y
        with np.errstate(divide="ignore"):
            pos = np.arctan(scale / np.where(y > 0, y, 1.0)) / np.pi
        return np.where(y > 0, pos, 0.5 - np.arctan(y / scale) / np.pi)
    raise ValueError(f"unknown source law {source!r}")


def transform_margins(series, source: str = "frechet1", target_gamma: float = 0.0, scale: float = 1.0,
                      target: str = "gpd", gev: Optional[GevParams] = None) -> np.ndarray:
    """Probability-integral transform from ``source`` margins to ``target``.

    ``source`` is ``'frechet1'`` or ``'cauchy'`` (with ``scale``); ``target``
    is ``'gpd'`` (shape ``target_gamma``), ``'frechet1'`` or ``'gev'``. The
    map is strictly increasing, so ranks are preserved.
    """
    s = _survival(series, source, scale)
    if target == "gpd":
        return np.asarray(gpd_isf(s, target_gamma), dtype=float)
    e = -np.log1p(-s)  # -log F, the unit exponential scale
    if target == "frechet1":
        return 1.0 / e
    if target == "gev":
        p = gev if gev is not None else GevParams()
        if abs(p.gamma) < 1e-9:
            z = -np.log(e)
        else:
            z = np.expm1(-p.gamma * np.log(e)) / p.gamma
        return p.mu + p.sigma * z
    raise ValueError(f"unknown target {target!r}")


def _apply_marginal(spec: ModelSpec, y):
    if spec.marginal == "native":
        return y
    return transform_margins(y, spec.source, spec.gamma, spec.source_scale, target=spec.marginal, gev=spec.gev)


# -- bivariate --------------------------------------------------------------


def _burn_in(param: float) -> int:
    if param == 0:
        return 0
    return int(math.ceil(math.log(_BURN_TOL) / math.log(param)))


def bivariate_paths(n_paths: int, n: int, temporal: str, param: float, c: InnovationCopula, rng) -> np.ndarray:
    """``(n_paths, n, 2)`` native-margin paths with copula-linked innovations.

    Each coordinate starts from its exact marginal stationary law; the joint
    start is then forgotten over a burn-in of ``J`` steps with
    ``param^J < 1e-17``.
    """
    if temporal not in TEMPORAL:
        raise ValueError(f"temporal must be one of {TEMPORAL}")
    burn = _burn_in(param) if temporal != "iid" else 0
    total = n + burn
    u = copula_sample(c, n_paths * total, rng).reshape(n_paths, total, 2)
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).eps / 2)
    out = np.empty((n_paths, n, 2))
    for j in range(2):
        if temporal == "car":
            w = np.tan(np.pi * (u[:, :, j] - 0.5))
            y0 = _cauchy(rng, n_paths, 1.0 / (1.0 - param))
            y = _car_recursion(y0, w, param)
        else:
            w = -1.0 / np.log(u[:, :, j])
            alpha = param if temporal == "armax" else 0.0
            y0 = _frechet(rng, n_paths)
            y = _armax_recursion(y0, w, alpha)
        out[:, :, j] = y[:, burn:]
    return out


def gen_bivariate(n: int, temporal: str, param: float, c: InnovationCopula, rng) -> np.ndarray:
    """One bivariate path, shape ``(n, 2)``, on the model's native margins."""
    return bivariate_paths(1, n, temporal, param, c, rng)[0]


# -- dispatch ---------------------------------------------------------------


def generate_paths(spec: ModelSpec, n_paths: int, n: int, rng) -> np.ndarray:
    """``(n_paths, n, dim)`` independent stationary paths of ``spec`` (ignores ``piecewise``)."""
    if n < 1 or n_paths < 1:
        raise ValueError("need n >= 1 and n_paths >= 1")
    if spec.dim == 2:
        y = bivariate_paths(n_paths, n, spec.temporal, spec.param, spec.copula, rng)
    elif spec.temporal == "car":
        y = car_paths(n_paths, n, spec.param, rng)[:, :, None]
    else:
        y = armax_paths(n_paths, n, spec.param, rng)[:, :, None]
    return _apply_marginal(spec, y)


def gen_piecewise(n: int, r: int, base: ModelSpec, rng) -> np.ndarray:
    """Concatenation of ``ceil(n / r)`` independent seasons of length ``r``, cut to ``n``."""
    if not 1 <= r <= n:
        raise ValueError(f"season length r={r} must satisfy 1 <= r <= n={n}")
    seasons = -(-n // r)
    paths = generate_paths(replace(base, piecewise=None), seasons, r, rng)
    return paths.reshape(seasons * r, base.dim)[:n]


def generate(spec: ModelSpec, n: int, rng) -> np.ndarray:
    """One series of length ``n`` as an ``(n, dim)`` matrix."""
    if spec.piecewise is not None:
        return gen_piecewise(n, spec.piecewise, spec, rng)
    return generate_paths(spec, 1, n, rng)[0]
