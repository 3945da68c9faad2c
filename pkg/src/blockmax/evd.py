"""Univariate extreme-value and Pareto distribution utilities.

All functions accept scalars or numpy arrays and broadcast. The shape
parameter ``gamma`` follows the extreme-value convention (positive values
give heavy tails), which is the opposite sign of ``scipy.stats.genextreme``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

# |gamma| below this uses the gamma = 0 limit formulas.
GAMMA_ZERO_TOL = 1e-9

EULER_GAMMA = float(np.euler_gamma)
ZETA3 = 1.2020569031595942853997


@dataclass(frozen=True)
class GevParams:
    """Location, scale and shape of a GEV distribution."""

    mu: float = 0.0
    sigma: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def lower(self) -> float:
        if self.gamma > GAMMA_ZERO_TOL:
            return self.mu - self.sigma / self.gamma
        return -math.inf

    @property
    def upper(self) -> float:
        if self.gamma < -GAMMA_ZERO_TOL:
            return self.mu - self.sigma / self.gamma
        return math.inf


@dataclass(frozen=True)
class NormingSequence:
    """Block-size dependent norming constants ``a_r`` (scale) and ``b_r`` (location)."""

    a: np.ndarray
    b: np.ndarray
    r: int

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape:
            raise ValueError("a and b must have the same length")
        if np.any(a <= 0):
            raise ValueError("every scale constant must be positive")
        if self.r < 1:
            raise ValueError("block size r must be >= 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


def _is_zero(gamma: float) -> bool:
    return abs(gamma) < GAMMA_ZERO_TOL


def _check_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return x


def _check_prob(q):
    q = np.asarray(q, dtype=float)
    if np.any(~(q > 0) | ~(q < 1)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return q


def _scalar(out):
    return out.item() if np.ndim(out) == 0 else out


def gev_cdf(x, p: GevParams = GevParams()):
    """CDF of GEV(mu, sigma, gamma), with 0 / 1 outside the support."""
    x = _check_finite(x)
    z = (x - p.mu) / p.sigma
    if _is_zero(p.gamma):
        out = np.exp(-np.exp(-z))
    else:
        gz = p.gamma * z
        t = 1.0 + gz
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # log1p keeps (1 + gamma z)^(-1/gamma) accurate for small gamma
            out = np.exp(-np.exp(-np.log1p(np.where(t > 0, gz, 0.0)) / p.gamma))
        below = 0.0 if p.gamma > 0 else 1.0
        out = np.where(t > 0, out, below)
    return _scalar(out)


def gev_quantile(q, p: GevParams = GevParams()):
    """Inverse of :func:`gev_cdf` for ``q`` strictly inside (0, 1)."""
    q = _check_prob(q)
    e = -np.log(q)  # unit-exponential scale
    if _is_zero(p.gamma):
        z = -np.log(e)
    else:
        z = np.expm1(-p.gamma * np.log(e)) / p.gamma
    return _scalar(p.mu + p.sigma * z)


def gpd_cdf(x, gamma: float):
    """CDF of the standard generalized Pareto distribution GPD(0, 1, gamma)."""
    x = _check_finite(x)
    xp = np.maximum(x, 0.0)
    if _is_zero(gamma):
        out = -np.expm1(-xp)
    else:
        t = 1.0 + gamma * xp
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.expm1(-np.log1p(np.where(t > 0, gamma * xp, 0.0)) / gamma)
        out = np.where(t > 0, out, 1.0)
    return _scalar(np.where(x < 0, 0.0, out))


def gpd_isf(s, gamma: float):
    """Inverse survival function of GPD(0, 1, gamma), ``F^<-(1 - s)``.

    Working with the survival probability keeps full relative precision in
    the far upper tail, which is where block maxima live.
    """
    s = np.asarray(s, dtype=float)
    if _is_zero(gamma):
        return _scalar(-np.log(s))
    return _scalar(np.expm1(-gamma * np.log(s)) / gamma)


def gpd_quantile(q, gamma: float):
    """Generalized inverse of :func:`gpd_cdf` for ``q`` in (0, 1)."""
    q = _check_prob(q)
    return gpd_isf(1.0 - q, gamma)


def frechet_cdf(x):
    """Unit Frechet CDF ``exp(-1/x)`` for x > 0, zero otherwise."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    return _scalar(out)


def frechet_quantile(q):
    """Unit Frechet quantile ``-1/log(q)``."""
    q = _check_prob(q)
    return _scalar(-1.0 / np.log(q))


def _mp_g(j: int, gamma):
    return mpmath.gamma(1 - j * gamma)


def gev_moment(j: int, gamma: float) -> float:
    """Raw moment ``E[Z^j]`` of ``Z ~ GEV(0, 1, gamma)`` for ``j`` in 1..4.

    Uses ``E[Z^j] = gamma^-j * sum_i C(j, i) (-1)^(j-i) Gamma(1 - i gamma)``,
    evaluated in extended precision because the alternating sum cancels
    badly for small ``|gamma|``. The Gumbel case uses its cumulants.
    """
    if j not in (1, 2, 3, 4):
        raise ValueError("only moments of order 1..4 are supported")
    if j * gamma >= 1:
        raise ValueError(f"moment of order {j} does not exist for gamma={gamma}")
    if _is_zero(gamma):
        k1, k2, k3, k4 = EULER_GAMMA, math.pi**2 / 6, 2 * ZETA3, math.pi**4 / 15
        return [
            k1,
            k2 + k1**2,
            k3 + 3 * k2 * k1 + k1**3,
            k4 + 4 * k3 * k1 + 3 * k2**2 + 6 * k2 * k1**2 + k1**4,
        ][j - 1]
    with mpmath.workdps(40):
        g = mpmath.mpf(gamma)
        total = mpmath.fsum(
            mpmath.binomial(j, i) * (-1) ** (j - i) * _mp_g(i, g) for i in range(j + 1)
        )
        return float(total / g**j)


def gev_variance_tau2(gamma: float) -> float:
    """Variance of GEV(0, 1, gamma): ``{Gamma(1-2g) - Gamma(1-g)^2} / g^2``."""
    if gamma >= 0.5:
        raise ValueError("the GEV variance is infinite for gamma >= 1/2")
    if _is_zero(gamma):
        return math.pi**2 / 6
    with mpmath.workdps(40):
        g = mpmath.mpf(gamma)
        return float((_mp_g(2, g) - _mp_g(1, g) ** 2) / g**2)


def armax_norming(r: int, alpha: float, gamma: float) -> NormingSequence:
    """Norming constants of the marginally transformed ARMAX(alpha) model."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    n_eff = r * (1.0 - alpha)
    if n_eff <= 0:
        raise ValueError("r * (1 - alpha) must be positive")
    if _is_zero(gamma):
        return NormingSequence(a=[1.0], b=[math.log(n_eff)], r=r)
    a = n_eff**gamma
    return NormingSequence(a=[a], b=[math.expm1(gamma * math.log(n_eff)) / gamma], r=r)
