"""Asymptotic variances of disjoint- and sliding-blocks U-statistics.

For an order-2 kernel ``h`` with Hajek projection ``h1(z) = E h(z, Z) - theta``
the two limiting variances are

    sigma2_db = 4 Var(h1(Z))
    sigma2_sb = 8 int_0^1 Cov(h1(Z1_xi), h1(Z2_xi)) dxi

where ``(Z1_xi, Z2_xi)`` follows the overlap law ``G_xi``. The variance kernel
has closed forms in terms of ``g_j = Gamma(1 - j gamma)`` and the integrals
:func:`I_jk`; everything else goes through Monte Carlo.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np

from .dependence import Stdf, XiDependence, ev_copula_cdf, sample_ev, sample_gxi, frechet_to_gev
from .evd import ZETA3, gev_cdf, gev_moment
from .ustat import Kernel

# Limits of the variance-kernel formulas as gamma -> 0.
SIGMA2_DB_VARIANCE_GUMBEL = 11 * math.pi**4 / 90
_L2 = math.log(2.0)
SIGMA2_SB_VARIANCE_GUMBEL = (
    2 * ZETA3 - 48 - 8 * math.pi**2 / 3 + 32 / 3 * _L2**3 - 48 * _L2**2 + 96 * _L2
    + 16 / 3 * math.pi**2 * _L2
)

# Kendall's tau under independence.
KENDALL_INDEP_DB = 4 / 9
KENDALL_INDEP_SB = 32 * (7 / 12 - 2 * math.log(4 / 3))

GAMMA_ZERO_TOL = 1e-9
QUAD_DPS = 30
N_XI = 64


@dataclass(frozen=True)
class AsymVarResult:
    sigma2_db: float
    sigma2_sb: float
    method: str
    error_estimate: float = 0.0
    se_db: float = 0.0
    se_sb: float = 0.0

    @property
    def ratio(self) -> float:
        return self.sigma2_db / self.sigma2_sb if self.sigma2_sb > 0 else math.inf

    def csv_row(self) -> dict:
        return {
            "sigma2_db": repr(self.sigma2_db),
            "sigma2_sb": repr(self.sigma2_sb),
            "ratio": repr(self.ratio),
            "method": self.method,
            "error_estimate": repr(self.error_estimate),
            "se_db": repr(self.se_db),
            "se_sb": repr(self.se_sb),
        }


@dataclass(frozen=True)
class H1Closure:
    """Exact Hajek projection ``z -> E[h(z, Z)] - theta`` of a kernel."""

    kernel: str
    params: dict = field(default_factory=dict)
    func: Callable = None

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=float))


def h1_variance(gamma: float) -> H1Closure:
    """Projection of ``(x - y)^2 / 2`` under GEV(0, 1, gamma) margins."""
    if gamma >= 0.25:
        raise ValueError("the variance kernel needs gamma < 1/4")
    mu1 = gev_moment(1, gamma)
    mu2 = gev_moment(2, gamma)
    theta = mu2 - mu1**2

    def func(z):
        z = z[..., 0] if z.ndim > 1 else z
        return 0.5 * z * z - mu1 * z + 0.5 * mu2 - theta

    return H1Closure("variance", {"gamma": gamma}, func)


def h1_kendall(L: Stdf) -> H1Closure:
    """Projection of the concordance indicator on the copula scale: ``C(u) + Cbar(u) - theta``."""
    from .dependence import stdf_kendall_tau

    theta = (stdf_kendall_tau(L) + 1) / 2

    def func(u):
        c = ev_copula_cdf(L, u)
        return 2 * c + 1 - u[..., 0] - u[..., 1] - theta

    return H1Closure("kendall", {"L": L}, func)


# -- variance-kernel closed forms -------------------------------------------


def alpha_beta(beta: float, w):
    """``(1 - (1-w)^(beta+1)) / (w (beta+1))``, or ``-log(1-w)/w`` at ``beta = -1``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any((w_arr <= 0) | (w_arr >= 1)):
        raise ValueError("w must lie in (0, 1)")
    if beta == -1:
        out = -np.log1p(-w_arr) / w_arr
    else:
        out = -np.expm1((beta + 1) * np.log1p(-w_arr)) / (w_arr * (beta + 1))
    return out.item() if out.ndim == 0 else out


def _mp_alpha(beta, w):
    if beta == -1:
        return -mpmath.log1p(-w) / w
    return -mpmath.expm1((beta + 1) * mpmath.log1p(-w)) / (w * (beta + 1))


def _I_jk_mp(j: int, k: int, gamma, error: bool = False):
    g = mpmath.mpf(gamma)
    beta = (j + k) * g

    def integrand(w):
        return (_mp_alpha(beta, w) - 1) * (
            w ** (-j * g - 1) * (1 - w) ** (-k * g - 1) + w ** (-k * g - 1) * (1 - w) ** (-j * g - 1)
        )

    return mpmath.quad(integrand, [0, mpmath.mpf(1) / 8, mpmath.mpf(1) / 4, mpmath.mpf(1) / 2], error=error)


def I_jk(j: int, k: int, gamma: float) -> float:
    """``int_0^{1/2} (alpha_{(j+k)gamma}(w) - 1) {w^(-j g-1)(1-w)^(-k g-1) + (j <-> k)} dw``.

    Tanh-sinh quadrature in extended precision, which handles the
    integrable endpoint behaviour at ``w = 0``.
    """
    if j not in (1, 2) or k not in (1, 2):
        raise ValueError("j and k must be 1 or 2")
    if abs(gamma) < GAMMA_ZERO_TOL:
        raise ValueError("I_jk is not defined at gamma = 0; use the Gumbel closed form")
    if (j + k) * gamma >= 1:
        raise ValueError(f"integral diverges for (j+k)*gamma = {(j + k) * gamma} >= 1")
    with mpmath.workdps(QUAD_DPS):
        return float(_I_jk_mp(j, k, gamma))


def _check_gamma(gamma: float):
    if not math.isfinite(gamma) or gamma >= 0.25:
        raise ValueError(f"the variance kernel needs gamma < 1/4, got {gamma}")


def sigma2_db_variance_kernel(gamma: float) -> float:
    """``4 Var(h1(Z))`` for the variance kernel under GEV(0, 1, gamma) margins.

    Equals ``(g4 - 4 g1 g3 - g2^2 + 8 g1^2 g2 - 4 g1^4) / gamma^4`` and
    ``11 pi^4 / 90`` at ``gamma = 0``.
    """
    _check_gamma(gamma)
    if abs(gamma) < GAMMA_ZERO_TOL:
        return SIGMA2_DB_VARIANCE_GUMBEL
    with mpmath.workdps(60):
        g = mpmath.mpf(gamma)
        g1, g2, g3, g4 = (mpmath.gamma(1 - j * g) for j in (1, 2, 3, 4))
        return float((g4 - 4 * g1 * g3 - g2**2 + 8 * g1**2 * g2 - 4 * g1**4) / g**4)


def _sigma2_sb_mp(gamma: float):
    g = mpmath.mpf(gamma)
    G = mpmath.gamma
    g1, g2, g3, g4 = (G(1 - j * g) for j in (1, 2, 3, 4))
    (i11, e11), (i21, e21), (i22, e22) = (_I_jk_mp(j, k, g, error=True) for j, k in ((1, 1), (2, 1), (2, 2)))
    if gamma > 0:
        c = 2 / (3 * g**3)
        coef = (-3 * g4, 8 * g1 * g3, -6 * g1**2 * g2)
    else:
        c = 8 / g**2
        coef = (G(-4 * g), -2 * g1 * G(-3 * g), g1**2 * G(-2 * g))
    value = c * (coef[0] * i22 + coef[1] * i21 + coef[2] * i11)
    err = abs(c) * (abs(coef[0]) * e22 + abs(coef[1]) * e21 + abs(coef[2]) * e11)
    return float(value), float(err)


def sigma2_sb_variance_kernel(gamma: float, return_error: bool = False):
    """``8 int Cov(h1(Z1_xi), h1(Z2_xi)) dxi`` for the variance kernel.

    Uses the ``I_jk`` representation for ``gamma != 0`` (separate branches
    for positive and negative ``gamma``) and the exact Gumbel constant at 0.
    """
    _check_gamma(gamma)
    if abs(gamma) < GAMMA_ZERO_TOL:
        value, err = SIGMA2_SB_VARIANCE_GUMBEL, 0.0
    else:
        with mpmath.workdps(QUAD_DPS):
            value, err = _sigma2_sb_mp(gamma)
    return (value, err) if return_error else value


def asymvar_variance_kernel(gamma: float) -> AsymVarResult:
    db = sigma2_db_variance_kernel(gamma)
    sb, err = sigma2_sb_variance_kernel(gamma, return_error=True)
    method = "closed_form" if abs(gamma) < GAMMA_ZERO_TOL else "quadrature"
    return AsymVarResult(db, sb, method, error_estimate=err)


def ratio_curve(gamma_grid=None):
    """Rows ``(gamma, sigma2_db, sigma2_sb, ratio)`` for the variance kernel."""
    if gamma_grid is None:
        gamma_grid = np.linspace(-0.45, 0.24, 24)
    rows = []
    for g in gamma_grid:
        g = float(g)
        db = sigma2_db_variance_kernel(g)
        sb = sigma2_sb_variance_kernel(g)
        rows.append((g, db, sb, db / sb))
    return rows


def write_ratio_curve(rows, out=None) -> str:
    """Write ratio-curve rows as CSV to ``out`` (path or file object); returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma", "sigma2_db", "sigma2_sb", "ratio"])
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    elif out is not None:
        out.write(text)
    return text


# -- Monte Carlo ------------------------------------------------------------


def _var_se(x):
    """Sample variance and its delta-method standard error."""
    n = x.size
    c = x - x.mean()
    v = float(np.mean(c * c)) * n / (n - 1)
    se = float(np.std(c * c, ddof=1)) / math.sqrt(n)
    return v, se


def _cov_se(x, y):
    n = x.size
    p = (x - x.mean()) * (y - y.mean())
    return float(p.sum()) / (n - 1), float(np.std(p, ddof=1)) / math.sqrt(n)


def _xi_grid(n_xi: int):
    return (np.arange(n_xi) + 0.5) / n_xi


def sigma2_kendall(L: Stdf, n_mc: int = 2_000_000, rng: Optional[np.random.Generator] = None,
                   n_xi: int = N_XI) -> AsymVarResult:
    """Asymptotic variances of Kendall's tau statistic ``2U - 1`` for an EV copula.

    ``h1 = C + Cbar - theta`` is evaluated in closed form, so only the outer
    expectations are simulated: ``n_mc`` copula draws for the disjoint part
    and ``n_mc`` overlap pairs spread over a midpoint grid in ``xi`` for the
    sliding part.
    """
    if L.dim != 2:
        raise ValueError("Kendall's tau needs a bivariate copula")
    rng = np.random.default_rng() if rng is None else rng
    h1 = h1_kendall(L)

    u = np.exp(-1.0 / sample_ev(L, n_mc, rng))
    v_db, se_db = _var_se(h1(u))

    per = max(2, n_mc // n_xi)
    covs, vars_ = [], []
    for xi in _xi_grid(n_xi):
        z1, z2 = sample_gxi(XiDependence(L, float(xi), 0.0), per, rng)
        c, se = _cov_se(h1(gev_cdf(z1)), h1(gev_cdf(z2)))
        covs.append(c)
        vars_.append(se * se)
    v_sb = math.fsum(covs) / n_xi
    se_sb = math.sqrt(math.fsum(vars_)) / n_xi

    db, sb = 16 * v_db, 32 * v_sb
    se_db, se_sb = 16 * se_db, 32 * se_sb
    return AsymVarResult(max(db, 0.0), max(sb, 0.0), "monte_carlo",
                         error_estimate=math.hypot(se_db, se_sb), se_db=se_db, se_sb=se_sb)


def _sample_g(L: Stdf, gammas, n: int, rng):
    y = sample_ev(L, n, rng)
    return np.column_stack([frechet_to_gev(y[:, j], g) for j, g in enumerate(gammas)])


def _h1_hat(kernel: Kernel, z, L: Stdf, gammas, n_inner: int, rng):
    """Inner-MC projection estimate and its per-point sample variance."""
    n, d = z.shape
    means = np.empty(n)
    s2 = np.empty(n)
    rows = max(1, (1 << 20) // n_inner)
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        k = hi - lo
        inner = _sample_g(L, gammas, k * n_inner, rng)
        outer = np.repeat(z[lo:hi], n_inner, axis=0)
        vals = kernel.func(outer, inner).reshape(k, n_inner)
        means[lo:hi] = vals.mean(axis=1)
        s2[lo:hi] = vals.var(axis=1, ddof=1)
    return means, s2


def sigma2_mc(kernel: Kernel, marginal_gamma, L: Stdf, n_outer: int = 20_000, n_inner: int = 200,
              rng: Optional[np.random.Generator] = None, statistic_scale: float = 1.0,
              n_xi: int = N_XI, h1: Optional[H1Closure] = None) -> AsymVarResult:
    """Nested Monte Carlo estimate of ``(sigma2_db, sigma2_sb)`` for an order-2 kernel.

    ``h1`` is estimated at every outer point by an average over ``n_inner``
    fresh draws from ``G``, independent across outer points. This keeps the
    covariance estimates unbiased; the variance estimate is corrected by
    subtracting the mean inner variance over ``n_inner``. The sliding part
    spreads ``n_outer`` overlap pairs over a midpoint grid of ``n_xi`` values
    of ``xi`` in (0, 1). Pass an exact ``h1`` to skip the inner level.

    ``statistic_scale`` multiplies the underlying statistic (2 for Kendall's
    tau ``2U - 1``) and scales both variances by its square.
    """
    if kernel.order != 2:
        raise ValueError("only order-2 kernels are supported")
    if L.dim != kernel.dim:
        raise ValueError("kernel and dependence dimensions differ")
    rng = np.random.default_rng() if rng is None else rng
    gammas = XiDependence(L, 1.0, marginal_gamma).marginal_gamma

    def proj(z):
        if h1 is not None:
            return h1(z), np.zeros(z.shape[0]), 0
        m, s2 = _h1_hat(kernel, z, L, gammas, n_inner, rng)
        return m, s2, n_inner

    hz, s2, ni = proj(_sample_g(L, gammas, n_outer, rng))
    v_db, se_db = _var_se(hz)
    if ni:
        v_db -= float(np.mean(s2)) / ni

    per = max(2, n_outer // n_xi)
    covs, vars_ = [], []
    for xi in _xi_grid(n_xi):
        z1, z2 = sample_gxi(XiDependence(L, float(xi), gammas), per, rng)
        c, se = _cov_se(proj(z1)[0], proj(z2)[0])
        covs.append(c)
        vars_.append(se * se)
    v_sb = math.fsum(covs) / n_xi
    se_sb = math.sqrt(math.fsum(vars_)) / n_xi

    s = statistic_scale**2
    db, sb = 4 * s * v_db, 8 * s * v_sb
    se_db, se_sb = 4 * s * se_db, 8 * s * se_sb
    return AsymVarResult(max(db, 0.0), max(sb, 0.0), "monte_carlo",
                         error_estimate=math.hypot(se_db, se_sb), se_db=se_db, se_sb=se_sb)
