"""Stable tail dependence functions, extreme-value copulas and samplers.

Besides the classical d-variate objects this module provides the overlap
family ``L_xi`` / ``C_xi`` / ``G_xi``: the joint limit law of two
standardized block maxima whose windows overlap by a fraction ``1 - xi``
of the block length (``xi >= 1`` means no overlap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .evd import GAMMA_ZERO_TOL, GevParams, gev_cdf

FAMILIES = ("independence", "comonotone", "logistic", "pickands")


@dataclass(frozen=True)
class Stdf:
    """A stable tail dependence function ``L`` on ``[0, inf]^d``.

    Use the constructors :meth:`independence`, :meth:`comonotone`,
    :meth:`logistic` and :meth:`from_pickands` rather than the raw fields.
    The ``pickands`` family is bivariate and defined by a convex table of
    Pickands dependence function values, linearly interpolated.
    """

    family: str
    dim: int = 2
    theta: float = 1.0
    knots: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown stdf family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.family == "logistic" and not self.theta >= 1:
            raise ValueError("logistic theta must be >= 1")
        if self.family == "pickands":
            _validate_pickands(self.knots, self.values)
            if self.dim != 2:
                raise ValueError("table-driven stdf is bivariate")

    @classmethod
    def independence(cls, dim: int = 2) -> "Stdf":
        return cls("independence", dim)

    @classmethod
    def comonotone(cls, dim: int = 2) -> "Stdf":
        return cls("comonotone", dim)

    @classmethod
    def logistic(cls, theta: float, dim: int = 2) -> "Stdf":
        return cls("logistic", dim, theta=float(theta))

    @classmethod
    def from_pickands(cls, knots, values) -> "Stdf":
        return cls("pickands", 2, knots=tuple(map(float, knots)), values=tuple(map(float, values)))

    def pickands(self, t):
        """Pickands function ``A(t) = L(1 - t, t)`` (bivariate only)."""
        if self.dim != 2:
            raise ValueError("Pickands function is defined for dim == 2")
        t = np.asarray(t, dtype=float)
        return self(np.stack([1.0 - t, t], axis=-1))

    def __call__(self, x):
        return stdf_eval(self, x)


def _validate_pickands(knots, values):
    t = np.asarray(knots, dtype=float)
    a = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != a.shape or t.size < 2:
        raise ValueError("knots and values must be 1-d arrays of equal length >= 2")
    if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise ValueError("knots must increase from 0 to 1")
    if a[0] != 1.0 or a[-1] != 1.0:
        raise ValueError("A(0) = A(1) = 1 is required")
    if np.any(a > 1 + 1e-12) or np.any(a < np.maximum(t, 1 - t) - 1e-12):
        raise ValueError("max(t, 1-t) <= A(t) <= 1 is required")
    slopes = np.diff(a) / np.diff(t)
    if np.any(np.diff(slopes) < -1e-12):
        raise ValueError("Pickands table must be convex")


def stdf_eval(L: Stdf, x):
    """Evaluate ``L(x)`` along the last axis of ``x`` (entries may be ``inf``)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != L.dim:
        raise ValueError(f"expected last dimension {L.dim}, got {x.shape[-1]}")
    if np.any(x < 0):
        raise ValueError("stdf arguments must be non-negative")
    if L.family == "independence":
        return x.sum(axis=-1)
    if L.family == "comonotone":
        return x.max(axis=-1)
    if L.family == "logistic":
        m = x.max(axis=-1)
        safe = np.where((m > 0) & np.isfinite(m), m, 1.0)
        with np.errstate(invalid="ignore"):
            s = np.sum((x / safe[..., None]) ** L.theta, axis=-1) ** (1.0 / L.theta)
        return np.where(np.isfinite(m), m * s, np.inf)
    # pickands
    tot = x.sum(axis=-1)
    safe = np.where((tot > 0) & np.isfinite(tot), tot, 1.0)
    t = x[..., 1] / safe
    a = np.interp(t, L.knots, L.values)
    return np.where(np.isfinite(tot), np.where(tot > 0, tot * a, 0.0), np.inf)


def ev_copula_cdf(L: Stdf, u):
    """Extreme-value copula ``C(u) = exp(-L(-log u))``; zero components give 0."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        val = np.exp(-stdf_eval(L, -np.log(u)))
    return val


def stdf_kendall_tau(L: Stdf) -> float:
    """Kendall's tau of the bivariate extreme-value copula with stdf ``L``.

    Uses ``tau = int t(1-t)/A(t) dA'(t)``, which is a finite sum over the
    knots for a piecewise linear Pickands table.
    """
    if L.dim != 2:
        raise ValueError("Kendall's tau needs a bivariate stdf")
    if L.family == "independence":
        return 0.0
    if L.family == "comonotone":
        return 1.0
    if L.family == "logistic":
        return 1.0 - 1.0 / L.theta
    t = np.asarray(L.knots)
    a = np.asarray(L.values)
    jumps = np.diff(np.diff(a) / np.diff(t))
    tk = t[1:-1]
    return float(np.sum(tk * (1 - tk) / a[1:-1] * jumps))


# -- overlap family ---------------------------------------------------------


@dataclass(frozen=True)
class XiDependence:
    """Dependence of two block maxima overlapping by a fraction ``1 - xi``."""

    base: Stdf
    xi: float
    marginal_gamma: tuple = field(default=())

    def __post_init__(self):
        if not self.xi >= 0:
            raise ValueError("xi must be non-negative")
        g = tuple(float(v) for v in np.broadcast_to(self.marginal_gamma or 0.0, (self.base.dim,)))
        object.__setattr__(self, "marginal_gamma", g)

    @property
    def dim(self) -> int:
        return self.base.dim


def lxi_eval(dep: XiDependence, x, y):
    """Stable tail dependence function of dimension 2d of the overlap family."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != dep.dim or y.shape[-1] != dep.dim:
        raise ValueError("dimension mismatch")
    w = min(dep.xi, 1.0)
    L = dep.base
    sep = stdf_eval(L, x) + stdf_eval(L, y)
    if w == 1.0:
        return sep
    joint = stdf_eval(L, np.maximum(x, y))
    if w == 0.0:
        return joint
    return w * sep + (1.0 - w) * joint


def cxi_eval(dep: XiDependence, u, v):
    """Copula of the overlap family, ``exp(-L_xi(-log u, -log v))``."""
    with np.errstate(divide="ignore"):
        return np.exp(-lxi_eval(dep, -np.log(np.asarray(u, float)), -np.log(np.asarray(v, float))))


def gxi_cdf(dep: XiDependence, x, y):
    """Joint CDF of the overlap family with GEV(0, 1, gamma_j) margins."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.stack([gev_cdf(x[..., j], GevParams(gamma=g)) for j, g in enumerate(dep.marginal_gamma)], -1)
    v = np.stack([gev_cdf(y[..., j], GevParams(gamma=g)) for j, g in enumerate(dep.marginal_gamma)], -1)
    return cxi_eval(dep, u, v)


def frechet_to_gev(y, gamma: float):
    """Map unit Frechet values to GEV(0, 1, gamma) by the quantile transform."""
    y = np.asarray(y, dtype=float)
    if abs(gamma) < GAMMA_ZERO_TOL:
        return np.log(y)
    return np.expm1(gamma * np.log(y)) / gamma


def _unit_frechet(rng, size):
    return 1.0 / rng.standard_exponential(size)


def positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws ``S`` with Laplace transform ``E exp(-tS) = exp(-t^alpha)``.

    Kanter's representation; ``alpha = 1`` is the point mass at one.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if alpha == 1.0:
        return np.ones(n)
    u = rng.uniform(0.0, math.pi, n)
    e = rng.standard_exponential(n)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    return a * b


def _pickands_conditional(L: Stdf, u, p, iters: int = 64):
    """Solve ``dC/du(u, v) = p`` for ``v`` by vectorized bisection."""
    x = -np.log(u)
    knots = np.asarray(L.knots)
    vals = np.asarray(L.values)
    slopes = np.diff(vals) / np.diff(knots)

    def cond_cdf(t):
        a = np.interp(t, knots, vals)
        k = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, slopes.size - 1)
        tot = x / (1.0 - t)
        return np.exp(-tot * a + x) * (a - t * slopes[k])

    # cond_cdf decreases in t (t -> 1 means v -> 0)
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = cond_cdf(mid) >= p
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    t = 0.5 * (lo + hi)
    y = x * t / (1.0 - t)
    return np.exp(-y)


def sample_ev(L: Stdf, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws from the d-variate max-stable law with stdf ``L`` and unit Frechet margins."""
    d = L.dim
    if L.family == "independence":
        return _unit_frechet(rng, (n, d))
    if L.family == "comonotone":
        return np.repeat(_unit_frechet(rng, (n, 1)), d, axis=1)
    if L.family == "logistic":
        alpha = 1.0 / L.theta
        s = positive_stable(alpha, n, rng)
        e = rng.standard_exponential((n, d))
        return (s[:, None] / e) ** alpha
    u = rng.uniform(size=n)
    p = rng.uniform(size=n)
    v = _pickands_conditional(L, u, p)
    return -1.0 / np.log(np.stack([u, v], axis=1))


def sample_gxi(dep: XiDependence, n: int, rng: np.random.Generator):
    """Draw ``n`` pairs ``(Z1, Z2)`` from the overlap law ``G_xi``.

    For ``xi`` in [0, 1] the pair is built on the unit-Frechet scale from
    three independent max-stable vectors ``A, B, C`` as
    ``Z1 = max(xi A, (1-xi) C)`` and ``Z2 = max(xi B, (1-xi) C)``, then
    mapped to GEV margins. Returns two arrays of shape ``(n, d)``.
    """
    L = dep.base
    w = min(dep.xi, 1.0)
    if w == 1.0:
        y1 = sample_ev(L, n, rng)
        y2 = sample_ev(L, n, rng)
    elif w == 0.0:
        y1 = sample_ev(L, n, rng)
        y2 = y1.copy()
    else:
        a = sample_ev(L, n, rng)
        b = sample_ev(L, n, rng)
        c = sample_ev(L, n, rng)
        y1 = np.maximum(w * a, (1 - w) * c)
        y2 = np.maximum(w * b, (1 - w) * c)
    z1 = np.column_stack([frechet_to_gev(y1[:, j], g) for j, g in enumerate(dep.marginal_gamma)])
    z2 = np.column_stack([frechet_to_gev(y2[:, j], g) for j, g in enumerate(dep.marginal_gamma)])
    return z1, z2


# -- innovation copulas -----------------------------------------------------

COPULA_FAMILIES = ("independence", "gaussian", "student_t", "gumbel_hougaard")


@dataclass(frozen=True)
class InnovationCopula:
    """Bivariate copula of the innovations of the simulation models."""

    family: str = "independence"
    rho: float = 0.0
    theta: float = 1.0
    dof: int = 4

    def __post_init__(self):
        if self.family not in COPULA_FAMILIES:
            raise ValueError(f"unknown copula family {self.family!r}")
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if not self.theta >= 1:
            raise ValueError("theta must be >= 1")

    @classmethod
    def from_tau(cls, family: str, tau: float) -> "InnovationCopula":
        if family == "independence":
            return cls()
        par = copula_param_from_tau(family, tau)
        if family == "gumbel_hougaard":
            return cls(family, theta=par)
        return cls(family, rho=par)

    @property
    def label(self) -> str:
        if self.family == "independence":
            return "independence"
        if self.family == "gumbel_hougaard":
            return f"gumbel_hougaard(theta={self.theta:g})"
        if self.family == "student_t":
            return f"student_t(rho={self.rho:g},dof={self.dof})"
        return f"gaussian(rho={self.rho:g})"


def copula_param_from_tau(family: str, tau: float) -> float:
    """Copula parameter matching a given Kendall's tau."""
    if not 0 <= tau < 1:
        raise ValueError("tau must lie in [0, 1)")
    if family in ("gaussian", "student_t"):
        return math.sin(math.pi * tau / 2)
    if family == "gumbel_hougaard":
        return 1.0 / (1.0 - tau)
    raise ValueError(f"no tau parametrisation for family {family!r}")


def copula_tau(c: InnovationCopula) -> float:
    """Kendall's tau of an innovation copula."""
    if c.family == "independence":
        return 0.0
    if c.family == "gumbel_hougaard":
        return 1.0 - 1.0 / c.theta
    return 2.0 / math.pi * math.asin(c.rho)


def tail_dep_upper(family: str, tau: float) -> float:
    """Upper tail dependence coefficient as a function of Kendall's tau."""
    if family == "gumbel_hougaard":
        return 2.0 - 2.0 ** (1.0 - tau)
    if family == "student_t":
        # t_{dof+1} with dof = 4, as in the usual closed form for the t copula
        s = math.sin(math.pi * tau / 2)
        return 2.0 * stats.t.cdf(-math.sqrt(5.0 * (1.0 - s) / (1.0 + s)), df=5)
    if family == "gaussian":
        return 0.0
    raise ValueError(f"tail dependence not available for {family!r}")


def copula_sample(c: InnovationCopula, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws from the copula, shape ``(n, 2)`` with uniform margins."""
    if c.family == "independence":
        return rng.uniform(size=(n, 2))
    if c.family == "gumbel_hougaard":
        y = sample_ev(Stdf.logistic(c.theta, 2), n, rng)
        return np.exp(-1.0 / y)
    z = rng.standard_normal((n, 2))
    z[:, 1] = c.rho * z[:, 0] + math.sqrt(1.0 - c.rho**2) * z[:, 1]
    if c.family == "gaussian":
        return special.ndtr(z)
    w = np.sqrt(rng.chisquare(c.dof, n) / c.dof)
    return stats.t.cdf(z / w[:, None], df=c.dof)
