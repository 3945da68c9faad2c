"""Symmetric kernels and U-statistics of block maxima samples.

Kernels are vectorized: ``kernel.func(x1, ..., xp)`` takes ``p`` arrays of
shape ``(k, d)`` and returns ``k`` kernel values. Several kernels have
exact O(N log N) or O(N) evaluation paths which :func:`u_statistic`
uses automatically; the generic enumerator is always available via
``fast=False``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .blocks import BlockMaxSample, StandardizedSample

MAX_TUPLES = 10**9
_CHUNK = 1 << 18


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel of order ``order`` on ``dim``-dimensional points.

    ``f`` and ``ell`` describe the location-scale behaviour
    ``h((x - b) / a, ...) = h(x, ...) / f(a, b) - ell(a, b)`` when known.
    """

    name: str
    order: int
    dim: int
    func: Callable
    f: Optional[Callable] = None
    ell: Optional[Callable] = None

    @property
    def has_locscale(self) -> bool:
        return self.f is not None and self.ell is not None


@dataclass(frozen=True)
class UStatResult:
    value: float
    kernel: str
    mode: str
    n_blocks: int
    pair_count: int
    method: str = "enumeration"
    n_effective: Optional[int] = None


def _col(x):
    return x[:, 0]


def _variance(x, y):
    return 0.5 * (_col(x) - _col(y)) ** 2


def _gini(x, y):
    return 0.5 * np.abs(_col(x) - _col(y))


def _kendall(x, y):
    return (((x[:, 0] - y[:, 0]) * (x[:, 1] - y[:, 1])) > 0).astype(float)


def _spearman(x1, x2, x3):
    pts = (x1, x2, x3)
    total = 0.0
    for a, b, c in itertools.permutations(range(3)):
        total = total + np.sign(pts[a][:, 0] - pts[b][:, 0]) * np.sign(pts[a][:, 1] - pts[c][:, 1])
    return 0.5 * total


def variance_kernel() -> Kernel:
    return Kernel("variance", 2, 1, _variance, f=lambda a, b: a[0] ** 2, ell=lambda a, b: 0.0)


def gini_kernel() -> Kernel:
    return Kernel("gini", 2, 1, _gini, f=lambda a, b: a[0], ell=lambda a, b: 0.0)


def mean_kernel() -> Kernel:
    return Kernel("mean", 1, 1, _col, f=lambda a, b: a[0], ell=lambda a, b: b[0] / a[0])


def pwm_kernel(k: int) -> Kernel:
    """Modified PWM kernel ``max(x_1, ..., x_k) / k``."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def func(*xs):
        return np.max(np.column_stack([_col(x) for x in xs]), axis=1) / k

    return Kernel(f"pwm{k}", k, 1, func, f=lambda a, b: a[0], ell=lambda a, b: b[0] / (k * a[0]))


def pwm_indicator_kernel(k: int) -> Kernel:
    """PWM kernel ``(1/k) sum_j 1{max_{i != j} x_i <= x_j} x_j``; equals ``pwm_kernel`` without ties."""

    def func(*xs):
        m = np.column_stack([_col(x) for x in xs])
        total = np.zeros(m.shape[0])
        for j in range(k):
            others = np.delete(m, j, axis=1)
            total += np.where(others.max(axis=1) <= m[:, j], m[:, j], 0.0)
        return total / k

    return Kernel(f"pwm_indicator{k}", k, 1, func)


def kendall_kernel() -> Kernel:
    return Kernel("kendall", 2, 2, _kendall, f=lambda a, b: 1.0, ell=lambda a, b: 0.0)


def spearman_kernel() -> Kernel:
    return Kernel("spearman", 3, 2, _spearman, f=lambda a, b: 1.0, ell=lambda a, b: 0.0)


def constant_kernel(c: float = 1.0, dim: int = 1) -> Kernel:
    return Kernel("constant", 2, dim, lambda x, y: np.full(x.shape[0], float(c)))


def get_kernel(name: str) -> Kernel:
    """Look up a kernel by name (``pwmK`` for the order-K PWM kernel)."""
    simple = {
        "variance": variance_kernel,
        "gini": gini_kernel,
        "mean": mean_kernel,
        "kendall": kendall_kernel,
        "spearman": spearman_kernel,
    }
    if name in simple:
        return simple[name]()
    if name.startswith("pwm_indicator") and name[13:].isdigit():
        return pwm_indicator_kernel(int(name[13:]))
    if name.startswith("pwm") and name[3:].isdigit():
        return pwm_kernel(int(name[3:]))
    raise ValueError(f"unknown kernel {name!r}")


def kernel_eval(k: Kernel, *args) -> float:
    """Evaluate ``k`` at ``p`` single points."""
    if len(args) != k.order:
        raise ValueError(f"kernel {k.name} has order {k.order}, got {len(args)} arguments")
    pts = [np.asarray(a, dtype=float).reshape(1, -1) for a in args]
    if any(p.shape[1] != k.dim for p in pts):
        raise ValueError(f"kernel {k.name} expects {k.dim}-dimensional points")
    return float(k.func(*pts)[0])


def _unpack(sample):
    if isinstance(sample, (BlockMaxSample, StandardizedSample)):
        return sample.maxima, sample.mode, sample.r
    x = np.asarray(sample, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x, "raw", None


# -- generic enumeration ----------------------------------------------------


def _enumerate_pairs(func, x, min_gap: int = 1):
    """Sum of ``func`` over pairs ``i < j`` with ``j - i >= min_gap``."""
    n = x.shape[0]
    partial = []
    count = 0
    rows_per_chunk = max(1, _CHUNK // max(n, 1))
    for start in range(0, n - min_gap, rows_per_chunk):
        ii, jj = [], []
        for i in range(start, min(start + rows_per_chunk, n - min_gap)):
            j = np.arange(i + min_gap, n)
            ii.append(np.full(j.size, i))
            jj.append(j)
        ii = np.concatenate(ii)
        jj = np.concatenate(jj)
        partial.append(float(np.sum(func(x[ii], x[jj]))))
        count += ii.size
    return math.fsum(partial), count


def _enumerate_tuples(func, x, p):
    partial = []
    count = 0
    combos = itertools.combinations(range(x.shape[0]), p)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)), dtype=np.int64)
        if block.size == 0:
            break
        idx = block.reshape(-1, p)
        partial.append(float(np.sum(func(*(x[idx[:, t]] for t in range(p))))))
        count += idx.shape[0]
    return math.fsum(partial), count


# -- fast paths -------------------------------------------------------------


def _count_inversions(seq) -> int:
    """Pairs ``i < j`` with ``seq[i] > seq[j]``, by bottom-up merge sort."""
    a = list(seq)
    n = len(a)
    buf = [0.0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[i] <= a[j]:
                    buf[k] = a[i]
                    i += 1
                else:
                    buf[k] = a[j]
                    inversions += mid - i
                    j += 1
                k += 1
            buf[k : k + mid - i] = a[i:mid]
            k += mid - i
            buf[k : k + hi - j] = a[j:hi]
            a[lo:hi] = buf[lo:hi]
        width *= 2
    return inversions


def _tied_pairs(*cols) -> int:
    _, counts = np.unique(np.column_stack(cols), axis=0, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_counts(x) -> tuple[int, int, int]:
    """Strictly concordant, strictly discordant and total pair counts.

    Sorting by the first coordinate (ties broken by the second) turns
    strict discordances into inversions of the second coordinate; tied
    pairs are then removed by inclusion-exclusion.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    total = n * (n - 1) // 2
    order = np.lexsort((x[:, 1], x[:, 0]))
    discordant = _count_inversions(x[order, 1].tolist())
    ties = _tied_pairs(x[:, 0]) + _tied_pairs(x[:, 1]) - _tied_pairs(x[:, 0], x[:, 1])
    concordant = total - discordant - ties
    return concordant, discordant, total


def pwm_orderstat(sample, k: int) -> float:
    """Order-statistic PWM estimator ``(1/N) sum_i w_i M_(i)``.

    ``w_i = (i-1)...(i-k) / ((N-1)...(N-k))``; equals the U-statistic of
    ``pwm_kernel(k + 1)`` (exactly, even with ties).
    """
    x, _, _ = _unpack(sample)
    m = np.sort(x[:, 0])
    n = m.size
    if n <= k:
        raise ValueError(f"need more than k={k} observations, got {n}")
    i = np.arange(1, n + 1, dtype=float)
    w = np.ones(n)
    for l in range(1, k + 1):
        w *= (i - l) / (n - l)
    return float(np.mean(w * m))


def _gini_fast(col):
    s = np.sort(col)
    n = s.size
    coef = 2.0 * np.arange(1, n + 1) - n - 1
    return 0.5 * float(np.dot(coef, s)) / (n * (n - 1) / 2)


def _fast_value(x, kernel: Kernel):
    name = kernel.name
    if name == "variance":
        return float(np.var(x[:, 0], ddof=1))
    if name == "mean":
        return float(np.mean(x[:, 0]))
    if name == "gini":
        return _gini_fast(x[:, 0])
    if name == "kendall":
        conc, _, total = kendall_counts(x)
        return conc / total
    if name.startswith("pwm") and name[3:].isdigit():
        return pwm_orderstat(x, kernel.order - 1)
    return None


def u_statistic(sample, kernel: Kernel, fast: bool = True) -> UStatResult:
    """U-statistic of ``kernel`` over all increasing index tuples of the sample."""
    x, mode, _ = _unpack(sample)
    n, d = x.shape
    p = kernel.order
    if d != kernel.dim:
        raise ValueError(f"kernel {kernel.name} expects dim {kernel.dim}, sample has {d}")
    if n < p:
        raise ValueError(f"need at least {p} blocks, got {n}")
    count = math.comb(n, p)
    if fast:
        value = _fast_value(x, kernel)
        if value is not None:
            return UStatResult(value, kernel.name, mode, n, count, method="fast")
    if count > MAX_TUPLES:
        raise ValueError(f"{count} tuples exceed the enumeration limit and no fast path exists")
    if p == 1:
        total, seen = math.fsum(kernel.func(x).tolist()), n
    elif p == 2:
        total, seen = _enumerate_pairs(kernel.func, x)
    else:
        total, seen = _enumerate_tuples(kernel.func, x, p)
    assert seen == count
    return UStatResult(total / count, kernel.name, mode, n, count)


def kendall_tau(sample, fast: bool = True) -> float:
    """Kendall's tau statistic ``2 U(h_tau) - 1``; tied pairs count as non-concordant."""
    x, _, _ = _unpack(sample)
    if x.shape[1] != 2:
        raise ValueError("Kendall's tau needs a bivariate sample")
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    return 2.0 * u_statistic(x, kendall_kernel(), fast=fast).value - 1.0


def kendall_tau_bruteforce(sample) -> float:
    """O(N^2) reference implementation of :func:`kendall_tau`."""
    x, _, _ = _unpack(sample)
    dx = np.sign(x[:, None, 0] - x[None, :, 0])
    dy = np.sign(x[:, None, 1] - x[None, :, 1])
    conc = np.triu((dx * dy) > 0, k=1).sum()
    n = x.shape[0]
    return 2.0 * conc / (n * (n - 1) / 2) - 1.0


def bias_reduced_sliding(sample: BlockMaxSample, kernel: Kernel) -> UStatResult:
    """Sliding-blocks U-statistic restricted to pairs at least ``r`` apart.

    Averages over the ``C(N - r + 1, 2)`` pairs ``(i, j)`` with
    ``j - i >= r``; ``n_effective = N - r + 1`` is the matching normalizing
    sample size.
    """
    if sample.mode != "sliding":
        raise ValueError("bias reduction applies to sliding block maxima only")
    if kernel.order != 2:
        raise ValueError("bias reduction is defined for kernels of order 2")
    x = sample.maxima
    n = x.shape[0]
    r = sample.r
    if n <= r:
        raise ValueError(f"no pairs at distance >= r={r} among {n} blocks")
    n_eff = n - r + 1
    count = n_eff * (n_eff - 1) // 2
    if kernel.name == "variance":
        # sum over j of sum_{i <= j - r} (x_i - x_j)^2 / 2 via prefix sums
        v = x[:, 0]
        s1 = np.cumsum(v)
        s2 = np.cumsum(v * v)
        j = np.arange(r, n)
        c = (j - r + 1).astype(float)
        terms = s2[j - r] + c * v[j] ** 2 - 2.0 * v[j] * s1[j - r]
        return UStatResult(0.5 * math.fsum(terms.tolist()) / count, kernel.name, "bias_reduced_sliding",
                           n, count, method="fast", n_effective=n_eff)
    total, seen = _enumerate_pairs(kernel.func, x, min_gap=r)
    assert seen == count
    return UStatResult(total / count, kernel.name, "bias_reduced_sliding", n, count, n_effective=n_eff)


def locscale_check(kernel: Kernel, a, b, trials: int = 100, rng: np.random.Generator | None = None,
                   rtol: float = 1e-10) -> bool:
    """Check ``h((x - b)/a, ...) = h(x, ...)/f(a, b) - ell(a, b)`` on random points."""
    if not kernel.has_locscale:
        raise ValueError(f"kernel {kernel.name} has no location-scale metadata")
    rng = np.random.default_rng() if rng is None else rng
    a = np.broadcast_to(np.asarray(a, dtype=float), (kernel.dim,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (kernel.dim,))
    pts = [rng.standard_normal((trials, kernel.dim)) * 3.0 * a + b for _ in range(kernel.order)]
    lhs = kernel.func(*[(p - b) / a for p in pts])
    rhs = kernel.func(*pts) / kernel.f(a, b) - kernel.ell(a, b)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return bool(np.all(np.abs(lhs - rhs) <= rtol * scale))
