"""Disjoint and sliding block maxima.

Start indices are 0-based throughout: disjoint blocks start at
``0, r, 2r, ...`` and sliding blocks at every ``0, ..., n - r``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .evd import NormingSequence

MODES = ("disjoint", "sliding")


def _as_matrix(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("series must be a non-empty n x d matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("series must be finite")
    return x


@dataclass(frozen=True)
class BlockMaxSample:
    mode: str
    r: int
    maxima: np.ndarray
    starts: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.maxima.shape[0]

    @property
    def dim(self) -> int:
        return self.maxima.shape[1]


@dataclass(frozen=True)
class StandardizedSample:
    mode: str
    r: int
    maxima: np.ndarray
    starts: np.ndarray
    norming: NormingSequence

    @property
    def n_blocks(self) -> int:
        return self.maxima.shape[0]

    @property
    def dim(self) -> int:
        return self.maxima.shape[1]

    def unstandardize(self) -> BlockMaxSample:
        raw = self.maxima * self.norming.a + self.norming.b
        return BlockMaxSample(self.mode, self.r, raw, self.starts)


def sliding_max(column, r: int, counter: list | None = None) -> np.ndarray:
    """Maximum of every window of length ``r`` in O(n) with a monotone deque.

    The deque holds indices whose values are strictly decreasing from the
    front, so the front is always the current window maximum. If
    ``counter`` is a list, the number of deque pushes and pops is appended
    to it (at most ``2n``).
    """
    x = np.asarray(column, dtype=float).ravel()
    n = x.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"block size r={r} must satisfy 1 <= r <= n={n}")
    if r == 1:
        if counter is not None:
            counter.append(0)
        return x.copy()
    vals = x.tolist()
    out = [0.0] * (n - r + 1)
    dq = deque()
    ops = 0
    for i, v in enumerate(vals):
        while dq and vals[dq[-1]] <= v:
            dq.pop()
            ops += 1
        dq.append(i)
        ops += 1
        if dq[0] <= i - r:
            dq.popleft()
            ops += 1
        if i >= r - 1:
            out[i - r + 1] = vals[dq[0]]
    if counter is not None:
        counter.append(ops)
    return np.array(out)


def block_maxima(series, r: int, mode: str = "sliding") -> BlockMaxSample:
    """Componentwise block maxima of an ``n x d`` series.

    Disjoint mode keeps ``floor(n / r)`` blocks and drops a trailing
    partial block.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    x = _as_matrix(series)
    n = x.shape[0]
    if not 1 <= r <= n:
        raise ValueError(f"block size r={r} must satisfy 1 <= r <= n={n}")
    slid = np.column_stack([sliding_max(x[:, j], r) for j in range(x.shape[1])])
    if mode == "sliding":
        return BlockMaxSample(mode, r, slid, np.arange(n - r + 1))
    starts = np.arange(n // r) * r
    return BlockMaxSample(mode, r, slid[starts], starts)


def standardize(sample: BlockMaxSample, norming: NormingSequence) -> StandardizedSample:
    """Apply ``z = (m - b) / a`` componentwise."""
    if norming.r != sample.r:
        raise ValueError(f"norming block size {norming.r} != sample block size {sample.r}")
    if norming.dim not in (1, sample.dim):
        raise ValueError("norming dimension does not match the sample")
    z = (sample.maxima - norming.b) / norming.a
    return StandardizedSample(sample.mode, sample.r, z, sample.starts, norming)
