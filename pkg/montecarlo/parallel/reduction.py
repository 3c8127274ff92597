"""
Deterministic reductions.

Every sum in the engine goes through the same balanced, left-packed binary
tree: each level adds neighbours (0+1, 2+3, ...) and an odd trailing element
is carried up unchanged. The tree depends on the input length only, so the
result is the same whatever the worker count. A full aligned block of 2**k
elements is reduced by exactly the subtree the sequential pass builds for
it, which is what lets the parallel path hand whole blocks to workers.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Union

import numpy as np

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class PrecisionMode(str, Enum):
    SINGLE = 'single'
    DOUBLE = 'double'

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32) if self is PrecisionMode.SINGLE else np.dtype(np.float64)

    @property
    def eps(self) -> float:
        return float(np.finfo(self.dtype).eps)

    @classmethod
    def coerce(cls, mode: Union['PrecisionMode', str, None]) -> 'PrecisionMode':
        if mode is None:
            return cls.DOUBLE
        if isinstance(mode, cls):
            return mode
        try:
            return cls(str(mode).lower())
        except ValueError:
            raise ConfigurationError(f"Unknown precision '{mode}'; choose single or double")


def as_precision(values, mode=None) -> np.ndarray:
    return np.asarray(values, dtype=PrecisionMode.coerce(mode).dtype)


def _tree_reduce(a: np.ndarray) -> np.ndarray:
    """Reduce the last axis of ``a`` with the left-packed pairwise tree."""
    while a.shape[-1] > 1:
        n = a.shape[-1]
        if n % 2:
            head = a[..., :-1]
            a = np.concatenate([head[..., 0::2] + head[..., 1::2], a[..., -1:]], axis=-1)
        else:
            a = a[..., 0::2] + a[..., 1::2]
    return a[..., 0]


def _block_size(n: int, workers: int) -> int:
    target = max(1, n // workers)
    return 1 << (target.bit_length() - 1)


def pairwise_sum(values, mode=None, axis: int = -1, workers: int = 1):
    """
    Pairwise (tree) sum along ``axis`` in the declared precision.

    Empty input sums to 0. With ``workers > 1`` and 1-D input, aligned
    power-of-two blocks are reduced concurrently and the partial sums are
    combined by the remaining levels of the same tree, so the result is
    bit-identical to ``workers=1``.
    """
    mode = PrecisionMode.coerce(mode)
    a = np.asarray(values, dtype=mode.dtype)
    if a.ndim == 0:
        return a[()]
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    if n == 0:
        zero = np.zeros(a.shape[:-1], dtype=mode.dtype)
        return zero[()] if zero.ndim == 0 else zero
    if workers > 1 and a.ndim == 1 and n >= 2 * workers:
        return _parallel_pairwise(a, workers)
    out = _tree_reduce(a)
    return out[()] if np.ndim(out) == 0 else out


def _parallel_pairwise(a: np.ndarray, workers: int):
    n = a.shape[0]
    block = _block_size(n, workers)
    q = n // block
    rows = a[:q * block].reshape(q, block)
    groups = np.array_split(np.arange(q), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda g: _tree_reduce(rows[g]), [g for g in groups if len(g)]))
    partial = np.concatenate(parts)
    if q * block < n:
        tail = _tree_reduce(a[q * block:])
        partial = np.concatenate([partial, np.atleast_1d(tail)])
    return _tree_reduce(partial)[()]


def sequential_sum(values, mode=None):
    """Naive left-to-right accumulation in the declared precision; the baseline the tree is compared with."""
    a = as_precision(values, mode).ravel()
    if a.size == 0:
        return a.dtype.type(0)
    # cumsum accumulates strictly in order, unlike np.sum
    return np.cumsum(a, dtype=a.dtype)[-1]


def _up_sweep(a: np.ndarray):
    levels = [a]
    while a.shape[0] > 1:
        n = a.shape[0]
        if n % 2:
            head = a[:-1]
            a = np.concatenate([head[0::2] + head[1::2], a[-1:]])
        else:
            a = a[0::2] + a[1::2]
        levels.append(a)
    return levels


def inclusive_prefix_sum(values, mode=None) -> np.ndarray:
    """
    out[i] = sum of values[0..i], built from the nodes of the pairwise tree.

    A right child (or a carried element) inherits its parent's prefix; a left
    child adds itself to the prefix ending just before its parent. The final
    entry is therefore the root, identical to ``pairwise_sum(values)``.
    """
    a = as_precision(values, mode).ravel()
    if a.size == 0:
        return a.copy()
    levels = _up_sweep(a)
    prefix = levels[-1].copy()
    for level in reversed(levels[:-1]):
        n = level.shape[0]
        idx = np.arange(n)
        parent = idx // 2
        out = prefix[parent]
        left = (idx % 2 == 0) & (idx + 1 < n)
        lp = parent[left]
        before = np.zeros(lp.shape[0], dtype=a.dtype)
        has_before = lp > 0
        before[has_before] = prefix[lp[has_before] - 1]
        out[left] = before + level[left]
        prefix = out
    return prefix
