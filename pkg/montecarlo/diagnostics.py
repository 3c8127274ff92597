"""
Mode coverage and estimator diagnostics for the mixture posterior.

The atlas holds the k! relabellings of the true means (the full modes) and
the ordered pairs of distinct means (the modes of the (mu_1, mu_2)
marginal). Samples are assigned to the nearest mode within a capture radius.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .exceptions import ConfigurationError, NumericalError
from .targets import TRUE_MEANS

logger = logging.getLogger(__name__)

UNASSIGNED = -1


@dataclass
class ModeAtlas:
    true_means: Tuple[float, ...] = TRUE_MEANS
    capture_radius: float = 1.0
    full_modes: np.ndarray = field(init=False)
    marginal_modes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.true_means = tuple(float(v) for v in self.true_means)
        means = np.array(self.true_means)
        gaps = np.abs(means[:, None] - means[None, :])[~np.eye(means.size, dtype=bool)]
        min_gap = float(gaps.min()) if gaps.size else np.inf
        if not 0 < self.capture_radius < min_gap / 2:
            raise ConfigurationError(
                f"capture_radius must lie in (0, {min_gap / 2}), got {self.capture_radius}"
            )
        self.full_modes = np.array(list(itertools.permutations(self.true_means)))
        self.marginal_modes = np.array(list(itertools.permutations(self.true_means, 2)))

    @property
    def n_full(self) -> int:
        return self.full_modes.shape[0]

    @property
    def n_marginal(self) -> int:
        return self.marginal_modes.shape[0]

    def modes(self, marginal: bool = False) -> np.ndarray:
        return self.marginal_modes if marginal else self.full_modes

    def index_of(self, point: Sequence[float], marginal: bool = False) -> int:
        modes = self.modes(marginal)
        hits = np.flatnonzero(np.all(modes == np.asarray(point, dtype=np.float64), axis=1))
        return int(hits[0]) if hits.size else UNASSIGNED


def assign_mode(samples, atlas: ModeAtlas, marginal: bool = False):
    """
    Nearest mode by Euclidean distance, or UNASSIGNED beyond the capture radius.

    Works on one point (returns an int) or on rows of points (returns an
    array). Marginal assignment uses the first two coordinates.
    """
    arr = np.asarray(samples, dtype=np.float64)
    single = arr.ndim == 1
    modes = atlas.modes(marginal)
    points = arr.reshape(-1, arr.shape[-1])[:, :modes.shape[1]]
    dist2 = ((points[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    nearest = dist2.argmin(axis=1)
    within = dist2[np.arange(points.shape[0]), nearest] <= atlas.capture_radius ** 2
    out = np.where(within, nearest, UNASSIGNED)
    return int(out[0]) if single else out


@dataclass
class ModeHistogram:
    counts: np.ndarray
    unassigned: float
    marginal: bool = False

    @property
    def total(self) -> float:
        return float(self.counts.sum()) + self.unassigned

    def rows(self) -> List[Tuple[object, float]]:
        out = [(i, float(c)) for i, c in enumerate(self.counts)]
        out.append(('unassigned', float(self.unassigned)))
        return out


def mode_counts(samples, atlas: ModeAtlas, weights=None, marginal: bool = False) -> ModeHistogram:
    """Per-mode sample counts, or weight sums when ``weights`` is given."""
    labels = assign_mode(np.atleast_2d(samples), atlas, marginal)
    n_modes = atlas.n_marginal if marginal else atlas.n_full
    mass = np.ones(labels.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    hit = labels != UNASSIGNED
    counts = np.bincount(labels[hit], weights=mass[hit], minlength=n_modes)
    if weights is None:
        counts = counts.astype(np.int64)
    return ModeHistogram(counts=counts, unassigned=float(mass[~hit].sum()), marginal=marginal)


def min_mode_mass(histogram: ModeHistogram) -> float:
    """Smallest per-mode share of the total mass."""
    total = histogram.total
    return float(histogram.counts.min() / total) if total > 0 else 0.0


def occupancy_ratio(histogram: ModeHistogram) -> float:
    """max/min count over modes; inf when some mode is empty."""
    low = histogram.counts.min()
    return float(histogram.counts.max() / low) if low > 0 else float('inf')


def traversal_time(mode_sequence, n_modes: int = 24) -> Optional[int]:
    """Length of the shortest prefix visiting every mode, or None if the sequence never does."""
    seq = np.asarray(mode_sequence, dtype=np.int64).ravel()
    first = np.full(n_modes, -1, dtype=np.int64)
    visited = seq[(seq >= 0) & (seq < n_modes)]
    positions = np.flatnonzero((seq >= 0) & (seq < n_modes))
    if visited.size == 0:
        return None
    # first occurrence of each label
    labels, idx = np.unique(visited, return_index=True)
    first[labels] = positions[idx]
    if np.any(first < 0):
        return None
    return int(first.max()) + 1


def coupon_expectation(k: int) -> float:
    """Expected draws to see all k equally likely modes: k * H_k."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    return k * sum(1.0 / i for i in range(1, k + 1))


def traversal_summary(mode_sequence, atlas: ModeAtlas) -> dict:
    seq = np.asarray(mode_sequence, dtype=np.int64)
    visited = np.unique(seq[seq != UNASSIGNED])
    return {
        'iterations': int(seq.size),
        'traversal_time': traversal_time(seq, atlas.n_full),
        'modes_visited': int(visited.size),
        'n_modes': atlas.n_full,
        'coupon_baseline': coupon_expectation(atlas.n_full),
        'unassigned_fraction': float(np.mean(seq == UNASSIGNED)) if seq.size else 0.0,
    }


def estimator_report(values) -> dict:
    """Mean, unbiased variance and standard error of repeated estimates."""
    runs = np.asarray(values, dtype=np.float64).ravel()
    if runs.size < 2:
        raise ConfigurationError('estimator_report needs at least two runs')
    variance = float(runs.var(ddof=1))
    return {
        'runs': int(runs.size),
        'mean': float(runs.mean()),
        'variance': variance,
        'std_error': float(np.sqrt(variance / runs.size)),
    }


def kde_grid(samples2d, weights=None, lower: float = -10.0, upper: float = 10.0, resolution: int = 101,
             max_points: int = 20000) -> np.ndarray:
    """
    Gaussian KDE of 2-D points on a square grid; rows are (x, y, density).

    Above ``max_points`` inputs are thinned with a fixed stride so the grid
    stays reproducible.
    """
    pts = np.asarray(samples2d, dtype=np.float64).reshape(-1, 2)
    w = None if weights is None else np.asarray(weights, dtype=np.float64).ravel()
    if w is not None:
        keep = w > 0
        pts, w = pts[keep], w[keep]
    if pts.shape[0] > max_points:
        stride = -(-pts.shape[0] // max_points)
        pts = pts[::stride]
        w = None if w is None else w[::stride]
    if pts.shape[0] < 3:
        raise ConfigurationError('kde_grid needs at least three points with positive weight')
    try:
        kde = stats.gaussian_kde(pts.T, weights=None if w is None else w / w.sum())
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Points are degenerate, cannot fit a density: {exc}")
    axis = np.linspace(lower, upper, resolution)
    gx, gy = np.meshgrid(axis, axis, indexing='ij')
    density = kde(np.vstack([gx.ravel(), gy.ravel()]))
    return np.column_stack([gx.ravel(), gy.ravel(), density])
