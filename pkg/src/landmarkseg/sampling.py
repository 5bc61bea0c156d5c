"""Landmark selection strategies: random, grid, and grid-extension.

The grid strategy collects the n nearest block points of every vertex of a
fixed regular grid, growing n until enough distinct candidates exist. The
grid-extension strategy keeps n at 1 and instead doubles the grid density.
Both finish by drawing exactly K distinct indices from the candidate set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledCloud, LandmarkSet
from .propagation import build_index

# Grid-extension vertex budget, in multiples of the block's point count.
# The needed grid density grows much faster than K (roughly 4x K at desk
# scale) and has no finite bound when coordinates repeat, since a duplicate
# is never any vertex's unique nearest point. Past this budget, or when the
# collection provably cannot reach K, the candidate set is completed
# deterministically instead of doubling forever.
_GRID_BUDGET_FACTOR = 64


@dataclass(frozen=True)
class GridConfig:
    """Parameters of the fixed-grid strategy."""

    grid_points: int = 2048
    nmin: int = 1
    nstep: int = 1

    def __post_init__(self):
        if self.grid_points < 1:
            raise ValueError("grid_points must be at least 1")
        if self.nmin < 1 or self.nstep < 1:
            raise ValueError("nmin and nstep must be at least 1")


@dataclass(frozen=True)
class GridExtConfig:
    """Parameters of the grid-extension strategy."""

    initial_grid: int = 128
    growth_factor: int = 2

    def __post_init__(self):
        if self.initial_grid < 1:
            raise ValueError("initial_grid must be at least 1")
        if self.growth_factor < 2:
            raise ValueError("growth_factor must be at least 2")


def _check_k(k: int, n: int) -> None:
    if k < 1:
        raise ValueError("K must be at least 1")
    if k > n:
        raise ValueError(f"K={k} exceeds the {n} available points")


def random_sample(block_cloud: LabeledCloud, k: int, seed: int) -> LandmarkSet:
    """Draw K distinct indices uniformly without replacement."""
    _check_k(k, block_cloud.n)
    rng = np.random.default_rng(seed)
    idx = rng.choice(block_cloud.n, size=k, replace=False)
    return LandmarkSet(indices=idx, strategy="random", seed=seed)


def make_grid(block_cloud: LabeledCloud, grid_points: int) -> np.ndarray:
    """Vertices of a regular grid over the block's bounding box.

    Axis subdivision counts grow greedily, always refining the axis with the
    coarsest current spacing, until adding one more vertex layer anywhere
    would push the total count past ``grid_points``. Degenerate axes keep a
    single layer, so the vertex set always includes the bbox corners.
    """
    if grid_points < 1:
        raise ValueError("grid_points must be at least 1")
    lo = block_cloud.points.min(axis=0)
    hi = block_cloud.points.max(axis=0)
    extents = hi - lo
    counts = np.ones(3, dtype=np.int64)
    live = extents > 0.0
    while live.any():
        spacing = np.where(live, extents / counts, -np.inf)
        axis = int(np.argmax(spacing))
        trial = counts.copy()
        trial[axis] += 1
        if trial.prod() > grid_points:
            break
        counts = trial
    axes = [np.linspace(lo[i], hi[i], counts[i]) for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def grid_candidates(block_cloud: LabeledCloud, grid: np.ndarray, n: int) -> np.ndarray:
    """Distinct block indices collected by the n nearest points of each grid vertex."""
    index = build_index(block_cloud.points)
    return np.unique(index.query_k(grid, min(n, block_cloud.n)))


def _draw(rng: np.random.Generator, candidates: np.ndarray, k: int) -> np.ndarray:
    return np.sort(rng.choice(candidates, size=k, replace=False))


def _complete(candidates: np.ndarray, k: int, n_points: int) -> np.ndarray:
    """Top a saturated candidate set up to k with the lowest missing indices."""
    missing = np.setdiff1d(np.arange(n_points), candidates)
    return np.concatenate([candidates, missing[: k - candidates.size]])


def grid_sample(
    block_cloud: LabeledCloud,
    k: int,
    cfg: GridConfig = GridConfig(),
    seed: int = 0,
) -> LandmarkSet:
    """Grid-based selection: per-vertex n-nearest collection with growing n.

    Each vertex of a fixed grid contributes the indices of its n nearest
    block points; while fewer than K distinct indices have been collected,
    n increases by ``nstep`` and the collection reruns over the same grid.
    The landmarks are then K distinct draws from the collected set.
    """
    n_points = block_cloud.n
    _check_k(k, n_points)
    grid = make_grid(block_cloud, cfg.grid_points)
    index = build_index(block_cloud.points)
    n_near = cfg.nmin
    while True:
        candidates = np.unique(index.query_k(grid, min(n_near, n_points)))
        if candidates.size >= k or n_near >= n_points:
            break
        n_near += cfg.nstep
    rng = np.random.default_rng(seed)
    return LandmarkSet(indices=_draw(rng, candidates, k), strategy="grid", seed=seed)


def grid_extension_sample(
    block_cloud: LabeledCloud,
    k: int,
    cfg: GridExtConfig = GridExtConfig(),
    seed: int = 0,
) -> LandmarkSet:
    """Grid-extension selection: 1-nearest collection with a doubling grid.

    Every vertex contributes only its single nearest block point; when the
    distinct collection stays below K the grid is rebuilt at twice the
    vertex count. Duplicated coordinates can never be collected this way,
    so a saturated grid falls back to completing the candidate set with the
    lowest uncollected indices rather than doubling without bound.
    """
    n_points = block_cloud.n
    _check_k(k, n_points)
    index = build_index(block_cloud.points)
    # Distinct coordinate count bounds what 1-NN collection can ever reach.
    collectible = np.unique(block_cloud.points, axis=0).shape[0]
    budget = max(_GRID_BUDGET_FACTOR * n_points, cfg.initial_grid)
    n_grid = cfg.initial_grid
    prev_size = -1
    stalls = 0
    while True:
        grid = make_grid(block_cloud, n_grid)
        candidates = np.unique(index.query(grid))
        if candidates.size >= k:
            break
        if k > collectible or candidates.size >= collectible or n_grid >= budget:
            candidates = _complete(candidates, k, n_points)
            break
        if candidates.size <= prev_size:
            stalls += 1
            if stalls >= 2:
                candidates = _complete(candidates, k, n_points)
                break
        else:
            stalls = 0
        prev_size = candidates.size
        n_grid *= cfg.growth_factor
    rng = np.random.default_rng(seed)
    return LandmarkSet(
        indices=_draw(rng, candidates, k), strategy="grid-extension", seed=seed
    )
