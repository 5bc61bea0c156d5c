"""Domain types shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Reserved id for points carrying no instance label. Equal to the maximum of
# the 32-bit uint used by the PLY/CSV label columns, so it survives every
# file format without colliding with a real instance id.
UNLABELED = 0xFFFF_FFFF


class Point3(NamedTuple):
    """A 3D point, coordinates in meters."""

    x: float
    y: float
    z: float


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _coerce_points(arr) -> np.ndarray:
    pts = np.ascontiguousarray(arr, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must have shape (N, 3), got {pts.shape}")
    return pts


def _coerce_labels(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.int64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class LabeledCloud:
    """N points with optional per-point color and ground-truth labels.

    Instance ids are opaque: downstream evaluation compares partitions,
    never id values. ``UNLABELED`` marks points without an instance.
    """

    points: np.ndarray  # (N, 3) float64
    colors: np.ndarray | None = None  # (N, 3) uint8
    gt_instance: np.ndarray | None = None  # (N,) int64
    gt_category: np.ndarray | None = None  # (N,) int64

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(_coerce_points(self.points)))
        if self.colors is not None:
            col = np.ascontiguousarray(self.colors, dtype=np.uint8)
            if col.ndim != 2 or col.shape[1] != 3:
                raise ValueError(f"colors must have shape (N, 3), got {col.shape}")
            object.__setattr__(self, "colors", _frozen(col))
        if self.gt_instance is not None:
            object.__setattr__(
                self, "gt_instance", _frozen(_coerce_labels(self.gt_instance, "gt_instance"))
            )
        if self.gt_category is not None:
            object.__setattr__(
                self, "gt_category", _frozen(_coerce_labels(self.gt_category, "gt_category"))
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def take(self, indices) -> "LabeledCloud":
        """New cloud holding the given points (repeats allowed)."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledCloud(
            points=self.points[idx],
            colors=None if self.colors is None else self.colors[idx],
            gt_instance=None if self.gt_instance is None else self.gt_instance[idx],
            gt_category=None if self.gt_category is None else self.gt_category[idx],
        )


def validate_cloud(cloud: LabeledCloud) -> list[str]:
    """Check cloud invariants; returns a list of violations (empty means OK)."""
    problems: list[str] = []
    n = cloud.n
    if n < 1:
        problems.append("cloud must contain at least one point")
    if not np.isfinite(cloud.points).all():
        problems.append("non-finite coordinate")
    for name in ("colors", "gt_instance", "gt_category"):
        arr = getattr(cloud, name)
        if arr is not None and arr.shape[0] != n:
            problems.append(f"label length mismatch: {name} has {arr.shape[0]} entries for {n} points")
    for name in ("gt_instance", "gt_category"):
        arr = getattr(cloud, name)
        if arr is not None and arr.size and arr.min() < 0:
            problems.append(f"negative id in {name}")
    return problems


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-point feature embeddings, one row per point."""

    data: np.ndarray  # (N, N_f) float64

    def __post_init__(self):
        mat = np.ascontiguousarray(self.data, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError(f"feature matrix must be 2D, got shape {mat.shape}")
        object.__setattr__(self, "data", _frozen(mat))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SimilarityMatrix:
    """K x K pairwise feature distances; symmetric, zero diagonal."""

    data: np.ndarray  # (K, K) float64

    def __post_init__(self):
        mat = np.ascontiguousarray(self.data, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {mat.shape}")
        if not np.isfinite(mat).all():
            raise ValueError("similarity matrix has non-finite entries")
        if mat.size and mat.min() < 0.0:
            raise ValueError("similarity matrix has negative entries")
        if np.any(np.diagonal(mat) != 0.0):
            raise ValueError("similarity matrix diagonal must be exactly zero")
        if not np.array_equal(mat, mat.T):
            raise ValueError("similarity matrix must be exactly symmetric")
        object.__setattr__(self, "data", _frozen(mat))

    @property
    def dim(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class LandmarkSet:
    """K distinct indices into a parent cloud, chosen by a sampling strategy."""

    indices: np.ndarray  # (K,) int64, sorted ascending
    strategy: str
    seed: int

    def __post_init__(self):
        idx = np.sort(_coerce_labels(self.indices, "indices"))
        if idx.size < 1:
            raise ValueError("landmark set must contain at least one index")
        if idx[0] < 0:
            raise ValueError("landmark indices must be non-negative")
        if idx.size > 1 and np.any(idx[1:] == idx[:-1]):
            raise ValueError("landmark indices must be distinct")
        object.__setattr__(self, "indices", _frozen(idx))

    @property
    def k(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class InstanceLabeling:
    """Per-point instance ids covering a cloud or a landmark set."""

    labels: np.ndarray  # int64, UNLABELED allowed
    categories: np.ndarray | None = None

    def __post_init__(self):
        lab = _coerce_labels(self.labels, "labels")
        if lab.size < 1:
            raise ValueError("labeling must cover at least one point")
        if lab.min() < 0:
            raise ValueError("instance ids must be non-negative")
        object.__setattr__(self, "labels", _frozen(lab))
        if self.categories is not None:
            cat = _coerce_labels(self.categories, "categories")
            if cat.shape != lab.shape:
                raise ValueError("categories must align with labels")
            object.__setattr__(self, "categories", _frozen(cat))

    def __len__(self) -> int:
        return self.labels.shape[0]
