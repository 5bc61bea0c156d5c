"""Nearest-neighbor label propagation from landmarks to full clouds.

The spatial index wraps a k-d tree and pins down one behavior the tree alone
does not guarantee: queries at equal distance from several stored points
always resolve to the lowest stored index. Propagation assigns every point
the label of its exact nearest landmark, in Euclidean or feature space.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .core import FeatureMatrix, InstanceLabeling, LabeledCloud, LandmarkSet

# Distances closer than this relative gap are re-resolved with explicit
# index-ordered arithmetic instead of trusting the tree's internal order.
_TIE_REL = 1e-9


def _sq_dists(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    d = points - x
    return np.einsum("ij,ij->i", d, d)


class SpatialIndex:
    """Exact 1-NN / k-NN index over K points of uniform dimension.

    Ties at equal distance break toward the lowest stored index, which keeps
    query results reproducible on duplicate coordinates and symmetric inputs.
    """

    def __init__(self, points):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError(f"index points must be 2D (K, dim), got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("cannot build an index over empty input")
        if not np.isfinite(pts).all():
            raise ValueError("index points must be finite")
        self._points = pts
        self._tree = cKDTree(pts)
        self._dup_lowest: dict[bytes, int] | None = None

    @property
    def n(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def _check_queries(self, queries) -> np.ndarray:
        q = np.ascontiguousarray(queries, dtype=np.float64)
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ValueError(
                f"queries must have shape (M, {self.dim}), got {np.shape(queries)}"
            )
        return q

    def _coordinate_owners(self) -> dict[bytes, int]:
        # Lowest stored index per distinct coordinate; +0.0 folds -0.0 away.
        if self._dup_lowest is None:
            owners: dict[bytes, int] = {}
            for i, row in enumerate(self._points + 0.0):
                owners.setdefault(row.tobytes(), i)
            self._dup_lowest = owners
        return self._dup_lowest

    def _resolve_tie(self, x: np.ndarray, d0: float) -> int:
        radius = d0 * (1.0 + 4.0 * _TIE_REL)
        cand = np.sort(
            np.asarray(self._tree.query_ball_point(x, radius), dtype=np.int64)
        )
        d2 = _sq_dists(self._points[cand], x)
        return int(cand[np.argmin(d2)])

    def query(self, queries, workers: int = 1) -> np.ndarray:
        """Index of the nearest stored point for each query row."""
        q = self._check_queries(queries)
        if self.n == 1:
            return np.zeros(q.shape[0], dtype=np.int64)
        dist, idx = self._tree.query(q, k=2, workers=workers)
        out = idx[:, 0].astype(np.int64)
        tied = dist[:, 1] <= dist[:, 0] * (1.0 + _TIE_REL)
        if tied.any():
            zero = tied & (dist[:, 0] == 0.0)
            slow = tied & ~zero
            if zero.any():
                # Fast path for duplicate coordinates (padded blocks hit this
                # for nearly every query): one dict lookup per tied row.
                owners = self._coordinate_owners()
                for row in np.flatnonzero(zero):
                    hit = owners.get((q[row] + 0.0).tobytes())
                    if hit is not None:
                        out[row] = hit
                    else:
                        slow[row] = True
            for row in np.flatnonzero(slow):
                out[row] = self._resolve_tie(q[row], dist[row, 0])
        return out

    def _resolve_tie_k(self, x: np.ndarray, dk: float, k: int) -> np.ndarray:
        radius = dk * (1.0 + 4.0 * _TIE_REL)
        cand = np.sort(
            np.asarray(self._tree.query_ball_point(x, radius), dtype=np.int64)
        )
        d2 = _sq_dists(self._points[cand], x)
        order = np.argsort(d2, kind="stable")  # stable: equal distances keep index order
        return cand[order[:k]]

    def query_k(self, queries, k: int, workers: int = 1) -> np.ndarray:
        """Indices of the k nearest stored points per query row (k capped at n)."""
        if k < 1:
            raise ValueError("k must be at least 1")
        q = self._check_queries(queries)
        kq = min(k, self.n)
        fetch = kq + 1 if kq < self.n else kq
        dist, idx = self._tree.query(q, k=fetch, workers=workers)
        if dist.ndim == 1:
            dist = dist[:, None]
            idx = idx[:, None]
        out = idx[:, :kq].astype(np.int64)
        if kq < self.n:
            tied = dist[:, kq] <= dist[:, kq - 1] * (1.0 + _TIE_REL)
            for row in np.flatnonzero(tied):
                out[row] = self._resolve_tie_k(q[row], dist[row, kq - 1], kq)
        return out


def build_index(points) -> SpatialIndex:
    """Build an exact nearest-neighbor index over the given coordinate rows."""
    return SpatialIndex(points)


def _propagate_labels(
    index: SpatialIndex,
    queries: np.ndarray,
    landmark_labels: InstanceLabeling,
    workers: int,
) -> InstanceLabeling:
    nearest = index.query(queries, workers=workers)
    labels = landmark_labels.labels[nearest]
    categories = None
    if landmark_labels.categories is not None:
        categories = landmark_labels.categories[nearest]
    return InstanceLabeling(labels=labels, categories=categories)


def propagate(
    cloud: LabeledCloud,
    landmarks: LandmarkSet,
    landmark_labels: InstanceLabeling,
    workers: int = 1,
) -> InstanceLabeling:
    """Extend landmark labels to every point via its nearest landmark.

    Every point receives the label of the landmark nearest in Euclidean
    space; landmarks keep their own labels because each landmark is its own
    nearest neighbor (ties resolve to the lowest landmark index).
    """
    if len(landmark_labels) != landmarks.k:
        raise ValueError(
            f"landmark labeling has {len(landmark_labels)} entries for {landmarks.k} landmarks"
        )
    if landmarks.indices[-1] >= cloud.n:
        raise ValueError("landmark index out of range for cloud")
    index = build_index(cloud.points[landmarks.indices])
    return _propagate_labels(index, cloud.points, landmark_labels, workers)


def propagate_feature_space(
    features: FeatureMatrix,
    landmarks: LandmarkSet,
    landmark_labels: InstanceLabeling,
    workers: int = 1,
) -> InstanceLabeling:
    """Same contract as :func:`propagate`, with nearness measured between
    feature rows instead of coordinates."""
    if len(landmark_labels) != landmarks.k:
        raise ValueError(
            f"landmark labeling has {len(landmark_labels)} entries for {landmarks.k} landmarks"
        )
    if landmarks.indices[-1] >= features.rows:
        raise ValueError("landmark index out of range for feature matrix")
    if not np.isfinite(features.data).all():
        raise ValueError("feature matrix has non-finite values")
    index = build_index(features.data[landmarks.indices])
    return _propagate_labels(index, features.data, landmark_labels, workers)
