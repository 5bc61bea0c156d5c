"""Landmark labelers: similarity-matrix grouping, geometric oracle, ground truth.

A labeler is any callable ``(block_cloud, landmarks) -> InstanceLabeling``
over the landmarks; the factories at the bottom adapt each built-in labeler
to that contract so they slot into the pipeline interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .core import (
    UNLABELED,
    FeatureMatrix,
    InstanceLabeling,
    LabeledCloud,
    LandmarkSet,
    SimilarityMatrix,
)

Labeler = Callable[[LabeledCloud, LandmarkSet], InstanceLabeling]

LABELER_KINDS = ("similarity", "oracle", "ground-truth")


@dataclass(frozen=True)
class LabelerConfig:
    """Settings shared by the built-in labelers.

    ``tau`` is the similarity distance under which two landmarks count as
    same-instance candidates; ``link_radius`` is the oracle's single-linkage
    distance; groups below ``min_group_size`` become UNLABELED.
    """

    kind: str = "oracle"
    tau: float = 1.0
    link_radius: float = 0.15
    min_group_size: int = 1

    def __post_init__(self):
        if self.kind not in LABELER_KINDS:
            raise ValueError(f"unknown labeler kind {self.kind!r}")
        if self.tau < 0.0:
            raise ValueError("tau must be non-negative")
        if self.link_radius <= 0.0:
            raise ValueError("link_radius must be positive")
        if self.min_group_size < 1:
            raise ValueError("min_group_size must be at least 1")


def compute_similarity(features: FeatureMatrix, subset: LandmarkSet) -> SimilarityMatrix:
    """K x K Euclidean distances between the landmarks' feature rows.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric with an exactly zero diagonal.
    """
    if subset.indices[-1] >= features.rows:
        raise ValueError("landmark index out of range for feature matrix")
    rows = features.data[subset.indices]
    if not np.isfinite(rows).all():
        raise ValueError("feature matrix has non-finite values")
    condensed = pdist(rows)
    k = rows.shape[0]
    upper = np.zeros((k, k))
    start = 0
    for i in range(k - 1):
        count = k - 1 - i
        upper[i, i + 1 :] = condensed[start : start + count]
        start += count
    return SimilarityMatrix(data=upper + upper.T)


def group_from_similarity(matrix: SimilarityMatrix, cfg: LabelerConfig) -> InstanceLabeling:
    """Merge per-row group proposals into one instance id per landmark.

    Row i proposes the set {j : S_ij <= tau}. Proposals are visited in
    descending size order (seed index breaks ties) and each claims its still
    unassigned members as a new group; undersized groups end up UNLABELED.
    """
    k = matrix.dim
    within = matrix.data <= cfg.tau
    sizes = within.sum(axis=1)
    order = np.lexsort((np.arange(k), -sizes))
    assigned = np.full(k, -1, dtype=np.int64)
    next_id = 0
    for seed_row in order:
        members = np.flatnonzero(within[seed_row])
        free = members[assigned[members] < 0]
        if free.size:
            assigned[free] = next_id
            next_id += 1
    labels = assigned
    if cfg.min_group_size > 1:
        counts = np.bincount(labels, minlength=next_id)
        labels = np.where(counts[labels] < cfg.min_group_size, UNLABELED, labels)
        labels = _renumber(labels)
    return InstanceLabeling(labels=labels)


def _renumber(labels: np.ndarray) -> np.ndarray:
    """Dense ids from 0 in order of first appearance; UNLABELED passes through."""
    out = labels.copy()
    remap: dict[int, int] = {}
    for i, lab in enumerate(labels):
        if lab == UNLABELED:
            continue
        key = int(lab)
        if key not in remap:
            remap[key] = len(remap)
        out[i] = remap[key]
    return out


def oracle_label(
    block_cloud: LabeledCloud, subset: LandmarkSet, cfg: LabelerConfig = LabelerConfig()
) -> InstanceLabeling:
    """Geometric stand-in labeler: single-linkage components of the landmarks.

    Landmarks within ``link_radius`` of each other link; each connected
    component becomes one instance. Deduplicates coordinates first so padded
    blocks with repeated points do not inflate the pair search.
    """
    pts = block_cloud.points[subset.indices]
    coords, inverse = np.unique(pts, axis=0, return_inverse=True)
    pairs = cKDTree(coords).query_pairs(cfg.link_radius, output_type="ndarray")
    m = coords.shape[0]
    adj = coo_matrix(
        (np.ones(pairs.shape[0], dtype=np.int8), (pairs[:, 0], pairs[:, 1])),
        shape=(m, m),
    )
    _, comp = connected_components(adj, directed=False)
    return InstanceLabeling(labels=_renumber(comp[inverse]))


def ground_truth_label(block_cloud: LabeledCloud, subset: LandmarkSet) -> InstanceLabeling:
    """Copy the ground-truth ids of the landmark points."""
    if block_cloud.gt_instance is None:
        raise ValueError("cloud has no ground-truth instance labels")
    if subset.indices[-1] >= block_cloud.n:
        raise ValueError("landmark index out of range for cloud")
    categories = None
    if block_cloud.gt_category is not None:
        categories = block_cloud.gt_category[subset.indices]
    return InstanceLabeling(
        labels=block_cloud.gt_instance[subset.indices], categories=categories
    )


def similarity_labeler(features: FeatureMatrix, cfg: LabelerConfig) -> Labeler:
    """Labeler over a feature matrix aligned with the block cloud's points."""

    def label(block_cloud: LabeledCloud, landmarks: LandmarkSet) -> InstanceLabeling:
        if features.rows != block_cloud.n:
            raise ValueError(
                f"feature matrix covers {features.rows} points, block has {block_cloud.n}"
            )
        return group_from_similarity(compute_similarity(features, landmarks), cfg)

    return label


def oracle_labeler(cfg: LabelerConfig) -> Labeler:
    def label(block_cloud: LabeledCloud, landmarks: LandmarkSet) -> InstanceLabeling:
        return oracle_label(block_cloud, landmarks, cfg)

    return label


def ground_truth_labeler() -> Labeler:
    return ground_truth_label
