"""Overlapping block partition, fixed-size resampling, and label merging.

Scenes are cut into cuboidal blocks on the horizontal plane (full scene
height), each block is resampled to a fixed point count, and per-block
instance labelings are merged back into one scene labeling by unifying
instances that overlap strongly on shared points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import UNLABELED, InstanceLabeling, LabeledCloud


@dataclass(frozen=True)
class Block:
    """One cuboidal block: horizontal footprint plus its member points."""

    origin_xy: tuple[float, float]
    size_xy: tuple[float, float]
    member_indices: np.ndarray  # scene point indices inside the footprint

    @property
    def count(self) -> int:
        return self.member_indices.shape[0]


@dataclass(frozen=True)
class BlockGrid:
    stride: float
    blocks: tuple[Block, ...]
    scene_n: int


@dataclass(frozen=True)
class BlockLabeling:
    """A block's instance labels aligned with the scene points it sampled."""

    point_indices: np.ndarray  # scene indices of the block's resampled points
    labels: np.ndarray  # instance ids, UNLABELED allowed

    def __post_init__(self):
        pi = np.ascontiguousarray(self.point_indices, dtype=np.int64)
        lab = np.ascontiguousarray(self.labels, dtype=np.int64)
        if pi.shape != lab.shape or pi.ndim != 1:
            raise ValueError(
                f"labeling/block length mismatch: {lab.shape} labels for {pi.shape} points"
            )
        object.__setattr__(self, "point_indices", pi)
        object.__setattr__(self, "labels", lab)


def _axis_origin_count(extent: float, block_size: float, stride: float) -> int:
    # Smallest count whose last block still covers the max coordinate under
    # the half-open [origin, origin + size) membership rule.
    n = 1
    while (n - 1) * stride + block_size <= extent:
        n += 1
    return n


def partition(cloud: LabeledCloud, block_size: float = 1.0, stride: float = 0.5) -> BlockGrid:
    """Cut the scene into overlapping blocks anchored at its min corner.

    Block origins advance in stride steps from the scene's minimum (x, y)
    until every point is covered; blocks without members are dropped.
    """
    if block_size <= 0.0:
        raise ValueError("block_size must be positive")
    if not 0.0 < stride <= block_size:
        raise ValueError("stride must satisfy 0 < stride <= block_size")
    if cloud.n < 1:
        raise ValueError("cannot partition an empty cloud")
    xy = cloud.points[:, :2]
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    nx = _axis_origin_count(hi[0] - lo[0], block_size, stride)
    ny = _axis_origin_count(hi[1] - lo[1], block_size, stride)

    blocks: list[Block] = []
    covered = np.zeros(cloud.n, dtype=bool)
    for ix in range(nx):
        ox = lo[0] + ix * stride
        in_x = (xy[:, 0] >= ox) & (xy[:, 0] < ox + block_size)
        for iy in range(ny):
            oy = lo[1] + iy * stride
            mask = in_x & (xy[:, 1] >= oy) & (xy[:, 1] < oy + block_size)
            if mask.any():
                members = np.flatnonzero(mask).astype(np.int64)
                blocks.append(
                    Block(
                        origin_xy=(float(ox), float(oy)),
                        size_xy=(float(block_size), float(block_size)),
                        member_indices=members,
                    )
                )
                covered |= mask
    if not covered.all():
        raise RuntimeError("block layout failed to cover every point")
    return BlockGrid(stride=float(stride), blocks=tuple(blocks), scene_n=cloud.n)


def resample_indices(block: Block, target_n: int, seed: int) -> np.ndarray:
    """Scene indices of the block resampled to exactly target_n points.

    Oversized blocks are sampled without replacement; undersized blocks keep
    every member and pad with replacement draws.
    """
    if block.count < 1:
        raise ValueError("cannot resample an empty block")
    if target_n < 1:
        raise ValueError("target_n must be at least 1")
    rng = np.random.default_rng(seed)
    m = block.count
    if m >= target_n:
        local = rng.choice(m, size=target_n, replace=False)
    else:
        local = np.concatenate([np.arange(m), rng.choice(m, size=target_n - m, replace=True)])
    return block.member_indices[local]


def resample_block(block: Block, cloud: LabeledCloud, target_n: int, seed: int) -> LabeledCloud:
    """The block as a fixed-size cloud (see :func:`resample_indices`)."""
    return cloud.take(resample_indices(block, target_n, seed))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def merge_blocks(
    grid: BlockGrid,
    per_block: Sequence[BlockLabeling],
    overlap_threshold: float = 0.5,
) -> InstanceLabeling:
    """Fuse per-block labelings into one scene labeling.

    Two instances from different blocks are unified when, restricted to the
    scene points both blocks labeled, their point sets overlap with a Jaccard
    ratio of at least ``overlap_threshold``. Each point then takes the
    majority unified id among the blocks that labeled it; ties go to the
    lowest unified id. Unified ids are numbered by their smallest member
    point, so the result is independent of block order up to renumbering.
    """
    if len(per_block) != len(grid.blocks):
        raise ValueError(
            f"expected {len(grid.blocks)} block labelings, got {len(per_block)}"
        )
    if not 0.0 < overlap_threshold <= 1.0:
        raise ValueError("overlap_threshold must lie in (0, 1]")
    n = grid.scene_n

    # One node per (block, instance id); nodes numbered in block order.
    node_of: list[dict[int, int]] = []
    node_block: list[int] = []
    node_points: list[list[int]] = []
    for b, bl in enumerate(per_block):
        if bl.point_indices.size and (
            bl.point_indices.min() < 0 or bl.point_indices.max() >= n
        ):
            raise ValueError("block labeling references points outside the scene")
        mapping: dict[int, int] = {}
        for lab in np.unique(bl.labels):
            if lab != UNLABELED:
                mapping[int(lab)] = len(node_block)
                node_block.append(b)
                node_points.append([])
        node_of.append(mapping)
    n_nodes = len(node_block)

    # Per-point opinions: (block, node) pairs, deduplicated per block since a
    # padded block can sample the same scene point repeatedly.
    opinions: list[list[tuple[int, int]] | None] = [None] * n
    for b, bl in enumerate(per_block):
        mapping = node_of[b]
        keep = bl.labels != UNLABELED
        if not keep.any():
            continue
        pairs = np.unique(
            np.stack([bl.point_indices[keep], bl.labels[keep]], axis=1), axis=0
        )
        for p, lab in pairs:
            node = mapping[int(lab)]
            node_points[node].append(int(p))
            slot = opinions[p]
            if slot is None:
                opinions[p] = [(b, node)]
            else:
                slot.append((b, node))

    # Overlap statistics on points labeled by two or more blocks.
    inter: dict[tuple[int, int], int] = {}
    labeled_in: dict[tuple[int, int], int] = {}  # (node, other block) -> count
    for slot in opinions:
        if slot is None or len(slot) < 2:
            continue
        for i, (bi, ni) in enumerate(slot):
            for bj, nj in slot[i + 1 :]:
                if bi == bj:
                    continue
                key = (ni, nj) if ni < nj else (nj, ni)
                inter[key] = inter.get(key, 0) + 1
            for bj, _ in slot:
                if bj != bi:
                    labeled_in[(ni, bj)] = labeled_in.get((ni, bj), 0) + 1

    uf = _UnionFind(n_nodes)
    for (na, nb), shared in inter.items():
        union = (
            labeled_in.get((na, node_block[nb]), 0)
            + labeled_in.get((nb, node_block[na]), 0)
            - shared
        )
        if union > 0 and shared / union >= overlap_threshold:
            uf.union(na, nb)

    # Canonical unified ids: components ordered by their sorted member-point
    # sets (distinct components have distinct sets because identical sets
    # always unify at any threshold <= 1), so numbering never depends on
    # block order.
    comp_nodes: dict[int, list[int]] = {}
    for node in range(n_nodes):
        comp_nodes.setdefault(uf.find(node), []).append(node)
    comp_key = {
        root: tuple(sorted({p for node in nodes for p in node_points[node]}))
        for root, nodes in comp_nodes.items()
    }
    unified = {root: rank for rank, root in enumerate(sorted(comp_key, key=comp_key.get))}
    node_unified = [unified[uf.find(node)] for node in range(n_nodes)]

    labels = np.full(n, UNLABELED, dtype=np.int64)
    for p, slot in enumerate(opinions):
        if slot is None:
            continue
        if len(slot) == 1:
            labels[p] = node_unified[slot[0][1]]
            continue
        votes: dict[int, int] = {}
        for _, node in slot:
            uid = node_unified[node]
            votes[uid] = votes.get(uid, 0) + 1
        best = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))
        labels[p] = best[0]

    # Renumber ids densely from 0 in order of first appearance.
    remap: dict[int, int] = {}
    out = labels.copy()
    for p in range(n):
        lab = labels[p]
        if lab == UNLABELED:
            continue
        if lab not in remap:
            remap[lab] = len(remap)
        out[p] = remap[lab]
    return InstanceLabeling(labels=out)
