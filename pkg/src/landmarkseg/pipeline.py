"""End-to-end segmentation runs and K-sweeps.

One run partitions the scene into overlapping blocks, resamples each block
to a fixed size, samples K landmarks per block, labels the landmarks,
propagates labels to the block, and merges blocks into a scene labeling.
Wall-clock covers sampling through merging (never file I/O), and the modeled
similarity-matrix footprint is 4*K*K bytes (one 32-bit entry per pair).
"""

from __future__ import annotations

import math
import platform
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .blocks import BlockLabeling, merge_blocks, partition, resample_indices
from .core import FeatureMatrix, InstanceLabeling, LabeledCloud
from .labeling import (
    Labeler,
    LabelerConfig,
    ground_truth_labeler,
    oracle_labeler,
    similarity_labeler,
)
from .metrics import MatchConfig, mean_average_precision
from .propagation import propagate, propagate_feature_space
from .sampling import GridConfig, GridExtConfig, grid_extension_sample, grid_sample, random_sample

STRATEGIES = ("random", "grid", "grid-extension")
_STRATEGY_CODE = {name: i for i, name in enumerate(STRATEGIES)}

PROPAGATION_MODES = ("euclidean", "feature")


def modeled_matrix_bytes(k: int) -> int:
    return 4 * k * k


def derive_seed(base: int, *path: int) -> int:
    """Deterministic child seed for a run component (block, repeat, ...)."""
    return int(np.random.SeedSequence([int(base), *map(int, path)]).generate_state(1)[0])


@dataclass(frozen=True)
class PipelineConfig:
    block_size: float = 1.0
    stride: float = 0.5
    block_target: int = 4096
    grid: GridConfig = field(default_factory=GridConfig)
    grid_ext: GridExtConfig = field(default_factory=GridExtConfig)
    labeler: LabelerConfig = field(default_factory=LabelerConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    merge_threshold: float = 0.5
    propagation: str = "euclidean"

    def __post_init__(self):
        if self.block_target < 1:
            raise ValueError("block_target must be at least 1")
        if self.propagation not in PROPAGATION_MODES:
            raise ValueError(f"unknown propagation mode {self.propagation!r}")


@dataclass(frozen=True)
class SweepRecord:
    strategy: str
    k: int
    repeat: int
    seed: int
    map: float
    wall_seconds: float
    matrix_bytes: int

    def __post_init__(self):
        if self.matrix_bytes != modeled_matrix_bytes(self.k):
            raise ValueError("matrix_bytes must equal 4*K*K")
        if not math.isnan(self.map) and not 0.0 <= self.map <= 1.0:
            raise ValueError("map must lie in [0, 1]")


@dataclass(frozen=True)
class SweepReport:
    scene_id: str
    records: tuple[SweepRecord, ...]
    environment: str = ""

    def __post_init__(self):
        if not self.records:
            raise ValueError("report must contain at least one record")
        object.__setattr__(self, "records", tuple(self.records))


def environment_note() -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"{platform.node()} | python {platform.python_version()} | numpy {np.__version__} | {stamp}"


def _sample_landmarks(block_cloud, strategy: str, k: int, cfg: PipelineConfig, seed: int):
    if strategy == "random":
        return random_sample(block_cloud, k, seed)
    if strategy == "grid":
        return grid_sample(block_cloud, k, cfg.grid, seed)
    if strategy == "grid-extension":
        return grid_extension_sample(block_cloud, k, cfg.grid_ext, seed)
    raise ValueError(f"unknown strategy {strategy!r}")


def run_pipeline(
    scene: LabeledCloud,
    strategy: str,
    k: int,
    seed: int,
    cfg: PipelineConfig = PipelineConfig(),
    features: FeatureMatrix | None = None,
    labeler: Labeler | None = None,
    repeat: int = 0,
    workers: int = 1,
) -> tuple[InstanceLabeling, SweepRecord]:
    """Segment one scene at one (strategy, K) cell.

    ``labeler`` overrides the configured labeler with any callable matching
    the labeler contract. Returns the merged scene labeling plus its record;
    the mAP field is NaN when the scene has no ground truth to score against.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not 1 <= k <= cfg.block_target:
        raise ValueError(f"K must lie in [1, {cfg.block_target}]")
    needs_features = cfg.propagation == "feature" or (
        labeler is None and cfg.labeler.kind == "similarity"
    )
    if needs_features and features is None:
        raise ValueError("a feature matrix is required for this configuration")
    if features is not None and features.rows != scene.n:
        raise ValueError(f"feature matrix covers {features.rows} points, scene has {scene.n}")

    grid = partition(scene, cfg.block_size, cfg.stride)
    sampled = [
        resample_indices(block, cfg.block_target, derive_seed(seed, b, 0))
        for b, block in enumerate(grid.blocks)
    ]

    start = time.perf_counter()
    per_block: list[BlockLabeling] = []
    for b, scene_idx in enumerate(sampled):
        block_cloud = scene.take(scene_idx)
        landmarks = _sample_landmarks(block_cloud, strategy, k, cfg, derive_seed(seed, b, 1))
        block_features = None
        if features is not None:
            block_features = FeatureMatrix(data=features.data[scene_idx])
        if labeler is not None:
            block_labeler = labeler
        elif cfg.labeler.kind == "similarity":
            block_labeler = similarity_labeler(block_features, cfg.labeler)
        elif cfg.labeler.kind == "oracle":
            block_labeler = oracle_labeler(cfg.labeler)
        else:
            block_labeler = ground_truth_labeler()
        landmark_labels = block_labeler(block_cloud, landmarks)
        if cfg.propagation == "feature":
            full = propagate_feature_space(block_features, landmarks, landmark_labels, workers)
        else:
            full = propagate(block_cloud, landmarks, landmark_labels, workers)
        per_block.append(BlockLabeling(point_indices=scene_idx, labels=full.labels))
    merged = merge_blocks(grid, per_block, cfg.merge_threshold)
    wall = time.perf_counter() - start

    score = float("nan")
    if scene.gt_instance is not None:
        score = mean_average_precision(merged, scene, cfg.match)
    record = SweepRecord(
        strategy=strategy,
        k=k,
        repeat=repeat,
        seed=seed,
        map=score,
        wall_seconds=wall,
        matrix_bytes=modeled_matrix_bytes(k),
    )
    return merged, record


def sweep(
    scene: LabeledCloud,
    strategies: tuple[str, ...] | list[str],
    k_list: list[int],
    repeats: int,
    seed: int,
    cfg: PipelineConfig = PipelineConfig(),
    features: FeatureMatrix | None = None,
    labeler: Labeler | None = None,
    scene_id: str = "scene",
    workers: int = 1,
) -> SweepReport:
    """One record per (strategy, K, repeat); per-cell seeds derive from ``seed``."""
    if not k_list:
        raise ValueError("k_list must be non-empty")
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError("k_list must be strictly ascending")
    if not strategies:
        raise ValueError("strategies must be non-empty")
    records = []
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        code = _STRATEGY_CODE[strategy]
        for k in k_list:
            for rep in range(repeats):
                cell_seed = derive_seed(seed, code, k, rep)
                _, record = run_pipeline(
                    scene,
                    strategy,
                    k,
                    cell_seed,
                    cfg=cfg,
                    features=features,
                    labeler=labeler,
                    repeat=rep,
                    workers=workers,
                )
                records.append(record)
    return SweepReport(scene_id=scene_id, records=tuple(records), environment=environment_note())
