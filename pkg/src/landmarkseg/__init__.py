"""Memory-bounded point-cloud instance segmentation via landmark sub-sampling.

Segment K landmark points per block with a pluggable labeler, propagate
labels to every point through exact nearest-neighbor lookup, and benchmark
the mAP / wall-clock / matrix-memory trade-off as K varies.
"""

from .blocks import Block, BlockGrid, BlockLabeling, merge_blocks, partition, resample_block, resample_indices
from .core import (
    UNLABELED,
    FeatureMatrix,
    InstanceLabeling,
    LabeledCloud,
    LandmarkSet,
    Point3,
    SimilarityMatrix,
    validate_cloud,
)
from .labeling import (
    Labeler,
    LabelerConfig,
    compute_similarity,
    ground_truth_label,
    ground_truth_labeler,
    group_from_similarity,
    oracle_label,
    oracle_labeler,
    similarity_labeler,
)
from .metrics import MatchConfig, instance_iou, mean_average_precision
from .pipeline import (
    PipelineConfig,
    SweepRecord,
    SweepReport,
    derive_seed,
    modeled_matrix_bytes,
    run_pipeline,
    sweep,
)
from .propagation import SpatialIndex, build_index, propagate, propagate_feature_space
from .report import emit_report, read_report_csv, render_map_figure, render_time_figure, write_report_csv
from .sampling import (
    GridConfig,
    GridExtConfig,
    grid_candidates,
    grid_extension_sample,
    grid_sample,
    make_grid,
    random_sample,
)
from .scene_io import (
    read_cloud,
    read_features,
    read_features_header,
    read_labels_csv,
    write_cloud,
    write_features,
    write_labels_csv,
)
from .scenegen import FurnitureItem, SceneSpec, generate_scene, office_preset, validate_spec

__version__ = "0.1.0"
