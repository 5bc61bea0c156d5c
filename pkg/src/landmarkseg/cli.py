"""Command-line surface: gen-scene, segment, sweep, eval, features-info.

Exit codes: 0 on success, 2 for usage/config errors (argparse), 1 for
runtime failures. All randomness derives from the single --seed flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import UNLABELED
from .labeling import LABELER_KINDS, LabelerConfig
from .metrics import MatchConfig, mean_average_precision
from .pipeline import (
    PROPAGATION_MODES,
    STRATEGIES,
    PipelineConfig,
    SweepReport,
    environment_note,
    run_pipeline,
    sweep,
)
from .report import emit_report
from .sampling import GridConfig, GridExtConfig
from .scene_io import (
    read_cloud,
    read_features,
    read_features_header,
    read_labels_csv,
    write_cloud,
    write_labels_csv,
)
from .scenegen import PRESETS, FurnitureItem, SceneSpec, generate_scene


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("list must be non-empty")
    return [int(t) for t in items]


def _strategy_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("list must be non-empty")
    for s in items:
        if s not in STRATEGIES:
            raise argparse.ArgumentTypeError(f"unknown strategy {s!r}")
    return items


def _default_threads() -> int:
    return int(os.environ.get("LSEG_THREADS", "1"))


def _spec_from_json(path: Path) -> SceneSpec:
    raw = json.loads(path.read_text())
    furniture = tuple(
        FurnitureItem(
            category=item["category"],
            min_corner=tuple(item["min"]),
            size=tuple(item["size"]),
            density=float(item["density"]),
        )
        for item in raw.get("furniture", [])
    )
    return SceneSpec(
        room=tuple(raw["room"]),
        floor_density=float(raw.get("floor_density", 200.0)),
        wall_density=float(raw.get("wall_density", 150.0)),
        furniture=furniture,
        seed=int(raw.get("seed", 0)),
        wall_z0=float(raw.get("wall_z0", 0.0)),
        wall_margin=float(raw.get("wall_margin", 0.0)),
    )


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument(
        "--labeler", choices=LABELER_KINDS, default="oracle", help="landmark labeler"
    )
    p.add_argument("--features", type=Path, default=None, help="FSIM feature file for the scene")
    p.add_argument("--tau", type=_nonneg_float, default=1.0, help="similarity threshold")
    p.add_argument(
        "--link-radius", type=_positive_float, default=0.15, help="oracle linkage radius in m"
    )
    p.add_argument(
        "--min-group-size", type=_positive_int, default=1, help="drop similarity groups below this size"
    )
    p.add_argument("--grid-points", type=_positive_int, default=2048, help="grid vertices")
    p.add_argument("--nmin", type=_positive_int, default=1, help="starting neighbor count")
    p.add_argument("--nstep", type=_positive_int, default=1, help="neighbor increment")
    p.add_argument(
        "--initial-grid", type=_positive_int, default=128, help="grid-extension starting size"
    )
    p.add_argument("--block-size", type=_positive_float, default=1.0, help="block edge in m")
    p.add_argument("--stride", type=_positive_float, default=0.5, help="block stride in m")
    p.add_argument(
        "--block-target", type=_positive_int, default=4096, help="points per resampled block"
    )
    p.add_argument(
        "--propagation", choices=PROPAGATION_MODES, default="euclidean",
        help="propagate labels in euclidean or feature space",
    )
    p.add_argument(
        "--iou-threshold", type=float, default=0.5, help="IoU threshold for mAP matching"
    )
    p.add_argument(
        "--merge-threshold", type=float, default=0.5, help="block-merge overlap ratio"
    )
    p.add_argument(
        "--threads", type=_positive_int, default=None,
        help="worker threads for NN queries",
    )


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        block_size=args.block_size,
        stride=args.stride,
        block_target=args.block_target,
        grid=GridConfig(grid_points=args.grid_points, nmin=args.nmin, nstep=args.nstep),
        grid_ext=GridExtConfig(initial_grid=args.initial_grid),
        labeler=LabelerConfig(
            kind=args.labeler,
            tau=args.tau,
            link_radius=args.link_radius,
            min_group_size=args.min_group_size,
        ),
        match=MatchConfig(iou_threshold=args.iou_threshold),
        merge_threshold=args.merge_threshold,
        propagation=args.propagation,
    )


def _load_pipeline_inputs(parser, args):
    if (args.labeler == "similarity" or args.propagation == "feature") and args.features is None:
        parser.error("--features is required with --labeler similarity or --propagation feature")
    scene = read_cloud(args.scene)
    features = read_features(args.features) if args.features is not None else None
    if features is not None and features.rows != scene.n:
        parser.error(f"feature matrix covers {features.rows} points, scene has {scene.n}")
    workers = args.threads if args.threads is not None else _default_threads()
    return scene, features, workers


def cmd_gen_scene(parser, args) -> int:
    if args.spec_file is not None:
        spec = _spec_from_json(args.spec_file)
    else:
        spec = PRESETS[args.preset](args.seed if args.seed is not None else 0)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.floor_density is not None:
        overrides["floor_density"] = args.floor_density
    if args.wall_density is not None:
        overrides["wall_density"] = args.wall_density
    if overrides:
        spec = replace(spec, **overrides)
    cloud = generate_scene(spec)
    write_cloud(cloud, args.output)
    n_instances = len(np.unique(cloud.gt_instance))
    n_categories = len(np.unique(cloud.gt_category))
    print(
        f"wrote {args.output}: {cloud.n} points, {n_instances} instances, {n_categories} categories"
    )
    return 0


def cmd_segment(parser, args) -> int:
    scene, features, workers = _load_pipeline_inputs(parser, args)
    cfg = _pipeline_config(args)
    labeling, record = run_pipeline(
        scene, args.strategy, args.k, args.seed, cfg=cfg, features=features, workers=workers
    )
    write_labels_csv(labeling, args.output)
    report_path = args.report
    if report_path is None:
        report_path = args.output.with_suffix(".report.csv")
    report = SweepReport(
        scene_id=str(args.scene), records=(record,), environment=environment_note()
    )
    emit_report(report, report_path)
    n_unlabeled = int(np.sum(labeling.labels == UNLABELED))
    print(
        f"wrote {args.output} ({len(labeling)} labels, {n_unlabeled} unlabeled) "
        f"and {report_path}: mAP={record.map:.4f} wall={record.wall_seconds:.3f}s "
        f"matrix_bytes={record.matrix_bytes}"
    )
    return 0


def cmd_sweep(parser, args) -> int:
    scene, features, workers = _load_pipeline_inputs(parser, args)
    if any(b <= a for a, b in zip(args.k_list, args.k_list[1:])):
        parser.error("--k-list must be strictly ascending")
    if args.k_list[0] < 1 or args.k_list[-1] > args.block_target:
        parser.error(f"--k-list values must lie in [1, {args.block_target}]")
    cfg = _pipeline_config(args)
    report = sweep(
        scene,
        strategies=args.strategies,
        k_list=args.k_list,
        repeats=args.repeats,
        seed=args.seed,
        cfg=cfg,
        features=features,
        scene_id=str(args.scene),
        workers=workers,
    )
    map_fig = args.map_figure or args.output.with_name(args.output.stem + "_map.svg")
    time_fig = args.time_figure or args.output.with_name(args.output.stem + "_time.svg")
    emit_report(report, args.output, map_fig, time_fig)
    print(f"wrote {args.output} ({len(report.records)} records), {map_fig}, {time_fig}")
    return 0


def cmd_eval(parser, args) -> int:
    scene = read_cloud(args.scene)
    labeling = read_labels_csv(args.labels)
    if len(labeling) != scene.n:
        parser.error(f"labels cover {len(labeling)} points, scene has {scene.n}")
    score = mean_average_precision(
        labeling, scene, MatchConfig(iou_threshold=args.iou_threshold)
    )
    print(f"mAP = {score:.6f}")
    return 0


def cmd_features_info(parser, args) -> int:
    n, n_f = read_features_header(args.features)
    print(f"{args.features}: N={n} N_f={n_f} payload={4 * n * n_f} bytes")
    return 0


_Formatter = argparse.ArgumentDefaultsHelpFormatter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landmarkseg",
        description="Landmark-subsampled point-cloud instance segmentation and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "gen-scene", help="generate a synthetic labeled scene", formatter_class=_Formatter
    )
    p.add_argument("--preset", choices=sorted(PRESETS), default="office", help="bundled scene preset")
    p.add_argument("--spec-file", type=Path, default=None, help="JSON scene spec (overrides preset)")
    p.add_argument("--seed", type=int, default=None, help="scene RNG seed")
    p.add_argument(
        "--floor-density", type=_nonneg_float, default=None, help="override floor points per m^2"
    )
    p.add_argument(
        "--wall-density", type=_nonneg_float, default=None, help="override wall points per m^2"
    )
    p.add_argument("-o", "--output", type=Path, required=True, help="output .ply or .csv")
    p.set_defaults(func=cmd_gen_scene)

    p = sub.add_parser(
        "segment", help="segment one scene and write per-point labels", formatter_class=_Formatter
    )
    p.add_argument("scene", type=Path, help="input cloud (.ply or .csv)")
    p.add_argument("--strategy", choices=STRATEGIES, default="random", help="landmark strategy")
    p.add_argument("--k", type=_positive_int, default=2048, help="landmarks per block")
    _add_pipeline_flags(p)
    p.add_argument("-o", "--output", type=Path, required=True, help="labels CSV path")
    p.add_argument("--report", type=Path, default=None, help="record CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser(
        "sweep", help="run a (strategy, K, repeat) sweep with report and figures",
        formatter_class=_Formatter,
    )
    p.add_argument("scene", type=Path, help="input cloud (.ply or .csv)")
    p.add_argument(
        "--strategies", type=_strategy_list, default=["random", "grid"],
        help="comma-separated landmark strategies",
    )
    p.add_argument(
        "--k-list", type=_int_list, default=[256, 512, 1024, 2048, 4096],
        help="comma-separated ascending K values",
    )
    p.add_argument("--repeats", type=_positive_int, default=1, help="repeats per (strategy, K)")
    _add_pipeline_flags(p)
    p.add_argument("-o", "--output", type=Path, required=True, help="report CSV path")
    p.add_argument("--map-figure", type=Path, default=None, help="mAP-vs-K SVG path")
    p.add_argument("--time-figure", type=Path, default=None, help="seconds-vs-K SVG path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "eval", help="score an external labels CSV against a ground-truth cloud",
        formatter_class=_Formatter,
    )
    p.add_argument("scene", type=Path, help="input cloud (.ply or .csv)")
    p.add_argument("--labels", type=Path, required=True, help="labels CSV to score")
    p.add_argument("--iou-threshold", type=float, default=0.5, help="IoU matching threshold")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "features-info", help="dump the header of an FSIM feature file", formatter_class=_Formatter
    )
    p.add_argument("features", type=Path, help="FSIM feature file")
    p.set_defaults(func=cmd_features_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
