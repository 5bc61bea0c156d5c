import json

import numpy as np
import pytest

import landmarkseg as ls
from landmarkseg.cli import main

from conftest import gt_features, small_scene_spec


def _write_small_scene(tmp_path, seed=3):
    scene_path = tmp_path / "scene.ply"
    cloud = ls.generate_scene(small_scene_spec(seed))
    ls.write_cloud(cloud, scene_path)
    return scene_path, cloud


def test_gen_scene_deterministic(tmp_path, capsys):
    out_a = tmp_path / "a.ply"
    out_b = tmp_path / "b.ply"
    assert main(["gen-scene", "--preset", "office", "--seed", "1", "-o", str(out_a)]) == 0
    assert main(["gen-scene", "--preset", "office", "--seed", "1", "-o", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    cloud = ls.read_cloud(out_a)
    assert np.unique(cloud.gt_category).size >= 2
    assert "points" in capsys.readouterr().out


def test_gen_scene_negative_density_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["gen-scene", "--floor-density", "-5", "-o", str(tmp_path / "x.ply")])
    assert exc.value.code == 2


def test_gen_scene_spec_file(tmp_path):
    spec = {
        "room": [2.0, 2.0, 2.0],
        "floor_density": 60.0,
        "wall_density": 0.0,
        "seed": 9,
        "furniture": [
            {"category": "crate", "min": [0.5, 0.5, 0.5], "size": [0.5, 0.5, 0.5], "density": 80.0}
        ],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "scene.csv"
    assert main(["gen-scene", "--spec-file", str(spec_path), "-o", str(out)]) == 0
    cloud = ls.read_cloud(out)
    assert np.unique(cloud.gt_instance).size == 2  # floor + crate


def test_segment_writes_labels_and_report(tmp_path, capsys):
    scene_path, cloud = _write_small_scene(tmp_path)
    labels_path = tmp_path / "labels.csv"
    code = main(
        [
            "segment", str(scene_path),
            "--strategy", "random", "--k", "256", "--block-target", "512",
            "--labeler", "ground-truth", "--seed", "5",
            "-o", str(labels_path),
        ]
    )
    assert code == 0
    labeling = ls.read_labels_csv(labels_path)
    assert len(labeling) == cloud.n
    report = ls.read_report_csv(tmp_path / "labels.report.csv")
    assert len(report.records) == 1
    assert report.records[0].k == 256
    assert "mAP=" in capsys.readouterr().out


def test_segment_grid_strategy_flags(tmp_path):
    scene_path, cloud = _write_small_scene(tmp_path)
    labels_path = tmp_path / "labels.csv"
    code = main(
        [
            "segment", str(scene_path),
            "--strategy", "grid", "--grid-points", "512", "--k", "128",
            "--block-target", "256", "--seed", "1",
            "-o", str(labels_path),
        ]
    )
    assert code == 0
    assert len(ls.read_labels_csv(labels_path)) == cloud.n


def test_segment_similarity_requires_features(tmp_path):
    scene_path, _ = _write_small_scene(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "segment", str(scene_path), "--labeler", "similarity",
                "-o", str(tmp_path / "labels.csv"),
            ]
        )
    assert exc.value.code == 2


def test_segment_similarity_with_features(tmp_path):
    scene_path, cloud = _write_small_scene(tmp_path)
    features = gt_features(cloud, n_f=6, seed=1)
    features_path = tmp_path / "scene.fsim"
    ls.write_features(features, features_path)
    labels_path = tmp_path / "labels.csv"
    code = main(
        [
            "segment", str(scene_path), "--labeler", "similarity",
            "--features", str(features_path), "--tau", "1.0",
            "--k", "128", "--block-target", "256", "-o", str(labels_path),
        ]
    )
    assert code == 0
    assert len(ls.read_labels_csv(labels_path)) == cloud.n


def test_sweep_record_grid_and_figures(tmp_path):
    scene_path, _ = _write_small_scene(tmp_path)
    report_path = tmp_path / "report.csv"
    code = main(
        [
            "sweep", str(scene_path),
            "--strategies", "random,grid",
            "--k-list", "16,32,64,128,256",
            "--repeats", "3",
            "--block-target", "256",
            "--labeler", "ground-truth",
            "--seed", "2",
            "-o", str(report_path),
        ]
    )
    assert code == 0
    report = ls.read_report_csv(report_path)
    assert len(report.records) == 5 * 2 * 3  # K values x strategies x repeats
    assert (tmp_path / "report_map.svg").exists()
    assert (tmp_path / "report_time.svg").exists()


def test_sweep_rerun_reproduces_map_column(tmp_path):
    scene_path, _ = _write_small_scene(tmp_path)
    args = [
        "sweep", str(scene_path), "--k-list", "32,64", "--strategies", "random",
        "--repeats", "1", "--seed", "9", "--block-target", "256",
        "--labeler", "oracle",
    ]
    assert main(args + ["-o", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["-o", str(tmp_path / "b.csv")]) == 0
    rec_a = ls.read_report_csv(tmp_path / "a.csv").records
    rec_b = ls.read_report_csv(tmp_path / "b.csv").records
    assert [r.map for r in rec_a] == [r.map for r in rec_b]
    assert [r.seed for r in rec_a] == [r.seed for r in rec_b]


def test_sweep_empty_k_list_usage_error(tmp_path):
    scene_path, _ = _write_small_scene(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(["sweep", str(scene_path), "--k-list", "", "-o", str(tmp_path / "r.csv")])
    assert exc.value.code == 2


def test_sweep_descending_k_list_usage_error(tmp_path):
    scene_path, _ = _write_small_scene(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(
            ["sweep", str(scene_path), "--k-list", "64,32", "-o", str(tmp_path / "r.csv")]
        )
    assert exc.value.code == 2


def test_eval_scores_external_labels(tmp_path, capsys):
    scene_path, cloud = _write_small_scene(tmp_path)
    labels_path = tmp_path / "perfect.csv"
    ls.write_labels_csv(ls.InstanceLabeling(labels=cloud.gt_instance), labels_path)
    code = main(["eval", str(scene_path), "--labels", str(labels_path)])
    assert code == 0
    assert "mAP = 1.000000" in capsys.readouterr().out


def test_features_info(tmp_path, capsys):
    features_path = tmp_path / "f.fsim"
    ls.write_features(ls.FeatureMatrix(data=np.zeros((3, 5))), features_path)
    assert main(["features-info", str(features_path)]) == 0
    out = capsys.readouterr().out
    assert "N=3" in out and "N_f=5" in out


def test_runtime_error_exits_one(tmp_path, capsys):
    missing = tmp_path / "missing.ply"
    code = main(["segment", str(missing), "-o", str(tmp_path / "l.csv")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["segment", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--strategy", "--k", "--labeler", "--features", "--grid-points", "--seed"):
        assert flag in out
