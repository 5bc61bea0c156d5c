import numpy as np
import pytest

import landmarkseg as ls
from landmarkseg.core import UNLABELED


def test_iou_identical():
    assert ls.instance_iou({1, 2, 3}, {1, 2, 3}) == 1.0


def test_iou_disjoint():
    assert ls.instance_iou({1, 2}, {3, 4}) == 0.0


def test_iou_partial():
    a = set(range(10))
    b = set(range(5, 15))
    assert abs(ls.instance_iou(a, b) - 5 / 15) < 1e-12


def test_iou_empty_rejected():
    with pytest.raises(ValueError):
        ls.instance_iou(set(), {1})


def _gt_cloud(gt, categories=None):
    return ls.LabeledCloud(
        points=np.zeros((len(gt), 3)), gt_instance=gt, gt_category=categories
    )


def test_map_perfect_prediction():
    gt = [0, 0, 1, 1, 2, 2, 2]
    cloud = _gt_cloud(gt)
    pred = ls.InstanceLabeling(labels=np.asarray(gt) + 40)
    assert ls.mean_average_precision(pred, cloud) == 1.0


def test_map_empty_prediction():
    cloud = _gt_cloud([0, 0, 1, 1])
    pred = ls.InstanceLabeling(labels=[UNLABELED] * 4)
    assert ls.mean_average_precision(pred, cloud) == 0.0


def test_map_half_recovered_is_half():
    # Two gt instances, one category; the prediction recovers one exactly and
    # misses the other entirely: single true positive at recall 1/2.
    gt = [0, 0, 0, 1, 1, 1]
    cloud = _gt_cloud(gt)
    pred = ls.InstanceLabeling(labels=[7, 7, 7, UNLABELED, UNLABELED, UNLABELED])
    assert ls.mean_average_precision(pred, cloud) == 0.5


def test_map_invariant_under_renumbering():
    rng = np.random.default_rng(0)
    gt = rng.integers(0, 6, size=120)
    pred_labels = rng.integers(0, 8, size=120)
    cloud = _gt_cloud(gt)
    base = ls.mean_average_precision(ls.InstanceLabeling(labels=pred_labels), cloud)
    for trial in range(20):
        perm_pred = rng.permutation(100)[pred_labels] + 1000
        perm_gt = rng.permutation(100)[gt] * 13 + 5
        score = ls.mean_average_precision(
            ls.InstanceLabeling(labels=perm_pred), _gt_cloud(perm_gt)
        )
        assert score == base


def test_map_threshold_boundary_inclusive():
    # IoU exactly at the threshold counts as a match.
    gt = [0] * 4
    cloud = _gt_cloud(gt)
    pred = ls.InstanceLabeling(labels=[3, 3, UNLABELED, UNLABELED])  # IoU = 0.5
    assert ls.mean_average_precision(pred, cloud, ls.MatchConfig(iou_threshold=0.5)) == 1.0
    assert ls.mean_average_precision(pred, cloud, ls.MatchConfig(iou_threshold=0.51)) == 0.0


def test_map_category_aware_averages_per_category():
    # Category 0 recovered perfectly, category 1 fully missed: mean is 0.5.
    gt = [0, 0, 1, 1]
    cats = [0, 0, 1, 1]
    cloud = _gt_cloud(gt, cats)
    pred = ls.InstanceLabeling(labels=[4, 4, UNLABELED, UNLABELED], categories=[0, 0, 0, 0])
    assert ls.mean_average_precision(pred, cloud) == 0.5


def test_map_auto_pools_without_pred_categories():
    gt = [0, 0, 1, 1]
    cloud = _gt_cloud(gt, [0, 0, 1, 1])
    pred = ls.InstanceLabeling(labels=[5, 5, 9, 9])  # no categories: pooled
    assert ls.mean_average_precision(pred, cloud) == 1.0


def test_map_category_mismatch_is_a_miss():
    # Same points, wrong predicted category: no match in category-aware mode.
    gt = [0, 0]
    cloud = _gt_cloud(gt, [1, 1])
    pred = ls.InstanceLabeling(labels=[3, 3], categories=[2, 2])
    assert ls.mean_average_precision(pred, cloud) == 0.0


def test_map_requires_gt():
    cloud = ls.LabeledCloud(points=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        ls.mean_average_precision(ls.InstanceLabeling(labels=[0, 0]), cloud)


def test_map_length_mismatch():
    cloud = _gt_cloud([0, 1])
    with pytest.raises(ValueError):
        ls.mean_average_precision(ls.InstanceLabeling(labels=[0]), cloud)


def test_map_duplicate_sized_predictions_stay_invariant():
    # Equal-sized predictions rank by smallest member point, not id value.
    gt = [0, 0, 1, 1]
    cloud = _gt_cloud(gt)
    for a, b in ((10, 20), (20, 10)):
        pred = ls.InstanceLabeling(labels=[a, a, b, b])
        assert ls.mean_average_precision(pred, cloud) == 1.0


def test_match_config_validation():
    with pytest.raises(ValueError):
        ls.MatchConfig(iou_threshold=0.0)
    with pytest.raises(ValueError):
        ls.MatchConfig(iou_threshold=1.2)
