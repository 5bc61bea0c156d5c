"""Instance-segmentation scoring: point-set IoU and mean average precision.

Predicted instances are ranked by descending point count (rank ties break on
the instance's smallest point index, so scores never depend on id values).
Each prediction greedily claims the unmatched ground-truth instance with the
highest IoU; claims at or above the IoU threshold are true positives. AP is
the area under the resulting precision-recall curve and mAP averages AP over
categories that have at least one ground-truth instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import UNLABELED, InstanceLabeling, LabeledCloud


@dataclass(frozen=True)
class MatchConfig:
    """iou_threshold in (0, 1]; category_aware None means auto (on when both
    prediction and ground truth carry categories)."""

    iou_threshold: float = 0.5
    category_aware: bool | None = None

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must lie in (0, 1]")


def instance_iou(pred_set, gt_set) -> float:
    """Intersection over union of two point-index sets."""
    a = np.unique(np.asarray(list(pred_set) if isinstance(pred_set, set) else pred_set))
    b = np.unique(np.asarray(list(gt_set) if isinstance(gt_set, set) else gt_set))
    if a.size == 0 or b.size == 0:
        raise ValueError("instance point sets must be non-empty")
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / (a.size + b.size - inter)


@dataclass(frozen=True)
class _Instance:
    points: np.ndarray  # sorted point indices
    category: int
    min_point: int


def _extract_instances(labels: np.ndarray, categories: np.ndarray | None) -> list[_Instance]:
    keep = labels != UNLABELED
    if not keep.any():
        return []
    pts = np.flatnonzero(keep)
    labs = labels[keep]
    order = np.argsort(labs, kind="stable")
    pts, labs = pts[order], labs[order]
    starts = np.flatnonzero(np.r_[True, labs[1:] != labs[:-1]])
    bounds = np.r_[starts, labs.size]
    out = []
    for s, e in zip(bounds[:-1], bounds[1:]):
        member = np.sort(pts[s:e])
        if categories is None:
            cat = 0
        else:
            vals, counts = np.unique(categories[member], return_counts=True)
            cat = int(vals[np.argmax(counts)])  # majority; unique() puts ties on the smaller id
        out.append(_Instance(points=member, category=cat, min_point=int(member[0])))
    return out


def _intersection_size(a: np.ndarray, b: np.ndarray) -> int:
    return np.intersect1d(a, b, assume_unique=True).size


def _average_precision(preds: list[_Instance], gts: list[_Instance], threshold: float) -> float:
    if not gts:
        raise ValueError("category has no ground-truth instances")
    if not preds:
        return 0.0
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].points.size, preds[i].min_point))
    matched = [False] * len(gts)
    tp = 0
    precision_sum = 0.0
    for rank, pi in enumerate(order, start=1):
        pred = preds[pi]
        best_iou, best_gt = 0.0, -1
        for gi, gt in enumerate(gts):
            if matched[gi]:
                continue
            inter = _intersection_size(pred.points, gt.points)
            if inter == 0:
                continue
            iou = inter / (pred.points.size + gt.points.size - inter)
            if iou > best_iou or (iou == best_iou and best_gt >= 0 and gt.min_point < gts[best_gt].min_point):
                best_iou, best_gt = iou, gi
        if best_gt >= 0 and best_iou >= threshold:
            matched[best_gt] = True
            tp += 1
            precision_sum += tp / rank
    return precision_sum / len(gts)


def mean_average_precision(
    pred: InstanceLabeling, gt: LabeledCloud, cfg: MatchConfig = MatchConfig()
) -> float:
    """Score a full-scene prediction against the cloud's ground truth."""
    if gt.gt_instance is None:
        raise ValueError("cloud has no ground-truth instance labels")
    if len(pred) != gt.n:
        raise ValueError(f"prediction covers {len(pred)} points, cloud has {gt.n}")
    aware = cfg.category_aware
    if aware is None:
        aware = pred.categories is not None and gt.gt_category is not None
    if aware and (pred.categories is None or gt.gt_category is None):
        raise ValueError("category-aware scoring requires categories on both sides")

    pred_cat = pred.categories if aware else None
    gt_cat = gt.gt_category if aware else None
    preds = _extract_instances(pred.labels, pred_cat)
    gts = _extract_instances(gt.gt_instance, gt_cat)
    if not gts:
        raise ValueError("ground truth has no labeled instances")

    categories = sorted({g.category for g in gts})
    aps = []
    for cat in categories:
        cat_preds = [p for p in preds if p.category == cat]
        cat_gts = [g for g in gts if g.category == cat]
        aps.append(_average_precision(cat_preds, cat_gts, cfg.iou_threshold))
    return float(np.mean(aps))
