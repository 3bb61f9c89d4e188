"""Counting metrics and diagnostic detection-to-truth matching.

The headline metric is per-class MAE: the mean over images of the
absolute difference between predicted and true counts, computed on full
images after stitching. Counting needs no correspondence between
detections and ground truth; the greedy DoR matcher here exists for
true/false-positive audits only.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .core import ClassId, Detection, LabeledPoint, RadiusTable
from .nms import dor

__all__ = ["ClassCount", "CountReport", "count_per_class", "mae_per_class", "match_detections"]


@dataclass(frozen=True, slots=True)
class ClassCount:
    """Totals and counting error for one class."""

    pred_count: int
    gt_count: int
    mae: float


@dataclass(frozen=True)
class CountReport:
    """Per-class counting summary over a set of images."""

    n_images: int
    classes: dict[ClassId, ClassCount]

    def class_ids(self) -> list[ClassId]:
        return sorted(self.classes)

    def mae(self, class_id: ClassId) -> float:
        return self.classes[class_id].mae


def count_per_class(dets: list[Detection]) -> dict[ClassId, int]:
    """Histogram of detections by class id."""
    return dict(Counter(det.class_id for det in dets))


def mae_per_class(
    per_image_preds: dict[str, list[Detection]],
    per_image_gts: dict[str, list[LabeledPoint]],
) -> CountReport:
    """Per-class MAE over the union of images on both sides.

    An image missing from one side counts as zero there. MAE for class c is
    the mean over images of |predicted_count_c - gt_count_c|.
    """
    images = sorted(set(per_image_preds) | set(per_image_gts))
    n_images = len(images)
    pred_counts: dict[str, Counter] = {}
    gt_counts: dict[str, Counter] = {}
    class_ids: set[ClassId] = set()
    for image_id in images:
        pred_counts[image_id] = Counter(
            d.class_id for d in per_image_preds.get(image_id, [])
        )
        gt_counts[image_id] = Counter(
            g.class_id for g in per_image_gts.get(image_id, [])
        )
        class_ids.update(pred_counts[image_id])
        class_ids.update(gt_counts[image_id])

    classes = {}
    for c in sorted(class_ids):
        abs_err = 0
        pred_total = 0
        gt_total = 0
        for image_id in images:
            p = pred_counts[image_id][c]
            g = gt_counts[image_id][c]
            abs_err += abs(p - g)
            pred_total += p
            gt_total += g
        classes[c] = ClassCount(
            pred_count=pred_total,
            gt_count=gt_total,
            mae=abs_err / n_images if n_images else 0.0,
        )
    return CountReport(n_images=n_images, classes=classes)


def match_detections(
    dets: list[Detection],
    gts: list[LabeledPoint],
    radii: RadiusTable,
    dor_threshold: float,
) -> tuple[int, int, int, list[tuple[int, int]]]:
    """Greedily match detections to ground truth by ascending DoR.

    Only same-class pairs with DoR <= threshold are candidates; each
    detection and each ground truth matches at most once. Returns
    ``(tp, fp, fn, pairs)`` where pairs holds (detection index, gt index).
    Candidate order is fixed by (DoR, coordinates), so the outcome does not
    depend on input order.
    """
    candidates = []
    for i, det in enumerate(dets):
        for j, gt in enumerate(gts):
            if det.class_id != gt.class_id:
                continue
            value = dor(det.point, gt.point, radii.effective_radius(det.class_id))
            if value <= dor_threshold:
                candidates.append(
                    (value, det.point.y, det.point.x, gt.point.y, gt.point.x, i, j)
                )
    candidates.sort()
    det_used = [False] * len(dets)
    gt_used = [False] * len(gts)
    pairs: list[tuple[int, int]] = []
    for _, _, _, _, _, i, j in candidates:
        if det_used[i] or gt_used[j]:
            continue
        det_used[i] = True
        gt_used[j] = True
        pairs.append((i, j))
    tp = len(pairs)
    return tp, len(dets) - tp, len(gts) - tp, pairs
