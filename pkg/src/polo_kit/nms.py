"""Distance-over-radius (DoR) metric and DoR-based non-maximum suppression.

DoR divides the Euclidean distance between two points by a per-class
radius, playing the role IoU plays for boxes: values below a threshold
mean "same object". Suppression is greedy in descending confidence; a
detection is removed when its DoR to an already-kept detection of the
same class falls strictly below the threshold, with the radius taken from
the kept detection's class (times the table's scale).

``dor_nms`` accelerates the neighbor search with a uniform spatial hash
whose cell size equals the largest suppression distance, which keeps
scenes with tens of thousands of detections fast; ``dor_nms_naive`` is
the quadratic reference implementation used as a testing oracle. Both
produce identical output for identical input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Detection, Point2D, RadiusTable, euclidean_distance

__all__ = ["NmsConfig", "dor", "dor_nms", "dor_nms_naive"]

# Squared-distance prefilter margin: pairs whose squared distance is within
# this relative band of the squared suppression limit fall through to the
# exact dor() comparison, so the fast path never changes a decision.
_PREFILTER_MARGIN = 1e-9


@dataclass(frozen=True, slots=True)
class NmsConfig:
    """Suppression parameters: DoR threshold (strictly-below suppresses)
    and whether suppression only applies within one class."""

    dor_threshold: float = 0.6
    class_aware: bool = True

    def __post_init__(self) -> None:
        if self.dor_threshold < 0.0:
            raise ValueError(f"dor_threshold must be >= 0, got {self.dor_threshold}")


def dor(a: Point2D, b: Point2D, r_c: float) -> float:
    """Distance between two points divided by a class radius (> 0)."""
    if r_c <= 0.0:
        raise ValueError(f"radius must be > 0, got {r_c}")
    return euclidean_distance(a, b) / r_c


def _priority_order(detections: list[Detection]) -> list[int]:
    """Descending confidence; ties broken by (class_id, y, x) so the result
    is independent of input order."""
    return sorted(
        range(len(detections)),
        key=lambda i: (
            -detections[i].confidence,
            detections[i].class_id,
            detections[i].point.y,
            detections[i].point.x,
        ),
    )


def _suppression_radii(detections: list[Detection], radii: RadiusTable) -> dict[int, float]:
    table = {}
    for det in detections:
        if det.class_id not in table:
            table[det.class_id] = radii.effective_radius(det.class_id)
    return table


def _greedy_pass(
    detections: list[Detection],
    order: list[int],
    tau: float,
    r_eff: dict[int, float],
    class_aware: bool,
) -> list[int]:
    """Spatial-hash greedy suppression over one priority-ordered group."""
    if tau == 0.0 or not order:
        return list(order)
    cell = max(r_eff[detections[i].class_id] for i in order) * tau
    grid: dict[tuple[int, int], list] = {}
    grid_get = grid.get
    kept: list[int] = []
    for i in order:
        det = detections[i]
        x = det.point.x
        y = det.point.y
        c = det.class_id
        cx = int(x // cell)
        cy = int(y // cell)
        ok = True
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                bucket = grid_get((gx, gy))
                if not bucket:
                    continue
                for k in range(0, len(bucket), 3):
                    kept_class = bucket[k + 2]
                    if class_aware and kept_class != c:
                        continue
                    dx = x - bucket[k]
                    dy = y - bucket[k + 1]
                    d2 = dx * dx + dy * dy
                    lim = r_eff[kept_class] * tau
                    lim2 = lim * lim
                    if d2 >= lim2 * (1.0 + _PREFILTER_MARGIN):
                        continue
                    if d2 <= lim2 * (1.0 - _PREFILTER_MARGIN) or (
                        math.hypot(dx, dy) / r_eff[kept_class] < tau
                    ):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            kept.append(i)
            key = (cx, cy)
            bucket = grid_get(key)
            if bucket is None:
                grid[key] = [x, y, c]
            else:
                bucket.append(x)
                bucket.append(y)
                bucket.append(c)
    return kept


def dor_nms(
    detections: list[Detection], radii: RadiusTable, cfg: NmsConfig
) -> list[Detection]:
    """Greedy DoR suppression; kept detections return in confidence order.

    A detection is suppressed when its DoR to any already-kept detection
    (same class only, unless ``class_aware`` is off) is strictly below the
    threshold; the radius of the comparison is the kept detection's
    effective class radius. A threshold of zero suppresses nothing.
    Raises KeyError when a detection's class has no radius.
    """
    order = _priority_order(detections)
    r_eff = _suppression_radii(detections, radii)
    tau = cfg.dor_threshold
    if cfg.class_aware:
        # classes never interact, so each runs independently with a tight
        # hash cell; kept flags are re-read in global priority order
        by_class: dict[int, list[int]] = {}
        for i in order:
            by_class.setdefault(detections[i].class_id, []).append(i)
        kept_flags = [False] * len(detections)
        for class_id, class_order in by_class.items():
            for i in _greedy_pass(
                detections, class_order, tau, {class_id: r_eff[class_id]}, True
            ):
                kept_flags[i] = True
        return [detections[i] for i in order if kept_flags[i]]
    kept = _greedy_pass(detections, order, tau, r_eff, False)
    return [detections[i] for i in kept]


def dor_nms_naive(
    detections: list[Detection], radii: RadiusTable, cfg: NmsConfig
) -> list[Detection]:
    """Quadratic reference implementation of dor_nms (testing oracle)."""
    order = _priority_order(detections)
    r_eff = _suppression_radii(detections, radii)
    tau = cfg.dor_threshold
    kept: list[Detection] = []
    for i in order:
        det = detections[i]
        suppressed = False
        for other in kept:
            if cfg.class_aware and other.class_id != det.class_id:
                continue
            if dor(det.point, other.point, r_eff[other.class_id]) < tau:
                suppressed = True
                break
        if not suppressed:
            kept.append(det)
    return kept
