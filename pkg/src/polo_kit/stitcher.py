"""Map per-patch detections back to the image frame and deduplicate.

Patches overlap, so one object near a patch border is typically detected
in two or more patches; after translating every detection by its window
origin, a second suppression round removes those duplicates.
"""

from __future__ import annotations

import logging

from .core import Detection, ImageSize, Point2D, RadiusTable
from .nms import NmsConfig, dor_nms
from .tiler import PatchWindow

__all__ = ["merge_patch_detections", "deduplicate"]

logger = logging.getLogger(__name__)


def merge_patch_detections(
    per_patch: dict[int, list[Detection]],
    windows: list[PatchWindow],
    image: ImageSize | None = None,
) -> list[Detection]:
    """Translate patch-frame detections into the image frame and concatenate.

    No deduplication happens here: the output count equals the input count.
    When an image size is given, points that land outside it (a head may
    predict up to half a cell beyond the patch) are clamped to the image
    bounds; clamping is logged. Raises KeyError for a patch id without a
    window.
    """
    by_id = {w.patch_id: w for w in windows}
    merged: list[Detection] = []
    clamped = 0
    for patch_id in sorted(per_patch):
        if patch_id not in by_id:
            raise KeyError(f"no window for patch id {patch_id}")
        w = by_id[patch_id]
        for det in per_patch[patch_id]:
            x = det.point.x + w.origin_x
            y = det.point.y + w.origin_y
            if image is not None:
                cx = min(max(x, 0.0), float(image.width))
                cy = min(max(y, 0.0), float(image.height))
                if cx != x or cy != y:
                    clamped += 1
                    x, y = cx, cy
            merged.append(Detection(Point2D(x, y), det.class_id, det.confidence))
    if clamped:
        logger.warning("clamped %d detection(s) to image bounds during merge", clamped)
    return merged


def deduplicate(
    merged: list[Detection], radii: RadiusTable, cfg: NmsConfig
) -> list[Detection]:
    """Suppress overlap-region duplicates: DoR NMS on the image-frame set."""
    return dor_nms(merged, radii, cfg)
