"""Sliding-window tiling of large images and label bookkeeping.

Splits an image into overlapping fixed-size patches, moves point labels
between the image and patch coordinate frames, converts points to square
pseudo-boxes, clips boxes at patch borders, and subsamples empty patches.
All functions are pure and deterministic; per-image work units are
independent and may run on any number of workers.
"""

from __future__ import annotations

import bisect
import logging
import math
import random
from dataclasses import dataclass

from .core import ClassId, ImageSize, LabeledPoint, Point2D, RadiusTable

__all__ = [
    "PatchWindow",
    "Box",
    "TilingConfig",
    "plan_patches",
    "point_to_patch",
    "patch_to_image",
    "assign_points_to_patches",
    "box_from_point",
    "clip_box_to_patch",
    "filter_negative_patches",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PatchWindow:
    """A rectangular crop of a larger image.

    ``origin_x``/``origin_y`` locate the window's top-left corner in the
    image frame; containment is half-open (origin <= coord < origin + size).
    Width and height equal the configured patch size except for windows
    clamped to an image smaller than one patch.
    """

    origin_x: int
    origin_y: int
    width: int
    height: int
    patch_id: int

    def contains(self, p: Point2D) -> bool:
        return (self.origin_x <= p.x < self.origin_x + self.width
                and self.origin_y <= p.y < self.origin_y + self.height)


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned box in pixels with x_min < x_max and y_min < y_max."""

    class_id: ClassId
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"degenerate box ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True, slots=True)
class TilingConfig:
    """Patch-grid parameters.

    overlap_fraction sets the stride as round(patch_size * (1 - overlap));
    min_box_area_fraction is the keep threshold for boxes clipped at patch
    borders; negative_keep_fraction is the share of label-free patches
    retained (chosen by a seeded shuffle).
    """

    patch_size: int = 640
    overlap_fraction: float = 0.10
    min_box_area_fraction: float = 0.15
    negative_keep_fraction: float = 0.05
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.patch_size <= 0:
            raise ValueError(f"patch_size must be > 0, got {self.patch_size}")
        if not (0.0 <= self.overlap_fraction < 1.0):
            raise ValueError(f"overlap_fraction must be in [0, 1), got {self.overlap_fraction}")
        if not (0.0 <= self.min_box_area_fraction <= 1.0):
            raise ValueError(
                f"min_box_area_fraction must be in [0, 1], got {self.min_box_area_fraction}"
            )
        if not (0.0 <= self.negative_keep_fraction <= 1.0):
            raise ValueError(
                f"negative_keep_fraction must be in [0, 1], got {self.negative_keep_fraction}"
            )
        if self.stride < 1:
            raise ValueError("stride rounds to 0; decrease overlap_fraction or grow patch_size")

    @property
    def stride(self) -> int:
        return round(self.patch_size * (1.0 - self.overlap_fraction))


def _axis_origins(extent: int, patch: int, stride: int) -> list[int]:
    """Window origins along one axis; the final window ends flush at the border."""
    if patch >= extent:
        return [0]
    origins = []
    x = 0
    while x + patch < extent:
        origins.append(x)
        x += stride
    origins.append(extent - patch)
    return origins


def plan_patches(image: ImageSize, cfg: TilingConfig) -> list[PatchWindow]:
    """Lay overlapping windows over an image, row-major, patch_id sequential.

    Every pixel is covered by at least one window. The last row/column is
    clamped so its window ends exactly at the image border. An image smaller
    than one patch yields a single window clamped to the image extent.
    """
    width = min(cfg.patch_size, image.width)
    height = min(cfg.patch_size, image.height)
    if width < cfg.patch_size or height < cfg.patch_size:
        logger.warning(
            "patch size %d exceeds image %dx%d; emitting one clamped full-image window",
            cfg.patch_size, image.width, image.height,
        )
    xs = _axis_origins(image.width, width, cfg.stride)
    ys = _axis_origins(image.height, height, cfg.stride)
    windows = []
    patch_id = 0
    for oy in ys:
        for ox in xs:
            windows.append(PatchWindow(ox, oy, width, height, patch_id))
            patch_id += 1
    return windows


def point_to_patch(p: Point2D, w: PatchWindow) -> Point2D:
    """Express an image-frame point in the window's patch frame."""
    return Point2D(p.x - w.origin_x, p.y - w.origin_y)


def patch_to_image(p: Point2D, w: PatchWindow) -> Point2D:
    """Inverse of point_to_patch: patch frame back to image frame."""
    return Point2D(p.x + w.origin_x, p.y + w.origin_y)


def _regular_grid(windows: list[PatchWindow]) -> tuple[list[int], list[int]] | None:
    """Return (x origins, y origins) if windows form a row-major uniform grid."""
    if not windows:
        return None
    xs = sorted({w.origin_x for w in windows})
    ys = sorted({w.origin_y for w in windows})
    if len(xs) * len(ys) != len(windows):
        return None
    width, height = windows[0].width, windows[0].height
    for i, w in enumerate(windows):
        row, col = divmod(i, len(xs))
        if (w.patch_id != i or w.width != width or w.height != height
                or w.origin_x != xs[col] or w.origin_y != ys[row]):
            return None
    return xs, ys


def assign_points_to_patches(
    labels: list[LabeledPoint], windows: list[PatchWindow]
) -> tuple[dict[int, list[LabeledPoint]], list[LabeledPoint]]:
    """Assign each label to every window containing it (half-open containment).

    Returns a map patch_id -> labels in that window's patch frame (an entry
    exists for every window, possibly empty), plus the list of labels that
    fell inside no window. Labels in overlap regions appear in multiple
    patches.
    """
    per_patch: dict[int, list[LabeledPoint]] = {w.patch_id: [] for w in windows}
    unassigned: list[LabeledPoint] = []
    grid = _regular_grid(windows)
    if grid is not None:
        xs, ys = grid
        width, height = windows[0].width, windows[0].height
        n_cols = len(xs)
        for label in labels:
            p = label.point
            # candidate origins o satisfy coord - size < o <= coord
            cx_lo = bisect.bisect_right(xs, p.x - width)
            cx_hi = bisect.bisect_right(xs, p.x)
            cy_lo = bisect.bisect_right(ys, p.y - height)
            cy_hi = bisect.bisect_right(ys, p.y)
            hit = False
            for row in range(cy_lo, cy_hi):
                for col in range(cx_lo, cx_hi):
                    w = windows[row * n_cols + col]
                    per_patch[w.patch_id].append(
                        LabeledPoint(point_to_patch(p, w), label.class_id)
                    )
                    hit = True
            if not hit:
                unassigned.append(label)
    else:
        for label in labels:
            hit = False
            for w in windows:
                if w.contains(label.point):
                    per_patch[w.patch_id].append(
                        LabeledPoint(point_to_patch(label.point, w), label.class_id)
                    )
                    hit = True
            if not hit:
                unassigned.append(label)
    if unassigned:
        logger.warning("%d label(s) lie outside every patch window", len(unassigned))
    return per_patch, unassigned


def box_from_point(
    p: LabeledPoint, radii: RadiusTable, image: ImageSize | None = None
) -> Box:
    """Square pseudo-box of side 2 * effective radius centered on the point.

    When an image size is supplied the box is clipped to the image bounds.
    Raises KeyError for a class without a radius.
    """
    r = radii.effective_radius(p.class_id)
    x_min, x_max = p.point.x - r, p.point.x + r
    y_min, y_max = p.point.y - r, p.point.y + r
    if image is not None:
        x_min = max(0.0, x_min)
        y_min = max(0.0, y_min)
        x_max = min(float(image.width), x_max)
        y_max = min(float(image.height), y_max)
    return Box(p.class_id, x_min, y_min, x_max, y_max)


def clip_box_to_patch(
    b: Box, w: PatchWindow, min_area_fraction: float
) -> Box | None:
    """Intersect a box with a window, keeping it only if enough area remains.

    Returns the intersection rectangle expressed in the patch frame when
    intersection_area / box_area >= min_area_fraction (boundary equality
    keeps the box); otherwise None.
    """
    x_min = max(b.x_min, w.origin_x)
    y_min = max(b.y_min, w.origin_y)
    x_max = min(b.x_max, w.origin_x + w.width)
    y_max = min(b.y_max, w.origin_y + w.height)
    if x_min >= x_max or y_min >= y_max:
        return None
    inter_area = (x_max - x_min) * (y_max - y_min)
    if inter_area / b.area() < min_area_fraction:
        return None
    return Box(
        b.class_id,
        x_min - w.origin_x,
        y_min - w.origin_y,
        x_max - w.origin_x,
        y_max - w.origin_y,
    )


def filter_negative_patches(
    patch_labels: dict[int, list[LabeledPoint]], keep_fraction: float, seed: int
) -> set[int]:
    """Retain all patches with labels plus a seeded sample of empty ones.

    Of the N empty patches, round-half-up(keep_fraction * N) are kept,
    chosen by shuffling the sorted empty ids with a seeded RNG; the result
    is identical across runs for a fixed seed.
    """
    retained = {pid for pid, labels in patch_labels.items() if labels}
    empty = sorted(pid for pid, labels in patch_labels.items() if not labels)
    n_keep = min(len(empty), math.floor(keep_fraction * len(empty) + 0.5))
    if n_keep:
        random.Random(seed).shuffle(empty)
        retained.update(empty[:n_keep])
    return retained
