"""Shared domain types and elementary geometry.

Coordinates are continuous (sub-pixel), origin at the top-left corner of
the image or patch, x pointing right, y pointing down. All types here are
immutable value types and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ClassId",
    "Point2D",
    "LabeledPoint",
    "Detection",
    "RadiusTable",
    "ImageSize",
    "euclidean_distance",
    "as_xy_array",
]

# Class ids are small non-negative integers indexing the class catalog of a
# run; validation against the catalog happens where a catalog is in scope.
ClassId = int


@dataclass(frozen=True, slots=True)
class Point2D:
    """A location in pixels. Must be finite (no NaN/Inf)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def translated(self, dx: float, dy: float) -> Point2D:
        return Point2D(self.x + dx, self.y + dy)


@dataclass(frozen=True, slots=True)
class LabeledPoint:
    """A ground-truth annotation: a point plus its class."""

    point: Point2D
    class_id: ClassId

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise ValueError(f"class_id must be non-negative, got {self.class_id}")


@dataclass(frozen=True, slots=True)
class Detection:
    """A predicted point with class and confidence in [0, 1]."""

    point: Point2D
    class_id: ClassId
    confidence: float

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise ValueError(f"class_id must be non-negative, got {self.class_id}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class RadiusTable:
    """Per-class radius in pixels, with a global scale multiplier.

    The effective radius of a class is ``radii[class_id] * scale``. Radii
    approximate object extent and drive pseudo-box generation, suppression
    distances, and detection-to-truth matching.
    """

    radii: dict[ClassId, float] = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0.0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        for class_id, radius in self.radii.items():
            if radius <= 0.0:
                raise ValueError(f"radius for class {class_id} must be > 0, got {radius}")

    def effective_radius(self, class_id: ClassId) -> float:
        if class_id not in self.radii:
            raise KeyError(f"no radius defined for class {class_id}")
        return self.radii[class_id] * self.scale

    def with_scale(self, scale: float) -> RadiusTable:
        """Return a copy with the scale multiplier replaced."""
        return RadiusTable(radii=dict(self.radii), scale=scale)

    @classmethod
    def uniform(cls, radius: float, class_ids: Iterable[ClassId], scale: float = 1.0) -> RadiusTable:
        return cls(radii={c: radius for c in class_ids}, scale=scale)


@dataclass(frozen=True, slots=True)
class ImageSize:
    """Integer pixel dimensions of an image; both must be positive."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")

    def contains(self, p: Point2D) -> bool:
        """Half-open containment: 0 <= x < width and 0 <= y < height."""
        return 0.0 <= p.x < self.width and 0.0 <= p.y < self.height


def euclidean_distance(a: Point2D, b: Point2D) -> float:
    """Distance in pixels between two points; symmetric and non-negative."""
    return math.hypot(a.x - b.x, a.y - b.y)


def as_xy_array(points: Sequence[Point2D] | np.ndarray) -> np.ndarray:
    """Convert a sequence of points (or an (N, 2) array) to an (N, 2) float array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"expected shape (N, 2), got {arr.shape}")
        return arr
    return np.array([(p.x, p.y) for p in points], dtype=float).reshape(-1, 2)
