"""Grid-cell point decoding and ground-truth cell assignment.

A point-prediction head emits, per grid cell, two raw coordinate
activations plus one logit per class. Decoding squashes each coordinate
activation through a sigmoid, scales it to the (-0.5, 1.5) cell-offset
range so a cell can place its point slightly outside itself, and adds the
cell's top-left corner:

    offset = sigmoid(a) * 2 - 0.5
    x = (col + offset_x) * stride,  y = (row + offset_y) * stride

Each cell predicts at most one point; its confidence is the maximum
per-class sigmoid probability and its class the argmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import Detection, LabeledPoint, Point2D

__all__ = [
    "GridSpec",
    "ActivationGrid",
    "Assignment",
    "decode_cell",
    "decode_grid",
    "assign_targets",
]


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Cell layout of one output map: cells_x columns by cells_y rows,
    each covering ``stride`` pixels of the patch."""

    cells_x: int
    cells_y: int
    stride: float

    def __post_init__(self) -> None:
        if self.cells_x <= 0 or self.cells_y <= 0:
            raise ValueError(f"grid must have positive cell counts, got {self.cells_x}x{self.cells_y}")
        if self.stride <= 0:
            raise ValueError(f"stride must be > 0, got {self.stride}")

    @property
    def extent_x(self) -> float:
        return self.cells_x * self.stride

    @property
    def extent_y(self) -> float:
        return self.cells_y * self.stride


@dataclass(frozen=True)
class ActivationGrid:
    """Raw per-cell activations: coordinate channels a1 (x), a2 (y) of shape
    (cells_y, cells_x) and class logits of shape (cells_y, cells_x, C)."""

    grid: GridSpec
    a1: np.ndarray
    a2: np.ndarray
    class_logits: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid.cells_y, self.grid.cells_x)
        if self.a1.shape != shape or self.a2.shape != shape:
            raise ValueError(
                f"coordinate channels must have shape {shape}, "
                f"got {self.a1.shape} and {self.a2.shape}"
            )
        if self.class_logits.ndim != 3 or self.class_logits.shape[:2] != shape:
            raise ValueError(
                f"class logits must have shape {shape} + (C,), got {self.class_logits.shape}"
            )
        if self.class_logits.shape[2] < 1:
            raise ValueError("at least one class channel is required")
        for name, arr in (("a1", self.a1), ("a2", self.a2), ("class_logits", self.class_logits)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def num_classes(self) -> int:
        return self.class_logits.shape[2]


@dataclass(frozen=True, slots=True)
class Assignment:
    """A ground-truth point assigned to the grid cell containing it.

    ``colliding`` marks assignments whose cell holds more than one ground
    truth; a one-point-per-cell head cannot satisfy both.
    """

    cell: tuple[int, int]  # (row, col)
    gt_index: int
    colliding: bool = False


def decode_cell(a1: float, a2: float, cell: tuple[int, int], grid: GridSpec) -> Point2D:
    """Decode one cell's coordinate activations to a patch-frame point.

    The sigmoid keeps offsets strictly inside (-0.5, 1.5) cell units, so a
    zero activation lands exactly on the cell center.
    """
    row, col = cell
    offset_x = float(expit(a1)) * 2.0 - 0.5
    offset_y = float(expit(a2)) * 2.0 - 0.5
    return Point2D((col + offset_x) * grid.stride, (row + offset_y) * grid.stride)


def decode_grid(acts: ActivationGrid, conf_threshold: float) -> list[Detection]:
    """Decode a full activation grid into patch-frame detections.

    Per cell: class probabilities are sigmoid(logits), confidence is the
    maximum probability, and a detection (argmax class) is emitted when
    confidence >= conf_threshold. Output is sorted by (row, col); at most
    one detection per cell.
    """
    probs = expit(acts.class_logits)
    confidences = probs.max(axis=2)
    classes = probs.argmax(axis=2)
    offsets_x = expit(acts.a1) * 2.0 - 0.5
    offsets_y = expit(acts.a2) * 2.0 - 0.5
    stride = acts.grid.stride

    detections = []
    for row, col in np.argwhere(confidences >= conf_threshold):
        detections.append(
            Detection(
                point=Point2D((col + offsets_x[row, col]) * stride,
                              (row + offsets_y[row, col]) * stride),
                class_id=int(classes[row, col]),
                confidence=float(confidences[row, col]),
            )
        )
    return detections


def assign_targets(gts: list[LabeledPoint], grid: GridSpec) -> list[Assignment]:
    """Assign each ground truth to the cell containing it (half-open cells).

    Cell indices are floor(coord / stride). Raises ValueError for points
    outside the grid extent. When several points share a cell, every
    assignment is emitted with ``colliding`` set.
    """
    cells: list[tuple[int, int]] = []
    occupancy: dict[tuple[int, int], int] = {}
    for i, gt in enumerate(gts):
        p = gt.point
        if not (0.0 <= p.x < grid.extent_x and 0.0 <= p.y < grid.extent_y):
            raise ValueError(
                f"ground truth {i} at ({p.x}, {p.y}) lies outside the "
                f"{grid.extent_x}x{grid.extent_y} grid extent"
            )
        cell = (int(p.y // grid.stride), int(p.x // grid.stride))
        cells.append(cell)
        occupancy[cell] = occupancy.get(cell, 0) + 1
    return [
        Assignment(cell=cell, gt_index=i, colliding=occupancy[cell] > 1)
        for i, cell in enumerate(cells)
    ]
