"""Post-processing grid search over radius scale and DoR threshold.

Suppression quality depends on two knobs: how large the per-class radii
are assumed to be, and how aggressive the DoR threshold is. This module
re-runs suppression plus counting evaluation for every combination on a
cached set of raw (pre-suppression) detections, producing the per-class
MAE surface used to pick the operating point. Scaling all radii by k
while dividing the threshold by k leaves the kept set unchanged, so the
surface has a built-in duality diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._concurrency import ordered_map
from .core import Detection, LabeledPoint, RadiusTable
from .evaluate import CountReport, mae_per_class
from .nms import NmsConfig, dor_nms

__all__ = ["SweepConfig", "SweepCell", "SweepResult", "run_sweep"]


def _default_scales() -> tuple[float, ...]:
    return tuple(0.25 + 0.25 * i for i in range(8))  # 0.25 .. 2.0


def _default_thresholds() -> tuple[float, ...]:
    return tuple(round(0.1 * i, 10) for i in range(1, 11))  # 0.1 .. 1.0


@dataclass(frozen=True)
class SweepConfig:
    """Grid axes: radius scale factors (> 0) and DoR thresholds (>= 0)."""

    radius_scales: tuple[float, ...] = field(default_factory=_default_scales)
    dor_thresholds: tuple[float, ...] = field(default_factory=_default_thresholds)
    class_aware: bool = True

    def __post_init__(self) -> None:
        if not self.radius_scales or not self.dor_thresholds:
            raise ValueError("sweep axes must be non-empty")
        if any(s <= 0.0 for s in self.radius_scales):
            raise ValueError("radius scales must be > 0")
        if any(t < 0.0 for t in self.dor_thresholds):
            raise ValueError("DoR thresholds must be >= 0")


@dataclass(frozen=True)
class SweepCell:
    """One grid point: the settings and the counting report they produce."""

    radius_scale: float
    dor_threshold: float
    report: CountReport


@dataclass(frozen=True)
class SweepResult:
    """All grid cells, ordered by (scale index, threshold index)."""

    config: SweepConfig
    cells: tuple[SweepCell, ...]

    def cell(self, radius_scale: float, dor_threshold: float) -> SweepCell:
        for c in self.cells:
            if c.radius_scale == radius_scale and c.dor_threshold == dor_threshold:
                return c
        raise KeyError(f"no sweep cell at scale={radius_scale}, threshold={dor_threshold}")


def run_sweep(
    raw_dets: dict[str, list[Detection]],
    gts: dict[str, list[LabeledPoint]],
    base_radii: RadiusTable,
    cfg: SweepConfig,
) -> SweepResult:
    """Evaluate every (radius scale, DoR threshold) combination.

    ``raw_dets`` must be pre-suppression detections: suppression is part of
    the swept pipeline. Each cell suppresses with the base radii rescaled
    by the cell's factor, then computes per-class MAE against the ground
    truth. Inputs are never mutated; repeated runs give identical results.
    Grid cells are independent and evaluated on a thread pool with output
    order fixed by the axes.
    """
    images = sorted(raw_dets)
    settings = [
        (scale, tau)
        for scale in cfg.radius_scales
        for tau in cfg.dor_thresholds
    ]

    def evaluate_cell(setting: tuple[float, float]) -> SweepCell:
        scale, tau = setting
        radii = base_radii.with_scale(scale)
        nms_cfg = NmsConfig(dor_threshold=tau, class_aware=cfg.class_aware)
        suppressed = {
            image_id: dor_nms(raw_dets[image_id], radii, nms_cfg)
            for image_id in images
        }
        return SweepCell(scale, tau, mae_per_class(suppressed, gts))

    return SweepResult(config=cfg, cells=tuple(ordered_map(evaluate_cell, settings)))
