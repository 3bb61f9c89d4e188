"""Synthetic scenes and a noisy detector simulator.

Generates clustered point-annotated scenes (flock-like layouts with an
optional minimum pairwise separation) and simulates an imperfect detector
over them: misses, Gaussian localization jitter, duplicate detections,
and uniformly placed false positives. Together they give the full
tile/suppress/stitch/evaluate pipeline a desk-scale ground truth whose
correct output is known exactly.

Generation is sequential per scene so a seed fully determines the output
regardless of worker count; run multiple scenes in parallel instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ClassId, Detection, ImageSize, LabeledPoint, Point2D

__all__ = ["SceneConfig", "DetectorNoise", "generate_scene", "simulate_detector"]

# Rejection-sampling budget per point before the separation constraint is
# declared infeasible.
_MAX_TRIES_PER_POINT = 1000


@dataclass(frozen=True)
class SceneConfig:
    """Layout of one synthetic scene.

    ``abundance`` maps class id -> number of points. Points scatter
    around ``cluster_count`` uniformly placed cluster centers with an
    isotropic Gaussian of ``cluster_spread`` pixels; ``min_separation``
    (when set) enforces a minimum pairwise distance via rejection
    sampling.
    """

    image: ImageSize
    abundance: dict[ClassId, int] = field(default_factory=dict)
    cluster_count: int = 5
    cluster_spread: float = 100.0
    min_separation: float | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if any(n < 0 for n in self.abundance.values()):
            raise ValueError("abundances must be >= 0")
        if self.cluster_count <= 0:
            raise ValueError("cluster_count must be > 0")
        if self.cluster_spread <= 0.0:
            raise ValueError("cluster_spread must be > 0")
        if self.min_separation is not None and self.min_separation <= 0.0:
            raise ValueError("min_separation must be > 0 when set")


@dataclass(frozen=True)
class DetectorNoise:
    """Failure model of the simulated detector.

    Each ground truth is missed with ``miss_rate``; survivors are jittered
    by an isotropic Gaussian and duplicated with ``duplicate_rate`` (the
    duplicate gets fresh jitter). ``false_positive_rate`` adds
    round(rate * n_gts) spurious detections placed uniformly. True
    detections draw confidence from ``tp_confidence``, false positives
    from ``fp_confidence``.
    """

    jitter_sigma: float = 0.0
    miss_rate: float = 0.0
    duplicate_rate: float = 0.0
    false_positive_rate: float = 0.0
    tp_confidence: tuple[float, float] = (0.6, 1.0)
    fp_confidence: tuple[float, float] = (0.25, 0.6)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("miss_rate", "duplicate_rate", "false_positive_rate"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.jitter_sigma < 0.0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")


class _SeparationIndex:
    """Uniform-grid index answering 'is any accepted point within d?'."""

    def __init__(self, min_distance: float) -> None:
        self.d = min_distance
        self.cells: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def too_close(self, x: float, y: float) -> bool:
        cx, cy = int(x // self.d), int(y // self.d)
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for px, py in self.cells.get((gx, gy), ()):
                    if math.hypot(x - px, y - py) < self.d:
                        return True
        return False

    def add(self, x: float, y: float) -> None:
        self.cells.setdefault((int(x // self.d), int(y // self.d)), []).append((x, y))


def generate_scene(cfg: SceneConfig) -> list[LabeledPoint]:
    """Generate clustered point labels; deterministic for a fixed seed.

    Raises RuntimeError when the separation constraint cannot be satisfied
    within the rejection budget.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    w, h = float(cfg.image.width), float(cfg.image.height)
    centers = rng.uniform((0.0, 0.0), (w, h), size=(cfg.cluster_count, 2))
    index = _SeparationIndex(cfg.min_separation) if cfg.min_separation else None

    labels: list[LabeledPoint] = []
    for class_id in sorted(cfg.abundance):
        for _ in range(cfg.abundance[class_id]):
            for _ in range(_MAX_TRIES_PER_POINT):
                center = centers[rng.integers(0, cfg.cluster_count)]
                x, y = center + rng.normal(0.0, cfg.cluster_spread, size=2)
                if not (0.0 <= x < w and 0.0 <= y < h):
                    continue
                if index is not None and index.too_close(x, y):
                    continue
                break
            else:
                raise RuntimeError(
                    f"could not place a point at min_separation={cfg.min_separation} "
                    f"after {_MAX_TRIES_PER_POINT} tries; scene too crowded"
                )
            if index is not None:
                index.add(x, y)
            labels.append(LabeledPoint(Point2D(float(x), float(y)), class_id))
    return labels


def simulate_detector(
    gts: list[LabeledPoint], noise: DetectorNoise, image: ImageSize
) -> list[Detection]:
    """Run the noise model over ground truth; deterministic for a fixed seed.

    Output order: surviving (possibly duplicated) ground-truth detections
    in input order, then false positives. Jittered points are clamped to
    the image so every detection stays in frame.
    """
    rng = np.random.default_rng(noise.rng_seed)
    w, h = float(cfg_w := image.width), float(image.height)
    del cfg_w

    def jittered(p: Point2D) -> Point2D:
        if noise.jitter_sigma == 0.0:
            return p
        dx, dy = rng.normal(0.0, noise.jitter_sigma, size=2)
        x = min(max(p.x + dx, 0.0), math.nextafter(w, 0.0))
        y = min(max(p.y + dy, 0.0), math.nextafter(h, 0.0))
        return Point2D(x, y)

    lo_tp, hi_tp = noise.tp_confidence
    lo_fp, hi_fp = noise.fp_confidence
    detections: list[Detection] = []
    for gt in gts:
        if rng.uniform() < noise.miss_rate:
            continue
        detections.append(
            Detection(jittered(gt.point), gt.class_id, float(rng.uniform(lo_tp, hi_tp)))
        )
        if rng.uniform() < noise.duplicate_rate:
            detections.append(
                Detection(jittered(gt.point), gt.class_id, float(rng.uniform(lo_tp, hi_tp)))
            )

    n_fp = math.floor(noise.false_positive_rate * len(gts) + 0.5)
    if n_fp:
        classes = sorted({gt.class_id for gt in gts})
        for _ in range(n_fp):
            x = float(rng.uniform(0.0, w))
            y = float(rng.uniform(0.0, h))
            class_id = classes[int(rng.integers(0, len(classes)))]
            detections.append(
                Detection(Point2D(x, y), class_id, float(rng.uniform(lo_fp, hi_fp)))
            )
    return detections
