"""Point-set training losses with analytic gradients.

Three reference losses for a point detector, each returning the scalar
value together with its gradient so the analytic form can be verified
against central finite differences:

* average Hausdorff distance between an unpaired prediction set and
  ground-truth set (plain distances, not squared, in both directions),
* mean squared error over externally supplied prediction/target pairs,
* elementwise binary cross-entropy for one-vs-all class probabilities,

plus the alpha-weighted combination ``alpha * point_loss +
(10 - alpha) * class_loss`` used to balance localization against
classification. Pair correspondence for the MSE loss comes from the cell
assigner in :mod:`polo_kit.decode`; the losses themselves are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Point2D, as_xy_array

__all__ = [
    "LossWeights",
    "PairedPoints",
    "loss_average_hausdorff",
    "loss_mse",
    "loss_bce",
    "loss_combined",
    "gradient_check",
    "LEGACY_CLASS_WEIGHT",
    "LEGACY_BOX_WEIGHT",
    "LEGACY_DFL_WEIGHT",
]

# Stock one-stage-detector loss scales, kept for comparison runs that
# reproduce the historical weighting (class / box / distribution-focal).
LEGACY_CLASS_WEIGHT = 0.5
LEGACY_BOX_WEIGHT = 7.5
LEGACY_DFL_WEIGHT = 1.5

# Probabilities are clamped to [BCE_EPS, 1 - BCE_EPS] before taking logs.
BCE_EPS = 1e-7


@dataclass(frozen=True, slots=True)
class LossWeights:
    """Balance between point regression and classification.

    ``alpha`` must lie in [1, 9]; the combined loss weighs the point term
    by alpha and the class term by 10 - alpha.
    """

    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not (1.0 <= self.alpha <= 9.0):
            raise ValueError(f"alpha must be in [1, 9], got {self.alpha}")


@dataclass(frozen=True)
class PairedPoints:
    """Prediction/target pairs sharing an index, for paired losses."""

    pairs: tuple[tuple[Point2D, Point2D], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValueError("at least one prediction/target pair is required")

    @classmethod
    def from_lists(cls, predictions: Sequence[Point2D], targets: Sequence[Point2D]) -> PairedPoints:
        if len(predictions) != len(targets):
            raise ValueError(
                f"prediction/target count mismatch: {len(predictions)} vs {len(targets)}"
            )
        return cls(tuple(zip(predictions, targets)))

    def prediction_array(self) -> np.ndarray:
        return as_xy_array([p for p, _ in self.pairs])

    def target_array(self) -> np.ndarray:
        return as_xy_array([t for _, t in self.pairs])


def loss_average_hausdorff(
    predictions: Sequence[Point2D] | np.ndarray,
    targets: Sequence[Point2D] | np.ndarray,
) -> tuple[float, np.ndarray]:
    """Average Hausdorff distance between two non-empty point sets.

    Value: mean over targets of the distance to the nearest prediction,
    plus mean over predictions of the distance to the nearest target.
    Requires both sets non-empty (each term divides by a cardinality).

    Returns ``(value, grad)`` with ``grad`` of shape (n_predictions, 2):
    each prediction accumulates gradient through every minimum it attains;
    ties resolve to the lowest-index minimizer, and a zero-distance pair
    contributes a zero subgradient.
    """
    preds = as_xy_array(predictions)
    gts = as_xy_array(targets)
    if preds.shape[0] == 0 or gts.shape[0] == 0:
        raise ValueError("average Hausdorff loss is undefined for empty point sets")

    diff = preds[:, None, :] - gts[None, :, :]  # (M, N, 2)
    dist = np.sqrt((diff ** 2).sum(axis=2))  # (M, N)
    m, n = dist.shape
    grad = np.zeros_like(preds)

    # targets -> nearest prediction (argmin picks the lowest index at ties)
    nearest_pred = dist.argmin(axis=0)
    term1 = dist[nearest_pred, np.arange(n)].sum() / n
    for i in range(n):
        j = nearest_pred[i]
        d = dist[j, i]
        if d > 0.0:
            grad[j] += diff[j, i] / (d * n)

    # predictions -> nearest target
    nearest_gt = dist.argmin(axis=1)
    term2 = dist[np.arange(m), nearest_gt].sum() / m
    d_min = dist[np.arange(m), nearest_gt]
    nonzero = d_min > 0.0
    grad[nonzero] += diff[np.arange(m)[nonzero], nearest_gt[nonzero]] / (
        d_min[nonzero, None] * m
    )

    return float(term1 + term2), grad


def loss_mse(paired: PairedPoints) -> tuple[float, np.ndarray]:
    """Mean squared error over paired points.

    Value: mean over pairs of the squared Euclidean norm of
    (target - prediction). Gradient per prediction: (2 / N) * (prediction
    - target).
    """
    preds = paired.prediction_array()
    gts = paired.target_array()
    n = preds.shape[0]
    diff = preds - gts
    value = float((diff ** 2).sum() / n)
    grad = 2.0 * diff / n
    return value, grad


def loss_bce(
    predicted_probs: Sequence[float] | np.ndarray,
    targets: Sequence[float] | np.ndarray,
) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy over probability/target entries.

    Probabilities are clamped to [1e-7, 1 - 1e-7] before the logs; the
    gradient is zero where the clamp saturates. Targets must be 0 or 1.
    """
    q = np.asarray(predicted_probs, dtype=float)
    t = np.asarray(targets, dtype=float)
    if q.shape != t.shape:
        raise ValueError(f"probability/target shape mismatch: {q.shape} vs {t.shape}")
    if q.size == 0:
        raise ValueError("binary cross-entropy is undefined for empty inputs")
    clamped = np.clip(q, BCE_EPS, 1.0 - BCE_EPS)
    value = float(-(t * np.log(clamped) + (1.0 - t) * np.log1p(-clamped)).mean())
    grad = (clamped - t) / (clamped * (1.0 - clamped) * q.size)
    grad[(q < BCE_EPS) | (q > 1.0 - BCE_EPS)] = 0.0
    return value, grad


def loss_combined(l_point: float, l_bce: float, alpha: float) -> float:
    """alpha-weighted sum: alpha * point loss + (10 - alpha) * class loss."""
    weights = LossWeights(alpha)  # validates the range
    return weights.alpha * l_point + (10.0 - weights.alpha) * l_bce


def gradient_check(
    loss: Callable[[np.ndarray], tuple[float, np.ndarray]],
    inputs: np.ndarray,
    epsilon: float = 1e-5,
) -> float:
    """Compare a loss's analytic gradient against central finite differences.

    ``loss`` maps an input array to ``(value, gradient)`` with the gradient
    shaped like the input. Returns the maximum over coordinates of
    ``|analytic - numeric| / max(1, |analytic|, |numeric|)``.
    """
    inputs = np.asarray(inputs, dtype=float)
    _, analytic = loss(inputs)
    worst = 0.0
    for idx in np.ndindex(inputs.shape):
        bumped = inputs.copy()
        bumped[idx] += epsilon
        hi, _ = loss(bumped)
        bumped[idx] -= 2.0 * epsilon
        lo, _ = loss(bumped)
        numeric = (hi - lo) / (2.0 * epsilon)
        a = float(analytic[idx])
        rel = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
        worst = max(worst, rel)
    return worst
