"""Losses returning (value, gradient w.r.t. the prediction)."""

import numpy as np

from ..exceptions import ShapeError

BCE_EPS = 1e-7


def _pair(pred: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"prediction {p.shape} and target {t.shape} differ")
    return p, t


def mse(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared difference over all entries."""
    p, t = _pair(pred, target)
    diff = p - t
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def bce(prob: np.ndarray, label: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy, probabilities clamped to [1e-7, 1 - 1e-7]."""
    p, y = _pair(prob, label)
    q = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    value = -np.mean(y * np.log(q) + (1.0 - y) * np.log(1.0 - q))
    # flat where p was clamped
    grad = (-(y / q) + (1.0 - y) / (1.0 - q)) * (p == q) / q.size
    return float(value), grad
