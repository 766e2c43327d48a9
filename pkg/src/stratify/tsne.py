"""Exact t-SNE.

Gaussian input affinities with a per-point bandwidth found by bisection on
the perplexity, symmetrized joint probabilities, Student-t output kernel,
gradient descent on the KL divergence with momentum, per-coordinate gains
and early exaggeration.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import InsufficientPointsError
from ..models.config import TsneConfig
from ..utils.seeding import rng_for

logger = logging.getLogger(__name__)

MIN_GAIN = 0.01
PROB_FLOOR = 1e-12
ENTROPY_TOL = 1e-5
KL_EVERY = 50


@dataclass(frozen=True)
class TsneResult:
    """2-D coordinates plus convergence diagnostics.

    Attributes:
        kl_history: (iteration, KL(P || Q)) every 50 iterations, computed on
            the unexaggerated P.
        perplexities: Achieved perplexity of every point's conditional
            distribution after the bandwidth search.
    """

    coordinates: np.ndarray
    kl_history: tuple[tuple[int, float], ...]
    perplexities: np.ndarray
    target_perplexity: float


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, zero diagonal."""
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _entropy(dist: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Entropy (nats) and normalized Gaussian kernel of one row.

    Distances are shifted by their minimum; the normalized kernel and the
    entropy are invariant to the shift and exp never underflows to all-zero.
    """
    shifted = dist - dist.min()
    p = np.exp(-shifted * beta)
    total = p.sum()
    h = np.log(total) + beta * np.sum(shifted * p) / total
    return float(h), p / total


def conditional_affinities(
    distances: np.ndarray,
    perplexity: float,
    steps: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Row-conditional affinities p(j | i) matching a target perplexity.

    Args:
        distances: n x n squared distances
        perplexity: Target perplexity
        steps: Bisection budget per point

    Returns:
        (n x n conditional matrix with zero diagonal, achieved perplexities)
    """
    n = distances.shape[0]
    target = np.log(perplexity)
    cond = np.zeros((n, n))
    achieved = np.zeros(n)
    for i in range(n):
        row = np.delete(distances[i], i)
        spread = row.mean() - row.min()
        beta = 1.0 / spread if spread > 0 else 1.0
        lo, hi = 0.0, np.inf
        h, p = _entropy(row, beta)
        for _ in range(steps):
            diff = h - target
            if abs(diff) < ENTROPY_TOL:
                break
            if diff > 0:
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
            h, p = _entropy(row, beta)
        cond[i, np.arange(n) != i] = p
        achieved[i] = np.exp(h)
    return cond, achieved


def joint_probabilities(cond: np.ndarray) -> np.ndarray:
    """Symmetrize conditional affinities into a joint distribution."""
    n = cond.shape[0]
    p = (cond + cond.T) / (2.0 * n)
    return np.maximum(p, PROB_FLOOR)


def _student_t(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), PROB_FLOOR)
    return num, q


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(P || Q) over off-diagonal entries."""
    mask = ~np.eye(p.shape[0], dtype=bool)
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def effective_perplexity(n: int, perplexity: float) -> float:
    """Perplexity capped at (n - 1) / 3."""
    return min(perplexity, (n - 1) / 3.0)


def tsne(embeddings: np.ndarray, seed: int, config: TsneConfig | None = None) -> TsneResult:
    """Embed points in two dimensions.

    Args:
        embeddings: n x d input points
        seed: Seed of the Gaussian initialization
        config: Hyperparameters (perplexity, iterations, learning rate, ...)

    Returns:
        TsneResult with n x 2 coordinates

    Raises:
        InsufficientPointsError: If n < 4
    """
    cfg = config or TsneConfig()
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise InsufficientPointsError(f"t-SNE needs at least 4 points, got {n}")
    perplexity = effective_perplexity(n, cfg.perplexity)

    cond, achieved = conditional_affinities(squared_distances(x), perplexity, cfg.bisection_steps)
    p = joint_probabilities(cond)

    y = rng_for(seed, "tsne-init").normal(0.0, cfg.init_scale, size=(n, 2))
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    history: list[tuple[int, float]] = []

    for it in range(cfg.iterations):
        exaggerate = it < cfg.exaggeration_iterations
        momentum = cfg.initial_momentum if exaggerate else cfg.final_momentum
        p_eff = p * cfg.early_exaggeration if exaggerate else p

        num, q = _student_t(y)
        pq = (p_eff - q) * num
        grad = 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)

        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        update = momentum * update - cfg.learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)

        if (it + 1) % KL_EVERY == 0 or it + 1 == cfg.iterations:
            _, q = _student_t(y)
            history.append((it + 1, kl_divergence(p, q)))
            logger.debug("t-SNE iteration %d KL %.6f", it + 1, history[-1][1])

    return TsneResult(
        coordinates=y,
        kl_history=tuple(history),
        perplexities=achieved,
        target_perplexity=perplexity,
    )
