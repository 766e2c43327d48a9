"""Spectral clustering of planar points.

RBF affinity with the median pairwise distance as bandwidth, symmetric
normalized Laplacian, bottom-k eigenvectors from a cyclic Jacobi
eigensolver, row normalization, then k-means on the embedded rows.
"""

import logging

import numpy as np
from sklearn.cluster import KMeans

from ..exceptions import DegenerateGeometryError, InsufficientPointsError, ShapeError
from ..models.reports import ClusterAssignment
from ..utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def _round_robin(n: int) -> list[np.ndarray]:
    """Disjoint index pairs covering every pair once per sweep.

    Circle method: n - 1 rounds of n / 2 pairs for even n. For odd n a
    phantom index n is added and its pairs dropped.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append(np.array(pairs, dtype=np.intp).reshape(-1, 2))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2)))


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float = 1e-14,
    max_sweeps: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a dense symmetric matrix by Jacobi rotations.

    Each sweep visits every off-diagonal pair once; the rotations of one
    round act on disjoint index pairs and are applied together.

    Args:
        matrix: Symmetric n x n matrix
        tol: Stop when the off-diagonal Frobenius norm drops below
            tol times the norm of the matrix
        max_sweeps: Sweep budget

    Returns:
        (eigenvalues ascending, eigenvectors as columns in the same order)

    Raises:
        ShapeError: If the matrix is not square and symmetric
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.linalg.norm(a))
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise ShapeError("matrix is not symmetric")
    n = a.shape[0]
    v = np.eye(n)
    rounds = _round_robin(n) if n > 1 else []

    for sweep in range(max_sweeps):
        if _off_norm(a) <= tol * scale:
            logger.debug("Jacobi converged after %d sweeps", sweep)
            break
        for pairs in rounds:
            if not len(pairs):
                continue
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q]
            active = apq != 0.0
            safe = np.where(active, apq, 1.0)
            theta = (a[q, q] - a[p, p]) / (2.0 * safe)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        logger.warning("Jacobi stopped after %d sweeps, off-diagonal norm %.3e", max_sweeps, _off_norm(a))

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def rbf_affinity(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Gaussian affinity exp(-d^2 / 2 sigma^2), sigma = median pairwise distance.

    Returns:
        (affinity with zero diagonal, sigma)

    Raises:
        DegenerateGeometryError: If sigma is zero (at least half of all
            pairs coincide) or not finite
    """
    x = np.asarray(points, dtype=np.float64)
    sq = np.sum(x * x, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0)
    np.fill_diagonal(d2, 0.0)
    iu = np.triu_indices(len(x), k=1)
    sigma = float(np.median(np.sqrt(d2[iu])))
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise DegenerateGeometryError(f"median pairwise distance is {sigma}, affinity is singular")
    affinity = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(affinity, 0.0)
    return affinity, sigma


def normalized_laplacian(affinity: np.ndarray) -> np.ndarray:
    """L = I - D^-1/2 A D^-1/2.

    Raises:
        DegenerateGeometryError: If a point has no affinity to any other
    """
    degree = affinity.sum(axis=1)
    if np.any(degree <= 0.0):
        raise DegenerateGeometryError("a point is disconnected from every other point")
    inv_sqrt = 1.0 / np.sqrt(degree)
    lap = np.eye(len(affinity)) - inv_sqrt[:, None] * affinity * inv_sqrt[None, :]
    return (lap + lap.T) / 2.0


def canonical_labels(labels: np.ndarray) -> list[int]:
    """Renumber clusters by first appearance so equal partitions compare equal."""
    mapping: dict[int, int] = {}
    out = []
    for label in labels:
        out.append(mapping.setdefault(int(label), len(mapping)))
    return out


def spectral_cluster(
    points: np.ndarray,
    k: int = 4,
    seed: int = 0,
    patient_ids: list[str] | None = None,
    restarts: int = 10,
) -> ClusterAssignment:
    """Cluster planar points into k groups.

    Args:
        points: n x 2 coordinates
        k: Number of clusters
        seed: Seed of the k-means restarts
        patient_ids: Ids per point, defaults to the row index
        restarts: k-means++ restarts, best inertia kept

    Returns:
        ClusterAssignment with labels numbered by first appearance

    Raises:
        InsufficientPointsError: If n < k
        DegenerateGeometryError: If the points have no spread
    """
    x = np.asarray(points, dtype=np.float64)
    n = len(x)
    if k < 1 or n < k:
        raise InsufficientPointsError(f"cannot form {k} clusters from {n} points")
    ids = patient_ids if patient_ids is not None else [str(i) for i in range(n)]
    if len(ids) != n:
        raise ShapeError(f"{len(ids)} patient ids for {n} points")
    if k == 1:
        return ClusterAssignment(patient_ids=tuple(ids), labels=(0,) * n, k=1)

    affinity, sigma = rbf_affinity(x)
    eigenvalues, eigenvectors = jacobi_eigh(normalized_laplacian(affinity))
    logger.debug("RBF sigma %.4f, bottom eigenvalues %s", sigma, np.round(eigenvalues[: k + 1], 6))

    embedded = eigenvectors[:, :k]
    norms = np.linalg.norm(embedded, axis=1, keepdims=True)
    embedded = embedded / np.where(norms > 0, norms, 1.0)

    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, random_state=derive_seed(seed, "kmeans"))
    labels = canonical_labels(km.fit_predict(embedded))
    found = len(set(labels))
    if found < k:
        logger.warning("k-means found %d distinct clusters instead of %d", found, k)
    return ClusterAssignment(patient_ids=tuple(ids), labels=tuple(labels), k=found)
