"""K-means++ seeding, Lloyd iteration and ordering of clusters into classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DecisionMatrix, ReferenceLabels, ValidationError

MAX_PASSES = 300


@dataclass(frozen=True)
class Clustering:
    centroids: np.ndarray
    membership: np.ndarray
    k: int
    sse_trace: tuple[float, ...] = ()

    @property
    def sse(self) -> float:
        return self.sse_trace[-1] if self.sse_trace else float("nan")


def _values(matrix) -> np.ndarray:
    return matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)


def _sq_dist(X, C) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)


def kmeanspp_seed(matrix, k: int, rng=None) -> np.ndarray:
    """Pick ``k`` distinct rows, each new one with probability D(x)^2 / sum D(x)^2."""
    X = _values(matrix)
    rng = np.random.default_rng(rng)
    if k < 1:
        raise ValidationError("k must be at least 1")
    if k > len(np.unique(X, axis=0)):
        raise ValidationError("not enough distinct observations")
    chosen = [int(rng.integers(len(X)))]
    d2 = _sq_dist(X, X[chosen]).min(axis=1)
    for _ in range(1, k):
        idx = int(rng.choice(len(X), p=d2 / d2.sum()))
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans_run(matrix, seeds, max_passes: int = MAX_PASSES) -> Clustering:
    """Lloyd iteration from the given centroids until membership is stable."""
    X = _values(matrix)
    C = np.array(seeds, dtype=float, copy=True)
    k = len(C)
    if len(np.unique(C, axis=0)) != k:
        raise ValidationError("seed centroids must be distinct")
    membership = np.full(len(X), -1)
    trace = []
    for _ in range(max_passes):
        new = np.argmin(_sq_dist(X, C), axis=1)
        counts = np.bincount(new, minlength=k)
        while np.any(counts == 0):
            # an emptied cluster takes over the point farthest from its own centroid
            empty = int(np.argmin(counts))
            far = np.sqrt(((X - C[new]) ** 2).sum(axis=1))
            far[counts[new] <= 1] = -1.0
            idx = int(np.argmax(far))
            new[idx] = empty
            C[empty] = X[idx]
            counts = np.bincount(new, minlength=k)
        stable = np.array_equal(new, membership)
        membership = new
        for c in range(k):
            C[c] = X[membership == c].mean(axis=0)
        trace.append(float(((X - C[membership]) ** 2).sum()))
        if stable:
            break
    return Clustering(C, membership, k, tuple(trace))


def kmeans(matrix, k: int, rng=None, n_init: int = 1) -> Clustering:
    """Best of ``n_init`` seeded runs by within-cluster squared error."""
    rng = np.random.default_rng(rng)
    best = None
    for _ in range(n_init):
        run = kmeans_run(matrix, kmeanspp_seed(matrix, k, rng))
        if best is None or run.sse < best.sse:
            best = run
    return best


def cluster_ranks(centroids) -> np.ndarray:
    """Rank of each centroid by distance from the origin (0 = closest)."""
    C = np.asarray(centroids, dtype=float)
    norms = np.linalg.norm(C, axis=1)
    # np.lexsort sorts by the last key first: norm, then coordinates as tie-breakers
    order = np.lexsort(tuple(C[:, j] for j in range(C.shape[1] - 1, -1, -1)) + (norms,))
    ranks = np.empty(len(C), dtype=int)
    ranks[order] = np.arange(len(C))
    return ranks


def order_clusters(clustering: Clustering) -> ReferenceLabels:
    """Map clusters to classes: farthest centroid from the origin is the best class."""
    ranks = cluster_ranks(clustering.centroids)
    return ReferenceLabels(ranks[clustering.membership], clustering.k, "clusters")
