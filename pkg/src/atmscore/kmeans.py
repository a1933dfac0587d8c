"""Lloyd's k-means with k-means++ seeding and best-of-restarts selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from atmscore.errors import DomainError
from atmscore.rng import stream

DEFAULT_K = 7
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6
DEFAULT_RESTARTS = 10

# callback(restart, iteration, sse); iteration 0 is the post-seeding assignment
TraceHook = Callable[[int, int, float], None]


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    iterations_run: int
    seed: int
    sse_history: tuple[float, ...] = ()


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] < 1:
        raise DomainError(f"points must be an n x d matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("points contain non-finite values")
    return x


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign(points, centroids) -> np.ndarray:
    """Nearest centroid by squared Euclidean distance; ties go to the lower index."""
    x = _as_points(points)
    c = np.asarray(centroids, dtype=float)
    if c.ndim != 2 or c.shape[1] != x.shape[1]:
        raise DomainError(f"centroid shape {c.shape} does not match points of dimension {x.shape[1]}")
    # argmin returns the first minimum, which is the tie-break we want
    return np.argmin(_sq_dists(x, c), axis=1)


def sse(points, centroids, labels) -> float:
    x = _as_points(points)
    c = np.asarray(centroids, dtype=float)
    labels = np.asarray(labels)
    if labels.shape != (len(x),):
        raise DomainError("labels must have one entry per point")
    if len(labels) and (labels.min() < 0 or labels.max() >= len(c)):
        raise DomainError(f"label out of range for {len(c)} centroids")
    diff = x - c[labels]
    return float(np.einsum("nd,nd->", diff, diff))


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = [int(rng.integers(n))]
    closest = ((x - x[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        centers.append(idx)
        closest = np.minimum(closest, ((x - x[idx]) ** 2).sum(axis=1))
    return x[centers].copy()


def _update(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    k = len(centroids)
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, x)
    new = centroids.copy()
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    for j in np.flatnonzero(~filled):
        # reseed an empty cluster at the point worst served by its own centroid
        d = ((x - new[labels]) ** 2).sum(axis=1)
        far = int(np.argmax(d))
        new[j] = x[far]
        labels = labels.copy()
        labels[far] = j
    return new


def _force_nonempty(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray):
    # Only reachable with duplicate points: move one point from the largest
    # cluster into each empty one.
    k = len(centroids)
    labels = labels.copy()
    centroids = centroids.copy()
    for j in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[j]:
            continue
        donor = int(np.argmax(counts))
        members = np.flatnonzero(labels == donor)
        d = ((x[members] - centroids[donor]) ** 2).sum(axis=1)
        moved = int(members[np.argmax(d)])
        labels[moved] = j
        centroids[j] = x[moved]
    for j in range(k):
        centroids[j] = x[labels == j].mean(axis=0)
    return labels, centroids


def _lloyd(x, k, rng, max_iter, tol, restart, trace):
    centroids = _kmeans_pp(x, k, rng)
    labels = assign(x, centroids)
    current = sse(x, centroids, labels)
    history = [current]
    if trace is not None:
        trace(restart, 0, current)
    it = 0
    while it < max_iter:
        it += 1
        centroids = _update(x, labels, centroids)
        labels = assign(x, centroids)
        new = sse(x, centroids, labels)
        history.append(new)
        if trace is not None:
            trace(restart, it, new)
        improvement = current - new
        current = new
        if current == 0.0 or improvement <= tol * (current + improvement):
            break
    if np.bincount(labels, minlength=k).min() == 0:
        labels, centroids = _force_nonempty(x, labels, centroids)
        current = sse(x, centroids, labels)
    return centroids, labels, current, it, history


def kmeans_fit(
    points,
    k: int = DEFAULT_K,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    restarts: int = DEFAULT_RESTARTS,
    trace: Optional[TraceHook] = None,
) -> ClusterModel:
    """Fit k-means and keep the lowest-SSE restart.

    Each restart seeds with k-means++ from its own stream derived from
    ``(seed, restart)``, then runs Lloyd iterations until the relative SSE
    improvement drops below ``tol`` or ``max_iter`` is reached. Ties in SSE
    keep the earlier restart.
    """
    x = _as_points(points)
    n = len(x)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if n < k:
        raise DomainError(f"cannot form {k} clusters from {n} points")
    if max_iter < 1 or restarts < 1:
        raise DomainError("max_iter and restarts must be >= 1")

    best = None
    for r in range(restarts):
        rng = stream(seed, "kmeans-restart", r)
        result = _lloyd(x, k, rng, max_iter, tol, r, trace)
        if best is None or result[2] < best[2]:
            best = result
    centroids, labels, best_sse, iters, history = best
    return ClusterModel(k, centroids, labels, best_sse, iters, seed, tuple(history))
