"""Desk-scale datasets: synthetic Gaussian clusters or user fvecs files."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import load_fvecs
from .metrics import GroundTruth, ground_truth

__all__ = ["Dataset", "gaussian_clusters", "from_fvecs"]


@dataclass
class Dataset:
    name: str
    points: np.ndarray
    queries: np.ndarray
    truth: GroundTruth
    metric: str = "euclidean"

    def __post_init__(self):
        if self.points.ndim != 2 or self.queries.ndim != 2 or self.points.shape[1] != self.queries.shape[1]:
            raise ValueError(f"inconsistent shapes: points {self.points.shape}, queries {self.queries.shape}")
        if self.truth.ids.shape[0] != self.queries.shape[0]:
            raise ValueError("ground truth does not cover every query")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def gaussian_clusters(
    n: int,
    d: int,
    n_queries: int = 100,
    clusters: int = 100,
    spread: float = 2.0,
    noise: float = 1.0,
    k: int = 10,
    seed: int = 0,
    metric: str = "euclidean",
) -> Dataset:
    """Points and queries drawn around shared Gaussian centers.

    Centers are ``N(0, spread^2 I)``; each point or query is a random center
    plus ``N(0, noise^2 I)``.  Queries are drawn separately from the points.
    """
    if n < 1 or d < 1 or n_queries < 1 or clusters < 1:
        raise ValueError("n, d, n_queries and clusters must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, spread, size=(clusters, d))
    pts = centers[rng.integers(clusters, size=n)] + rng.normal(0.0, noise, size=(n, d))
    qs = centers[rng.integers(clusters, size=n_queries)] + rng.normal(0.0, noise, size=(n_queries, d))
    return Dataset(f"gauss-{n}x{d}", pts, qs, ground_truth(pts, qs, min(k, n), metric=metric), metric)


def from_fvecs(path, n_queries: int = 100, k: int = 10, seed: int = 0, metric: str = "euclidean", limit: int | None = None) -> Dataset:
    """Split an fvecs file into points and held-out queries at random."""
    X = load_fvecs(path).astype(np.float64)
    if limit is not None:
        X = X[:limit]
    if X.shape[0] <= n_queries:
        raise ValueError(f"need more than {n_queries} vectors, file has {X.shape[0]}")
    perm = np.random.default_rng(seed).permutation(X.shape[0])
    qs, pts = X[perm[:n_queries]], X[perm[n_queries:]]
    return Dataset(str(path), pts, qs, ground_truth(pts, qs, min(k, len(pts)), metric=metric), metric)
