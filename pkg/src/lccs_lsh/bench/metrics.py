"""Exact ground truth and the recall / overall-ratio accuracy measures."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = ["GroundTruth", "ground_truth", "recall_at_k", "overall_ratio", "RATIO_CAP", "thread_count"]

# stands in for an infinite per-rank ratio (true distance 0, returned distance > 0)
RATIO_CAP = 1e9


def thread_count() -> int:
    """Worker threads for batch work, from ``LCCS_NUM_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LCCS_NUM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class GroundTruth:
    ids: np.ndarray
    distances: np.ndarray

    @property
    def k(self) -> int:
        return self.ids.shape[1]


def _truth_block(points: np.ndarray, sq_norms: np.ndarray, Q: np.ndarray, k: int):
    # |x - q|^2 = |x|^2 - 2 x.q + |q|^2, clipped at 0 against cancellation
    d2 = sq_norms[None, :] - 2.0 * (Q @ points.T) + np.einsum("ij,ij->i", Q, Q)[:, None]
    np.maximum(d2, 0.0, out=d2)
    n = points.shape[0]
    ids = np.empty((Q.shape[0], k), dtype=np.int64)
    dist = np.empty((Q.shape[0], k))
    for r in range(Q.shape[0]):
        row = d2[r]
        if k < n:
            part = np.argpartition(row, k - 1)[:k]
            kth = row[part].max()
            # keep every id tied with the k-th distance so ties resolve by id
            part = np.flatnonzero(row <= kth)
        else:
            part = np.arange(n)
        # exact distances for the final ordering
        diff = points[part] - Q[r]
        exact = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        order = np.lexsort((part, exact))[:k]
        ids[r] = part[order]
        dist[r] = exact[order]
    return ids, dist


def _unit_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("angular distance is undefined for zero vectors")
    return X / norms


def ground_truth(
    points, queries, k: int, metric: str = "euclidean", block: int = 256, threads: int | None = None
) -> GroundTruth:
    """Exhaustive k nearest neighbors per query, ties by smaller id.

    For ``metric="angular"`` both sides are normalized first and distances
    are Euclidean between unit vectors (same ordering as the angle).
    """
    X = np.asarray(points, dtype=np.float64)
    Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if X.ndim != 2 or Q.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: points {X.shape}, queries {Q.shape}")
    if metric == "angular":
        X, Q = _unit_rows(X), _unit_rows(Q)
    elif metric != "euclidean":
        raise ValueError(f"unknown metric {metric!r}")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must lie in [1, {X.shape[0]}], got {k}")
    sq = np.einsum("ij,ij->i", X, X)
    starts = range(0, Q.shape[0], block)
    threads = thread_count() if threads is None else threads
    work = lambda s: _truth_block(X, sq, Q[s : s + block], k)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return GroundTruth(np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts]))


def recall_at_k(returned, truth, k: int | None = None) -> float:
    """``|returned & truth| / k`` with ``k = len(truth)`` by default."""
    truth = list(truth)
    k = len(truth) if k is None else k
    if k < 1:
        raise ValueError("k must be >= 1")
    return len(set(int(i) for i in returned) & set(int(i) for i in truth[:k])) / k


def overall_ratio(returned_distances, truth_distances, k: int | None = None) -> tuple[float, bool]:
    """Mean per-rank ratio of returned to true neighbor distance.

    Returns ``(ratio, flagged)``.  ``0/0`` counts as 1; a positive distance
    over a zero true distance counts as :data:`RATIO_CAP`.  ``flagged`` is
    set when either happened or fewer than ``k`` results were returned (the
    mean is then over the available ranks).
    """
    ret = np.asarray(returned_distances, dtype=np.float64)
    tru = np.asarray(truth_distances, dtype=np.float64)
    k = len(tru) if k is None else k
    flagged = len(ret) < k
    r = min(len(ret), k)
    if r == 0:
        return float("nan"), True
    ret, tru = ret[:r], tru[:r]
    ratios = np.empty(r)
    zero = tru == 0
    ratios[~zero] = ret[~zero] / tru[~zero]
    ratios[zero & (ret == 0)] = 1.0
    capped = zero & (ret > 0)
    ratios[capped] = RATIO_CAP
    flagged = flagged or bool(capped.any())
    return float(ratios.mean()), flagged
