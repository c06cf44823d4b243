"""Multi-probe LCCS-LSH.

The query's hash string is perturbed position by position with alternative
hash values, in ascending order of a score.  Perturbation vectors are
generated by shift/expand operations from a min-heap, with the gap between
adjacent edited positions capped at ``max_gap``; each probe re-brackets only
the shifts an edit can reach and pools its new candidates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .families import CrossPolytopeHashes, RandomProjectionHashes
from .index import LccsIndex, QueryResult, rank_candidates

__all__ = [
    "AlternativeList",
    "PerturbationVector",
    "p_shift",
    "p_expand",
    "generate_perturbations",
    "score_lists",
    "mp_query",
    "MAX_GAP",
    "RP_MAX_OFFSET",
]

MAX_GAP = 2
# random projection alternatives stop at +-4 buckets
RP_MAX_OFFSET = 4


@dataclass(frozen=True)
class AlternativeList:
    """Per position, alternative symbols in ascending score order."""

    symbols: tuple[tuple[int, ...], ...]
    scores: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.symbols) != len(self.scores):
            raise ValueError("symbols and scores disagree on the number of positions")
        for i, (sym, sc) in enumerate(zip(self.symbols, self.scores)):
            if len(sym) != len(sc):
                raise ValueError(f"position {i}: {len(sym)} symbols but {len(sc)} scores")
            if any(a > b for a, b in zip(sc, sc[1:])):
                raise ValueError(f"position {i}: scores are not ascending")
            if any(s < 0 for s in sc):
                raise ValueError(f"position {i}: negative score")

    @classmethod
    def from_lists(cls, symbols, scores) -> "AlternativeList":
        return cls(
            tuple(tuple(int(s) for s in row) for row in symbols),
            tuple(tuple(float(s) for s in row) for row in scores),
        )

    @property
    def m(self) -> int:
        return len(self.symbols)

    def score(self, edits) -> float:
        return sum(self.scores[i][j] for i, j in edits)


@dataclass(frozen=True)
class PerturbationVector:
    """Edits ``(position, alternative rank)`` with strictly increasing positions."""

    edits: tuple[tuple[int, int], ...]
    score: float

    @property
    def positions(self) -> list[int]:
        return [i for i, _ in self.edits]

    def symbols(self, alts: AlternativeList) -> list[tuple[int, int]]:
        return [(i, alts.symbols[i][j]) for i, j in self.edits]

    def apply(self, hash_string, alts: AlternativeList) -> np.ndarray:
        out = np.array(hash_string, dtype=np.int64, copy=True)
        for i, j in self.edits:
            out[i] = alts.symbols[i][j]
        return out


EMPTY = PerturbationVector((), 0.0)


def _vector(edits: tuple[tuple[int, int], ...], alts: AlternativeList) -> PerturbationVector:
    return PerturbationVector(edits, alts.score(edits))


def p_shift(delta: PerturbationVector, alts: AlternativeList) -> PerturbationVector | None:
    """Advance the last edit to its next alternative; ``None`` if there is none."""
    if not delta.edits:
        return None
    i, j = delta.edits[-1]
    if j + 1 >= len(alts.symbols[i]):
        return None
    return _vector(delta.edits[:-1] + ((i, j + 1),), alts)


def p_expand(
    delta: PerturbationVector, gap: int, alts: AlternativeList, max_gap: int = MAX_GAP
) -> PerturbationVector | None:
    """Append the first alternative at ``gap`` positions past the last edit.

    ``None`` when the position runs off the end, the gap exceeds
    ``max_gap`` or the target position has no alternatives.
    """
    if not delta.edits or not 1 <= gap <= max_gap:
        return None
    i = delta.edits[-1][0] + gap
    if i >= alts.m or not alts.symbols[i]:
        return None
    return _vector(delta.edits + ((i, 0),), alts)


def generate_perturbations(
    alts: AlternativeList, n_probes: int, max_gap: int = MAX_GAP
) -> list[PerturbationVector]:
    """The first ``n_probes`` perturbation vectors, empty vector first.

    Vectors come out in ascending score (ties by their edit tuples).  If
    fewer than ``n_probes`` vectors exist the list is shorter.
    """
    if n_probes < 1:
        raise ValueError(f"n_probes must be >= 1, got {n_probes}")
    if max_gap < 1:
        raise ValueError(f"max_gap must be >= 1, got {max_gap}")
    out = [EMPTY]
    heap: list[tuple[float, tuple, PerturbationVector]] = []
    for i in range(alts.m):
        if alts.symbols[i]:
            v = _vector(((i, 0),), alts)
            heap.append((v.score, v.edits, v))
    heapq.heapify(heap)
    while len(out) < n_probes and heap:
        _, _, delta = heapq.heappop(heap)
        out.append(delta)
        children = [p_shift(delta, alts)]
        children += [p_expand(delta, gap, alts, max_gap) for gap in range(1, max_gap + 1)]
        for child in children:
            if child is not None:
                heapq.heappush(heap, (child.score, child.edits, child))
    return out


def score_lists(hashes, q, hash_string=None, max_offset: int = RP_MAX_OFFSET) -> AlternativeList:
    """Alternative hash values of a (prepared) query with their scores.

    Random projection: buckets ``h +- 1, .., h +- max_offset`` scored by the
    squared distance from ``a . q + b`` to the nearest edge of that bucket.
    Cross-polytope: the other ``2d - 1`` vertices scored by their squared
    distance to ``A q / |A q|``.
    """
    q = np.asarray(q, dtype=np.float64)
    if isinstance(hashes, RandomProjectionHashes):
        w = hashes.w
        f = hashes.projections(q[None, :])[0]
        h = np.floor(f / w) if hash_string is None else np.asarray(hash_string, dtype=np.float64)
        x = f - h * w
        offsets = [s * t for t in range(1, max_offset + 1) for s in (-1, 1)]
        symbols, scores = [], []
        for i in range(hashes.m):
            cand = []
            for off in offsets:
                edge = x[i] + (-off - 1) * w if off < 0 else off * w - x[i]
                cand.append((edge * edge, int(h[i]) + off))
            cand.sort(key=lambda t: t[0])
            symbols.append([s for _, s in cand])
            scores.append([sc for sc, _ in cand])
        return AlternativeList.from_lists(symbols, scores)
    if isinstance(hashes, CrossPolytopeHashes):
        d = hashes.d
        V = hashes.rotations(q)
        own = hashes(q[None, :])[0] if hash_string is None else np.asarray(hash_string)
        symbols, scores = [], []
        for i in range(hashes.m):
            dist = np.concatenate((2.0 - 2.0 * V[i], 2.0 + 2.0 * V[i]))
            order = np.argsort(dist, kind="stable")
            keep = [int(s) + 1 for s in order if s + 1 != own[i]]
            symbols.append(keep)
            scores.append([max(0.0, float(dist[s - 1])) for s in keep])
        return AlternativeList.from_lists(symbols, scores)
    raise TypeError(f"unsupported hash family {type(hashes).__name__}")


def mp_query(
    index: LccsIndex,
    q,
    k: int,
    lambda_per_probe: int,
    n_probes: int,
    max_gap: int = MAX_GAP,
    lam: int | None = None,
) -> QueryResult:
    """Multi-probe c-k-ANN query.

    The unperturbed probe is a ``(lam + k - 1)``-LCCS search (``lam``
    defaults to ``lambda_per_probe``) and fixes the per-shift brackets.
    Every further probe applies one perturbation vector, re-brackets only
    the shifts its edits can reach and adds ``lambda_per_probe`` candidates
    not seen before.  The pool is re-ranked by exact distance.
    """
    if k < 1 or lambda_per_probe < 1:
        raise ValueError("k and lambda_per_probe must be >= 1")
    lam = lambda_per_probe if lam is None else lam
    qp = index.prepare_query(q)
    hq = index.hashes(qp[None, :])[0]
    csa = index.csa
    base = csa.search(hq, lam + k - 1)
    pool: dict[int, int] = {r.string_id: r.match_length for r in base.matches}
    per_probe = [base.ids]
    vectors = [EMPTY]
    truncated = base.truncated
    if n_probes > 1 and len(pool) < index.n:
        alts = score_lists(index.hashes, qp, hq)
        vectors = generate_perturbations(alts, n_probes, max_gap)
        for delta in vectors[1:]:
            if len(pool) >= index.n:
                break
            res = csa.probe(delta.apply(hq, alts), base.state, delta.positions, lambda_per_probe, exclude=pool.keys())
            for r in res.matches:
                pool[r.string_id] = r.match_length
            per_probe.append(res.ids)
        truncated = truncated or len(vectors) < n_probes
    cand = np.fromiter(pool.keys(), dtype=np.int64, count=len(pool))
    lengths = np.fromiter(pool.values(), dtype=np.int64, count=len(pool))
    ids, dist = rank_candidates(index.points, qp, cand, k)
    return QueryResult(
        ids=ids,
        distances=dist,
        n_candidates=len(cand),
        candidate_ids=cand,
        match_lengths=lengths,
        truncated=truncated or len(ids) < k,
        n_probes=len(per_probe),
        probe_candidates=per_probe,
        probe_vectors=vectors[: len(per_probe)],
    )
