"""Single-probe LCCS-LSH index.

Each point is hashed by ``m`` i.i.d. LSH functions into a length-``m`` hash
string; a :class:`~lccs_lsh.csa.CircularShiftArray` over those strings
answers a ``(lambda + k - 1)``-LCCS search for the query's hash string and
the candidates are re-ranked by exact distance.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .csa import CircularShiftArray, SearchResult, build_csa, load_csa
from .families import (
    CrossPolytopeFamily,
    FamilyParams,
    RandomProjectionFamily,
    cp_rho,
    family_params,
    make_family,
)

__all__ = [
    "IndexConfig",
    "LccsIndex",
    "QueryResult",
    "build_index",
    "load_index",
    "lambda_theorem3",
    "m_from_alpha",
    "extreme_value_cdf",
    "lccs_length_cdf",
    "extreme_value_median",
    "extreme_value_quantile",
    "exact_distances",
    "rank_candidates",
]

_INDEX_MAGIC = b"LCCS"
_INDEX_VERSION = 1
_KIND_CODES = {"euclidean": 0, "angular": 1}
_HEADER = struct.Struct("<4sIIIIIdQ32s")


# ----------------------------------------------------------------------
# parameter rules
# ----------------------------------------------------------------------


def lambda_theorem3(m: int, n: int, p1: float, p2: float) -> int:
    """Candidate count that finds an R-near point with probability >= 1/4.

    ``m^(1 - 1/rho) * n * (1 - p1)^(-1/rho) * (1 - p2) * (ln 2)^(1/rho) / p2``
    rounded up and clamped to ``[1, n]``.
    """
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be >= 1, got m={m}, n={n}")
    if not 0 < p2 < p1 < 1:
        raise ValueError(f"need 0 < p2 < p1 < 1, got p1={p1}, p2={p2}")
    inv_rho = math.log(1.0 / p2) / math.log(1.0 / p1)
    log_value = (
        (1.0 - inv_rho) * math.log(m)
        + math.log(n)
        - inv_rho * math.log1p(-p1)
        + math.log1p(-p2)
        + inv_rho * math.log(math.log(2.0))
        - math.log(p2)
    )
    if log_value > math.log(n):
        return n
    return min(n, max(1, math.ceil(math.exp(log_value))))


def m_from_alpha(n: int, alpha: float, rho: float, minimum: int = 8) -> int:
    """Hash length ``round(n^(alpha * rho))``, at least ``minimum``."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if not 0 <= alpha <= 1.0 / (1.0 - rho):
        raise ValueError(f"alpha must lie in [0, {1.0 / (1.0 - rho):.4g}], got {alpha}")
    return max(minimum, int(round(n ** (alpha * rho))))


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise ValueError(f"match probability must lie in (0, 1), got {p}")


def _location(m: int, p: float) -> float:
    return math.log(m * (1.0 - p)) / math.log(1.0 / p)


def extreme_value_cdf(x, m: int, p: float):
    """``exp(-p^(x - log_{1/p}(m (1 - p))))``: the limiting LCCS-length law.

    Continuous in ``x``; see :func:`lccs_length_cdf` for the integer-valued
    length itself.
    """
    _check_p(p)
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.exp(-np.power(p, np.asarray(x, dtype=np.float64) - _location(m, p)))


def lccs_length_cdf(x, m: int, p: float):
    """Approximate ``Pr[|LCCS| <= x]`` for integer ``x``.

    The LCCS length behaves as the integer part of the extreme-value
    variable, so ``Pr[|LCCS| <= x] = Pr[V < x + 1]``.
    """
    return extreme_value_cdf(np.floor(np.asarray(x, dtype=np.float64)) + 1.0, m, p)


def extreme_value_median(m: int, p: float) -> float:
    _check_p(p)
    return math.log(math.log(2.0)) / math.log(p) + _location(m, p)


def extreme_value_quantile(level: float, m: int, p: float) -> float:
    """The ``level`` quantile, e.g. ``level = 1 - k/n``."""
    _check_p(p)
    if not 0 < level < 1:
        raise ValueError(f"quantile level must lie in (0, 1), got {level}")
    return math.log(-math.log(level)) / math.log(p) + _location(m, p)


# ----------------------------------------------------------------------
# configuration and results
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class IndexConfig:
    """Build parameters.

    Either give ``m`` directly or give ``alpha`` together with ``R`` and
    ``c``, from which ``m = max(8, round(n^(alpha * rho)))``.
    """

    m: int | None = None
    metric: str = "euclidean"
    w: float | None = None
    seed: int = 0
    alpha: float | None = None
    R: float | None = None
    c: float | None = None
    lambda_default: int | None = None

    def __post_init__(self):
        if self.metric not in _KIND_CODES:
            raise ValueError(f"metric must be one of {sorted(_KIND_CODES)}, got {self.metric!r}")
        if self.m is None and self.alpha is None:
            raise ValueError("give either m or alpha")
        if self.m is not None and self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.alpha is not None and (self.R is None or self.c is None):
            raise ValueError("alpha needs R and c to determine rho")
        if self.metric == "euclidean" and (self.w is None or not self.w > 0):
            raise ValueError("the euclidean metric needs a positive bucket width w")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def family(self, d: int):
        return make_family(self.metric, d, self.w)

    def resolve_m(self, n: int, d: int) -> int:
        if self.m is not None:
            return self.m
        fam = self.family(d)
        if isinstance(fam, CrossPolytopeFamily):
            r = cp_rho(self.c, self.R)
        else:
            r = family_params(fam, self.R, self.c).rho
        return m_from_alpha(n, self.alpha, r)


@dataclass
class QueryResult:
    ids: np.ndarray
    distances: np.ndarray
    n_candidates: int
    candidate_ids: np.ndarray
    match_lengths: np.ndarray
    truncated: bool = False
    n_probes: int = 1
    probe_candidates: list[list[int]] = field(default_factory=list, repr=False)
    probe_vectors: list = field(default_factory=list, repr=False)


def exact_distances(points: np.ndarray, q: np.ndarray, ids) -> np.ndarray:
    diff = points[np.asarray(ids, dtype=np.int64)] - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def rank_candidates(points: np.ndarray, q: np.ndarray, ids, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` candidates nearest to ``q``, ties by smaller id."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        return ids, np.empty(0)
    dist = exact_distances(points, q, ids)
    order = np.lexsort((ids, dist))[:k]
    return ids[order], dist[order]


# ----------------------------------------------------------------------
# the index
# ----------------------------------------------------------------------


def _points_checksum(points: np.ndarray) -> bytes:
    return hashlib.sha256(np.ascontiguousarray(points, dtype=np.float64).tobytes()).digest()


class LccsIndex:
    """Hash strings, their CSA and the (prepared) points used for re-ranking."""

    def __init__(self, config: IndexConfig, family, hashes, points: np.ndarray, csa: CircularShiftArray):
        self.config = config
        self.family = family
        self.hashes = hashes
        self.points = points
        self.csa = csa

    @property
    def n(self) -> int:
        return self.csa.n

    @property
    def m(self) -> int:
        return self.csa.m

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def metric(self) -> str:
        return self.config.metric

    @property
    def hash_strings(self) -> np.ndarray:
        return self.csa.strings

    @property
    def nbytes(self) -> int:
        """Index footprint: hash strings plus CSA arrays (points excluded)."""
        return int(self.csa.strings.nbytes + self.csa.nbytes)

    def __repr__(self) -> str:
        return f"LccsIndex(metric={self.metric!r}, n={self.n}, d={self.d}, m={self.m})"

    def prepare_query(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.d:
            raise ValueError(f"query must be a {self.d}-d vector, got shape {q.shape}")
        return self.family.prepare(q[None, :])[0]

    def hash_query(self, q) -> np.ndarray:
        return self.hashes(self.prepare_query(q)[None, :])[0]

    def lambda_for(self, R: float, c: float) -> int:
        """Candidate count for an ``(R, c)`` near-neighbor guarantee."""
        params = family_params(self.family, R, c, seed=self.config.seed)
        return lambda_theorem3(self.m, self.n, params.p1, params.p2)

    def family_params(self, R: float, c: float) -> FamilyParams:
        return family_params(self.family, R, c, seed=self.config.seed)

    def search(self, q, count: int) -> SearchResult:
        """Raw LCCS search of the query's hash string."""
        return self.csa.search(self.hash_query(q), count)

    def query(self, q, k: int = 1, lam: int | None = None) -> QueryResult:
        """c-k-ANN query: ``(lam + k - 1)``-LCCS search, then exact re-ranking."""
        if lam is None:
            lam = self.config.lambda_default
        if lam is None:
            raise ValueError("no candidate count given and no lambda_default configured")
        if k < 1 or lam < 1:
            raise ValueError(f"k and lambda must be >= 1, got k={k}, lambda={lam}")
        qp = self.prepare_query(q)
        res = self.csa.search(self.hashes(qp[None, :])[0], lam + k - 1)
        cand = np.fromiter((r.string_id for r in res.matches), dtype=np.int64, count=len(res.matches))
        lengths = np.fromiter((r.match_length for r in res.matches), dtype=np.int64, count=len(res.matches))
        ids, dist = rank_candidates(self.points, qp, cand, k)
        return QueryResult(
            ids=ids,
            distances=dist,
            n_candidates=len(cand),
            candidate_ids=cand,
            match_lengths=lengths,
            truncated=res.truncated or len(ids) < k,
            probe_candidates=[cand.tolist()],
        )

    def linear_scan(self, q, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
        qp = self.prepare_query(q)
        return rank_candidates(self.points, qp, np.arange(self.n), k)

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def to_bytes(self) -> bytes:
        cfg = self.config
        header = _HEADER.pack(
            _INDEX_MAGIC,
            _INDEX_VERSION,
            _KIND_CODES[cfg.metric],
            self.d,
            self.n,
            self.m,
            float("nan") if cfg.w is None else float(cfg.w),
            cfg.seed,
            _points_checksum(self.points),
        )
        return header + self.csa.strings.astype("<i8").tobytes() + self.csa.to_bytes()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def build_index(points, config: IndexConfig) -> LccsIndex:
    """Hash every point with ``m`` seeded LSH functions and build the CSA."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"points must be a non-empty (n, d) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    n, d = X.shape
    family = config.family(d)
    X = family.prepare(X)
    m = config.resolve_m(n, d)
    hashes = family.sample(m, config.seed)
    csa = build_csa(hashes(X))
    if config.m is None:
        config = IndexConfig(
            m=m, metric=config.metric, w=config.w, seed=config.seed, alpha=config.alpha,
            R=config.R, c=config.c, lambda_default=config.lambda_default,
        )
    return LccsIndex(config, family, hashes, X, csa)


def load_index(data, points) -> LccsIndex:
    """Restore an index saved by :meth:`LccsIndex.save`.

    Points are not stored in the file; the caller supplies them and a
    checksum guards against a mismatch.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        with open(data, "rb") as fh:
            data = fh.read()
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise ValueError("index file is truncated")
    magic, version, kind, d, n, m, w, seed, checksum = _HEADER.unpack_from(data, 0)
    if magic != _INDEX_MAGIC:
        raise ValueError("not an LCCS index (bad magic)")
    if version != _INDEX_VERSION:
        raise ValueError(f"unsupported index version {version}")
    metric = {v: k for k, v in _KIND_CODES.items()}[kind]
    config = IndexConfig(m=m, metric=metric, w=None if math.isnan(w) else w, seed=seed)
    family = config.family(d)
    X = family.prepare(np.asarray(points, dtype=np.float64))
    if X.shape != (n, d):
        raise ValueError(f"points of shape {X.shape} do not match index (n={n}, d={d})")
    if _points_checksum(X) != checksum:
        raise ValueError("points do not match the checksum stored in the index")
    offset = _HEADER.size
    strings = np.frombuffer(data, "<i8", n * m, offset).reshape(n, m).astype(np.int64)
    csa = load_csa(data[offset + n * m * 8:], strings)
    return LccsIndex(config, family, family.sample(m, seed), X, csa)
