"""LSH families for Euclidean and angular distance.

Two families are supported:

* random projection (p-stable) hashing for Euclidean distance,
  ``h(o) = floor((a . o + b) / w)``;
* cross-polytope hashing for angular distance, which maps a unit vector to
  the closest signed basis vector after a dense Gaussian rotation.

Families are parameter holders; :meth:`sample` draws ``m`` functions from a
seed and returns a hash batch that turns points into ``(n, m)`` int64 hash
strings.  Everything sampled is a deterministic function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "normal_cdf",
    "RandomProjectionFunction",
    "CrossPolytopeFunction",
    "RandomProjectionFamily",
    "CrossPolytopeFamily",
    "RandomProjectionHashes",
    "CrossPolytopeHashes",
    "FamilyParams",
    "rp_hash",
    "rp_collision_prob",
    "cp_hash",
    "cp_rho",
    "rho",
    "estimate_p",
    "family_params",
    "make_family",
    "W_PRESETS",
]

# bucket widths tuned per dataset in the original experiments
W_PRESETS = {"msong": 18.75, "sift": 226.0, "gist": 11294.0, "glove": 4.65, "deep": 0.66}

_UNIT_TOL = 1e-6


def normal_cdf(x: float) -> float:
    """Standard normal CDF through ``erfc`` (accurate in both tails)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _as_point(o, d: int | None = None) -> np.ndarray:
    arr = np.asarray(o, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"dimension mismatch: point has {arr.shape[0]} coords, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    return arr


# ----------------------------------------------------------------------
# random projection
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RandomProjectionFunction:
    a: np.ndarray
    b: float
    w: float

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError(f"bucket width must be positive, got {self.w}")
        if not 0 <= self.b < self.w:
            raise ValueError(f"offset b={self.b} outside [0, w)")

    def __call__(self, o) -> int:
        return rp_hash(self, o)


def rp_hash(f: RandomProjectionFunction, o) -> int:
    """``floor((a . o + b) / w)`` as a Python int."""
    o = _as_point(o, len(f.a))
    return int(math.floor((float(np.dot(f.a, o)) + f.b) / f.w))


def rp_collision_prob(tau: float, w: float) -> float:
    """Collision probability of random projection hashing at distance ``tau``.

    ``1 - 2 Phi(-w/tau) - 2 / (sqrt(2 pi) w/tau) * (1 - exp(-(w/tau)^2 / 2))``
    """
    if not tau > 0 or not w > 0:
        raise ValueError(f"tau and w must be positive, got tau={tau}, w={w}")
    r = w / tau
    return 1.0 - 2.0 * normal_cdf(-r) - 2.0 / (math.sqrt(2.0 * math.pi) * r) * (
        -math.expm1(-r * r / 2.0)
    )


class RandomProjectionHashes:
    """``m`` sampled random projection functions, stored as matrices."""

    kind = "euclidean"

    def __init__(self, A: np.ndarray, b: np.ndarray, w: float):
        self.A = np.asarray(A, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.w = float(w)
        self.m, self.d = self.A.shape

    def __len__(self) -> int:
        return self.m

    def function(self, j: int) -> RandomProjectionFunction:
        return RandomProjectionFunction(self.A[j], float(self.b[j]), self.w)

    def projections(self, X) -> np.ndarray:
        """Shifted projections ``a_j . x + b_j`` for every point and function."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise ValueError(f"dimension mismatch: points have {X.shape[1]} coords, expected {self.d}")
        return X @ self.A.T + self.b

    def __call__(self, X) -> np.ndarray:
        return np.floor(self.projections(X) / self.w).astype(np.int64)


@dataclass(frozen=True)
class RandomProjectionFamily:
    d: int
    w: float

    kind = "euclidean"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.w > 0:
            raise ValueError(f"bucket width must be positive, got {self.w}")

    def sample(self, m: int, seed: int) -> RandomProjectionHashes:
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((m, self.d))
        b = rng.uniform(0.0, self.w, size=m)
        return RandomProjectionHashes(A, b, self.w)

    def collision_probability(self, tau: float, **_) -> float:
        return rp_collision_prob(tau, self.w)

    def prepare(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64)


# ----------------------------------------------------------------------
# cross-polytope
# ----------------------------------------------------------------------


def _polytope_symbols(Y: np.ndarray) -> np.ndarray:
    # +e_i -> i + 1, -e_i -> d + i + 1 (i 0-based), so symbols span 1..2d
    d = Y.shape[-1]
    idx = np.argmax(np.abs(Y), axis=-1)
    val = np.take_along_axis(Y, idx[..., None], axis=-1)[..., 0]
    return np.where(val >= 0, idx + 1, d + idx + 1).astype(np.int64)


def vertex_of_symbol(symbol: int, d: int) -> np.ndarray:
    """Signed basis vector encoded by a cross-polytope symbol."""
    if not 1 <= symbol <= 2 * d:
        raise ValueError(f"symbol {symbol} outside 1..{2 * d}")
    u = np.zeros(d)
    if symbol <= d:
        u[symbol - 1] = 1.0
    else:
        u[symbol - d - 1] = -1.0
    return u


@dataclass(frozen=True)
class CrossPolytopeFunction:
    A: np.ndarray

    def __call__(self, o) -> int:
        return cp_hash(self, o)


def _check_unit(o: np.ndarray) -> None:
    norm = float(np.linalg.norm(o))
    if norm == 0.0:
        raise ValueError("zero vector cannot be hashed by cross-polytope LSH")
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"cross-polytope input must be unit length, got norm {norm:.8g}")


def cp_hash(f: CrossPolytopeFunction, o) -> int:
    """Closest signed basis vector to ``A o / |A o|``, encoded in ``1..2d``."""
    A = np.asarray(f.A, dtype=np.float64)
    o = _as_point(o, A.shape[1])
    _check_unit(o)
    y = A @ o
    if not np.any(y):
        raise ValueError("rotated point is zero")
    return int(_polytope_symbols(y / np.linalg.norm(y)))


def cp_rho(c: float, R: float) -> float:
    """Asymptotic cross-polytope quality ``(1/c^2) (4 - c^2 R^2) / (4 - R^2)``."""
    if not c > 1:
        raise ValueError(f"approximation ratio must exceed 1, got {c}")
    if not 0 < R < 2:
        raise ValueError(f"radius must lie in (0, 2), got {R}")
    if c * R >= 2:
        raise ValueError(f"cR = {c * R} must be < 2")
    return (4.0 - c * c * R * R) / (c * c * (4.0 - R * R))


class CrossPolytopeHashes:
    """``m`` sampled cross-polytope functions: a stack of ``d x d`` Gaussian matrices."""

    kind = "angular"

    def __init__(self, A: np.ndarray):
        self.A = np.asarray(A, dtype=np.float64)
        self.m, self.d, _ = self.A.shape

    def __len__(self) -> int:
        return self.m

    def function(self, j: int) -> CrossPolytopeFunction:
        return CrossPolytopeFunction(self.A[j])

    def rotations(self, x) -> np.ndarray:
        """``(m, d)`` normalized rotations ``A_j x / |A_j x|`` of one point."""
        x = _as_point(x, self.d)
        Y = self.A @ x
        return Y / np.linalg.norm(Y, axis=1, keepdims=True)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise ValueError(f"dimension mismatch: points have {X.shape[1]} coords, expected {self.d}")
        if X.shape[0] * self.m * self.d <= 1 << 22:
            return _polytope_symbols(np.einsum("kij,nj->nki", self.A, X))
        out = np.empty((X.shape[0], self.m), dtype=np.int64)
        for j in range(self.m):
            out[:, j] = _polytope_symbols(X @ self.A[j].T)
        return out


@dataclass(frozen=True)
class CrossPolytopeFamily:
    d: int

    kind = "angular"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")

    def sample(self, m: int, seed: int) -> CrossPolytopeHashes:
        rng = np.random.default_rng(seed)
        return CrossPolytopeHashes(rng.standard_normal((m, self.d, self.d)))

    def collision_probability(self, tau: float, trials: int = 20000, seed: int = 0) -> float:
        # no usable closed form at finite d, so estimate
        return estimate_p(self, tau, trials, seed=seed)

    def prepare(self, X) -> np.ndarray:
        """L2-normalize rows; zero rows are rejected."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("zero vectors have no direction under angular distance")
        return X / norms


def make_family(kind: str, d: int, w: float | None = None):
    if kind in ("euclidean", "rp", "random_projection"):
        if w is None:
            raise ValueError("the euclidean family needs a bucket width w")
        return RandomProjectionFamily(d, float(w))
    if kind in ("angular", "cp", "cross_polytope"):
        return CrossPolytopeFamily(d)
    raise ValueError(f"unknown family kind {kind!r}")


# ----------------------------------------------------------------------
# quality parameters
# ----------------------------------------------------------------------


def rho(p1: float, p2: float) -> float:
    """``ln(1/p1) / ln(1/p2)``."""
    if not 0 < p2 < p1 < 1:
        raise ValueError(f"need 0 < p2 < p1 < 1, got p1={p1}, p2={p2}")
    return math.log(1.0 / p1) / math.log(1.0 / p2)


@dataclass(frozen=True)
class FamilyParams:
    p1: float
    p2: float
    rho: float
    c: float
    R: float


def family_params(family, R: float, c: float, trials: int = 20000, seed: int = 0) -> FamilyParams:
    """Collision probabilities at ``R`` and ``cR`` and the resulting rho.

    Random projection uses the closed form.  Cross-polytope estimates p1, p2
    by Monte Carlo but reports the asymptotic rho of :func:`cp_rho`.
    """
    if not c > 1 or not R > 0:
        raise ValueError(f"need c > 1 and R > 0, got c={c}, R={R}")
    if isinstance(family, CrossPolytopeFamily):
        p1 = estimate_p(family, R, trials, seed=seed)
        p2 = estimate_p(family, c * R, trials, seed=seed + 1)
        return FamilyParams(p1, p2, cp_rho(c, R), c, R)
    p1 = family.collision_probability(R)
    p2 = family.collision_probability(c * R)
    return FamilyParams(p1, p2, rho(p1, p2), c, R)


def _pair_at_distance(family, tau: float) -> tuple[np.ndarray, np.ndarray]:
    d = family.d
    if isinstance(family, CrossPolytopeFamily):
        if not 0 <= tau <= 2:
            raise ValueError(f"sphere distance must lie in [0, 2], got {tau}")
        if d < 2 and 0 < tau < 2:
            raise ValueError("d = 1 admits only distances 0 and 2 on the sphere")
        theta = 2.0 * math.asin(tau / 2.0)
        o = np.zeros(d)
        o[0] = 1.0
        q = np.zeros(d)
        q[0] = math.cos(theta)
        if d > 1:
            q[1] = math.sin(theta)
        return o, q
    if tau < 0:
        raise ValueError(f"distance must be non-negative, got {tau}")
    o = np.zeros(d)
    q = np.zeros(d)
    q[0] = tau
    return o, q


def estimate_p(family, tau: float, trials: int, seed: int = 0, chunk: int = 4096) -> float:
    """Monte-Carlo collision frequency of a point pair at distance ``tau``.

    ``trials`` independent functions are drawn; the standard error is at
    most ``sqrt(0.25 / trials)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    o, q = _pair_at_distance(family, tau)
    pair = np.stack([o, q])
    if isinstance(family, CrossPolytopeFamily):
        chunk = max(1, min(chunk, (1 << 22) // (family.d * family.d)))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        sub = family.sample(size, int(rng.integers(2**63)))
        H = sub(pair)
        hits += int(np.count_nonzero(H[0] == H[1]))
        done += size
    return hits / trials
