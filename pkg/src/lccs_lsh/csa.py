"""Circular Shift Array (CSA) for k-LCCS search.

A database of ``n`` equal-length symbol strings is indexed by ``m`` sorted
orderings, one per circular shift, plus next-links that map each string's
position in one ordering to its position in the ordering of the following
shift.  Queries bracket the shifted query in every ordering (narrowing each
binary search with the previous bracket) and then run a 2m-way merge that
emits strings in non-increasing order of their longest circular co-substring
(LCCS) with the query.

All ids, shifts and positions are 0-based.
"""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MatchResult",
    "ProbeState",
    "SearchResult",
    "CircularShiftArray",
    "shift",
    "lcp_at",
    "lccs_bruteforce",
    "build_csa",
    "bounded_binary_search",
    "load_csa",
]

_CSA_MAGIC = b"CSA1"


def shift(T: Sequence[int], i: int) -> np.ndarray:
    """Circular string of ``T`` starting at offset ``i``: ``T[i:] + T[:i]``."""
    arr = np.asarray(T)
    m = arr.shape[0]
    if not 0 <= i < m:
        raise ValueError(f"shift offset {i} out of range for length {m}")
    return np.concatenate((arr[i:], arr[:i]))


def lcp_at(T: Sequence[int], Q: Sequence[int], i: int) -> int:
    """Length of the common prefix of ``shift(T, i)`` and ``shift(Q, i)``.

    Both strings are shifted by the same offset, so this is the run of
    position-wise matches starting at absolute index ``i``, capped at ``m``.
    """
    m = len(T)
    length = 0
    j = i
    while length < m and T[j] == Q[j]:
        length += 1
        j += 1
        if j == m:
            j = 0
    return length


def _compare_at(row: Sequence[int], q: Sequence[int], i: int, m: int) -> tuple[int, int]:
    # (lcp, sign) of shift(row, i) against shift(q, i); sign is -1, 0 or +1
    length = 0
    j = i
    while length < m:
        a = row[j]
        b = q[j]
        if a != b:
            return length, (-1 if a < b else 1)
        length += 1
        j += 1
        if j == m:
            j = 0
    return m, 0


def _lcp(row: Sequence[int], q: Sequence[int], i: int, m: int) -> int:
    length = 0
    j = i
    while length < m and row[j] == q[j]:
        length += 1
        j += 1
        if j == m:
            j = 0
    return length


def lccs_bruteforce(T: Sequence[int], Q: Sequence[int]) -> tuple[int, int]:
    """Exhaustive LCCS oracle: max over shifts of the shifted LCP.

    Returns ``(length, start_shift)`` where ``start_shift`` is the smallest
    shift achieving the maximum.
    """
    T = list(T)
    Q = list(Q)
    if len(T) != len(Q):
        raise ValueError(f"length mismatch: {len(T)} != {len(Q)}")
    if not T:
        raise ValueError("strings must be non-empty")
    m = len(T)
    best, best_i = -1, 0
    for i in range(m):
        length = 0
        while length < m and T[(i + length) % m] == Q[(i + length) % m]:
            length += 1
        if length > best:
            best, best_i = length, i
    return best, best_i


@dataclass(frozen=True)
class MatchResult:
    string_id: int
    match_length: int
    shift_position: int


@dataclass
class ProbeState:
    """Per-shift brackets of a query: ``pos_*`` index into ``I[i]``."""

    pos_lower: list[int]
    pos_upper: list[int]
    len_lower: list[int]
    len_upper: list[int]

    def copy(self) -> "ProbeState":
        return ProbeState(
            list(self.pos_lower), list(self.pos_upper), list(self.len_lower), list(self.len_upper)
        )

    def as_arrays(self) -> np.ndarray:
        return np.array([self.pos_lower, self.pos_upper, self.len_lower, self.len_upper])


@dataclass
class SearchResult:
    matches: list[MatchResult]
    state: ProbeState
    truncated: bool = False
    # lengths in the order entries left the priority queue, emitted or not
    popped_lengths: list[int] = field(default_factory=list, repr=False)

    @property
    def ids(self) -> list[int]:
        return [r.string_id for r in self.matches]

    @property
    def lengths(self) -> list[int]:
        return [r.match_length for r in self.matches]


def _dense_rank_rows(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # per-row dense ranks of an (m, n) key array; also the distinct count per row
    order = np.argsort(keys, axis=1)
    ordered = np.take_along_axis(keys, order, axis=1)
    new_group = np.empty(ordered.shape, dtype=np.int64)
    new_group[:, 0] = 0
    np.not_equal(ordered[:, 1:], ordered[:, :-1], out=new_group[:, 1:], casting="unsafe")
    dense = np.cumsum(new_group, axis=1)
    ranks = np.empty_like(dense)
    np.put_along_axis(ranks, order, dense, axis=1)
    return ranks, dense[:, -1] + 1


def _circular_ranks(strings: np.ndarray) -> np.ndarray:
    """Rank of every circular shift among the ``n`` strings at the same shift.

    Returns an ``(m, n)`` array.  Prefix doubling: ranks of length-2h
    circular substrings are ranks of (rank_h at i, rank_h at i+h).  Once
    h >= m the ranks order full circular strings, since the periodic
    extensions of two equal length-m rotations never diverge.
    """
    n, m = strings.shape
    ranks, distinct = _dense_rank_rows(np.ascontiguousarray(strings.T))
    h = 1
    while h < m:
        keys = ranks * n + np.roll(ranks, -h, axis=0)
        ranks, new_distinct = _dense_rank_rows(keys)
        h *= 2
        if np.array_equal(new_distinct, distinct):
            # classes stopped splitting, so longer prefixes cannot split them either
            break
        distinct = new_distinct
    return ranks


class CircularShiftArray:
    """Sorted indices ``I`` and next links ``N`` over a string database.

    ``sorted_indices[i]`` orders the string ids by ``shift(T, i)``, ties by
    ascending id; ``next_links[i][j]`` is the position of
    ``sorted_indices[i][j]`` within ``sorted_indices[(i + 1) % m]``.
    The structure is immutable once built; searches keep their own scratch
    state and may run concurrently.
    """

    def __init__(self, strings: np.ndarray, sorted_indices: np.ndarray, next_links: np.ndarray):
        self.strings = strings
        self.sorted_indices = sorted_indices
        self.next_links = next_links
        self.n, self.m = strings.shape

    # python-level copies, made on first search: list indexing is much cheaper
    # than numpy scalar access in the query loop
    @cached_property
    def _rows(self) -> list[list[int]]:
        return self.strings.tolist()

    @cached_property
    def _I(self) -> list[list[int]]:
        return self.sorted_indices.tolist()

    @cached_property
    def _N(self) -> list[list[int]]:
        return self.next_links.tolist()

    def __repr__(self) -> str:
        return f"CircularShiftArray(n={self.n}, m={self.m})"

    @property
    def nbytes(self) -> int:
        return int(self.sorted_indices.nbytes + self.next_links.nbytes)

    # ------------------------------------------------------------------
    # bracketing
    # ------------------------------------------------------------------

    def _bracket(self, q: Sequence[int], i: int, lo: int, hi: int) -> tuple[int, int, int, int]:
        rows = self._rows
        order = self._I[i]
        m = self.m
        a, b = lo, hi + 1
        while a < b:
            mid = (a + b) >> 1
            if _compare_at(rows[order[mid]], q, i, m)[1] <= 0:
                a = mid + 1
            else:
                b = mid
        if a == lo:
            pos_l = pos_u = lo
        elif a > hi:
            pos_l = pos_u = hi
        else:
            pos_l, pos_u = a - 1, a
        len_l = _compare_at(rows[order[pos_l]], q, i, m)[0]
        len_u = len_l if pos_u == pos_l else _compare_at(rows[order[pos_u]], q, i, m)[0]
        return pos_l, pos_u, len_l, len_u

    def _narrowed_range(self, q: Sequence[int], state: ProbeState, i: int) -> tuple[int, int]:
        """Search range on ``I[i]`` derived from the bracket at shift ``i - 1``."""
        prev = i - 1
        if i == 0 or state.len_lower[prev] < 1 or state.len_upper[prev] < 1:
            return 0, self.n - 1
        # link narrowing needs a genuine bracket T_l <= Q < T_u; a clamped
        # bracket (query outside the database range) falls back to a full search
        pos_l, pos_u = state.pos_lower[prev], state.pos_upper[prev]
        order = self._I[prev]
        if _compare_at(self._rows[order[pos_l]], q, prev, self.m)[1] > 0:
            return 0, self.n - 1
        if _compare_at(self._rows[order[pos_u]], q, prev, self.m)[1] <= 0:
            return 0, self.n - 1
        links = self._N[prev]
        return links[pos_l], links[pos_u]

    def _fill(self, q: Sequence[int], state: ProbeState, positions: Iterable[int]) -> None:
        for i in positions:
            lo, hi = self._narrowed_range(q, state, i)
            (
                state.pos_lower[i],
                state.pos_upper[i],
                state.len_lower[i],
                state.len_upper[i],
            ) = self._bracket(q, i, lo, hi)

    def brackets(self, query: Sequence[int]) -> ProbeState:
        """Bracket ``query`` in every sorted index (lines 2 and 5-11 of the query)."""
        q = self._check_query(query)
        m = self.m
        state = ProbeState([0] * m, [0] * m, [0] * m, [0] * m)
        self._fill(q, state, range(m))
        return state

    # ------------------------------------------------------------------
    # merge
    # ------------------------------------------------------------------

    def _merge(
        self,
        q: Sequence[int],
        state: ProbeState,
        k: int,
        exclude,
        record: bool = False,
    ) -> tuple[list[MatchResult], list[int]]:
        rows = self._rows
        order = self._I
        m, n = self.m, self.n
        excluded = exclude if exclude is not None else ()
        # heap key: (-len, shift, string id, direction, position)
        heap = []
        for i in range(m):
            pl, pu = state.pos_lower[i], state.pos_upper[i]
            heap.append((-state.len_lower[i], i, order[i][pl], -1, pl))
            heap.append((-state.len_upper[i], i, order[i][pu], 1, pu))
        heapq.heapify(heap)

        seen: set[int] = set()
        matches: list[MatchResult] = []
        popped: list[int] = []
        while heap and len(matches) < k:
            neg_len, i, sid, step, pos = heap[0]
            if record:
                popped.append(-neg_len)
            if sid not in seen:
                seen.add(sid)
                if sid not in excluded:
                    matches.append(MatchResult(sid, -neg_len, i))
            nxt = pos + step
            if 0 <= nxt < n:
                nid = order[i][nxt]
                heapq.heapreplace(heap, (-_lcp(rows[nid], q, i, m), i, nid, step, nxt))
            else:
                heapq.heappop(heap)
        if len(matches) < k:
            # every list exhausted: pad with unseen ids at length 0
            for sid in range(n):
                if len(matches) >= k:
                    break
                if sid not in seen and sid not in excluded:
                    seen.add(sid)
                    matches.append(MatchResult(sid, 0, 0))
        return matches, popped

    # ------------------------------------------------------------------
    # public search API
    # ------------------------------------------------------------------

    def _check_query(self, query: Sequence[int]) -> list[int]:
        q = [int(x) for x in query]
        if len(q) != self.m:
            raise ValueError(f"query length {len(q)} != string length {self.m}")
        return q

    def _check_k(self, k: int, exclude) -> tuple[int, bool]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        available = self.n - (len(exclude) if exclude else 0)
        if k > available:
            return max(available, 0), True
        return k, False

    def search(
        self,
        query: Sequence[int],
        k: int,
        exclude=None,
        record: bool = False,
    ) -> SearchResult:
        """k-LCCS search: ``k`` distinct ids by non-increasing LCCS with ``query``.

        Ties are broken by smaller shift, then smaller id.  ``exclude`` ids
        are consumed from the merge but never emitted.  If fewer than ``k``
        ids are available the result holds all of them and is flagged
        ``truncated``.  ``record`` keeps the length of every popped entry.
        """
        q = self._check_query(query)
        k, truncated = self._check_k(k, exclude)
        state = ProbeState([0] * self.m, [0] * self.m, [0] * self.m, [0] * self.m)
        self._fill(q, state, range(self.m))
        matches, popped = self._merge(q, state, k, exclude, record)
        return SearchResult(matches, state, truncated, popped)

    def affected_positions(self, state: ProbeState, edits: Iterable[int]) -> list[int]:
        """Shifts whose bracket can change when the query is edited at ``edits``.

        Shift ``i`` compares query symbols ``i, i+1, ..`` (circularly) up to
        and including the first mismatch at offset ``max(len_l, len_u)``; an
        edit outside that window leaves both the bracket and its LCPs intact.
        """
        m = self.m
        edits = sorted(set(edits))
        out = []
        for i in range(m):
            reach = max(state.len_lower[i], state.len_upper[i])
            if any((e - i) % m <= reach for e in edits):
                out.append(i)
        return out

    def probe(
        self,
        query: Sequence[int],
        base_state: ProbeState,
        edits: Iterable[int],
        k: int,
        exclude=None,
        record: bool = False,
    ) -> SearchResult:
        """k-LCCS search of an edited query reusing the brackets of the original.

        ``base_state`` must come from :meth:`search` (or :meth:`brackets`) on
        the unedited query and ``edits`` must list every changed position.
        Only :meth:`affected_positions` are re-bracketed; the merge then runs
        exactly as in :meth:`search`, so the result is identical to a
        from-scratch search of ``query``.
        """
        q = self._check_query(query)
        k, truncated = self._check_k(k, exclude)
        state = base_state.copy()
        self._fill(q, state, self.affected_positions(base_state, edits))
        matches, popped = self._merge(q, state, k, exclude, record)
        return SearchResult(matches, state, truncated, popped)

    # ------------------------------------------------------------------
    # validation and persistence
    # ------------------------------------------------------------------

    def validate(self, check_order: bool = True) -> None:
        """Raise ``ValueError`` unless the permutation, next-link and order invariants hold."""
        _validate_links(self.sorted_indices, self.next_links)
        if not check_order:
            return
        for i in range(self.m):
            rows = self._rows
            order = self._I[i]
            for j in range(self.n - 1):
                a, b = order[j], order[j + 1]
                sign = _compare_at(rows[a], rows[b], i, self.m)[1]
                if sign > 0 or (sign == 0 and a > b):
                    raise ValueError(f"I[{i}] out of order at position {j}")

    def to_bytes(self) -> bytes:
        header = _CSA_MAGIC + struct.pack("<II", self.m, self.n)
        return (
            header
            + self.sorted_indices.astype("<u4").tobytes()
            + self.next_links.astype("<u4").tobytes()
        )

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def _validate_links(sorted_indices: np.ndarray, next_links: np.ndarray) -> None:
    m, n = sorted_indices.shape
    if next_links.shape != (m, n):
        raise ValueError("sorted indices and next links differ in shape")
    expected = np.arange(n)
    positions = np.empty_like(sorted_indices)
    for i in range(m):
        if not np.array_equal(np.sort(sorted_indices[i]), expected):
            raise ValueError(f"I[{i}] is not a permutation of 0..{n - 1}")
        positions[i, sorted_indices[i]] = expected
    for i in range(m):
        want = positions[(i + 1) % m, sorted_indices[i]]
        if not np.array_equal(next_links[i], want):
            raise ValueError(f"N[{i}] does not link into I[{(i + 1) % m}]")


def _as_string_matrix(strings) -> np.ndarray:
    if isinstance(strings, np.ndarray):
        arr = strings
    else:
        rows = [list(s) for s in strings]
        if not rows:
            raise ValueError("string database is empty")
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"strings have non-uniform lengths {sorted(lengths)}")
        arr = np.asarray(rows)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty (n, m) string matrix, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.int64)


def build_csa(strings) -> CircularShiftArray:
    """Build the CSA over ``n`` strings of common length ``m``.

    ``strings`` is an ``(n, m)`` integer array or a sequence of equal-length
    sequences.  Each ordering is a stable sort (ties by ascending id).
    """
    arr = _as_string_matrix(strings)
    n, m = arr.shape
    ranks = _circular_ranks(arr)
    sorted_indices = np.argsort(ranks, axis=1, kind="stable").astype(np.int32)
    positions = np.empty_like(sorted_indices)
    rows = np.arange(n, dtype=np.int32)
    for i in range(m):
        positions[i, sorted_indices[i]] = rows
    next_links = np.empty_like(sorted_indices)
    for i in range(m):
        next_links[i] = positions[(i + 1) % m, sorted_indices[i]]
    return CircularShiftArray(arr, np.ascontiguousarray(sorted_indices), next_links)


def bounded_binary_search(
    order: Sequence[int],
    strings,
    query: Sequence[int],
    offset: int,
    lo: int,
    hi: int,
) -> tuple[int, int, int, int]:
    """Bracket ``shift(query, offset)`` within ``order[lo..hi]`` (inclusive).

    Returns ``(pos_l, pos_u, len_l, len_u)``: the greatest position whose
    string is <= the query (``lo`` if none) and the least position whose
    string is > the query (``hi`` if none), with their LCP lengths.  Strings
    are compared through lazy circular indexing.
    """
    if not 0 <= lo <= hi < len(order):
        raise ValueError(f"empty or out-of-range search range [{lo}, {hi}]")
    m = len(query)
    q = list(query)
    a, b = lo, hi + 1
    while a < b:
        mid = (a + b) >> 1
        if _compare_at(strings[order[mid]], q, offset, m)[1] <= 0:
            a = mid + 1
        else:
            b = mid
    if a == lo:
        pos_l = pos_u = lo
    elif a > hi:
        pos_l = pos_u = hi
    else:
        pos_l, pos_u = a - 1, a
    return (
        pos_l,
        pos_u,
        _compare_at(strings[order[pos_l]], q, offset, m)[0],
        _compare_at(strings[order[pos_u]], q, offset, m)[0],
    )


def load_csa(data, strings) -> CircularShiftArray:
    """Restore a CSA from :meth:`CircularShiftArray.to_bytes` output (or a path).

    The permutation and next-link invariants are re-checked; ``strings`` must
    be the database the snapshot was built over.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        with open(data, "rb") as fh:
            data = fh.read()
    data = bytes(data)
    if data[:4] != _CSA_MAGIC:
        raise ValueError("not a CSA snapshot (bad magic)")
    m, n = struct.unpack_from("<II", data, 4)
    size = m * n * 4
    if len(data) != 12 + 2 * size:
        raise ValueError(f"CSA snapshot size {len(data)} does not match m={m}, n={n}")
    sorted_indices = np.frombuffer(data, "<u4", m * n, 12).reshape(m, n).astype(np.int32)
    next_links = np.frombuffer(data, "<u4", m * n, 12 + size).reshape(m, n).astype(np.int32)
    arr = _as_string_matrix(strings)
    if arr.shape != (n, m):
        raise ValueError(f"strings of shape {arr.shape} do not match snapshot (n={n}, m={m})")
    _validate_links(sorted_indices, next_links)
    return CircularShiftArray(arr, sorted_indices, next_links)
