"""Parameter sweeps producing one :class:`RunRecord` per grid cell.

A grid is a JSON object, for example::

    {
      "dataset": {"kind": "gaussian", "n": 10000, "d": 32, "queries": 100, "seed": 1},
      "metric": "euclidean",
      "k": 10,
      "m": [64, 128],
      "w": [4.0],
      "seed": [0],
      "lambda": [10, 100, 1000],
      "probes": [1, "m+1", "2m+1"],
      "max_gap": 2,
      "repetitions": 5,
      "linear_scan": true
    }

``dataset`` may instead be ``{"kind": "fvecs", "path": ..., "queries": 100}``.
Probe counts may be written in terms of ``m``.  For multi-probe cells
``lambda`` is the per-probe candidate budget.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
import statistics
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..index import IndexConfig, build_index, rank_candidates
from ..multiprobe import MAX_GAP, mp_query
from .datasets import Dataset, from_fvecs, gaussian_clusters
from .metrics import overall_ratio, recall_at_k

__all__ = [
    "CSV_COLUMNS",
    "RunRecord",
    "parse_probes",
    "load_grid",
    "dataset_from_grid",
    "sweep",
    "linear_scan_record",
    "write_csv",
    "read_csv",
    "best_by_recall_bin",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("method", "m", "w", "lambda", "probes", "k", "recall", "ratio", "qtime_ms", "build_s", "index_bytes")

_PROBE_EXPR = re.compile(r"^\s*(\d*)\s*\*?\s*m\s*(?:([+-])\s*(\d+))?\s*$")


@dataclass
class RunRecord:
    method: str
    m: int
    w: float
    lam: int
    probes: int
    k: int
    recall: float
    ratio: float
    qtime_ms: float
    build_s: float
    index_bytes: int
    qtime_median_ms: float = math.nan
    ratio_flagged: bool = False
    n_candidates: float = math.nan
    error: str | None = None

    def sort_key(self):
        w = -1.0 if math.isnan(self.w) else self.w
        return (self.method, self.m, w, self.lam, self.probes, self.k)

    def row(self) -> list:
        return [self.method, self.m, self.w, self.lam, self.probes, self.k, self.recall,
                self.ratio, self.qtime_ms, self.build_s, self.index_bytes]


def parse_probes(spec, m: int) -> int:
    """Probe count from an int or an expression such as ``"2m+1"``."""
    if isinstance(spec, (int, np.integer)):
        value = int(spec)
    else:
        text = str(spec)
        if text.strip().isdigit():
            value = int(text)
        else:
            hit = _PROBE_EXPR.match(text)
            if hit is None:
                raise ValueError(f"cannot parse probe count {spec!r}")
            coef = int(hit.group(1) or 1)
            off = int(hit.group(3) or 0) * (-1 if hit.group(2) == "-" else 1)
            value = coef * m + off
    if value < 1:
        raise ValueError(f"probe count {spec!r} evaluates to {value} < 1")
    return value


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def load_grid(path) -> dict:
    with open(path) as fh:
        grid = json.load(fh)
    if not isinstance(grid, dict):
        raise ValueError("grid file must hold a JSON object")
    return grid


def dataset_from_grid(grid: dict) -> Dataset:
    spec = dict(grid.get("dataset") or {"kind": "gaussian"})
    kind = spec.pop("kind", "gaussian")
    k = int(grid.get("k", 10))
    metric = grid.get("metric", "euclidean")
    if kind == "gaussian":
        return gaussian_clusters(
            n=int(spec.get("n", 10000)), d=int(spec.get("d", 32)), n_queries=int(spec.get("queries", 100)),
            clusters=int(spec.get("clusters", 100)), spread=float(spec.get("spread", 2.0)),
            noise=float(spec.get("noise", 1.0)), k=k, seed=int(spec.get("seed", 0)), metric=metric,
        )
    if kind == "fvecs":
        return from_fvecs(spec["path"], n_queries=int(spec.get("queries", 100)), k=k,
                          seed=int(spec.get("seed", 0)), metric=metric, limit=spec.get("limit"))
    raise ValueError(f"unknown dataset kind {kind!r}")


def _score(ds: Dataset, results, k: int) -> tuple[float, float, bool]:
    recalls, ratios, flagged = [], [], False
    for r, (ids, dist) in enumerate(results):
        recalls.append(recall_at_k(ids, ds.truth.ids[r, :k], k))
        ratio, flag = overall_ratio(dist, ds.truth.distances[r, :k], k)
        ratios.append(ratio)
        flagged = flagged or flag
    return float(np.mean(recalls)), float(np.nanmean(ratios)), flagged


def _timed(run, queries, repetitions: int):
    """Run every query ``repetitions`` times; per-query ms (mean, median)."""
    per_rep = []
    out = None
    for _ in range(repetitions):
        times, results = [], []
        for q in queries:
            t0 = time.perf_counter()
            res = run(q)
            times.append(time.perf_counter() - t0)
            results.append(res)
        per_rep.append(times)
        out = results
    # each query's median time across repetitions
    per_query = np.median(np.asarray(per_rep), axis=0) * 1e3
    return out, float(per_query.mean()), float(np.median(per_query))


def linear_scan_record(ds: Dataset, k: int, repetitions: int = 5) -> RunRecord:
    """Exhaustive baseline on the same data; recall and ratio are exactly 1."""
    X = ds.points
    if ds.metric == "angular":
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
    all_ids = np.arange(X.shape[0])

    def run(q):
        q = np.asarray(q, dtype=np.float64)
        if ds.metric == "angular":
            q = q / np.linalg.norm(q)
        return rank_candidates(X, q, all_ids, k)

    results, mean_ms, median_ms = _timed(run, ds.queries, repetitions)
    recall, ratio, flagged = _score(ds, results, k)
    return RunRecord("linear", 0, math.nan, ds.n, 1, k, recall, ratio, mean_ms, 0.0, 0,
                     qtime_median_ms=median_ms, ratio_flagged=flagged, n_candidates=float(ds.n))


def _failed(method, m, w, lam, probes, k, err) -> RunRecord:
    log.warning("cell %s m=%s w=%s lambda=%s probes=%s failed: %s", method, m, w, lam, probes, err)
    return RunRecord(method, m, w, lam, probes, k, math.nan, math.nan, math.nan, math.nan, 0, error=str(err))


def sweep(ds: Dataset, grid: dict) -> list[RunRecord]:
    """Every (m, w, seed) index crossed with every (lambda, probes) query setting."""
    k = int(grid.get("k", 10))
    if k > ds.truth.k:
        raise ValueError(f"k={k} exceeds the ground truth depth {ds.truth.k}")
    reps = int(grid.get("repetitions", 5))
    max_gap = int(grid.get("max_gap", MAX_GAP))
    ms, ws, seeds = _as_list(grid.get("m", [64])), _as_list(grid.get("w", [None])), _as_list(grid.get("seed", [0]))
    lams, probe_specs = _as_list(grid.get("lambda", [100])), _as_list(grid.get("probes", [1]))
    if not (ms and ws and seeds and lams and probe_specs):
        raise ValueError("grid is empty")
    records: list[RunRecord] = []
    if grid.get("linear_scan", False):
        records.append(linear_scan_record(ds, k, reps))
    for m, w, seed in product(ms, ws, seeds):
        wf = math.nan if w is None else float(w)
        try:
            t0 = time.perf_counter()
            index = build_index(ds.points, IndexConfig(m=int(m), metric=ds.metric, w=w, seed=int(seed)))
            build_s = time.perf_counter() - t0
        except Exception as err:  # recorded, sweep continues
            records.extend(_failed("lccs", int(m), wf, int(lam), 0, k, err) for lam in lams)
            continue
        for lam, pspec in product(lams, probe_specs):
            lam = int(lam)
            try:
                probes = parse_probes(pspec, index.m)
                if probes == 1:
                    method = "lccs"
                    run = lambda q: (lambda r: (r.ids, r.distances, r.n_candidates))(index.query(q, k, lam))
                else:
                    method = "mp-lccs"
                    run = lambda q: (lambda r: (r.ids, r.distances, r.n_candidates))(
                        mp_query(index, q, k, lam, probes, max_gap))
                results, mean_ms, median_ms = _timed(run, ds.queries, reps)
                recall, ratio, flagged = _score(ds, [(i, d) for i, d, _ in results], k)
                records.append(RunRecord(
                    method, index.m, wf, lam, probes, k, recall, ratio, mean_ms, build_s, index.nbytes,
                    qtime_median_ms=median_ms, ratio_flagged=flagged,
                    n_candidates=float(np.mean([c for _, _, c in results])),
                ))
            except Exception as err:  # recorded, sweep continues
                bad = pspec if isinstance(pspec, int) else 0
                records.append(_failed("lccs" if pspec == 1 else "mp-lccs", m, wf, lam, bad, k, err))
    records.sort(key=RunRecord.sort_key)
    return records


def write_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(r.row())


def read_csv(path) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for row in reader:
            probes = row["probes"]
            out.append(RunRecord(
                row["method"], int(row["m"]), float(row["w"]), int(row["lambda"]),
                int(probes) if probes.isdigit() else 0, int(row["k"]),
                float(row["recall"]), float(row["ratio"]), float(row["qtime_ms"]),
                float(row["build_s"]), int(row["index_bytes"]),
            ))
    return out


def best_by_recall_bin(records, width: float = 0.05) -> list[RunRecord]:
    """Per method and recall bin ``[j*width, (j+1)*width)``, the fastest record.

    Recall 1.0 falls in its own top bin.  Failed records are ignored.
    """
    best: dict[tuple[str, int], RunRecord] = {}
    for r in records:
        if r.error is not None or math.isnan(r.recall) or math.isnan(r.qtime_ms):
            continue
        key = (r.method, int(math.floor(r.recall / width + 1e-9)))
        if key not in best or r.qtime_ms < best[key].qtime_ms:
            best[key] = r
    return [best[key] for key in sorted(best)]
