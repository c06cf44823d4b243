"""How recall grows with the candidate count lambda, and what multi-probe buys.

Run: python demos/02_recall_vs_candidates.py   (about a minute)
"""

import time

import numpy as np

from lccs_lsh import IndexConfig, build_index, mp_query
from lccs_lsh.bench import gaussian_clusters, recall_at_k

ds = gaussian_clusters(10_000, 32, n_queries=30, clusters=100, spread=4.0, k=10, seed=1)
t0 = time.perf_counter()
index = build_index(ds.points, IndexConfig(m=128, w=4.0, seed=1))
print(f"{index!r} built in {time.perf_counter() - t0:.2f}s, {index.nbytes / 1e6:.1f} MB")


def evaluate(run):
    t0 = time.perf_counter()
    rec = np.mean([recall_at_k(run(q).ids, ds.truth.ids[r], 10) for r, q in enumerate(ds.queries)])
    return rec, 1e3 * (time.perf_counter() - t0) / len(ds.queries)


# single probe: one LCCS search returning lambda + k - 1 candidates
for lam in (10, 100, 1000):
    rec, ms = evaluate(lambda q: index.query(q, 10, lam))
    print(f"lambda {lam:5d}: recall@10 {rec:.3f}  {ms:6.2f} ms/query")

# multi-probe: 10 new candidates per perturbed hash string
for probes in (1, 33, 129):
    rec, ms = evaluate(lambda q: mp_query(index, q, 10, 10, probes))
    print(f"probes {probes:4d}: recall@10 {rec:.3f}  {ms:6.2f} ms/query")
