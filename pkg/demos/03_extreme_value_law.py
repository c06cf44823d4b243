"""The length of the longest circular co-substring follows an extreme-value law.

With per-position match probability p, the LCCS length of two length-m
strings is close to log_{1/p}(m (1-p)) plus a Gumbel-type fluctuation.
Run: python demos/03_extreme_value_law.py
"""

import numpy as np

from lccs_lsh.index import extreme_value_cdf, extreme_value_median, lccs_length_cdf

rng = np.random.default_rng(0)
m, trials = 512, 5_000

for p in (0.3, 0.5, 0.7):
    match = rng.random((trials, m)) < p
    doubled = np.concatenate([match, match], axis=1)
    run = best = np.zeros(trials, dtype=int)
    for j in range(2 * m):
        run = np.where(doubled[:, j], run + 1, 0)
        best = np.maximum(best, run)
    L = np.minimum(best, m)
    xs = np.arange(L.max() + 1)
    emp = np.searchsorted(np.sort(L), xs, side="right") / trials
    print(f"p={p}: median length {np.median(L):.0f}, law median {extreme_value_median(m, p):.2f}")
    print(f"   sup gap, continuous law at x     {np.abs(emp - extreme_value_cdf(xs, m, p)).max():.3f}")
    print(f"   sup gap, integer-part law at x   {np.abs(emp - lccs_length_cdf(xs, m, p)).max():.3f}")
