"""Circular co-substrings and the circular shift array, by hand.

Run: python demos/01_circular_co_substrings.py
"""

import numpy as np

from lccs_lsh.csa import build_csa, lccs_bruteforce, shift

# Two hash strings.  [1,2,3,4] appears in both, but at different positions,
# so it does not count.  [5,1] wraps around the end and sits at the same
# positions in both, which makes it a circular co-substring.
T = [1, 2, 3, 4, 1, 5]
Q = [1, 1, 2, 3, 4, 5]
length, start = lccs_bruteforce(T, Q)
print(f"LCCS length {length}, starting at shift {start}: {shift(T, start)[:length].tolist()}")

# A small database.  The CSA keeps every string's m circular shifts sorted,
# plus links from each shift's order to the next one's.
rng = np.random.default_rng(0)
db = rng.integers(0, 3, size=(8, 6))
csa = build_csa(db)
print("\nsorted order of shift 0:", csa.sorted_indices[0].tolist())
print("next links of shift 0:  ", csa.next_links[0].tolist())

# k-LCCS search walks the m sorted lists outward from the query's position
# with a priority queue, so the longest matches come out first.
q = rng.integers(0, 3, size=6)
res = csa.search(q, 4)
print(f"\nquery {q.tolist()}")
for r in res.matches:
    print(f"  string {r.string_id} {db[r.string_id].tolist()}  length {r.match_length} at shift {r.shift_position}")

# The same answer by brute force over every string.
brute = sorted(((lccs_bruteforce(t, q)[0], j) for j, t in enumerate(db)), reverse=True)[:4]
print("brute-force lengths:", [L for L, _ in brute])
