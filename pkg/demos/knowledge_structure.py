"""
Does the team agree on who knows what
=====================================

Draw an edge i -> j when member i rates j at least as highly as itself.
A triple is non-transitive when some 2-path i -> j -> k lacks the shortcut
i -> k. Under opinion exchange these inconsistencies disappear; with private
appraisals or random ones they persist.
"""

import numpy as np

from teamlearn.harness import scenario, simulate
from teamlearn.harness.scenarios import matched_appraise, matched_random

cfg = scenario("fig6")
runs = {
    "with influence": simulate(cfg),
    "appraise only": simulate(matched_appraise(cfg)),
    "random": simulate(matched_random(cfg)),
}
print("t       " + "  ".join(f"{k:>14s}" for k in runs))
for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]:
    row = []
    for res in runs.values():
        tr = res.trajectory
        k = min(int(np.searchsorted(tr.t, t)), len(tr) - 1)
        row.append(f"{int(tr.metrics['triads'][k]):>14d}")
    print(f"{t:5.1f}   " + "  ".join(row))

for name, res in runs.items():
    print(f"{name:15s} final triads {res.summary['triads']}, mismatch {res.summary['terminal_H1']:.2e}")
