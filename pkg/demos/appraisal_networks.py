"""
Who does the work in an appraisal network
=========================================

An appraisal matrix ``A`` is row-stochastic: row i is how member i splits
credit among the team. The workload each member ends up with is the left
dominant eigenvector of ``A``, the fixed point of passing work along the
appraisal weights.
"""

import numpy as np

from teamlearn import (
    classify_connectivity,
    in_degree_assignment,
    left_dominant_eigenvector,
    workload_diffusion,
)

rng = np.random.default_rng(0)
n = 5
A = rng.dirichlet(np.ones(n), size=n)
print("appraisals\n", A.round(3))

###############################################################################
# The eigenvector and the long-run diffusion of a uniform workload agree.
w = left_dominant_eigenvector(A)
q = workload_diffusion(A, 200)
print("eigenvector assignment", w.round(4))
print("after 200 diffusion rounds", q.round(4), "gap", np.abs(w - q).max())

# In-degree centrality is a cheaper guess; it only matches when columns are balanced.
print("in-degree assignment  ", in_degree_assignment(A).round(4))

###############################################################################
# Connectivity decides whether the eigenvector is unique.
ring = np.roll(np.eye(n), 1, axis=1)
for name, B in [("random", A), ("ring", ring), ("ring + self loops", 0.5 * (ring + np.eye(n)))]:
    r = classify_connectivity(B)
    print(f"{name:18s} strongly connected={r.strongly_connected} primitive={r.primitive}")

# Two separate groups: nobody is reachable from everybody.
split = np.zeros((4, 4))
split[:2, :2] = 0.5
split[2:, 2:] = 0.5
print("split team globally reachable nodes:", sorted(classify_connectivity(split).globally_reachable_nodes))
