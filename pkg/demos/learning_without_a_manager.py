"""
Learning without a manager
==========================

Each member raises its self-appraisal when it outperforms the members it
observes and lowers it otherwise. The workload follows the appraisals, and
with a strongly connected observation network it converges to the skills.
Members keep their private views of each other, so rows of ``A`` stay apart.
"""

import numpy as np

from teamlearn import rhs_reduced, split_appraisals, left_dominant_eigenvector
from teamlearn.harness import scenario, simulate
from teamlearn.integrate import solve_ode
from teamlearn.metrics import appraisal_consensus_spread

cfg = scenario("fig2")
res = simulate(cfg)
tr, x = res.trajectory, res.instance.x
print(f"status {tr.status} at t={tr.t[-1]:.1f}")
print("skills    ", x.round(4))
print("assignment", tr.final.w.round(4))
print("spread between appraisal rows:", round(appraisal_consensus_spread(tr.final.A), 4))

###############################################################################
# Only the self-appraisals move: each row's off-diagonal profile keeps its
# shape, so the whole run is captured by n numbers.
a0, C = split_appraisals(tr.A[0])
_, C_end = split_appraisals(tr.A[-1])
print("off-diagonal profile change:", np.abs(C_end - C).max())

c = left_dominant_eigenvector(C)
g = res.instance.spec.gains
M = res.instance.spec.M
h = cfg.integrator.h
_, a = solve_ode(lambda y: rhs_reduced(y, x, M=M, c=c, gains=g), a0, tr.t[-1], h,
                 sample_every=cfg.integrator.sample_every)
print("reduced vs full self-appraisals:", np.abs(a - np.diagonal(tr.A, axis1=1, axis2=2)).max())

###############################################################################
# Without a connected observation network the team stalls.
bad = simulate(scenario("fig5a"))
print(f"two isolated groups: mismatch {bad.summary['terminal_H1']:.3f}")
