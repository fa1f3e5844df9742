"""
A manager reallocating work by performance
==========================================

A central manager shifts workload toward members who perform above the team
average. Performance is ``sqrt(x_i / w_i)``: members with more skill ``x_i``
than workload ``w_i`` look good. The flow settles on ``w = x``.
"""

import numpy as np

from teamlearn import IntegratorConfig, ModelSpec, integrate, lyapunov_manager, mismatch_h1

rng = np.random.default_rng(3)
x = rng.dirichlet(np.ones(6))
w0 = np.full(6, 1 / 6)

tr = integrate(ModelSpec(x, model="manager"), w0,
               IntegratorConfig(t_end=100.0, sample_every=5.0, stop_on_convergence=False))

print("skills     ", x.round(4))
print("final load ", tr.final.w.round(4))
print(" t     mismatch   Lyapunov")
for t, w in zip(tr.t[::4], tr.w[::4]):
    print(f"{t:5.0f}  {mismatch_h1(x, w):.2e}  {lyapunov_manager(w, x):.2e}")

# the Lyapunov function never goes up
V = lyapunov_manager(tr.w, x)
print("largest step increase of V:", np.diff(V).max())
