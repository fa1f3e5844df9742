"""
How often do appraisals stay positive
=====================================

When appraisals adapt fast relative to opinion exchange, some entries can
be driven to zero. A Monte Carlo study estimates the fraction of random
teams that keep every appraisal positive; the Chernoff bound says how many
teams are needed for a given accuracy and confidence.
"""

from pathlib import Path

from teamlearn.harness import ExperimentConfig, chernoff_min_samples, montecarlo_positivity

for eps, xi in [(0.1, 0.1), (0.05, 0.05), (0.01, 0.01)]:
    print(f"eps={eps} xi={xi}: need N >= {chernoff_min_samples(eps, xi)}")

cfg = ExperimentConfig.load(Path(__file__).resolve().parents[1] / "configs" / "mc.toml")
rep = montecarlo_positivity(cfg, 200, horizon=50.0)
print(f"{rep.successes}/{rep.N} teams stayed positive, p_hat={rep.p_hat}")
print("lowest min-entry ratio:", min(rep.min_entry_ratio))
