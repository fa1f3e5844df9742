"""Declarative experiments, Monte Carlo studies, built-in scenarios and the CLI."""

from .config import ExperimentConfig, check
from .montecarlo import MonteCarloReport, chernoff_min_samples, montecarlo_positivity
from .run import RunResult, run_experiment, simulate
from .scenarios import SCENARIOS, scenario
