"""Monte Carlo estimate of how often appraisals stay bounded away from zero."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..core import ConfigError, DomainError
from ..integrate import EIGENVECTOR_FAILED, POSITIVITY_LOST, integrate_batch
from .config import ExperimentConfig


def chernoff_min_samples(epsilon: float, xi: float) -> int:
    """Smallest ``N`` with ``N >= log(2 / xi) / (2 epsilon**2)``.

    With that many samples the empirical frequency is within ``epsilon`` of
    the true probability with confidence at least ``1 - xi``.
    """
    if not (0 < epsilon < 1 and 0 < xi < 1):
        raise DomainError("epsilon and xi must lie in (0, 1)")
    bound = math.log(2.0 / xi) / (2.0 * epsilon**2)
    n = math.ceil(bound)
    # guard against the ceiling landing one short through rounding
    while n < bound:
        n += 1
    return n


def chernoff_satisfied(N: int, epsilon: float, xi: float) -> bool:
    return N >= math.log(2.0 / xi) / (2.0 * epsilon**2)


@dataclass
class MonteCarloReport:
    N: int
    successes: int
    p_hat: Optional[float]
    epsilon: float
    xi: float
    chernoff_N_min: int
    horizon: float
    a_min_probe: float
    statuses: List[str] = field(default_factory=list)
    min_entry_ratio: List[float] = field(default_factory=list)
    certified: bool = False

    @property
    def p_hat_defined(self) -> bool:
        return self.N > 0

    def to_dict(self) -> Dict:
        return {
            "N": self.N, "successes": self.successes, "p_hat": self.p_hat,
            "p_hat_defined": self.p_hat_defined, "epsilon": self.epsilon, "xi": self.xi,
            "chernoff_N_min": self.chernoff_N_min, "certified": self.certified,
            "horizon": self.horizon, "a_min_probe": self.a_min_probe,
            "statuses": self.statuses, "min_entry_ratio": self.min_entry_ratio,
        }


def _chunk(cfg: ExperimentConfig, ranks, ic):
    insts = [cfg.instantiate_rng(np.random.default_rng(
        np.random.SeedSequence(cfg.seed, spawn_key=(int(i),)))) for i in ranks]
    trs = integrate_batch([s.spec for s in insts], [s.state for s in insts], ic)
    a0 = [float(s.state.min()) for s in insts]
    return [(tr.status, tr.min_entry, m0) for tr, m0 in zip(trs, a0)]


def montecarlo_positivity(cfg: ExperimentConfig, N: int, horizon: Optional[float] = None,
                          a_min_probe: Optional[float] = None, epsilon: Optional[float] = None,
                          xi: Optional[float] = None, certified: bool = False,
                          batch_size: int = 250, workers: int = 1) -> MonteCarloReport:
    """Run ``N`` independent teams and count those whose appraisals stay positive.

    Run ``i`` draws its team from the sub-seed ``SeedSequence(seed, spawn_key=(i,))``.
    A run succeeds when it keeps every appraisal strictly positive, never
    drops below ``a_min_probe`` times its initial minimum entry, and ends
    without a positivity or assignment failure. Results are merged in rank
    order, so the report does not depend on ``batch_size`` or ``workers``.
    """
    if cfg.kind != "assign_appraise_influence":
        raise ConfigError("the positivity study needs the assign_appraise_influence model")
    mc = cfg.montecarlo
    horizon = float(mc["horizon"] if horizon is None else horizon)
    probe = float(mc["a_min_probe"] if a_min_probe is None else a_min_probe)
    epsilon = float(mc["epsilon"] if epsilon is None else epsilon)
    xi = float(mc["xi"] if xi is None else xi)
    n_min = chernoff_min_samples(epsilon, xi)
    if N < 0:
        raise ConfigError("N must be nonnegative")
    if certified and N < n_min:
        raise ConfigError(f"N={N} is below the {n_min} samples needed for "
                          f"epsilon={epsilon}, xi={xi}")
    if N == 0:
        return MonteCarloReport(0, 0, None, epsilon, xi, n_min, horizon, probe, certified=certified)

    ic = replace(cfg.integrator, t_end=horizon, sample_every=horizon, store_matrix=False,
                 **({"h": float(mc["h"])} if "h" in mc else {}))
    chunks = [range(s, min(s + batch_size, N)) for s in range(0, N, batch_size)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk, [cfg] * len(chunks), chunks, [ic] * len(chunks)))
    else:
        parts = [_chunk(cfg, r, ic) for r in chunks]
    rows = [r for part in parts for r in part]

    statuses, ratios, ok = [], [], 0
    for status, low, a0 in rows:
        statuses.append(status)
        ratios.append(low / a0)
        ok += int(status not in (POSITIVITY_LOST, EIGENVECTOR_FAILED)
                  and low > 0 and low >= probe * a0)
    return MonteCarloReport(N, ok, ok / N, epsilon, xi, n_min, horizon, probe,
                            statuses, ratios, certified)
