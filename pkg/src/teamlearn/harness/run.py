"""Run one configured experiment and persist its artifacts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from ..core import feedback_signal, mismatch_h1
from ..dynamics import assignment_box_bounds, self_appraisal_margin, split_appraisals
from ..graph import left_dominant_eigenvector, perron_left
from ..integrate import T_END_REACHED, Trajectory, integrate
from ..metrics import (
    appraisal_consensus_spread,
    comparative_graph,
    lyapunov_manager,
    lyapunov_ratio,
    max_increase,
    nontransitive_triad_count,
)
from . import generators as gen
from . import io
from .config import ExperimentConfig, Instance, check

log = logging.getLogger(__name__)

MANAGER_LYAPUNOV_TOL = 1e-10
RATIO_LYAPUNOV_TOL = 1e-8
BOX_TOL = 1e-9


@dataclass
class RunResult:
    config: ExperimentConfig
    instance: Instance
    trajectory: Trajectory
    summary: Dict
    out_dir: Optional[Path]


def random_baseline(inst: Instance, cfg: ExperimentConfig, rng: np.random.Generator) -> Trajectory:
    """Appraisals redrawn with i.i.d. uniform-simplex rows at every sample time.

    The assignment is still the eigenvector of the current draw, so the
    baseline has the same observables as a learning team without any learning.
    """
    ic = cfg.integrator
    n = inst.x.size
    k = int(round(ic.t_end / ic.sample_every))
    t = np.arange(k + 1) * ic.sample_every
    min_entry = float(cfg.initial.get("min_entry", 1e-3))
    A = np.stack([inst.state] + [gen.dirichlet_rows(n, rng, min_entry) for _ in range(k)])
    w, _, _ = perron_left(A, method="direct")
    p = cfg.performance_function()(inst.x / w)
    phi = feedback_signal(p, inst.M)
    return Trajectory(t=t, w=w, p=p, phi=phi, A=A, metrics={}, status=T_END_REACHED,
                      steps=k, min_entry=float(A.min()), max_row_drift=0.0)


def compute_metrics(tr: Trajectory, x, names) -> Dict[str, np.ndarray]:
    out = {}
    for m in names:
        if m == "H1":
            out[m] = mismatch_h1(x, tr.w)
        elif m == "V_manager":
            out[m] = lyapunov_manager(tr.w, x)
        elif m == "V_ratio":
            out[m] = lyapunov_ratio(tr.w, x)
        elif tr.A is None:
            out[m] = np.full(len(tr), np.nan)
        elif m == "spread":
            out[m] = appraisal_consensus_spread(tr.A)
        elif m == "triads":
            out[m] = np.array([nontransitive_triad_count(comparative_graph(A)) for A in tr.A],
                              dtype=float)
    return out


def bound_checks(inst: Instance, tr: Trajectory) -> Dict[str, object]:
    """Violations of the analytic bounds that apply to the run's model."""
    x = inst.x
    flags: Dict[str, object] = {}
    if inst.kind == "manager":
        flags["lyapunov_increase"] = max_increase(lyapunov_manager(tr.w, x))
        flags["lyapunov_violated"] = flags["lyapunov_increase"] > MANAGER_LYAPUNOV_TOL
    elif inst.kind == "assign_appraise" and tr.A is not None:
        a0, C0 = split_appraisals(tr.A[0])
        try:
            c = left_dominant_eigenvector(C0)
        except ArithmeticError:
            flags["self_appraisal_margin_violated"] = None
        else:
            zeta = self_appraisal_margin(a0, c, x)
            a = np.diagonal(tr.A, axis1=-2, axis2=-1)
            flags["self_appraisal_margin_violated"] = bool(np.any(a > 1.0 - zeta + BOX_TOL))
    elif inst.kind == "assign_appraise_influence":
        _, xi0 = assignment_box_bounds(x, tr.w[0])
        n = x.size
        flags["xi0"] = xi0
        flags["xi0_box_violated"] = bool(np.any(tr.w < xi0 - BOX_TOL)
                                         or np.any(tr.w > 1 - (n - 1) * xi0 + BOX_TOL))
        flags["ratio_lyapunov_increase"] = max_increase(lyapunov_ratio(tr.w, x))
        flags["ratio_lyapunov_violated"] = flags["ratio_lyapunov_increase"] > RATIO_LYAPUNOV_TOL
    flags["positivity_lost"] = tr.status == "positivity_lost"
    return flags


def summarize(cfg: ExperimentConfig, inst: Instance, tr: Trajectory) -> Dict:
    fin = tr.final
    s = {
        "name": cfg.name,
        "seed": cfg.seed,
        "model": cfg.kind,
        "status": tr.status,
        "t_final": fin.t,
        "steps": tr.steps,
        "terminal_H1": float(mismatch_h1(inst.x, fin.w)),
        "x": inst.x,
        "w_final": fin.w,
        "min_entry": tr.min_entry,
        "max_row_drift": tr.max_row_drift,
        "bounds": bound_checks(inst, tr),
    }
    if fin.A is not None:
        s["consensus_spread"] = appraisal_consensus_spread(fin.A)
        if inst.x.size >= 3:
            s["triads"] = nontransitive_triad_count(comparative_graph(fin.A))
    return s


def simulate(cfg: ExperimentConfig, validate: bool = True) -> RunResult:
    """Draw the configured team, integrate it and compute metrics; writes nothing."""
    inst = cfg.instantiate()
    if validate:
        check(cfg, inst)
    if inst.kind == "random_baseline":
        # draws continue from a stream independent of the instance draws
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2**32,)))
        tr = random_baseline(inst, cfg, rng)
    else:
        ic = cfg.integrator
        if inst.kind != "manager" and not ic.store_matrix:
            ic = replace(ic, store_matrix=True)
        tr = integrate(inst.spec, inst.state, ic)
    tr.metrics.update(compute_metrics(tr, inst.x, cfg.outputs["metrics"]))
    return RunResult(cfg, inst, tr, summarize(cfg, inst, tr), None)


def write_artifacts(res: RunResult, out: Path) -> Path:
    cfg, tr = res.config, res.trajectory
    out.mkdir(parents=True, exist_ok=True)
    names = [m for m in cfg.outputs["metrics"] if m in tr.metrics]
    io.write_trajectory_csv(out / "trajectory.csv", tr.t, tr.metrics, tr.w, names)
    if tr.A is not None:
        picks = {0, len(tr) - 1}
        for ts in cfg.outputs.get("snapshot_times", []):
            picks.add(int(np.argmin(np.abs(tr.t - float(ts)))))
        (out / "snapshots").mkdir(exist_ok=True)
        if cfg.outputs.get("heatmaps", True):
            (out / "heatmaps").mkdir(exist_ok=True)
        for k in sorted(picks):
            st = io.stamp(tr.t[k])
            io.write_snapshot(out / "snapshots" / f"A_t{st}.json", tr.t[k], tr.A[k])
            if cfg.outputs.get("heatmaps", True):
                io.write_pgm(out / "heatmaps" / f"A_t{st}.pgm", tr.A[k])
                if cfg.outputs.get("svg", False):
                    io.write_svg(out / "heatmaps" / f"A_t{st}.svg", tr.A[k])
    io.write_json(out / "summary.json", res.summary)
    return out


def run_experiment(cfg: ExperimentConfig, out_base=None) -> RunResult:
    """Validate, simulate and write ``trajectory.csv``, snapshots, heatmaps and ``summary.json``."""
    res = simulate(cfg)
    res.out_dir = write_artifacts(res, cfg.out_dir(out_base))
    log.info("%s: %s, terminal H1 %.3g -> %s", cfg.name, res.summary["status"],
             res.summary["terminal_H1"], res.out_dir)
    return res
