"""Built-in scenarios: each pins a team generator, a model and a default seed.

Every scenario lists the learning hypotheses it deliberately violates, so
``check`` confirms that the failure cases really lie outside the regime
where learning is guaranteed.
"""

from __future__ import annotations

import copy
from typing import Dict, Optional

from ..core import ConfigError
from .config import ExperimentConfig

_SNAPSHOTS = [0.0, 2.0, 10.0, 30.0]

# Learning speed scales with the self-appraisals, which sit near the skills.
# Faster feedback (sensitivity 10, or tau_app = 0.1) and skills of at least
# 0.05 bring the learning scenarios to a small mismatch within t = 100.
_APPRAISE = {
    "n": 6,
    "skills": {"gen": "dirichlet_uniform"},
    "initial": {"gen": "dirichlet_rows", "min_entry": 1e-3, "self_weight": 0.5},
    "M": {"gen": "strongly_connected", "edge_prob": 0.6},
    "model": {"kind": "assign_appraise", "sensitivities": 10.0},
    "integrator": {"h": 0.01, "t_end": 100.0, "sample_every": 0.1},
    "outputs": {"snapshot_times": _SNAPSHOTS},
}

_INFLUENCE = {
    "n": 6,
    "skills": {"gen": "dirichlet_uniform", "min_skill": 0.05},
    "initial": {"gen": "dirichlet_rows", "min_entry": 1e-3},
    "M": {"gen": "single_sink", "sink_size": 2, "edge_prob": 0.6},
    "model": {"kind": "assign_appraise_influence", "influence_rule": "degroot",
              "tau_ave": 1.0, "tau_app": 0.1},
    "integrator": {"h": 0.01, "t_end": 100.0, "sample_every": 0.1},
    "outputs": {"snapshot_times": _SNAPSHOTS},
}


def _derive(base, seed, **changes):
    d = copy.deepcopy(base)
    d["seed"] = seed
    for path, value in changes.items():
        node = d
        *head, last = path.split("__")
        for key in head:
            node = node.setdefault(key, {})
        node[last] = value
    return d


SCENARIOS: Dict[str, dict] = {
    "fig2": _derive(_APPRAISE, 7),
    "fig3": _derive(_INFLUENCE, 7),
    "fig4a": _derive(_APPRAISE, 7, model__assignment_rule="in_degree",
                     hypotheses__violates=["eigenvector_assignment"]),
    "fig4b": _derive(_INFLUENCE, 7, model__assignment_rule="in_degree",
                     hypotheses__violates=["eigenvector_assignment"]),
    "fig5a": _derive(_APPRAISE, 7, M__gen="disconnected",
                     hypotheses__violates=["observation_strongly_connected"]),
    "fig5b": _derive(_INFLUENCE, 7, M__gen="disconnected",
                     hypotheses__violates=["observation_globally_reachable"]),
    "fig6": _derive(_INFLUENCE, 7, M__gen="strongly_connected",
                    hypotheses__satisfies=["observation_strongly_connected"]),
    "fig7": _derive(_INFLUENCE, 7, model__influence_rule="friedkin_johnsen",
                    model__prejudice=0.5, hypotheses__violates=["no_prejudice"]),
    "manager-baseline": {
        "n": 6, "seed": 7,
        "skills": {"gen": "dirichlet_uniform"},
        "initial": {"gen": "dirichlet"},
        "model": {"kind": "manager"},
        "integrator": {"h": 0.01, "t_end": 200.0, "sample_every": 0.1},
        "outputs": {"metrics": ["H1", "V_manager", "V_ratio"]},
    },
    "random-baseline": _derive(_APPRAISE, 7, model__kind="random_baseline"),
}

DESCRIPTIONS = {
    "fig2": "assign/appraise, strongly connected observation: learns the skills, no consensus",
    "fig3": "assign/appraise/influence, single observation sink: learning and consensus",
    "fig4a": "in-degree assignment without influence: assignment settles off the skills",
    "fig4b": "in-degree assignment with influence: learning and consensus",
    "fig5a": "assign/appraise, two isolated observation groups: learning fails",
    "fig5b": "assign/appraise/influence, no globally reachable observer: learning fails",
    "fig6": "assign/appraise/influence team for the knowledge-structure metrics",
    "fig7": "prejudiced opinion exchange: appraisals stay anchored, learning fails",
    "manager-baseline": "central manager reassigning work by performance",
    "random-baseline": "appraisals redrawn at random at every sample",
}


def scenario(name: str, seed: Optional[int] = None) -> ExperimentConfig:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    d = copy.deepcopy(SCENARIOS[name])
    d["name"] = name
    if seed is not None:
        d["seed"] = seed
    return ExperimentConfig.from_dict(d)


def matched_appraise(cfg: ExperimentConfig) -> ExperimentConfig:
    """The same team (skills, appraisals, observation) under assign/appraise without influence."""
    return cfg.with_overrides({
        "name": f"{cfg.name}-appraise", "model.kind": "assign_appraise",
        "model.influence_rule": None, "model.tau_ave": None, "model.tau_app": None,
        "model.prejudice": None, "model.sensitivities": 10.0, "hypotheses": None,
    })


def matched_random(cfg: ExperimentConfig) -> ExperimentConfig:
    """The same team with appraisals redrawn at random at every sample."""
    return cfg.with_overrides({
        "name": f"{cfg.name}-random", "model": {"kind": "random_baseline"}, "hypotheses": None,
    })
