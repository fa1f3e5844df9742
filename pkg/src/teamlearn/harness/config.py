"""Experiment configuration: TOML schema, instance generation and hypothesis checks.

A config is a TOML document (or the equivalent dict)::

    name = "demo"
    seed = 7
    n = 6

    [skills]        # gen = "dirichlet_uniform" (min_skill) | "explicit" (values)
    [initial]       # gen = "dirichlet_rows" (min_entry, self_weight) | "explicit" (values)
                    #     | "sparse_pattern" (pattern) | "consensus" | "uniform"
                    # the manager model reads gen = "uniform" | "dirichlet" | "explicit"
    [M]             # gen = "strongly_connected" | "single_sink" | "disconnected" | "explicit"
                    #     edge_prob, sink_size, values
    [model]         # kind, assignment_rule, influence_rule, tau_ave, tau_app,
                    # prejudice, sensitivities (scalar or list), performance, gamma
    [integrator]    # any IntegratorConfig field
    [hypotheses]    # satisfies = [...], violates = [...]
    [outputs]       # metrics, snapshot_times, heatmaps, svg
    [montecarlo]    # N, horizon, a_min_probe, epsilon, xi, h

Every random draw comes from one generator seeded with ``seed``, in the
order skills, initial state, observation network.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..core import ConfigError, InfluenceParams, PerformanceFunction
from ..dynamics import ModelSpec, assignment_box_bounds, positivity_tau_ratio_threshold
from ..graph import classify_connectivity, left_dominant_eigenvector
from ..integrate import IntegratorConfig
from . import generators as gen

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

OUT_ENV = "TEAMLEARN_OUT"
METRICS = ("H1", "spread", "triads", "V_manager", "V_ratio")

HYPOTHESES = {
    "observation_strongly_connected": "observation network strongly connected",
    "observation_globally_reachable": "observation network has a globally reachable node",
    "initial_appraisals_positive": "initial appraisals entrywise positive",
    "initial_appraisals_irreducible": "initial appraisals irreducible with positive self-appraisals",
    "eigenvector_assignment": "assignment by eigenvector centrality",
    "no_prejudice": "no attachment to initial appraisals",
    "positivity_time_scale": "tau_app / tau_ave at or above the positivity threshold",
}

# hypotheses each model needs for its learning guarantee
REQUIRED = {
    "manager": (),
    "assign_appraise": ("observation_strongly_connected", "initial_appraisals_irreducible",
                        "eigenvector_assignment"),
    "assign_appraise_influence": ("observation_globally_reachable", "initial_appraisals_positive",
                                  "eigenvector_assignment", "no_prejudice"),
    "random_baseline": (),
}

LABEL = {
    "assign_appraise": "assign/appraise learning hypothesis",
    "assign_appraise_influence": "assign/appraise/influence learning hypothesis",
}


@dataclass
class Instance:
    """One concrete team drawn from a config."""

    spec: Optional[ModelSpec]
    state: np.ndarray
    x: np.ndarray
    M: Optional[np.ndarray]
    kind: str


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    n: int
    skills: Dict[str, Any]
    initial: Dict[str, Any]
    M: Dict[str, Any]
    model: Dict[str, Any]
    integrator: IntegratorConfig
    hypotheses: Dict[str, List[str]]
    outputs: Dict[str, Any]
    montecarlo: Dict[str, Any]
    output_dir: Optional[str]
    raw: Dict[str, Any]

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        known = {"name", "seed", "n", "skills", "initial", "M", "model", "integrator",
                 "hypotheses", "outputs", "montecarlo", "output_dir"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            seed = int(d.get("seed", 0))
            n = int(d["n"])
        except KeyError as e:
            raise ConfigError(f"missing config key {e}") from None
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if n < 2:
            raise ConfigError("need n >= 2")
        model = dict(d.get("model", {}))
        kind = model.setdefault("kind", "assign_appraise")
        if kind not in REQUIRED:
            raise ConfigError(f"unknown model kind {kind!r}")

        ic = d.get("integrator", {})
        names = {f.name for f in fields(IntegratorConfig)}
        bad = set(ic) - names
        if bad:
            raise ConfigError(f"unknown integrator keys: {sorted(bad)}")
        hyp = d.get("hypotheses", {})
        for key in ("satisfies", "violates"):
            for h in hyp.get(key, []):
                if h not in HYPOTHESES:
                    raise ConfigError(f"unknown hypothesis {h!r}; known: {sorted(HYPOTHESES)}")
        outputs = {"metrics": ["H1", "spread", "triads", "V_ratio"], "snapshot_times": [],
                   "heatmaps": True, "svg": False}
        outputs.update(d.get("outputs", {}))
        for m in outputs["metrics"]:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}; known: {list(METRICS)}")
        mc = {"N": 1000, "horizon": 100.0, "a_min_probe": 0.0, "epsilon": 0.01, "xi": 0.01}
        mc.update(d.get("montecarlo", {}))

        initial = d.get("initial", {"gen": "uniform" if kind == "manager" else "dirichlet_rows"})
        cfg = cls(
            name=str(d.get("name", "experiment")), seed=seed, n=n,
            skills=d.get("skills", {"gen": "dirichlet_uniform"}),
            initial=initial, M=d.get("M", {"gen": "strongly_connected"}), model=model,
            integrator=IntegratorConfig(**ic), hypotheses=hyp, outputs=outputs,
            montecarlo=mc, output_dir=d.get("output_dir"), raw=d,
        )
        # catch generator typos before any run
        cfg.instantiate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            with path.open("rb") as fh:
                d = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
        d.setdefault("name", path.stem)
        return cls.from_dict(d)

    @property
    def kind(self) -> str:
        return self.model["kind"]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        d = copy.deepcopy(self.raw)
        d["seed"] = seed
        d["name"] = self.name
        return ExperimentConfig.from_dict(d)

    def with_override(self, path: str, value) -> "ExperimentConfig":
        """Copy with the dotted key ``path`` (e.g. ``model.tau_app``) set to ``value``."""
        return self.with_overrides({path: value})

    def with_overrides(self, changes: Dict[str, Any]) -> "ExperimentConfig":
        """Copy with several dotted keys set at once; a value of ``None`` removes the key."""
        d = copy.deepcopy(self.raw)
        d["name"] = self.name
        for path, value in changes.items():
            node = d
            *head, last = path.split(".")
            for key in head:
                node = node.setdefault(key, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"{path}: {key!r} is not a table")
            if value is None:
                node.pop(last, None)
            else:
                node[last] = value
        return ExperimentConfig.from_dict(d)

    def out_dir(self, base=None) -> Path:
        root = base or self.output_dir or os.environ.get(OUT_ENV) or "out"
        return Path(root) / f"{self.name}-seed{self.seed}"

    # -- instance generation ------------------------------------------------

    def performance_function(self) -> PerformanceFunction:
        return PerformanceFunction(self.model.get("performance", "power"),
                                   float(self.model.get("gamma", 0.5)))

    def _vector(self, key) -> Optional[np.ndarray]:
        v = self.model.get(key)
        if v is None:
            return None
        v = np.asarray(v, dtype=float)
        return np.full(self.n, float(v)) if v.ndim == 0 else v

    def params(self) -> InfluenceParams:
        return InfluenceParams(float(self.model.get("tau_ave", 1.0)),
                               float(self.model.get("tau_app", 1.0)),
                               self._vector("prejudice"), self._vector("sensitivities"))

    def instantiate(self, seed: Optional[int] = None) -> Instance:
        """Draw skills, initial state and observation network from ``seed`` (default: own seed)."""
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return self.instantiate_rng(rng)

    def instantiate_rng(self, rng: np.random.Generator) -> Instance:
        n = self.n
        x = _skills(self.skills, n, rng)
        kind = self.kind
        if kind == "manager":
            state = _initial_assignment(self.initial, n, rng)
            spec = ModelSpec(x, model="manager", f=self.performance_function())
            return Instance(spec, state, x, None, kind)
        state = _initial_appraisals(self.initial, x, rng)
        M = _observation(self.M, n, rng)
        if kind == "random_baseline":
            return Instance(None, state, x, M, kind)
        spec = ModelSpec(
            x, model=kind,
            assignment_rule=self.model.get("assignment_rule", "eigenvector"),
            influence_rule=self.model.get(
                "influence_rule", "degroot" if kind == "assign_appraise_influence" else "none"),
            params=self.params(), f=self.performance_function(), M=M,
        )
        return Instance(spec, state, x, M, kind)


def _explicit(spec, key="values"):
    if key not in spec:
        raise ConfigError(f"generator 'explicit' needs {key!r}")
    return np.asarray(spec[key], dtype=float)


def _skills(spec, n, rng):
    g = spec.get("gen", "dirichlet_uniform")
    if g == "dirichlet_uniform":
        return gen.dirichlet_skills(n, rng, float(spec.get("min_skill", 0.0)))
    if g == "explicit":
        x = _explicit(spec)
        if x.shape != (n,):
            raise ConfigError(f"skills have shape {x.shape}, expected {(n,)}")
        return x / x.sum()
    raise ConfigError(f"unknown skill generator {g!r}")


def _initial_assignment(spec, n, rng):
    g = spec.get("gen", "uniform")
    if g == "uniform":
        return np.full(n, 1.0 / n)
    if g == "dirichlet":
        return rng.dirichlet(np.ones(n))
    if g == "explicit":
        w = _explicit(spec)
        return w / w.sum()
    raise ConfigError(f"unknown initial-assignment generator {g!r}")


def _initial_appraisals(spec, x, rng):
    n = x.size
    g = spec.get("gen", "dirichlet_rows")
    if g == "dirichlet_rows":
        return gen.dirichlet_rows(n, rng, float(spec.get("min_entry", 1e-3)),
                                  float(spec.get("self_weight", 0.0)))
    if g == "sparse_pattern":
        if "pattern" not in spec:
            raise ConfigError("generator 'sparse_pattern' needs 'pattern'")
        return gen.pattern_rows(spec["pattern"], rng)
    if g == "consensus":
        return gen.consensus(x)
    if g == "uniform":
        return np.full((n, n), 1.0 / n)
    if g == "explicit":
        A = _explicit(spec)
        if A.shape != (n, n):
            raise ConfigError(f"initial appraisals have shape {A.shape}, expected {(n, n)}")
        return A
    raise ConfigError(f"unknown initial-appraisal generator {g!r}")


def _observation(spec, n, rng):
    g = spec.get("gen", "strongly_connected")
    p = float(spec.get("edge_prob", 0.3))
    if g == "strongly_connected":
        return gen.strongly_connected_observation(n, rng, p)
    if g == "single_sink":
        return gen.single_sink_observation(n, rng, int(spec.get("sink_size", 2)), p)
    if g == "disconnected":
        return gen.disconnected_observation(n, rng, p)
    if g == "explicit":
        M = _explicit(spec)
        if M.shape != (n, n):
            raise ConfigError(f"M has shape {M.shape}, expected {(n, n)}")
        return M
    raise ConfigError(f"unknown observation generator {g!r}")


# -- hypothesis checks --------------------------------------------------------

def evaluate_hypotheses(cfg: ExperimentConfig, inst: Optional[Instance] = None) -> Dict[str, bool]:
    """Truth value of every known hypothesis on one drawn instance."""
    inst = inst or cfg.instantiate()
    out = {}
    if inst.M is not None:
        rep = classify_connectivity(inst.M)
        out["observation_strongly_connected"] = rep.strongly_connected
        out["observation_globally_reachable"] = rep.has_globally_reachable_node
    if inst.kind != "manager":
        A = inst.state
        rep = classify_connectivity(A)
        out["initial_appraisals_positive"] = bool(np.all(A > 0))
        out["initial_appraisals_irreducible"] = rep.irreducible and rep.positive_diagonal
        out["eigenvector_assignment"] = cfg.model.get("assignment_rule", "eigenvector") == "eigenvector"
        out["no_prejudice"] = cfg.model.get("influence_rule") != "friedkin_johnsen"
        out["positivity_time_scale"] = _positivity_time_scale(cfg, inst)
    return out


def _positivity_time_scale(cfg, inst) -> bool:
    if inst.kind != "assign_appraise_influence" or not classify_connectivity(inst.state).irreducible:
        return False
    w0 = left_dominant_eigenvector(inst.state)
    _, xi0 = assignment_box_bounds(inst.x, w0)
    p = cfg.params()
    thr = positivity_tau_ratio_threshold(inst.x, xi0, cfg.performance_function())
    return p.tau_app / p.tau_ave >= thr


def check(cfg: ExperimentConfig, inst: Optional[Instance] = None) -> Tuple[List[str], List[str]]:
    """Confirm the declared hypotheses; returns (satisfied, violated) lists.

    A model's learning hypotheses are expected to hold unless the config
    lists them under ``violates``. Raises :class:`ConfigError` naming the
    first mismatch.
    """
    truth = evaluate_hypotheses(cfg, inst)
    declared_bad = set(cfg.hypotheses.get("violates", []))
    expect_ok = set(cfg.hypotheses.get("satisfies", [])) | (set(REQUIRED[cfg.kind]) - declared_bad)
    if expect_ok & declared_bad:
        raise ConfigError(f"hypotheses declared both satisfied and violated: "
                          f"{sorted(expect_ok & declared_bad)}")
    label = LABEL.get(cfg.kind, "declared hypothesis")
    for h in sorted(expect_ok):
        if h in truth and not truth[h]:
            raise ConfigError(f"{label} not met: {HYPOTHESES[h]}")
    for h in sorted(declared_bad):
        if h in truth and truth[h]:
            raise ConfigError(f"config declares '{HYPOTHESES[h]}' violated, but it holds")
    return sorted(expect_ok), sorted(declared_bad)
