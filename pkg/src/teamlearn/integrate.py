"""Fixed-step and adaptive Runge-Kutta integration on the simplex manifold.

The engine advances a stack of independent teams at once; members that stop
(convergence, loss of positivity, assignment failure) are frozen while the
rest continue. :func:`integrate` is the single-team entry point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .core import ConfigError, DomainError, appraisal_matrix, assignment, feedback_signal
from .dynamics import (
    ModelSpec,
    _appraise_term,
    _degroot_term,
    _manager,
    _prejudice_term,
)
from .graph import classify_connectivity, in_degree_assignment, perron_left

log = logging.getLogger(__name__)

CONVERGED = "converged"
T_END_REACHED = "t_end_reached"
POSITIVITY_LOST = "positivity_lost"
EIGENVECTOR_FAILED = "eigenvector_failed"


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    h: float = 0.01
    t_end: float = 100.0
    sample_every: float = 0.1
    renorm_tol: float = 1e-9
    clamp_floor: float = -1e-9
    convergence_window: float = 1.0
    convergence_tol: float = 1e-8
    stop_on_convergence: bool = True
    # rk45 only
    rtol: float = 1e-9
    atol: float = 1e-12
    h_min: float = 1e-8
    # assignment solve
    eig_tol: float = 1e-12
    eig_max_iter: int = 100_000
    eig_method: str = "direct"
    store_matrix: bool = True

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ConfigError(f"unknown integration method {self.method!r}")
        if not 0 < self.h < self.t_end:
            raise ConfigError("need 0 < h < t_end")
        if self.sample_every <= 0:
            raise ConfigError("sample_every must be positive")
        if self.clamp_floor > 0:
            raise ConfigError("clamp_floor must be <= 0")


class Sample(NamedTuple):
    t: float
    A: Optional[np.ndarray]
    w: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    metrics: Dict[str, float]


@dataclass
class Trajectory:
    """Samples of one run, stored column-wise.

    ``A`` is ``None`` for the manager model (or when matrices are not stored).
    ``min_entry`` and ``max_row_drift`` are tracked over every step, not only
    at sample times.
    """

    t: np.ndarray
    w: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    A: Optional[np.ndarray]
    metrics: Dict[str, np.ndarray]
    status: str
    steps: int
    min_entry: float
    max_row_drift: float

    def __len__(self):
        return self.t.size

    @property
    def samples(self) -> List[Sample]:
        return [self[k] for k in range(len(self))]

    def __getitem__(self, k) -> Sample:
        return Sample(
            float(self.t[k]),
            None if self.A is None else self.A[k],
            self.w[k], self.p[k], self.phi[k],
            {name: float(v[k]) for name, v in self.metrics.items()},
        )

    @property
    def final(self) -> Sample:
        return self[len(self) - 1]


MetricHook = Callable[[Sample], float]


def check_initial_state(spec: ModelSpec, state) -> np.ndarray:
    """Validate an initial state against what ``spec`` needs to be well posed.

    The eigenvector assignment needs an irreducible start; without opinion
    exchange the self-appraisals must also be positive, with it the start
    must be primitive.
    """
    try:
        return _check_initial_state(spec, state)
    except DomainError as e:
        raise ConfigError(f"invalid initial state: {e}") from None


def _check_initial_state(spec, state):
    n = spec.n
    if spec.model == "manager":
        w = assignment(state)
        if w.shape != (n,):
            raise ConfigError(f"initial assignment has shape {w.shape}, expected {(n,)}")
        return w
    A = appraisal_matrix(state)
    if A.shape != (n, n):
        raise ConfigError(f"initial appraisals have shape {A.shape}, expected {(n, n)}")
    rep = classify_connectivity(A)
    if spec.assignment_rule == "eigenvector":
        if spec.model == "assign_appraise" and not (rep.irreducible and rep.positive_diagonal):
            raise ConfigError("initial appraisals must be irreducible with positive self-appraisals")
        if spec.model == "assign_appraise_influence" and not rep.primitive:
            raise ConfigError("initial appraisals must be primitive")
    elif np.any(A.sum(axis=0) <= 0):
        raise ConfigError("in-degree assignment needs every member appraised by someone")
    return A


class _Stack:
    """Model parameters of a batch, stacked along a leading axis."""

    def __init__(self, specs: Sequence[ModelSpec], states: np.ndarray):
        head = specs[0]
        for s in specs[1:]:
            if (s.model, s.assignment_rule, s.influence_rule, s.f) != (
                    head.model, head.assignment_rule, head.influence_rule, head.f):
                raise ConfigError("a batch must share model, rules and performance function")
            if s.n != head.n:
                raise ConfigError("a batch must share the team size")
        self.model = head.model
        self.rule = head.assignment_rule
        self.influence = head.influence_rule
        self.f = head.f
        self.n = head.n
        self.x = np.stack([s.x for s in specs])
        if self.model == "manager":
            return
        self.M = np.stack([s.M for s in specs])
        self.gains = np.stack([s.gains for s in specs])
        self.tau_ave = np.array([s.params.tau_ave for s in specs])[:, None, None]
        self.tau_app = np.array([s.params.tau_app for s in specs])[:, None, None]
        if self.influence == "friedkin_johnsen":
            self.lam = np.stack([s.params.prejudice for s in specs])
            self.A0 = np.stack([states[b] if s.A0 is None else s.A0
                                for b, s in enumerate(specs)])


def _take(a, idx):
    return a if idx is None else a[idx]


class _Flow:
    """Batched right-hand side with a warm-started assignment cache."""

    def __init__(self, stack: _Stack, cfg: IntegratorConfig, w0: np.ndarray):
        self.s = stack
        self.cfg = cfg
        self.warm = w0

    def assign(self, y, idx):
        s = self.s
        if s.model == "manager":
            w = y
            bad = ~(y > 0).all(axis=-1)
        elif s.rule == "eigenvector":
            w, res, _ = perron_left(y, _take(self.warm, idx), self.cfg.eig_tol,
                                    self.cfg.eig_max_iter, self.cfg.eig_method,
                                    strict=False)
            bad = (res > self.cfg.eig_tol) | ~(w > 0).all(axis=-1)
        else:
            w = in_degree_assignment(y)
            bad = ~(w > 0).all(axis=-1)
        if bad.any():
            w = np.where(bad[:, None], 1.0 / s.n, w)
        return w, bad

    def observe(self, w, idx):
        s = self.s
        p = s.f(_take(s.x, idx) / w)
        if s.model == "manager":
            return p, p - (w * p).sum(axis=-1, keepdims=True)
        return p, feedback_signal(p, _take(s.M, idx))

    def __call__(self, y, idx, first=False):
        s = self.s
        w, bad = self.assign(y, idx)
        if first and s.model != "manager" and s.rule == "eigenvector":
            if idx is None:
                self.warm = w
            else:
                self.warm[idx] = w
        if s.model == "manager":
            return _manager(w, _take(s.x, idx), s.f), bad
        _, phi = self.observe(w, idx)
        dA = _appraise_term(y, phi, _take(s.gains, idx))
        if s.model == "assign_appraise":
            return dA, bad
        dA = dA / _take(s.tau_app, idx)
        if s.influence == "degroot":
            drift = _degroot_term(y)
        else:
            drift = _prejudice_term(y, _take(s.lam, idx), _take(s.A0, idx))
        return dA + drift / _take(s.tau_ave, idx), bad


def _rk4(flow, y, idx, h):
    k1, bad = flow(y, idx, first=True)
    k2, b2 = flow(y + 0.5 * h * k1, idx)
    k3, b3 = flow(y + 0.5 * h * k2, idx)
    k4, b4 = flow(y + h * k3, idx)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1, bad | b2 | b3 | b4


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _dopri(flow, y, idx, h):
    ks = []
    bad = np.zeros(y.shape[0], dtype=bool)
    for i in range(7):
        yi = y
        for aij, kj in zip(_DP_A[i], ks):
            yi = yi + h * aij * kj
        k, b = flow(yi, idx, first=(i == 0))
        ks.append(k)
        bad |= b
    y_new = y + h * sum(bj * kj for bj, kj in zip(_DP_B, ks))
    err = h * sum(ej * kj for ej, kj in zip(_DP_E, ks))
    return y_new, ks[0], err, bad


def integrate(spec: ModelSpec, initial_state, cfg: IntegratorConfig = IntegratorConfig(),
              metric_hooks: Optional[Mapping[str, MetricHook]] = None) -> Trajectory:
    """Advance one team from ``initial_state`` (``w`` for the manager, ``A`` otherwise)."""
    return integrate_batch([spec], [initial_state], cfg, metric_hooks)[0]


def integrate_batch(specs: Sequence[ModelSpec], initial_states,
                    cfg: IntegratorConfig = IntegratorConfig(),
                    metric_hooks: Optional[Mapping[str, MetricHook]] = None) -> List[Trajectory]:
    """Advance several independent teams in lock-step and return one trajectory each.

    Every spec must share model, rules, performance function and team size.
    After each step entries in ``[clamp_floor, 0)`` are clamped to zero and
    rows renormalised; an entry below ``clamp_floor`` stops that member with
    status ``positivity_lost``.
    """
    if not specs:
        return []
    if len(specs) != len(initial_states):
        raise ConfigError("need one initial state per spec")
    y = np.stack([check_initial_state(s, y0) for s, y0 in zip(specs, initial_states)])
    stack = _Stack(specs, y)
    B, n = y.shape[0], stack.n
    is_matrix = stack.model != "manager"
    flow = _Flow(stack, cfg, np.full((B, n), 1.0 / n))

    w0, bad0 = flow.assign(y, None)
    if bad0.any():
        raise ConfigError("assignment undefined for the initial state")
    flow.warm = w0.copy()

    n_steps = int(round(cfg.t_end / cfg.h))
    every = max(1, int(round(cfg.sample_every / cfg.h)))
    cap = (n_steps // every + 2) if cfg.method == "rk4" else 64
    rec = _Recorder(B, n, cap, is_matrix and cfg.store_matrix)

    status = np.array([T_END_REACHED] * B, dtype=object)
    active = np.ones(B, dtype=bool)
    quiet_since = np.full(B, np.nan)
    t_member = np.zeros(B)
    steps = np.zeros(B, dtype=int)
    min_entry = y.reshape(B, -1).min(axis=1)
    max_drift = np.zeros(B)

    def sample(idx, t):
        members = np.flatnonzero(idx)
        if members.size == 0:
            return
        ys = y[members]
        w, _ = flow.assign(ys, members)
        p, phi = flow.observe(w, members)
        rec.add(members, t, ys if is_matrix else None, w, p, phi)

    sample(active, 0.0)
    rec.next_t = cfg.sample_every
    t, h, k = 0.0, cfg.h, 0
    while active.any() and t < cfg.t_end - 1e-12 * cfg.t_end:
        idx = None if active.all() else np.flatnonzero(active)
        ya = _take(y, idx)
        if cfg.method == "rk4":
            y_new, k1, bad = _rk4(flow, ya, idx, h)
            h_used = h
        else:
            h = min(h, cfg.t_end - t)
            y_new, k1, err, bad = _dopri(flow, ya, idx, h)
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(ya), np.abs(y_new))
            enorm = np.sqrt(np.mean((err / scale).reshape(err.shape[0], -1) ** 2, axis=1))
            emax = float(enorm[~bad].max()) if (~bad).any() else 0.0
            if emax > 1.0 and h > cfg.h_min:
                h = max(cfg.h_min, h * max(0.2, 0.9 * emax ** -0.2))
                continue
            h_used = h
            h = h * min(5.0, 0.9 * max(emax, 1e-10) ** -0.2)
        k += 1
        t_new = k * cfg.h if cfg.method == "rk4" else t + h_used
        members = np.flatnonzero(active)

        # derivative at the start of the step drives the convergence test
        dnorm = np.abs(k1).reshape(k1.shape[0], -1).max(axis=1)
        flat = y_new.reshape(y_new.shape[0], -1)
        lowest = flat.min(axis=1)
        # an overshooting step can also break the assignment; report the root cause
        lost = lowest < cfg.clamp_floor
        bad = bad & ~lost

        status[members[bad]] = EIGENVECTOR_FAILED
        status[members[lost]] = POSITIVITY_LOST
        for m in members[lost]:
            log.warning("member %d lost positivity at t=%.6g (entry %.3g)",
                        m, t_new, flat[np.flatnonzero(members == m)[0]].min())
        stopped = bad | lost

        keep = ~stopped
        ok = members[keep]
        yk = y_new[keep]
        yk = np.where((yk < 0) & (yk >= cfg.clamp_floor), 0.0, yk)
        rows = yk.sum(axis=-1, keepdims=True)
        tail = tuple(range(1, yk.ndim))
        drift = np.abs(rows - 1.0).max(axis=tail, initial=0.0)
        max_drift[ok] = np.maximum(max_drift[ok], drift)
        y[ok] = yk / rows
        min_entry[ok] = np.minimum(min_entry[ok], y[ok].min(axis=tail, initial=np.inf))
        t_member[ok] = t_new
        steps[ok] += 1

        quiet = dnorm[keep] < cfg.convergence_tol
        qs = quiet_since[ok]
        qs = np.where(quiet, np.where(np.isnan(qs), t, qs), np.nan)
        quiet_since[ok] = qs
        conv = quiet & (t_new - qs >= cfg.convergence_window - 1e-12)
        if cfg.stop_on_convergence:
            status[ok[conv]] = CONVERGED
        else:
            conv[:] = False

        active[members[stopped]] = False
        active[ok[conv]] = False

        due = np.zeros(B, dtype=bool)
        on_grid = (k % every == 0) if cfg.method == "rk4" else (t_new >= rec.next_t - 1e-12)
        if on_grid:
            due[ok] = True
        due[ok[conv]] = True
        t = t_new
        if cfg.method == "rk45" and on_grid:
            rec.next_t = (np.floor(t / cfg.sample_every + 1e-9) + 1) * cfg.sample_every
        # final state of every member that is still running at t_end
        if t >= cfg.t_end - 1e-12 * cfg.t_end:
            due[ok] = True
        due &= rec.last_t < t - 1e-15
        sample(due, t)

    # members stopped by a failure keep their last valid state as terminal sample
    for m in range(B):
        if rec.last_t[m] < t_member[m] - 1e-15:
            sample(np.arange(B) == m, t_member[m])

    trajs = rec.build(status, steps, min_entry, max_drift)
    if metric_hooks:
        for tr in trajs:
            for name, hook in metric_hooks.items():
                sams = [Sample(float(tr.t[i]), None if tr.A is None else tr.A[i],
                               tr.w[i], tr.p[i], tr.phi[i], {}) for i in range(len(tr))]
                tr.metrics[name] = np.array([hook(s) for s in sams], dtype=float)
    return trajs


class _Recorder:
    """Per-member growable sample buffers."""

    def __init__(self, B, n, cap, store_matrix):
        self.B, self.n = B, n
        self.count = np.zeros(B, dtype=int)
        self.last_t = np.full(B, -np.inf)
        self.next_t = 0.0
        self.store_matrix = store_matrix
        self.t = np.zeros((B, cap))
        self.w = np.zeros((B, cap, n))
        self.p = np.zeros((B, cap, n))
        self.phi = np.zeros((B, cap, n))
        self.A = np.zeros((B, cap, n, n)) if store_matrix else None

    def _grow(self):
        def g(a):
            return None if a is None else np.concatenate([a, np.zeros_like(a)], axis=1)
        self.t, self.w, self.p, self.phi, self.A = map(g, (self.t, self.w, self.p, self.phi, self.A))

    def add(self, members, t, A, w, p, phi):
        while self.count[members].max() >= self.t.shape[1]:
            self._grow()
        c = self.count[members]
        self.t[members, c] = t
        self.w[members, c] = w
        self.p[members, c] = p
        self.phi[members, c] = phi
        if self.store_matrix and A is not None:
            self.A[members, c] = A
        self.count[members] += 1
        self.last_t[members] = t

    def build(self, status, steps, min_entry, max_drift):
        out = []
        for b in range(self.B):
            c = self.count[b]
            out.append(Trajectory(
                t=self.t[b, :c].copy(), w=self.w[b, :c].copy(), p=self.p[b, :c].copy(),
                phi=self.phi[b, :c].copy(),
                A=None if self.A is None else self.A[b, :c].copy(),
                metrics={}, status=str(status[b]), steps=int(steps[b]),
                min_entry=float(min_entry[b]), max_row_drift=float(max_drift[b]),
            ))
        return out


def solve_ode(rhs: Callable[[np.ndarray], np.ndarray], y0, t_end: float, h: float,
              sample_every: Optional[float] = None):
    """Classic RK4 for a plain autonomous ODE; returns sample times and states.

    Used for the reduced and replicator forms, which need no manifold handling.
    """
    y = np.array(y0, dtype=float)
    n_steps = int(round(t_end / h))
    every = 1 if sample_every is None else max(1, int(round(sample_every / h)))
    ts, ys = [0.0], [y.copy()]
    for k in range(1, n_steps + 1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % every == 0 or k == n_steps:
            ts.append(k * h)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)
