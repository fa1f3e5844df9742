"""Right-hand sides of the team dynamics and their analytic bounds.

The underscored kernels operate on stacks (leading batch axes) and take
already-broadcast parameter arrays; the public functions are the single-team
entry points and validate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    SQRT,
    ConfigError,
    DomainError,
    InfluenceParams,
    PerformanceFunction,
    appraisal_matrix,
    assignment,
    feedback_signal,
    observation_matrix,
    performance,
    skill_vector,
)
from .graph import in_degree_assignment, left_dominant_eigenvector, perron_left

MODELS = ("manager", "assign_appraise", "assign_appraise_influence")
ASSIGNMENT_RULES = ("eigenvector", "in_degree")
INFLUENCE_RULES = ("none", "degroot", "friedkin_johnsen")


@dataclass(frozen=True)
class ModelSpec:
    """Which dynamics to run, and for which team.

    ``x`` is the ground-truth skill vector. ``A0`` anchors the prejudiced
    opinion rule and is filled from the initial state by the integrator when
    left as ``None``.
    """

    x: np.ndarray
    model: str = "assign_appraise"
    assignment_rule: str = "eigenvector"
    influence_rule: str = "none"
    params: InfluenceParams = field(default_factory=InfluenceParams)
    f: PerformanceFunction = SQRT
    M: Optional[np.ndarray] = None
    A0: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "x", skill_vector(self.x))
        n = self.x.size
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.assignment_rule not in ASSIGNMENT_RULES:
            raise ConfigError(f"unknown assignment rule {self.assignment_rule!r}")
        if self.influence_rule not in INFLUENCE_RULES:
            raise ConfigError(f"unknown influence rule {self.influence_rule!r}")
        if self.model == "manager":
            if self.influence_rule != "none":
                raise ConfigError("the manager model has no influence dynamics")
            return
        if self.model == "assign_appraise" and self.influence_rule != "none":
            raise ConfigError("assign_appraise takes influence_rule='none'; "
                              "use assign_appraise_influence for opinion dynamics")
        if self.model == "assign_appraise_influence" and self.influence_rule == "none":
            raise ConfigError("assign_appraise_influence needs an influence rule")
        if self.M is None:
            raise ConfigError(f"model {self.model!r} needs an observation matrix M")
        M = observation_matrix(self.M)
        if M.shape != (n, n):
            raise ConfigError(f"M has shape {M.shape}, expected {(n, n)}")
        object.__setattr__(self, "M", M)
        if self.A0 is not None:
            object.__setattr__(self, "A0", appraisal_matrix(self.A0))
        p = self.params
        if self.influence_rule == "friedkin_johnsen" and p.prejudice is None:
            object.__setattr__(self, "params", InfluenceParams(
                p.tau_ave, p.tau_app, np.full(n, 0.5), p.sensitivities))
        for name in ("prejudice", "sensitivities"):
            v = getattr(self.params, name)
            if v is not None and v.shape != (n,):
                raise ConfigError(f"{name} has shape {v.shape}, expected {(n,)}")

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def gains(self) -> np.ndarray:
        g = self.params.sensitivities
        return np.ones(self.n) if g is None else g


@dataclass(frozen=True)
class ReducedState:
    """Self-appraisals ``a`` plus the fixed Perron vector ``c`` of the off-diagonal profile."""

    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if np.any(a < 0) or np.any(a >= 1):
            raise DomainError("self-appraisals must lie in [0, 1)")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", assignment(self.c))


# -- batched kernels ----------------------------------------------------------

def _diag(A):
    return np.diagonal(A, axis1=-2, axis2=-1)


def _assign(A, rule, warm=None, tol=1e-12, max_iter=100_000):
    if rule == "eigenvector":
        return perron_left(A, warm, tol, max_iter)[0]
    return in_degree_assignment(A)


def _appraise_term(A, phi, gains):
    n = A.shape[-1]
    return (gains * phi * _diag(A))[..., :, None] * (np.eye(n) - A)


def _degroot_term(A):
    return A @ A - A


def _prejudice_term(A, lam, A0):
    return lam[..., :, None] * (A @ A - A) + (1.0 - lam)[..., :, None] * (A0 - A)


def _manager(w, x, f):
    p = f(x / w)
    return w * (p - (w * p).sum(axis=-1, keepdims=True))


# -- public right-hand sides --------------------------------------------------

def _interior(w):
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("state must lie in the interior of the simplex")
    return w


def rhs_manager(w, x, f: PerformanceFunction = SQRT) -> np.ndarray:
    """Replicator flow of a manager reassigning work toward better performers."""
    return _manager(_interior(w), np.asarray(x, dtype=float), f)


def rhs_assign_appraise(A, x, f: PerformanceFunction = SQRT, M=None, gains=None,
                        assignment_rule: str = "eigenvector") -> np.ndarray:
    """Appraisal drift when each member reweights self vs. others by feedback.

    ``dA = diag(g * phi) A_d (I - A)`` with ``phi = p - M p`` and ``p`` taken
    at the assignment produced by ``assignment_rule``. Row sums of ``dA``
    vanish identically.
    """
    A = appraisal_matrix(A)
    x = np.asarray(x, dtype=float)
    M = observation_matrix(M)
    g = np.ones(A.shape[-1]) if gains is None else np.asarray(gains, dtype=float)
    if assignment_rule == "eigenvector":
        w = left_dominant_eigenvector(A, method="direct")
    else:
        w = in_degree_assignment(A)
    phi = feedback_signal(performance(x, w, f), M)
    return _appraise_term(A, phi, g)


def rhs_assign_appraise_influence(A, x, f: PerformanceFunction = SQRT, M=None,
                                  params: InfluenceParams = InfluenceParams(),
                                  rule: str = "degroot", A0=None,
                                  assignment_rule: str = "eigenvector") -> np.ndarray:
    """Appraisal drift with opinion exchange over the appraisal network itself.

    ``rule="degroot"`` adds ``(A @ A - A) / tau_ave``; ``rule="friedkin_johnsen"``
    adds ``(Lam (A @ A - A) + (I - Lam)(A0 - A)) / tau_ave`` instead.
    """
    A = appraisal_matrix(A)
    n = A.shape[-1]
    g = np.ones(n) if params.sensitivities is None else params.sensitivities
    dA = rhs_assign_appraise(A, x, f, M, g, assignment_rule) / params.tau_app
    if rule == "degroot":
        return dA + _degroot_term(A) / params.tau_ave
    if rule == "friedkin_johnsen":
        if A0 is None:
            raise ConfigError("the prejudiced opinion rule needs the initial appraisals A0")
        lam = np.full(n, 0.5) if params.prejudice is None else params.prejudice
        return dA + _prejudice_term(A, lam, appraisal_matrix(A0)) / params.tau_ave
    raise ConfigError(f"unknown influence rule {rule!r}")


def reduced_assignment(a, c) -> np.ndarray:
    """Assignment of a matrix ``diag(a) + (I - diag(a)) C`` from ``a`` and ``c = v_left(C)``."""
    a = np.asarray(a, dtype=float)
    if np.any(a >= 1):
        raise DomainError("self-appraisals must be below 1")
    r = np.asarray(c, dtype=float) / (1.0 - a)
    return r / r.sum(axis=-1, keepdims=True)


def rhs_reduced(s: ReducedState | np.ndarray, x, f: PerformanceFunction = SQRT, M=None,
                c=None, gains=None) -> np.ndarray:
    """Self-appraisal flow ``g_i a_i (1 - a_i) phi_i``.

    Accepts a :class:`ReducedState`, or a raw ``a`` together with ``c``.
    ``gains`` are the feedback sensitivities (default 1).
    """
    if isinstance(s, ReducedState):
        a, c = s.a, s.c
    else:
        a = np.asarray(s, dtype=float)
    w = reduced_assignment(a, c)
    phi = feedback_signal(performance(x, w, f), M)
    g = 1.0 if gains is None else np.asarray(gains, dtype=float)
    return g * a * (1.0 - a) * phi


def rhs_generalized_replicator(w, a, x, f: PerformanceFunction = SQRT, M=None,
                               gains=None) -> np.ndarray:
    """Replicator flow of the assignment with fitness ``g_i * a_i * phi_i``."""
    w = _interior(w)
    g = 1.0 if gains is None else np.asarray(gains, dtype=float)
    fit = g * np.asarray(a, dtype=float) * feedback_signal(performance(x, w, f), M)
    return w * (fit - (w * fit).sum(axis=-1, keepdims=True))


# -- structure and bounds -----------------------------------------------------

def split_appraisals(A):
    """Split ``A = diag(a) + (I - diag(a)) C`` into self-appraisals ``a`` and profile ``C``."""
    A = np.asarray(A, dtype=float)
    a = _diag(A).copy()
    if np.any(a >= 1):
        raise DomainError("a member with self-appraisal 1 has no off-diagonal profile")
    C = A / (1.0 - a)[..., :, None]
    n = A.shape[-1]
    C[..., np.arange(n), np.arange(n)] = 0.0
    return a, C


def reduce_state(A) -> ReducedState:
    a, C = split_appraisals(appraisal_matrix(A))
    return ReducedState(a, left_dominant_eigenvector(C, method="direct"))


def assignment_box_bounds(x, w0):
    """Ratio spread ``gamma0`` and the floor ``xi0`` that bounds every assignment entry.

    ``gamma0 = max(x/w0) / min(x/w0)`` and
    ``xi0 = 1 / (1 + (n - 1) * (max x / min x) * gamma0)``. Along the
    opinion-coupled dynamics each ``w_i(t)`` stays in ``[xi0, 1 - (n-1) xi0]``.
    """
    x = skill_vector(x)
    w0 = assignment(w0)
    r = x / w0
    gamma0 = r.max() / r.min()
    xi0 = 1.0 / (1.0 + (x.size - 1) * (x.max() / x.min()) * gamma0)
    return float(gamma0), float(xi0)


def positivity_tau_ratio_threshold(x, xi0: float, f: PerformanceFunction = SQRT,
                                   n: Optional[int] = None) -> float:
    """Smallest ``tau_app / tau_ave`` that keeps every appraisal bounded away from zero.

    Sufficient (not necessary) condition for an entrywise-positive start.
    """
    x = np.asarray(x, dtype=float)
    n = x.size if n is None else n
    if not 0.0 < xi0 < 1.0 / (n - 1):
        raise DomainError(f"xi0 must lie in (0, 1/(n-1)), got {xi0}")
    gap = f(x.max() / xi0) - f(x.min() / (1.0 - (n - 1) * xi0))
    return max(0.0, float((1.0 - xi0) / xi0 * gap))


def self_appraisal_margin(a0, c, x) -> np.ndarray:
    """Margins ``zeta`` such that ``a_i(t) <= 1 - zeta_i`` for all time.

    ``zeta_i = (c_i / x_i) * min_k (x_k / c_k) (1 - a0_k)``.
    """
    a0 = np.asarray(a0, dtype=float)
    if np.any(a0 < 0) or np.any(a0 >= 1):
        raise DomainError("initial self-appraisals must lie in [0, 1)")
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    return c / x * np.min(x / c * (1.0 - a0), axis=-1, keepdims=True)
