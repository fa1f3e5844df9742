"""Team ground truth, performance model and feedback signals.

All vectors live on the last axis and all matrices on the last two axes, so
every function here also accepts a stack of teams with leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

STATIC_TOL = 1e-12
STATE_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


class ConfigError(ValueError):
    """A model or experiment is configured inconsistently."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def skill_vector(x, tol: float = STATIC_TOL) -> np.ndarray:
    """Validate relative skills: at least two entries, positive, summing to one."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DomainError(f"skill vector must be 1-d with n >= 2, got shape {x.shape}")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("skill levels must be strictly positive")
    if abs(x.sum() - 1.0) > tol:
        raise DomainError(f"skill levels must sum to 1 (sum={x.sum():.17g})")
    return _frozen(x)


def assignment(w, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a workload assignment in the open simplex."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise DomainError(f"assignment must be 1-d, got shape {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise DomainError("assignment must be strictly positive")
    if abs(w.sum() - 1.0) > tol:
        raise DomainError(f"assignment must sum to 1 (sum={w.sum():.17g})")
    return _frozen(w)


def row_stochastic(B, tol: float = STATE_TOL, name: str = "matrix") -> np.ndarray:
    """Validate a square nonnegative matrix whose rows sum to one."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DomainError(f"{name} must be square, got shape {B.shape}")
    if np.any(~np.isfinite(B)) or np.any(B < 0):
        raise DomainError(f"{name} must be entrywise nonnegative")
    drift = np.abs(B.sum(axis=1) - 1.0).max()
    if drift > tol:
        raise DomainError(f"{name} rows must sum to 1 (max drift {drift:.3g})")
    return _frozen(B)


def appraisal_matrix(A, tol: float = STATE_TOL) -> np.ndarray:
    return row_stochastic(A, tol, "appraisal matrix")


def observation_matrix(M, tol: float = STATIC_TOL) -> np.ndarray:
    return row_stochastic(M, tol, "observation matrix")


@dataclass(frozen=True)
class PerformanceFunction:
    """Concave increasing performance curve ``f`` with ``f(0) = 0``.

    ``kind="power"`` gives ``f(r) = r**gamma`` with ``0 < gamma < 1``;
    ``kind="log1p"`` gives ``f(r) = log(1 + r)``.
    """

    kind: str = "power"
    gamma: float = 0.5

    def __post_init__(self):
        if self.kind not in ("power", "log1p"):
            raise ConfigError(f"unknown performance function {self.kind!r}")
        if self.kind == "power" and not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"power-law exponent must be in (0, 1), got {self.gamma}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return r**self.gamma
        return np.log1p(r)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return self.gamma * r ** (self.gamma - 1.0)
        return 1.0 / (1.0 + r)


SQRT = PerformanceFunction("power", 0.5)


@dataclass(frozen=True)
class InfluenceParams:
    """Time scales and per-individual parameters of the social dynamics.

    ``prejudice`` holds the diagonal of ``Lam`` in the prejudiced
    (Friedkin-Johnsen) opinion rule: member ``i`` weights opinion exchange by
    ``lam_i`` and the pull back to its initial appraisals by ``1 - lam_i``.
    ``sensitivities`` are constant per-individual gains on performance feedback.
    """

    tau_ave: float = 1.0
    tau_app: float = 1.0
    prejudice: Optional[np.ndarray] = field(default=None)
    sensitivities: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if not (self.tau_ave > 0 and self.tau_app > 0):
            raise ConfigError("time scales tau_ave and tau_app must be positive")
        if self.prejudice is not None:
            lam = _frozen(self.prejudice)
            if np.any(lam < 0) or np.any(lam > 1):
                raise ConfigError("prejudice weights must lie in [0, 1]")
            object.__setattr__(self, "prejudice", lam)
        if self.sensitivities is not None:
            g = _frozen(self.sensitivities)
            if np.any(g <= 0):
                raise ConfigError("feedback sensitivities must be strictly positive")
            object.__setattr__(self, "sensitivities", g)


def performance(x, w, f: PerformanceFunction = SQRT) -> np.ndarray:
    """Individual performances ``p_i = f(x_i / w_i)``."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("performance is undefined for non-positive workload")
    return f(np.asarray(x, dtype=float) / w)


def feedback_signal(p, M) -> np.ndarray:
    """Each member's own performance minus the observed blend ``M @ p``."""
    p = np.asarray(p, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.shape[-1] != p.shape[-1] or M.shape[-2] != p.shape[-1]:
        raise DomainError(f"dimension mismatch: p {p.shape} vs M {M.shape}")
    return p - np.einsum("...ik,...k->...i", M, p)


def mismatch_h1(x, w) -> np.ndarray:
    """Mismatch ``sum_i |w_i / x_i - 1|``; zero exactly at the optimal assignment."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.abs(w / x - 1.0).sum(axis=-1)
