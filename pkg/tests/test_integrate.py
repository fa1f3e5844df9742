import importlib
import logging

import numpy as np
import pytest

from teamlearn.core import ConfigError, InfluenceParams
from teamlearn.dynamics import ModelSpec
from teamlearn.integrate import (
    CONVERGED,
    EIGENVECTOR_FAILED,
    POSITIVITY_LOST,
    T_END_REACHED,
    IntegratorConfig,
    integrate,
    integrate_batch,
    solve_ode,
)

from conftest import random_stochastic

integ = importlib.import_module("teamlearn.integrate")


def appraise_case(seed=0, n=4):
    rng = np.random.default_rng(seed)
    x = rng.dirichlet(np.ones(n)) * 0.8 + 0.2 / n
    M = random_stochastic(rng, n)
    A0 = random_stochastic(rng, n)
    return ModelSpec(x, model="assign_appraise", M=M), A0


def test_manager_converges_to_skills():
    rng = np.random.default_rng(3)
    x = rng.dirichlet(np.ones(6))
    tr = integrate(ModelSpec(x, model="manager"), np.full(6, 1 / 6),
                   IntegratorConfig(t_end=200.0, stop_on_convergence=False))
    assert tr.status == T_END_REACHED
    assert np.abs(tr.final.w - x).max() < 1e-6
    assert tr.A is None


def test_equilibrium_stays_put():
    n = 4
    A = np.full((n, n), 1 / n)
    spec = ModelSpec(np.full(n, 1 / n), model="assign_appraise",
                     M=random_stochastic(np.random.default_rng(1), n))
    tr = integrate(spec, A, IntegratorConfig(t_end=5.0, stop_on_convergence=False))
    assert tr.status == T_END_REACHED
    assert np.all(tr.A == A)
    # with convergence detection on, the same run stops after one window
    tr = integrate(spec, A, IntegratorConfig(t_end=5.0))
    assert tr.status == CONVERGED and tr.t[-1] == pytest.approx(1.0)


def test_fourth_order_convergence():
    spec, A0 = appraise_case(2)
    spec = ModelSpec(spec.x, model="assign_appraise", M=spec.M,
                     params=InfluenceParams(sensitivities=np.full(4, 5.0)))
    cfg = dict(t_end=2.0, sample_every=2.0, stop_on_convergence=False)
    ref = integrate(spec, A0, IntegratorConfig(h=1e-4, **cfg)).final.A
    errs = [np.abs(integrate(spec, A0, IntegratorConfig(h=h, **cfg)).final.A - ref).max()
            for h in (0.1, 0.05, 0.025)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 8.0 < coarse / fine < 20.0


def test_rk45_matches_rk4():
    spec, A0 = appraise_case(5)
    a = integrate(spec, A0, IntegratorConfig(t_end=3.0, sample_every=0.5,
                                             stop_on_convergence=False))
    b = integrate(spec, A0, IntegratorConfig(method="rk45", h=0.01, t_end=3.0,
                                             sample_every=0.5, stop_on_convergence=False))
    assert b.t[-1] == pytest.approx(3.0)
    assert np.abs(a.final.A - b.final.A).max() < 1e-7
    assert np.all(np.diff(b.t) > 0)


def test_deterministic_and_batch_consistent():
    cases = [appraise_case(s) for s in range(3)]
    cfg = IntegratorConfig(t_end=3.0, sample_every=0.5)
    one = integrate(*cases[1], cfg)
    again = integrate(*cases[1], cfg)
    assert np.array_equal(one.A, again.A) and np.array_equal(one.t, again.t)
    batch = integrate_batch([c[0] for c in cases], [c[1] for c in cases], cfg)
    assert np.allclose(batch[1].A, one.A, atol=1e-13)


def test_samples_and_invariants():
    spec, A0 = appraise_case(7)
    tr = integrate(spec, A0, IntegratorConfig(t_end=2.0, sample_every=0.25,
                                              stop_on_convergence=False))
    assert np.allclose(tr.t, np.arange(9) * 0.25)
    for s in tr.samples:
        assert np.all(s.A >= 0)
        assert np.abs(s.A.sum(axis=1) - 1).max() < 1e-9
        assert np.abs(s.w @ s.A - s.w).max() < 1e-12
    assert tr.max_row_drift < 1e-12
    hooks = {"top": lambda s: float(s.w.max())}
    tr = integrate(spec, A0, IntegratorConfig(t_end=1.0, sample_every=0.5), hooks)
    assert np.allclose(tr.metrics["top"], tr.w.max(axis=1))
    assert tr[1].metrics["top"] == pytest.approx(tr.w[1].max())


def test_positivity_loss_is_reported(caplog):
    spec, A0 = appraise_case(9)
    spec = ModelSpec(spec.x, model="assign_appraise", M=spec.M,
                     params=InfluenceParams(sensitivities=np.full(4, 2000.0)))
    with caplog.at_level(logging.WARNING):
        tr = integrate(spec, A0, IntegratorConfig(h=0.1, t_end=5.0))
    assert tr.status == POSITIVITY_LOST
    assert "lost positivity" in caplog.text
    assert tr.final.A.min() >= 0


def test_eigenvector_failure_mid_run(monkeypatch):
    spec, A0 = appraise_case(4)
    real = integ.perron_left
    calls = {"n": 0}

    def flaky(*args, **kw):
        calls["n"] += 1
        w, res, it = real(*args, **kw)
        if calls["n"] > 20:
            res = np.full_like(res, 1.0)
        return w, res, it

    monkeypatch.setattr(integ, "perron_left", flaky)
    tr = integrate(spec, A0, IntegratorConfig(t_end=1.0, sample_every=0.1))
    assert tr.status == EIGENVECTOR_FAILED
    assert tr.t[-1] < 1.0


def test_initial_state_validation():
    spec, A0 = appraise_case(1)
    Z = A0.copy()
    Z[0] = [0.0, 0.5, 0.5, 0.0]
    with pytest.raises(ConfigError, match="positive self-appraisals"):
        integrate(spec, Z)
    cyc = np.roll(np.eye(4), 1, axis=1)
    inf = ModelSpec(spec.x, model="assign_appraise_influence", influence_rule="degroot", M=spec.M)
    with pytest.raises(ConfigError, match="primitive"):
        integrate(inf, cyc)
    with pytest.raises(ConfigError):
        integrate(ModelSpec(spec.x, model="manager"), np.array([0.5, 0.5, 0.0, 0.0]))
    with pytest.raises(ConfigError):
        IntegratorConfig(h=2.0, t_end=1.0)
    with pytest.raises(ConfigError):
        IntegratorConfig(clamp_floor=1e-3)


def test_in_degree_and_prejudice_run():
    spec, A0 = appraise_case(3)
    s = ModelSpec(spec.x, model="assign_appraise", assignment_rule="in_degree", M=spec.M)
    tr = integrate(s, A0, IntegratorConfig(t_end=1.0))
    assert np.allclose(tr.w, tr.A.sum(axis=1) / 4)
    s = ModelSpec(spec.x, model="assign_appraise_influence", influence_rule="friedkin_johnsen",
                  M=spec.M, params=InfluenceParams(prejudice=np.zeros(4)))
    # no susceptibility: appraisals are pulled straight back to A0
    tr = integrate(s, A0, IntegratorConfig(t_end=1.0, stop_on_convergence=False))
    assert np.abs(tr.final.A - A0).max() < 0.2


def test_solve_ode():
    t, y = solve_ode(lambda y: -y, [1.0, 2.0], 1.0, 0.01, 0.1)
    assert t.size == 11 and t[-1] == pytest.approx(1.0)
    assert np.allclose(y[-1], np.exp(-1.0) * np.array([1.0, 2.0]), atol=1e-9)
