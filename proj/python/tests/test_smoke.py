import math

import numpy as np
import pytest

import mmfg


def vec(*vals):
    return np.asarray(vals, dtype=float)


def instance1():
    s = mmfg.LqSpec.zero(1, 1, 1.0)
    s.Q = [[1.0]]
    s.A = [[0.4]]
    s.B = [[0.3]]
    s.Q_T = [[0.5]]
    s.A_T = [[0.3]]
    s.B_T = [[0.2]]
    s.Q0 = [[0.8]]
    s.A0 = [[0.5]]
    s.Q0_T = [[0.4]]
    s.A0_T = [[0.5]]
    return s


def test_riccati_closed_form():
    spec = mmfg.LqSpec.zero(1, 1, 1.0)
    spec.Q = [[1.0]]
    sol = mmfg.solve_master(spec, 2000)
    ev = mmfg.eval_master(sol, 0.0, vec(1.0), vec(0.0), vec(0.0))
    want = 0.5 * math.tanh(1.0) + math.log(math.cosh(1.0))
    assert abs(ev.U - want) < 1e-8


def test_nash_matches_master_at_moderate_n():
    spec = instance1()
    master = mmfg.solve_master(spec, 1000)
    nash = mmfg.solve_nash(spec, 8, 1000, 10)
    X = vec(0.5, -0.6, -0.2, 0.1, 0.3, -0.4, 0.2, 0.0, 0.6)
    minors = X[1:]
    z_loo = (minors.sum() - minors[0]) / 7
    u1 = mmfg.eval_nash(nash, 1, 0.0, X).value
    U = mmfg.eval_master(master, 0.0, vec(minors[0]), vec(X[0]), vec(z_loo)).U
    assert abs(u1 - U) < 0.05


def test_wasserstein_exact_values():
    a = mmfg.EmpiricalMeasure([vec(0.0), vec(1.0)])
    b = mmfg.EmpiricalMeasure([vec(0.5), vec(0.5)])
    assert mmfg.wasserstein(a, b, 1) == pytest.approx(0.5, abs=1e-14)


def test_config_round_trip_and_errors():
    text = """{
      "d": 1, "d0": 1, "T": 1.0, "Q": 1.0,
      "mu0": {"type": "uniform", "low": [-1.0], "high": [1.0]},
      "x0_init": [0.5]
    }"""
    cfg = mmfg.parse_config(text)
    again = mmfg.parse_config(mmfg.config_to_json(cfg.spec, cfg.sim))
    assert again.spec.T == cfg.spec.T
    with pytest.raises(mmfg.ConfigError):
        mmfg.parse_config('{"d": 1, "d0": 1, "T": 1.0, "QQ": 2.0}')


def test_simulation_is_deterministic():
    spec = instance1()
    sol = mmfg.solve_master(spec, 500)
    cfg = mmfg.SimConfig()
    cfg.dt = 1e-2
    cfg.paths = 20
    cfg.seed = 9
    cfg.mu0 = mmfg.Mu0.uniform_box(vec(-1.0), vec(1.0))
    cfg.x0_init = vec(0.5)
    cfg.cloud_size = 100
    a = mmfg.simulate_equilibrium_flow(sol, cfg)
    b = mmfg.simulate_equilibrium_flow(sol, cfg)
    assert a.columns == b.columns
    assert all((x == y).all() for x, y in zip(a.paths, b.paths))


def test_rate_fit_on_synthetic_convergence():
    spec = instance1()
    mu0 = mmfg.Mu0.uniform_box(vec(-1.0), vec(1.0))
    table = mmfg.run_convergence(spec, mu0, [2, 4, 8], 20, 0.0, 42, 400)
    fit = mmfg.fit_rate(table)
    assert -1.6 < fit.slope < -0.5
