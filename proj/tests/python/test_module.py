import math

import pytest

import xou


def test_solve_base_case():
    rec = xou.solve(mu=0.8, theta=1.0, sigma=0.2, r=0.05, c_b=0.02, c_s=0.02)
    assert rec["tool"]["version"] == xou.__version__
    ds = rec["double_stopping"]
    sw = rec["switching"]
    assert ds["status"] == "solved"
    assert sw["regime"] == "recurrent"
    assert abs(ds["b_star"]["log"] - 1.1310) < 1e-3
    assert ds["a_star"]["log"] < ds["d_star"]["log"] < sw["d_tilde"]["log"]
    assert sw["b_tilde"]["log"] < ds["b_star"]["log"]
    assert math.isclose(ds["b_star"]["price"], math.exp(ds["b_star"]["log"]), rel_tol=1e-9)


def test_never_enter_case():
    rec = xou.solve(0.8, 1.0, 0.2, 0.05, 5.0, 0.02)
    assert rec["double_stopping"]["status"] == "trivial"
    assert rec["switching"]["regime"] == "no_entry"


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        xou.solve(-0.8, 1.0, 0.2, 0.05, 0.02, 0.02)


def test_eigenfunctions_monotone():
    xs = [-2.0, 0.0, 1.0, 2.0]
    log_f, log_g = xou.eigenfunctions(0.8, 1.0, 0.2, 0.05, xs)
    assert all(a < b for a, b in zip(log_f, log_f[1:]))
    assert all(a > b for a, b in zip(log_g, log_g[1:]))


def test_verify_and_perturb():
    ok = xou.verify_switching(0.8, 1.0, 0.2, 0.05, 0.02, 0.02)
    assert ok["passed"] and ok["max_abs"] < 1e-6
    bad = xou.verify_switching(0.8, 1.0, 0.2, 0.05, 0.02, 0.02, perturb_b=0.05)
    assert not bad["passed"]


def test_path_and_calibration():
    dt = 1.0 / 52.0
    x = xou.sample_path(2.0, 0.5, 0.3, 0.05, x0=0.5, dt=dt, n_steps=20000, seed=4)
    assert x == xou.sample_path(2.0, 0.5, 0.3, 0.05, x0=0.5, dt=dt, n_steps=20000, seed=4)
    fit = xou.calibrate(x, dt)
    assert abs(fit["mu"] - 2.0) < 4 * fit["se_mu"]
    assert abs(fit["theta"] - 0.5) < 4 * fit["se_theta"]
    assert abs(fit["sigma"] - 0.3) < 4 * fit["se_sigma"]
    with pytest.raises(ValueError):
        xou.calibrate(x[:29], dt)
