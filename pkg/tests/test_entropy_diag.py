import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ekmanqg.entropy_diag import (EntropyReport, decompose_ess_res, default_sigma, fit_lower_bound,
                                  low_mode_Q, lower_bound_check, theorem_functional)
from ekmanqg.ns3d import Flow3DState, MACGrid, cell_background, column_profile, kernels
from ekmanqg.pressure import ConfigError, PressureLaw, relative_energy

LAW = PressureLaw(2.0, 1.0)


@pytest.fixture
def grid():
    return MACGrid(8, 8)


@pytest.fixture
def rb(grid):
    return cell_background(column_profile(LAW, 2.0, grid))


def _state(rho, grid, eps=0.1, u=None):
    u = u or grid.zeros()[1:]
    return Flow3DState(rho, *u, t=0.0, eps=eps)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.05, 0.6))
def test_partition_covers_domain(seed, sigma):
    rng = np.random.default_rng(seed)
    rb = 1.0 + rng.random(4)
    rho = rb * (1 + rng.uniform(-0.8, 0.8, (3, 3, 4)))
    ess, m = decompose_ess_res(rho, rb, sigma, 0.5)
    assert m["ess"] + m["res"] == pytest.approx(m["total"]) == 18.0
    assert np.array_equal(ess, np.abs(rho - rb) < sigma)


def test_partition_extremes(rb):
    rho = np.broadcast_to(rb, (4, 4, rb.size)).copy()
    s = default_sigma(rb)
    assert decompose_ess_res(rho, rb, s, 1.0)[1]["res"] == 0
    assert decompose_ess_res(rho + 2 * s, rb, s, 1.0)[1]["ess"] == 0


@pytest.mark.parametrize("sigma", [0.0, -0.1, 0.7, 10.0])
def test_sigma_range(rb, sigma):
    with pytest.raises(ConfigError):
        decompose_ess_res(np.ones((2, 2, rb.size)), rb, sigma, 1.0)


def test_functional_vanishes_on_ansatz(grid, rb):
    rng = np.random.default_rng(0)
    rho = rb * (1 + 0.05 * rng.random(grid.zeros()[0].shape))
    u = [rng.standard_normal(a.shape) for a in grid.zeros()[1:]]
    st_ = _state(rho, grid, u=u)
    rep = theorem_functional(st_, st_.fields, LAW, grid, rb)
    assert rep.theorem_functional == 0 and rep.residual_measure == 0


def test_constant_velocity_offset(grid, rb):
    rho = np.broadcast_to(rb, grid.zeros()[0].shape).copy()
    app = (rho,) + tuple(grid.zeros()[1:])
    c = 0.3
    u = [c + a for a in grid.zeros()[1:]]
    rep = theorem_functional(_state(rho, grid, u=u), app, LAW, grid, rb)
    rf = kernels.face_rho(rho)
    expect = grid.dV * c * c * sum(r.sum() for r in rf)
    assert rep.kinetic_error == pytest.approx(expect, rel=1e-13)


def test_gamma2_closed_form(grid, rb):
    # H = a rho^2 for gamma = 2, so E is a (rho - r)^2
    rng = np.random.default_rng(1)
    rho = rb * (1 + 0.3 * rng.uniform(-1, 1, grid.zeros()[0].shape))
    app = (np.broadcast_to(rb, rho.shape),) + tuple(grid.zeros()[1:])
    eps = 0.2
    rep = theorem_functional(_state(rho, grid, eps), app, LAW, grid, rb)
    rel = grid.dV * ((rho - rb) ** 2).sum()
    assert rep.rel_entropy == pytest.approx(rel, rel=1e-12)
    assert rep.theorem_functional == pytest.approx(rel / eps**2, rel=1e-12)


def test_residual_masses(grid, rb):
    rho = np.broadcast_to(rb, grid.zeros()[0].shape).copy()
    s = default_sigma(rb)
    rho[0, 0, 0] += 3 * s
    app = (np.broadcast_to(rb, rho.shape),) + tuple(grid.zeros()[1:])
    rep = theorem_functional(_state(rho, grid), app, LAW, grid, rb, sigma=s)
    assert rep.residual_measure == pytest.approx(grid.dV)
    assert rep.residual_mass_L1 == pytest.approx(3 * s * grid.dV)
    assert rep.residual_mass_Lgamma == pytest.approx(np.sqrt(grid.dV) * 3 * s)


def test_grid_mismatch(grid, rb):
    rho = np.broadcast_to(rb, grid.zeros()[0].shape).copy()
    with pytest.raises(ConfigError):
        theorem_functional(_state(rho, grid), (rho[:4],) + tuple(grid.zeros()[1:]), LAW, grid, rb)


def test_report_rejects_negative():
    with pytest.raises(ValueError):
        EntropyReport(0, 0, 0, -1.0, 0, 0, 0)


def test_lower_bound_gamma2_closed_form():
    # E = (rho - r)^2; off the essential set |rho - r| >= sigma/2, so c = sigma^2/4 is sharp
    rng = np.random.default_rng(2)
    rb = np.linspace(1.0, 2.0, 16)
    s = 0.3
    r = rb + rng.uniform(-s / 2, s / 2, (500, 16))
    rho = rng.uniform(0, 8, (500, 16))
    assert lower_bound_check(rho, r, LAW, s, rb, s * s / 4) == 0
    assert fit_lower_bound(LAW, rb, s, margin=0.0) == pytest.approx(s * s / 4, rel=1e-2)


@pytest.mark.parametrize("gamma", [1.5, 3.0])
def test_fitted_lower_bound_holds(gamma):
    law = PressureLaw(gamma, 1.0)
    rng = np.random.default_rng(3)
    rb = np.linspace(1.0, 2.0, 16)
    s = 0.3
    c = fit_lower_bound(law, rb, s)
    assert c > 0
    r = rb + rng.uniform(-s / 2, s / 2, (4000, 16))
    rho = rng.uniform(1e-3, 9.0, (4000, 16))
    assert lower_bound_check(rho, r, law, s, rb, c) == 0
    # the constant is close to sharp
    assert lower_bound_check(rho, r, law, s, rb, 3 * c) > 0


def test_relative_energy_nonnegative():
    rho = np.linspace(0, 5, 101)
    assert relative_energy(PressureLaw(1.4, 1.0), rho, 1.3).min() >= -1e-15


def test_low_mode_Q_mean_free():
    Q = low_mode_Q(16, 2 * np.pi, 0.5)
    assert abs(Q.mean()) < 1e-15 and np.abs(Q).max() <= 0.5 * 1.9 + 1e-12
