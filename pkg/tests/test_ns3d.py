import numpy as np
import pytest

from ekmanqg.hydrostatic import VacuumError
from ekmanqg.ns3d import (Flow3DState, MACGrid, NS3DSolver, SolverFlags, balance_residual,
                          cell_background, column_profile, run_to, well_prepared_init, with_dt)
from ekmanqg.ns3d import _kernels_py, kernels
from ekmanqg.pressure import ConfigError, PressureLaw
from ekmanqg.spectral_ops import ViscosityParams

LAW = PressureLaw(2.0, 1.0)
EPS = 0.1


def setup(N=8, K=8, dt=5e-3, flags=SolverFlags(), kern=None, law=LAW):
    g = MACGrid(N, K)
    rb = cell_background(column_profile(law, 2.0, g))
    s = NS3DSolver(g, law, rb, ViscosityParams(1.0, EPS, 0.1), EPS, dt, flags, kernels=kern)
    return g, s


def perturbed(g, s, seed=0, amp=0.05):
    rng = np.random.default_rng(seed)
    rho = s.rho_bar * (1 + amp * rng.uniform(-1, 1, s.rho_bar.shape))
    u = [amp * rng.standard_normal(a.shape) for a in g.zeros()[1:]]
    return Flow3DState(rho, *u, t=0.0, eps=EPS)


def rest(g, s):
    return Flow3DState(s.rho_bar.copy(), *g.zeros()[1:], t=0.0, eps=EPS)


def test_grid_validation():
    with pytest.raises(ConfigError):
        MACGrid(12, 8)
    g = MACGrid(8, 4)
    assert g.n_column == 15 and g.dV == pytest.approx((2 * np.pi / 8) ** 2 / 4)


def test_rest_state_is_exact_fixed_point():
    g, s = setup()
    st = rest(g, s)
    for _ in range(20):
        new = s.step(st)
        assert max(np.abs(a - b).max() for a, b in zip(new.fields, st.fields)) <= 1e-12
        st = new


def test_mass_conserved_and_energy_monotone():
    g, s = setup(dt=1e-2)
    st = perturbed(g, s)
    m0 = st.mass(g)
    st, led = run_to(st, s, 0.2)
    assert abs(st.mass(g) - m0) <= 1e-12 * m0
    tot = np.array(led.total)
    assert np.diff(tot).max() <= 1e-12 * tot[0]
    assert led.dissipation[-1] > 0


def test_energy_budget_without_viscosity_is_conserved():
    g, s = setup(dt=1e-2, flags=SolverFlags(viscosity=False))
    st, led = run_to(perturbed(g, s, 2), s, 0.1)
    tot = np.array(led.total)
    assert np.abs(tot - tot[0]).max() <= 1e-12 * tot[0]


def test_coriolis_rotation_exact():
    flags = SolverFlags(pressure=False, viscosity=False, advection=False, freeze_rho=True)
    g, s = setup(dt=2e-2, flags=flags)
    st = perturbed(g, s, 3, amp=1.0)
    ke0 = s.energy(st)[0]
    for _ in range(10):
        new = s.step(st)
        assert abs(s.energy(new)[0] - s.energy(st)[0]) <= 1e-12 * ke0
        assert np.array_equal(new.rho, st.rho)
        st = new
    # the velocity actually rotates
    assert np.abs(st.u1 - perturbed(g, s, 3, amp=1.0).u1).max() > 0.1


def test_linear_problem_converges_fast():
    flags = SolverFlags(advection=False)
    g, s = setup(dt=1e-2, flags=flags)
    s.step(perturbed(g, s, 4, amp=1e-3))
    assert s.iterations[-1] <= 4


def test_backends_agree():
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    g, s1 = setup(kern=kernels.backend("numpy"))
    _, s2 = setup(kern=kernels.backend("cython"))
    st = perturbed(g, s1, 5)
    a, b = s1.step(st), s2.step(st)
    assert max(np.abs(x - y).max() for x, y in zip(a.fields, b.fields)) < 1e-12


def test_pure_kernels_importable():
    assert kernels.backend("numpy") is _kernels_py
    assert kernels.BACKEND in ("numpy", "cython")


def test_run_to_identity_and_split():
    g, s = setup(dt=1e-2)
    st = perturbed(g, s, 6)
    same, led = run_to(st, s, 0.0)
    assert all(np.array_equal(a, b) for a, b in zip(same.fields, st.fields)) and len(led) == 1
    full, led = run_to(st, s, 0.08, sample_every=2)
    assert len(led) == 8 // 2 + 1
    half, _ = run_to(st, s, 0.04)
    rest_, _ = run_to(half, s, 0.08)
    assert all(np.array_equal(a, b) for a, b in zip(full.fields, rest_.fields))
    with pytest.raises(ConfigError):
        run_to(st, s, 0.015)


def test_ledger_csv(tmp_path):
    g, s = setup(dt=1e-2)
    _, led = run_to(perturbed(g, s), s, 0.03)
    led.write_csv(tmp_path / "l.csv")
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "t,kinetic,potential_entropy,dissipation,total" and len(lines) == 5


def test_vacuum_abort():
    g, s = setup(dt=0.5)
    st = perturbed(g, s, 7)
    st.u1 = st.u1 + 50.0 * np.sin(np.arange(g.N))[:, None, None]
    with pytest.raises((VacuumError, RuntimeError)):
        s.step(st)


def test_solver_validation():
    g = MACGrid(8, 8)
    with pytest.raises(ConfigError):
        NS3DSolver(g, LAW, np.ones(4), ViscosityParams(1, 1, 1), 0.1, 1e-3)
    with pytest.raises(VacuumError):
        NS3DSolver(g, LAW, -np.ones(8), ViscosityParams(1, 1, 1), 0.1, 1e-3)
    with pytest.raises(ConfigError):
        NS3DSolver(g, LAW, np.ones(8), ViscosityParams(1, 1, 1), 0.0, 1e-3)


def test_with_dt_shares_setup():
    g, s = setup()
    s2 = with_dt(s, 1e-3)
    assert s2.dt == 1e-3 and s.dt == 5e-3 and s2.grid is s.grid


def test_well_prepared_rest():
    g = MACGrid(8, 8)
    prof = column_profile(LAW, 2.0, g)
    st, _ = well_prepared_init(np.zeros((8, 8)), prof, EPS, g)
    assert np.array_equal(st.rho, np.broadcast_to(cell_background(prof), st.rho.shape))
    assert all(not np.any(u) for u in st.fields[1:])


def test_well_prepared_single_mode():
    g = MACGrid(16, 16)
    prof = column_profile(LAW, 2.0, g)
    x = np.arange(16) * g.dx
    Q = 0.4 * np.cos(x)[:, None] * np.ones(16)
    st, b = well_prepared_init(Q, prof, EPS, g)
    assert st.rho.min() > 0
    h, v = balance_residual(Q, prof, g)
    assert h <= 1e-8 and v <= 1e-8
    # u2 at face x = (i+1) dx, cell-centred y: leading order d1 Q = -0.4 sin x
    mid = g.K // 2
    assert np.allclose(st.u2[:, 0, mid], -0.4 * np.sin(x + g.dx / 2), atol=0.1)
    with pytest.raises(ConfigError):
        well_prepared_init(Q[:8, :8], prof, EPS, g)
