import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ekmanqg import qg
from ekmanqg.hydrostatic import solve_profile
from ekmanqg.pressure import PressureLaw

BASE = dict(beta=0.5, m=1.75, mu=1.0, damp=(np.sqrt(2.0) + np.sqrt(1.5)) / np.sqrt(2.0))


def params(N=32, dt=1e-3, **kw):
    return qg.QGParams(**{**BASE, **kw}, N_h=N, dt=dt)


def test_from_profile_defaults():
    p = qg.QGParams.from_profile(solve_profile(PressureLaw(2.0), 2.0, 64), 1.0)
    assert p.beta == pytest.approx(0.5)
    assert p.m == pytest.approx(1.75)
    assert p.damp == pytest.approx(BASE["damp"])


def test_param_validation():
    with pytest.raises(ValueError):
        qg.QGParams(beta=0.0, m=1.0, mu=1.0, damp=1.0)
    with pytest.raises(ValueError):
        qg.QGParams(beta=1.0, m=1.0, mu=1.0, damp=1.0, N_h=30)


@pytest.mark.parametrize("n1,n2", [(1, 0), (2, 1)])
def test_single_mode_exact_decay(n1, n2):
    p = params(N=32)
    Q0 = qg.single_mode(p, n1, n2, 0.7)
    st_ = qg.run(qg.initial_state(Q0, p), p, 0.5)
    exact = Q0 * np.exp(-qg.mode_rate(p, n1, n2) * st_.t)
    assert np.abs(st_.Q - exact).max() <= 1e-9 * np.abs(exact).max()


def test_jacobian_conserves_weighted_energy(rng):
    p = params()
    Q = qg.random_field(p, 3)
    assert abs(qg.jacobian_pairing(Q, p)) < 1e-12
    # pairing with Lap Q also vanishes
    J = np.fft.ifft2(qg.jacobian_hat(Q, p)).real
    lap = np.fft.ifft2(-qg._Spectral(p).ksq * np.fft.fft2(Q)).real
    assert abs((J * lap).sum()) < 1e-10 * np.abs(J).sum() * np.abs(lap).max()


def test_mean_mode_and_band():
    p = params(N=16)
    Q = qg.project(np.ones((16, 16)) + qg.single_mode(p, 7, 0), p)
    assert np.abs(Q).max() < 1e-14
    # the Nyquist row and column are outside the band
    x = np.arange(16)
    nyq = np.cos(np.pi * x)[:, None] + np.cos(np.pi * x)[None, :]
    assert np.abs(qg.project(nyq, p)).max() < 1e-14


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_monitored_energy_nonincreasing(seed):
    p = params(N=32, dt=2e-3)
    mon = qg.EnergyMonitor(p, 1)
    s = qg.initial_state(qg.random_field(p, seed), p)
    mon(s)
    qg.run(s, p, 0.2, callback=mon)
    assert np.diff(mon.monitored).max() <= 1e-10 * 0.2


def test_ns2dqg_residual_small():
    p = params(N=32)
    s = qg.initial_state(qg.random_field(p, 1), p)
    assert qg.ns2dqg_residual(s, p) < 1e-10


def test_dQdt_matches_difference():
    p = params(N=32, dt=1e-4)
    s = qg.initial_state(qg.random_field(p, 5, amp=0.3), p)
    s1 = qg.run(s, p, 2e-4)
    fd = (s1.Q - s.Q) / s1.t
    Qt = qg.dQdt(s.Q, p)
    Qtt = qg.d2Qdt2(s.Q, p, Qt)
    assert np.abs(fd - Qt - 0.5 * s1.t * Qtt).max() < 1e-4 * np.abs(Qt).max()


def test_cfl_guard():
    p = params(N=32, dt=0.5, cfl=0.1)
    with pytest.raises(qg.StepSizeError):
        qg.qg_step(qg.initial_state(qg.random_field(p, 0, amp=5.0), p), p)


def test_nan_detected():
    p = params(N=16)
    Q = np.zeros((16, 16))
    Q[0, 0] = np.nan
    with pytest.raises((qg.DivergenceError, qg.StepSizeError)):
        qg.qg_step(qg.QGState(Q), p)


def test_run_deterministic_and_split():
    p = params(N=32)
    s0 = qg.initial_state(qg.random_field(p, 9), p)
    full = qg.run(s0, p, 0.1)
    half = qg.run(qg.run(s0, p, 0.05), p, 0.1)
    assert np.array_equal(full.Q, half.Q)


def test_energy_csv(tmp_path):
    p = params(N=16)
    mon = qg.EnergyMonitor(p, 2)
    s = qg.initial_state(qg.random_field(p, 2), p)
    mon(s)
    qg.run(s, p, 0.01, callback=mon)
    mon.write_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "t,energy_n2,dissipation,monitored" and len(lines) == 12
    with pytest.raises(ValueError):
        qg.EnergyMonitor(p, 0)
