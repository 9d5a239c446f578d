"""Pseudo-spectral solver for the damped quasi-geostrophic equation.

    d/dt [(beta - m Lap) Q] = m perp_grad Q . grad Lap Q - mu Lap^2 Q + damp Lap Q

on a periodic square.  The linear part is integrated exactly (exponential
time differencing), the Jacobian by a second-order multistep formula.
Q is kept inside the 2/3-rule band, with the mean mode pinned to zero.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .ekman import pumping_coefficient
from .hydrostatic import vertical_averages
from .spectral_ops import Grid


class StepSizeError(RuntimeError):
    """Time step violates the advective CFL bound."""


class DivergenceError(RuntimeError):
    """Non-finite values appeared in the solution."""


@dataclass(frozen=True)
class QGParams:
    beta: float
    m: float
    mu: float
    damp: float
    L_h: float = 2 * np.pi
    N_h: int = 64
    dt: float = 1e-3
    cfl: float = 1.0

    def __post_init__(self):
        if not (self.beta > 0 and self.m > 0 and self.mu >= 0 and self.damp >= 0):
            raise ValueError("beta and m must be positive; mu and damp non-negative")
        if not (self.dt > 0 and self.L_h > 0):
            raise ValueError("dt and L_h must be positive")
        Grid((self.N_h, self.N_h), (self.L_h, self.L_h))

    @classmethod
    def from_profile(cls, profile, mu, **kw):
        av = vertical_averages(profile)
        r0, r1 = profile.rho_bar_wall
        return cls(beta=av.avg_rho_over_Pprime, m=av.avg_rho, mu=mu,
                   damp=float(pumping_coefficient(r0, r1)), **kw)

    @property
    def grid(self):
        return Grid((self.N_h, self.N_h), (self.L_h, self.L_h))


@dataclass(frozen=True)
class QGState:
    Q: np.ndarray
    t: float = 0.0
    prev_nonlinear: np.ndarray | None = None  # spectral N/W from the previous step


class _Spectral:
    """Cached wavenumber arrays for one parameter set."""

    _cache: dict = {}

    def __new__(cls, params):
        key = (params.N_h, params.L_h, params.beta, params.m, params.mu, params.damp)
        obj = cls._cache.get(key)
        if obj is None:
            obj = super().__new__(cls)
            obj._setup(params)
            cls._cache[key] = obj
        return obj

    def _setup(self, p):
        n = p.N_h
        self.k1, self.k2 = p.grid.k()
        self.ksq = self.k1 ** 2 + self.k2 ** 2
        # integer indices, not the derivative wavenumbers: those zero the Nyquist entry
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        cut = (2.0 / 3.0) * (n // 2)
        self.band = (idx[:, None] < cut) & (idx[None, :] < cut)
        self.band[0, 0] = False
        self.W = p.beta + p.m * self.ksq
        self.Lin = -(p.mu * self.ksq ** 2 + p.damp * self.ksq)
        self.rate = self.Lin / self.W
        self._phi = {}

    def phis(self, dt):
        if dt not in self._phi:
            z = self.rate * dt
            small = np.abs(z) < 1e-3
            zs = np.where(small, 1.0, z)
            e = np.exp(z)
            phi1 = np.where(small, 1 + z / 2 + z ** 2 / 6 + z ** 3 / 24, np.expm1(zs) / zs)
            phi2 = np.where(small, 0.5 + z / 6 + z ** 2 / 24 + z ** 3 / 120,
                            (np.expm1(zs) - zs) / zs ** 2)
            self._phi[dt] = (e, phi1, phi2)
        return self._phi[dt]


def _fft(f):
    return np.fft.fft2(f)


def _ifft(fh):
    return np.fft.ifft2(fh).real


def project(Q, params):
    """Restrict to the dealiased band with zero mean."""
    sp = _Spectral(params)
    return _ifft(_fft(Q) * sp.band)


def velocity(Q, params):
    """``u0h = perp_grad Q = (-d2 Q, d1 Q)``."""
    sp = _Spectral(params)
    Qh = _fft(Q)
    return np.stack([_ifft(-1j * sp.k2 * Qh), _ifft(1j * sp.k1 * Qh)])


def jacobian_hat(Q, params, Q2=None):
    """Spectral, dealiased ``m perp_grad Q . grad Lap Q2`` (``Q2`` defaults to ``Q``)."""
    sp = _Spectral(params)
    Qh = _fft(Q)
    Q2h = Qh if Q2 is None else _fft(Q2)
    u1 = _ifft(-1j * sp.k2 * Qh)
    u2 = _ifft(1j * sp.k1 * Qh)
    lap = -sp.ksq * Q2h
    w1 = _ifft(1j * sp.k1 * lap)
    w2 = _ifft(1j * sp.k2 * lap)
    return params.m * _fft(u1 * w1 + u2 * w2) * sp.band


def dQdt(Q, params):
    """Time derivative from the equation itself."""
    sp = _Spectral(params)
    rhs = sp.Lin * _fft(Q) + jacobian_hat(Q, params)
    return _ifft(rhs / sp.W)


def d2Qdt2(Q, params, Qt=None):
    """Second time derivative, differentiating the right-hand side along the flow."""
    sp = _Spectral(params)
    Qt = dQdt(Q, params) if Qt is None else Qt
    rhs = sp.Lin * _fft(Qt) + jacobian_hat(Qt, params, Q) + jacobian_hat(Q, params, Qt)
    return _ifft(rhs / sp.W)


def max_velocity(Q, params):
    u = velocity(Q, params)
    return float(np.sqrt((u ** 2).sum(axis=0)).max())


def qg_step(state, params):
    sp = _Spectral(params)
    dt = params.dt
    dx = params.L_h / params.N_h
    umax = max_velocity(state.Q, params)
    if umax * dt > params.cfl * dx:
        raise StepSizeError(f"dt={dt} exceeds CFL bound {params.cfl * dx / umax:.3e}")
    Qh = _fft(state.Q) * sp.band
    N = jacobian_hat(state.Q, params) / sp.W
    e, phi1, phi2 = sp.phis(dt)
    if state.prev_nonlinear is None:
        new = e * Qh + dt * phi1 * N
    else:
        new = e * Qh + dt * ((phi1 + phi2) * N - phi2 * state.prev_nonlinear)
    new *= sp.band
    Q = _ifft(new)
    if not np.all(np.isfinite(Q)):
        raise DivergenceError(f"non-finite stream function at t={state.t + dt}")
    return QGState(Q=Q, t=state.t + dt, prev_nonlinear=N)


def initial_state(Q, params):
    return QGState(Q=project(np.asarray(Q, dtype=float), params), t=0.0)


def run(state, params, t_end, callback=None):
    """Fixed-step loop; ``callback(state)`` is called after every step."""
    nsteps = int(round((t_end - state.t) / params.dt))
    for _ in range(nsteps):
        state = qg_step(state, params)
        if callback is not None:
            callback(state)
    return state


def single_mode(params, n1, n2, amp=1.0):
    """``amp * cos(k . x)`` for integer wave numbers ``(n1, n2)``."""
    x1, x2 = params.grid.coords()
    c = 2 * np.pi / params.L_h
    return amp * np.cos(c * (n1 * x1 + n2 * x2))


def mode_rate(params, n1, n2):
    """Exact decay rate of a single mode."""
    ksq = (2 * np.pi / params.L_h) ** 2 * (n1 ** 2 + n2 ** 2)
    return (params.mu * ksq ** 2 + params.damp * ksq) / (params.beta + params.m * ksq)


def random_field(params, seed, kmax=4, amp=1.0, decay=3.0):
    """Band-limited zero-mean field with spectrum ~ |k|^-decay."""
    rng = np.random.default_rng(seed)
    sp = _Spectral(params)
    shape = (params.N_h, params.N_h)
    nk = np.sqrt(sp.ksq) * params.L_h / (2 * np.pi)
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec = np.where((nk > 0) & (nk <= kmax), np.maximum(nk, 1) ** -decay, 0.0)
    Q = _ifft(coef * spec)
    return amp * Q / np.abs(Q).max()


# energies -------------------------------------------------------------------

def _grad_norms(Q, params, jmax):
    """``||grad^j Q||^2`` for ``j = 0 .. jmax`` by Parseval."""
    sp = _Spectral(params)
    Qh = _fft(Q)
    area = params.L_h ** 2
    p = np.abs(Qh) ** 2 * area / Q.size ** 2
    return np.array([float((sp.ksq ** j * p).sum()) for j in range(jmax + 1)])


@dataclass
class EnergyMonitor:
    """Running hierarchy ``sum_j ||grad^j Q||^2 + ||grad^{j+1} Q||^2`` and its dissipation."""

    params: QGParams
    n: int = 1
    times: list = None
    levels: list = None
    dissipation: list = None
    _last: tuple = None

    def __post_init__(self):
        if not 1 <= self.n <= 4:
            raise ValueError("order n must be in 1..4")
        self.times, self.levels, self.dissipation = [], [], []

    def _eval(self, Q):
        g = _grad_norms(Q, self.params, self.n + 1)
        level = sum(g[j] + g[j + 1] for j in range(self.n))
        rate = sum(g[j + 1] + g[j + 2] for j in range(self.n))
        return level, rate

    def __call__(self, state):
        level, rate = self._eval(state.Q)
        if self._last is None:
            D = 0.0
        else:
            t0, r0 = self._last
            D = self.dissipation[-1] + 0.5 * (state.t - t0) * (r0 + rate)
        self._last = (state.t, rate)
        self.times.append(state.t)
        self.levels.append(level)
        self.dissipation.append(D)

    @property
    def monitored(self):
        return np.asarray(self.levels) + np.asarray(self.dissipation)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", f"energy_n{self.n}", "dissipation", "monitored"])
            for row in zip(self.times, self.levels, self.dissipation, self.monitored):
                w.writerow([repr(float(v)) for v in row])


def qg_energy(state, params, n=1):
    """``(level, dissipation_rate)`` of the order-``n`` hierarchy at one instant."""
    mon = EnergyMonitor(params, n)
    return mon._eval(state.Q)


def jacobian_pairing(Q, params):
    """``<m perp_grad Q . grad Lap Q, Q>``; zero for the dealiased scheme."""
    J = _ifft(jacobian_hat(Q, params))
    return float((J * Q).sum() * (params.L_h / params.N_h) ** 2)


# pressure and velocity ------------------------------------------------------

def recover_velocity_pressure(state, params):
    """``u0h = perp_grad Q`` and ``pi`` with ``-Lap pi = m grad u : grad u``, zero mean."""
    sp = _Spectral(params)
    u = velocity(state.Q, params)
    adv = _advection_hat(u, params)
    div = 1j * sp.k1 * adv[0] + 1j * sp.k2 * adv[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        pih = np.where(sp.ksq > 0, params.m * div / np.where(sp.ksq > 0, sp.ksq, 1), 0)
    return u, _ifft(pih)


def _advection_hat(u, params):
    """Spectral, dealiased ``u . grad u``."""
    sp = _Spectral(params)
    out = []
    for c in u:
        ch = _fft(c)
        g1 = _ifft(1j * sp.k1 * ch)
        g2 = _ifft(1j * sp.k2 * ch)
        out.append(_fft(u[0] * g1 + u[1] * g2) * sp.band)
    return out


def ns2dqg_residual(state, params):
    """Max-norm residual of the 2D momentum balance satisfied by ``(u0h, pi)``."""
    sp = _Spectral(params)
    u, pi = recover_velocity_pressure(state, params)
    Qt_h = _fft(dQdt(state.Q, params))
    with np.errstate(divide="ignore", invalid="ignore"):
        invlap = np.where(sp.ksq > 0, -1.0 / np.where(sp.ksq > 0, sp.ksq, 1), 0)
    # d/dt (m - beta Lap^{-1}) u, with u = perp_grad Q
    Z = (params.m - params.beta * invlap) * Qt_h
    adv = _advection_hat(u, params)
    pih = _fft(pi)
    res = []
    for i, (kk, sgn) in enumerate(((sp.k2, -1), (sp.k1, 1))):
        uh = _fft(u[i])
        r = (sgn * 1j * kk * Z + params.m * adv[i] + params.mu * sp.ksq * uh
             + params.damp * uh + 1j * (sp.k1, sp.k2)[i] * pih)
        res.append(_ifft(r))
    return float(np.abs(np.stack(res)).max())


def with_dt(params, dt):
    return replace(params, dt=dt)
