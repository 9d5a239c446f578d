"""Energy-consistent MAC solver for the scaled rotating compressible system.

Per unit mass the momentum equation is written in vector-invariant form

    u_t = -q x (rho u) - grad K - eps^-2 grad Phi + A u / rho,
    q = (curl u + e3/eps) / rho,  Phi = H'(rho) - H'(rho_bar),

which on the column ``rho_bar`` (with its discrete gravity) is an exact
equilibrium.  Implicit midpoint with a discrete-gradient ``Phi`` makes the
discrete energy budget exact up to the nonlinear solve tolerance:

    KE^{n+1} + PE^{n+1} + dt D^{n+1/2} = KE^n + PE^n.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..hydrostatic import VacuumError
from ..pressure import ConfigError
from ..qg import DivergenceError
from ..spectral_ops import ViscosityParams
from . import kernels as _default_kernels


@dataclass(frozen=True)
class MACGrid:
    """``N x N`` periodic columns of ``K`` cells on ``[0, L_h]^2 x [0, 1]``."""

    N: int
    K: int
    L_h: float = 2 * np.pi

    def __post_init__(self):
        for n in (self.N, self.K):
            if n < 4 or n & (n - 1):
                raise ConfigError("grid sizes must be powers of two, at least 4")
        if not self.L_h > 0:
            raise ConfigError("L_h must be positive")

    @property
    def dx(self):
        return self.L_h / self.N

    @property
    def dz(self):
        return 1.0 / self.K

    @property
    def dV(self):
        return self.dx * self.dx * self.dz

    @property
    def volume(self):
        return self.L_h ** 2

    @property
    def spacing(self):
        return (self.dx, self.dx, self.dz)

    @property
    def n_column(self):
        return 4 * self.K - 1

    def z_cells(self):
        return (np.arange(self.K) + 0.5) * self.dz

    def z_faces(self):
        return np.arange(1, self.K) * self.dz

    def zeros(self):
        N, K = self.N, self.K
        return (np.zeros((N, N, K)), np.zeros((N, N, K)), np.zeros((N, N, K)),
                np.zeros((N, N, K - 1)))


@dataclass
class Flow3DState:
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    t: float
    eps: float

    def __post_init__(self):
        self.rho, self.u1, self.u2, self.u3 = (np.ascontiguousarray(a, dtype=float)
                                               for a in (self.rho, self.u1, self.u2, self.u3))

    @property
    def fields(self):
        return (self.rho, self.u1, self.u2, self.u3)

    def copy(self):
        return Flow3DState(*(a.copy() for a in self.fields), t=self.t, eps=self.eps)

    def mass(self, grid):
        return float(self.rho.sum() * grid.dV)


@dataclass(frozen=True)
class SolverFlags:
    coriolis: bool = True
    pressure: bool = True
    viscosity: bool = True
    advection: bool = True
    freeze_rho: bool = False


@dataclass
class EnergyLedger:
    t: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    potential_entropy: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)

    @property
    def total(self):
        return [k + p + d for k, p, d in zip(self.kinetic, self.potential_entropy, self.dissipation)]

    def append(self, t, kinetic, potential, dissipation):
        self.t.append(float(t))
        self.kinetic.append(float(kinetic))
        self.potential_entropy.append(float(potential))
        self.dissipation.append(float(dissipation))

    def __len__(self):
        return len(self.t)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "kinetic", "potential_entropy", "dissipation", "total"])
            for row in zip(self.t, self.kinetic, self.potential_entropy, self.dissipation, self.total):
                w.writerow([repr(float(v)) for v in row])


class NS3DSolver:
    """Implicit-midpoint stepper; owns the per-wavenumber column preconditioner."""

    def __init__(self, grid, law, rho_bar_c, visc: ViscosityParams, eps, dt,
                 flags=SolverFlags(), tol=1e-12, maxit=50, kernels=None):
        if not eps > 0 or not dt > 0:
            raise ConfigError("eps and dt must be positive")
        rho_bar_c = np.asarray(rho_bar_c, dtype=float)
        if rho_bar_c.shape != (grid.K,):
            raise ConfigError("rho_bar_c must hold one value per cell layer")
        if np.any(rho_bar_c <= 0):
            raise VacuumError("background density not positive")
        self.grid, self.law, self.visc = grid, law, visc
        self.eps, self.dt, self.flags = float(eps), float(dt), flags
        self.tol, self.maxit = tol, maxit
        self.kern = kernels or _default_kernels
        self.f0 = 1.0 / self.eps if flags.coriolis else 0.0
        N, K = grid.N, grid.K
        self.rho_bar_c = rho_bar_c
        self.rho_bar = np.ascontiguousarray(np.broadcast_to(rho_bar_c, (N, N, K)))
        self.H1_bar = law.dH(self.rho_bar)
        self.iterations = []
        self._minv = None

    # -- physics ---------------------------------------------------------------
    def potential_density(self, rho):
        """Cell-wise ``E(rho, rho_bar)``."""
        law, rb = self.law, self.rho_bar
        return law.H(rho) - law.H(rb) - self.H1_bar * (rho - rb)

    def energy(self, state):
        g = self.grid
        r1, r2, r3 = self.kern.face_rho(state.rho)
        ke = 0.5 * g.dV * float((r1 * state.u1 ** 2).sum() + (r2 * state.u2 ** 2).sum()
                                + (r3 * state.u3 ** 2).sum())
        pe = g.dV * float(self.potential_density(state.rho).sum()) / self.eps ** 2
        return ke, pe

    def viscous(self, u1, u2, u3):
        p, (dx, dy, dz) = self.visc, self.grid.spacing
        return self.kern.viscous(u1, u2, u3, p.mu, p.eps_visc, p.lam, dx, dy, dz)

    def dissipation_rate(self, u1, u2, u3):
        if not self.flags.viscosity:
            return 0.0
        A = self.viscous(u1, u2, u3)
        return -self.grid.dV * float(sum((a * u).sum() for a, u in zip(A, (u1, u2, u3))))

    def _tendency(self, rho_old, rho_new, u_old, u_new):
        """Midpoint tendencies ``(d rho/dt, du/dt)``."""
        fl, k = self.flags, self.kern
        dx, dy, dz = self.grid.spacing
        rmid = 0.5 * (rho_old + rho_new)
        ub = [0.5 * (a + b) for a, b in zip(u_old, u_new)]
        rf = k.face_rho(rmid)
        F = [r * u for r, u in zip(rf, ub)]
        drho = np.zeros_like(rho_old) if fl.freeze_rho else -k.divergence(*F, dx, dy, dz)
        du = [np.zeros_like(u) for u in ub]
        if fl.advection or fl.coriolis:
            a = k.vortex_force(*ub, *F, rmid, self.f0, dx, dy, dz, not fl.advection)
            du = [d + x for d, x in zip(du, a)]
        if fl.advection:
            Kbar = 0.5 * (k.cell_kinetic(*u_old) + k.cell_kinetic(*u_new))
            du = [d - x for d, x in zip(du, k.gradient(Kbar, dx, dy, dz))]
        if fl.pressure:
            phi = self.law.H_divided(rho_old, rho_new) - self.H1_bar
            s = 1.0 / self.eps ** 2
            du = [d - s * x for d, x in zip(du, k.gradient(phi, dx, dy, dz))]
        if fl.viscosity:
            du = [d + x / r for d, x, r in zip(du, self.viscous(*ub), rf)]
        return drho, du

    def _linear_tendency(self, drho, du):
        """Tendency linearized about the rest state ``(rho_bar, 0)``."""
        fl, k = self.flags, self.kern
        dx, dy, dz = self.grid.spacing
        rf = k.face_rho(self.rho_bar)
        F = [r * u for r, u in zip(rf, du)]
        t_rho = np.zeros_like(drho) if fl.freeze_rho else -k.divergence(*F, dx, dy, dz)
        t_u = [np.zeros_like(u) for u in du]
        if fl.coriolis:
            a = k.vortex_force(*du, *F, self.rho_bar, self.f0, dx, dy, dz, True)
            t_u = [d + x for d, x in zip(t_u, a)]
        if fl.pressure:
            phi = self.law.d2H(self.rho_bar) * drho / self.eps ** 2
            t_u = [d - x for d, x in zip(t_u, k.gradient(phi, dx, dy, dz))]
        if fl.viscosity:
            t_u = [d + x / r for d, x, r in zip(t_u, self.viscous(*du), rf)]
        return t_rho, t_u

    # -- preconditioner ----------------------------------------------------------
    def _split(self, vec):
        K = self.grid.K
        return vec[..., :K], vec[..., K:2 * K], vec[..., 2 * K:3 * K], vec[..., 3 * K:]

    def _hat(self, fields):
        return np.concatenate([np.fft.rfft2(f, axes=(0, 1)) for f in fields], axis=-1)

    def _build_preconditioner(self):
        g = self.grid
        N, K, n = g.N, g.K, g.n_column
        cols = np.empty((N, N // 2 + 1, n, n), dtype=complex)
        for c in range(n):
            y = list(g.zeros())
            v, lev = (c // K, c % K) if c < 3 * K else (3, c - 3 * K)
            y[v][0, 0, lev] = 1.0
            t_rho, t_u = self._linear_tendency(y[0], y[1:])
            cols[..., c] = self._hat((t_rho, *t_u))
        M = np.eye(n) - 0.5 * self.dt * cols
        self._minv = np.linalg.inv(M).astype(np.complex64)

    def precondition(self, fields):
        if self._minv is None:
            self._build_preconditioner()
        r = self._hat(fields).astype(np.complex64)
        x = np.einsum("abij,abj->abi", self._minv, r)
        N = self.grid.N
        return [np.fft.irfft2(part, s=(N, N), axes=(0, 1)) for part in self._split(x)]

    # -- stepping ------------------------------------------------------------------
    def _residual(self, state, rho_new, u_new):
        drho, du = self._tendency(state.rho, rho_new, state.fields[1:], u_new)
        r_rho = rho_new - state.rho - self.dt * drho
        r_u = [b - a - self.dt * d for a, b, d in zip(state.fields[1:], u_new, du)]
        return r_rho, r_u

    def step(self, state):
        rho_new = state.rho.copy()
        u_new = [u.copy() for u in state.fields[1:]]
        scale_u = max(1.0, max(float(np.abs(u).max(initial=0.0)) for u in u_new))
        scale_rho = float(np.abs(state.rho).max())
        for it in range(self.maxit + 1):
            r_rho, r_u = self._residual(state, rho_new, u_new)
            err = max(float(np.abs(r_rho).max()) / scale_rho,
                      max(float(np.abs(r).max(initial=0.0)) for r in r_u) / scale_u)
            if not np.isfinite(err):
                raise DivergenceError(f"non-finite residual at t={state.t:.6g}")
            if err <= self.tol:
                break
            if it == self.maxit:
                raise DivergenceError(f"midpoint solve stalled at {err:.3e} (t={state.t:.6g})")
            corr = self.precondition((r_rho, *r_u))
            rho_new = rho_new - corr[0]
            u_new = [u - c for u, c in zip(u_new, corr[1:])]
            if np.any(rho_new <= 0):
                raise VacuumError(f"vacuum during solve at t={state.t:.6g}")
        self.iterations.append(it)
        if not self.flags.freeze_rho:
            # conservative flux update closes mass to round-off
            drho, _ = self._tendency(state.rho, rho_new, state.fields[1:], u_new)
            rho_new = state.rho + self.dt * drho
        if np.any(rho_new <= 0):
            raise VacuumError(f"vacuum at t={state.t + self.dt:.6g}")
        new = Flow3DState(rho_new, *u_new, t=state.t + self.dt, eps=state.eps)
        ub = [0.5 * (a + b) for a, b in zip(state.fields[1:], u_new)]
        self.last_dissipation = self.dt * self.dissipation_rate(*ub)
        return new


def ns3d_step(state, solver):
    return solver.step(state)


def run_to(state, solver, t_end, sample_every=1, monitors=()):
    """Fixed-step integration to ``t_end``; returns ``(state, ledger)``.

    The ledger samples the state every ``sample_every`` steps including the
    initial one; ``monitors`` are called as ``m(state)`` at the same instants.
    """
    steps = int(round((t_end - state.t) / solver.dt))
    if steps < 0 or abs(state.t + steps * solver.dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ConfigError("t_end must be reachable in whole steps of dt")
    ledger = EnergyLedger()
    diss = 0.0

    def sample(s):
        ke, pe = solver.energy(s)
        ledger.append(s.t, ke, pe, diss)
        for m in monitors:
            m(s)

    state = state.copy()
    sample(state)
    for n in range(1, steps + 1):
        state = solver.step(state)
        diss += solver.last_dissipation
        if n % sample_every == 0:
            sample(state)
    return state, ledger


def with_dt(solver, dt):
    """A solver sharing everything but the step size (preconditioner rebuilt lazily)."""
    out = object.__new__(NS3DSolver)
    out.__dict__.update(solver.__dict__)
    out.dt, out._minv, out.iterations = float(dt), None, []
    return out
