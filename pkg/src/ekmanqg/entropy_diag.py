"""Relative-entropy diagnostics between a 3D flow state and the ansatz."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ansatz
from .hydrostatic import VacuumError
from .pressure import ConfigError, PressureLaw, relative_energy
from .qg import DivergenceError, QGState, run as qg_run, with_dt as qg_with_dt
from .spectral_ops import ViscosityParams


class StudyError(RuntimeError):
    """A solver abort inside the eps study; ``partial`` holds finished runs."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


def _check_sigma(sigma, rho_bar):
    inf = float(np.min(rho_bar))
    if not (0.0 < sigma < inf and sigma < 2.0 / 3.0):
        raise ConfigError(f"sigma={sigma} must lie in (0, min(inf rho_bar={inf:.4g}, 2/3))")


def default_sigma(rho_bar):
    return min(2.0 / 3.0, float(np.min(rho_bar))) / 2.0


def decompose_ess_res(rho, rho_bar, sigma, dV):
    """Essential mask ``|rho - rho_bar| < sigma`` and the measures of both sets."""
    rho_bar = np.broadcast_to(rho_bar, np.shape(rho))
    _check_sigma(sigma, rho_bar)
    ess = np.abs(rho - rho_bar) < sigma
    n_ess = int(ess.sum())
    measures = {"ess": n_ess * dV, "res": (ess.size - n_ess) * dV, "total": ess.size * dV}
    return ess, measures


@dataclass
class EntropyReport:
    rel_entropy: float
    kinetic_error: float
    dissipation_error: float
    theorem_functional: float
    residual_measure: float
    residual_mass_Lgamma: float
    residual_mass_L1: float

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v >= 0.0:
                raise ValueError(f"{k} must be non-negative, got {v}")


def kinetic_error(state, app, kern, dV):
    """``sum rho_face |u - u_app|^2`` over all faces."""
    rf = kern.face_rho(state.rho)
    return dV * float(sum((r * (u - ua) ** 2).sum()
                          for r, u, ua in zip(rf, state.fields[1:], app[1:])))


def theorem_functional(state, app, law, grid, rho_bar, sigma=None, dissipation_error=0.0,
                       kern=None):
    """Error functional ``int rho |du|^2 + eps^-2 int E(rho, rho_app)`` with residual monitors.

    ``app`` holds the ansatz ``(rho, u1, u2, u3)`` on the same MAC grid.
    """
    from .ns3d import kernels as default_kern
    kern = kern or default_kern
    if len(app) != 4 or any(np.shape(a) != np.shape(f) for a, f in zip(app, state.fields)):
        raise ConfigError("state and ansatz live on different grids")
    dV, eps = grid.dV, state.eps
    rho, rho_app = state.rho, app[0]
    if np.any(rho_app <= 0):
        raise VacuumError("ansatz density not positive")
    E = relative_energy(law, rho, rho_app)
    rel = dV * float(E.sum())
    kin = kinetic_error(state, app, kern, dV)
    sigma = default_sigma(rho_bar) if sigma is None else sigma
    ess, meas = decompose_ess_res(rho, rho_bar, sigma, dV)
    d_res = np.where(ess, 0.0, np.abs(rho - rho_app))
    return EntropyReport(
        rel_entropy=rel,
        kinetic_error=kin,
        dissipation_error=float(dissipation_error),
        theorem_functional=kin + rel / eps ** 2,
        residual_measure=meas["res"],
        residual_mass_Lgamma=float((dV * (d_res ** law.gamma).sum()) ** (1.0 / law.gamma)),
        residual_mass_L1=dV * float(d_res.sum()),
    )


def _lower_rhs(rho, rho_app, rho_bar, sigma):
    ess = np.abs(rho - rho_bar) < sigma
    return np.where(ess, (rho - rho_app) ** 2, 1.0)


def fit_lower_bound(law, rho_bar, sigma, rho_max=None, n=400, margin=0.05):
    """Constant ``c`` with ``E(rho, r) >= c([rho - r]^2_ess + 1_res)`` on the admissible range.

    ``r`` ranges over ``rho_bar +- sigma/2`` and ``rho`` over ``(0, rho_max]``.
    """
    rho_bar = np.asarray(rho_bar, dtype=float)
    _check_sigma(sigma, rho_bar)
    rho_max = rho_max or 4.0 * float(rho_bar.max()) + 1.0
    best = np.inf
    for rb in np.linspace(rho_bar.min(), rho_bar.max(), 9):
        r = rb + np.linspace(-sigma / 2, sigma / 2, 21)[:, None]
        rho = np.linspace(rho_max / n, rho_max, n)[None, :]
        rhs = _lower_rhs(rho, r, rb, sigma)
        ok = rhs > 0
        ratio = np.where(ok, relative_energy(law, rho, r) / np.where(ok, rhs, 1.0), np.inf)
        # cancellation near the diagonal: use the limit H''(r)/2 there
        near = np.abs(rho - r) < 1e-3 * r
        ratio = np.where(near & ok & (rhs < 1.0), 0.5 * law.d2H(np.minimum(rho, r)), ratio)
        best = min(best, float(ratio.min()))
    return (1.0 - margin) * best


def lower_bound_check(rho, rho_app, law, sigma, rho_bar, c):
    """Number of cells violating ``E(rho, rho_app) >= c([drho]^2_ess + 1_res)``."""
    rho_bar = np.broadcast_to(rho_bar, np.shape(rho))
    _check_sigma(sigma, rho_bar)
    E = relative_energy(law, rho, rho_app)
    return int(np.count_nonzero(E < c * _lower_rhs(rho, rho_app, rho_bar, sigma) * (1 - 1e-12)))


# eps study ---------------------------------------------------------------------

def low_mode_Q(N, L_h, amp=0.5):
    x = np.arange(N) * L_h / N
    X, Y = np.meshgrid(x, x, indexing="ij")
    k = 2 * np.pi / L_h
    return amp * (np.cos(k * X) + 0.6 * np.sin(k * (X + Y)) + 0.3 * np.cos(k * Y))


@dataclass
class StudyConfig:
    gamma: float = 2.0
    a: float = 4.0
    rho0: float = 0.5
    N: int = 32
    K: int = 32
    L_h: float = 2 * np.pi
    mu: float = 1.0
    lam: float = 0.1
    eps_list: tuple = (0.2, 0.1, 0.05)
    dt: float = 2e-3
    t_end: float = 0.5
    amp: float = 0.5
    sample_every: int = 25
    sigma: float | None = None
    qg_substeps: int = 2


@dataclass
class EpsRun:
    eps: float
    functional_t0: float
    functional_end: float
    times: list = field(default_factory=list)
    functional: list = field(default_factory=list)
    residual_measure: list = field(default_factory=list)
    residual_L1: list = field(default_factory=list)
    residual_Lgamma: list = field(default_factory=list)
    dissipation_error: float = 0.0
    energy_drift: float = 0.0
    iterations: float = 0.0


def _fit_C(vals, eps_list, power):
    return [float(v / e ** power) for v, e in zip(vals, eps_list)]


def run_eps(cfg: StudyConfig, eps, kernels=None):
    """One well-prepared run; returns an :class:`EpsRun`."""
    from .ns3d import (MACGrid, NS3DSolver, cell_background, column_profile, sample_bundle,
                       well_prepared_init)
    from .ns3d import kernels as default_kern
    kern = kernels or default_kern
    law = PressureLaw(cfg.gamma, cfg.a)
    grid = MACGrid(cfg.N, cfg.K, cfg.L_h)
    prof = column_profile(law, cfg.rho0, grid)
    rb = cell_background(prof)
    sigma = default_sigma(rb) if cfg.sigma is None else cfg.sigma
    Q0 = low_mode_Q(cfg.N, cfg.L_h, cfg.amp)
    state, b0 = well_prepared_init(Q0, prof, eps, grid, cfg.mu, cfg.lam)
    qgp = qg_with_dt(b0.params, cfg.dt / cfg.qg_substeps)
    visc = ViscosityParams(cfg.mu, eps, cfg.lam)
    solver = NS3DSolver(grid, law, rb, visc, eps, cfg.dt, kernels=kern)
    qs = QGState(Q0.copy(), 0.0)
    out = EpsRun(eps=eps, functional_t0=0.0, functional_end=0.0)
    steps = int(round(cfg.t_end / cfg.dt))
    e0 = sum(solver.energy(state))
    diss_total = 0.0
    diss_err, last_rate = 0.0, None

    def record(state, qs):
        nonlocal diss_err, last_rate
        b = ansatz.assemble(prof, qs.Q, eps, cfg.mu, cfg.lam, cfg.L_h, check_resolution=False,
                            params=b0.params)
        app = sample_bundle(b, grid)
        du = [u - ua for u, ua in zip(state.fields[1:], app[1:])]
        rate = solver.dissipation_rate(*[np.ascontiguousarray(d) for d in du])
        if last_rate is not None:
            diss_err += 0.5 * (rate + last_rate) * cfg.dt * cfg.sample_every
        last_rate = rate
        rep = theorem_functional(state, app, law, grid, rb, sigma, diss_err, kern)
        out.times.append(state.t)
        out.functional.append(rep.theorem_functional)
        out.residual_measure.append(rep.residual_measure)
        out.residual_L1.append(rep.residual_mass_L1)
        out.residual_Lgamma.append(rep.residual_mass_Lgamma)
        return rep

    rep = record(state, qs)
    out.functional_t0 = rep.theorem_functional
    for n in range(1, steps + 1):
        state = solver.step(state)
        diss_total += solver.last_dissipation
        qs = qg_run(qs, qgp, state.t)
        if n % cfg.sample_every == 0 or n == steps:
            rep = record(state, qs)
    out.functional_end = rep.theorem_functional
    out.dissipation_error = diss_err
    out.energy_drift = float(sum(solver.energy(state)) + diss_total - e0)
    out.iterations = float(np.mean(solver.iterations))
    return out


@dataclass
class StudyReport:
    config: dict
    runs: list
    slope: float
    monotone: bool
    C_residual_measure: list
    C_residual_L1: list
    C_residual_Lgamma: list

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "t", "functional", "residual_measure", "residual_L1",
                        "residual_Lgamma"])
            for r in self.runs:
                for row in zip(r["times"], r["functional"], r["residual_measure"],
                               r["residual_L1"], r["residual_Lgamma"]):
                    w.writerow([repr(float(r["eps"]))] + [repr(float(v)) for v in row])


def eps_scaling_study(cfg: StudyConfig = StudyConfig(), kernels=None, progress=None):
    """Run the eps sweep, fit the log-log slope of the final functional."""
    runs = []
    for eps in cfg.eps_list:
        try:
            run = run_eps(cfg, eps, kernels)
        except (VacuumError, DivergenceError, ConfigError) as exc:
            raise StudyError(f"eps={eps}: {exc}", runs) from exc
        runs.append(run)
        if progress:
            progress(run)
    eps = np.array([r.eps for r in runs])
    vals = np.array([r.functional_end for r in runs])
    slope = ansatz.log_slope(eps, vals)
    order = np.argsort(eps)
    monotone = bool(np.all(np.diff(vals[order]) > 0))
    g = cfg.gamma
    return StudyReport(
        config=asdict(cfg), runs=[asdict(r) for r in runs], slope=slope, monotone=monotone,
        C_residual_measure=_fit_C([max(r.residual_measure) for r in runs], eps, 2.0),
        C_residual_L1=_fit_C([max(r.residual_L1) for r in runs], eps, 2.0),
        C_residual_Lgamma=_fit_C([max(r.residual_Lgamma) for r in runs], eps, 2.0 / g),
    )
