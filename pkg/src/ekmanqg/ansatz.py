"""Two-scale approximate solution of the rotating compressible system.

The ansatz is built from the stream function ``Q(x_h)``, the hydrostatic
profile and the two Ekman layers:

    rho_app = rho_bar + eps rho1 + eps^2 rho2
    u_app   = (u0h + layers - lifts, 0) + eps (u1 + layers - lifts)

Horizontal derivatives are spectral, vertical ones analytic in the profile
functions (second vertical derivatives of interior profile functions use
second-order differences; they only enter at order eps^2).  The ansatz is a
polynomial of degree two in ``(Q, dQ/dt)``, so exact time derivatives come
from a symmetric difference along ``(dQ/dt, d2Q/dt2)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import ekman
from .hydrostatic import cumulative_integral, rk4, solve_profile
from .pressure import ConfigError
from .qg import QGParams, d2Qdt2, dQdt, jacobian_hat
from .spectral_ops import Grid


class EpsilonRangeError(ConfigError):
    """eps outside the range where the ansatz is admissible."""


# vertical profile functions ---------------------------------------------------

@dataclass(frozen=True)
class VerticalFunctions:
    """Profile functions on the nodes ``z`` with first and second derivatives.

    ``s = rho/P'``, ``ip = 1/P'``, ``irb = 1/rho``, ``g`` the quadratic density
    corrector shape, ``w`` the shape of the pressure-like horizontal term,
    ``S`` and ``M`` the cumulative integrals of ``s`` and ``rho``.
    """

    z: np.ndarray
    rb: np.ndarray
    d: dict
    S: np.ndarray
    M: np.ndarray

    def __getitem__(self, key):
        return self.d[key]

    @property
    def beta(self):
        return float(self.S[-1])

    @property
    def m(self):
        return float(self.M[-1])


def _g_rhs(law):
    def rhs(_x, y):
        r, g = y
        P1, P2, P3 = law.dP(r), law.d2P(r), law.d3P(r)
        dr = -r / P1
        s = r / P1
        ds = dr * (P1 - r * P2) / P1 ** 2
        f = -(P3 * dr * s * s + 2 * P2 * s * ds) / (2 * P1)
        c = (P2 * dr + 1) / P1
        return np.array([dr, f - c * g])
    return rhs


def vertical_functions(profile, law=None):
    law = law or profile.law
    z = profile.x3
    rb = profile.rho_bar
    P1, P2, P3 = law.dP(rb), law.d2P(rb), law.d3P(rb)
    drb = -rb / P1
    d2rb = -drb / P1 + rb * P2 * drb / P1 ** 2
    s = rb / P1
    ds = drb * (P1 - rb * P2) / P1 ** 2
    g = rk4(_g_rhs(law), np.array([rb[0], 0.0]), z)[:, 1]
    f = -(P3 * drb * s * s + 2 * P2 * s * ds) / (2 * P1)
    dg = f - (P2 * drb + 1) / P1 * g
    w = (P1 * g + P2 * s * s / 2) / rb
    dw = (-g - w * drb) / rb
    fd = {
        "rb": (rb, drb, d2rb),
        "s": (s, ds, None),
        "ip": (1 / P1, -P2 * drb / P1 ** 2, None),
        "irb": (1 / rb, -drb / rb ** 2, None),
        "g": (g, dg, None),
        "w": (w, dw, None),
        "one": (np.ones_like(z), np.zeros_like(z), np.zeros_like(z)),
        "z": (z.copy(), np.ones_like(z), np.zeros_like(z)),
    }
    d = {}
    for name, (v, dv, d2v) in fd.items():
        if d2v is None:
            d2v = np.gradient(dv, z, edge_order=2)
        d[name] = (v, dv, d2v)
    S = cumulative_integral(s, z)
    M = cumulative_integral(rb, z)
    return VerticalFunctions(z, rb, d, S, M)


# horizontal spectral helpers -------------------------------------------------

class Horizontal:
    """Spectral x_h-derivatives of arrays whose first two axes are horizontal."""

    def __init__(self, n, length):
        self.grid = Grid((n, n), (length, length))
        self.k1, self.k2 = self.grid.k()

    def _k(self, f, kk):
        extra = (None,) * (np.ndim(f) - 2)
        return kk[(...,) + extra]

    def d(self, f, axis):
        kk = self._k(f, self.k1 if axis == 0 else self.k2)
        return np.fft.ifft2(1j * kk * np.fft.fft2(f, axes=(0, 1)), axes=(0, 1)).real

    def grad(self, f):
        return np.stack([self.d(f, 0), self.d(f, 1)])

    def perp_grad(self, f):
        return np.stack([-self.d(f, 1), self.d(f, 0)])

    def lap(self, f):
        kk = self._k(f, self.k1 ** 2 + self.k2 ** 2)
        return np.fft.ifft2(-kk * np.fft.fft2(f, axes=(0, 1)), axes=(0, 1)).real

    def div(self, v):
        return self.d(v[0], 0) + self.d(v[1], 1)


def _outer(h, v):
    """Horizontal field(s) times a vertical function -> 3D array."""
    return np.asarray(h)[..., None] * v


def perp(v):
    return np.stack([-v[1], v[0]])


# the ansatz ----------------------------------------------------------------

@dataclass
class AnsatzBundle:
    eps: float
    profile: object
    vf: VerticalFunctions
    params: QGParams
    lam: float
    Q: np.ndarray
    Qt: np.ndarray
    rho: np.ndarray
    rho_z: np.ndarray
    u: np.ndarray
    u_z: np.ndarray
    u_zz: np.ndarray
    parts: dict = field(default_factory=dict, repr=False)
    _dt: tuple | None = field(default=None, repr=False)

    @property
    def rho1(self):
        return self.parts["rho1"]

    @property
    def rho2(self):
        return self.parts["rho2"]

    @property
    def u1h(self):
        return self.parts["u1h"]

    @property
    def u13(self):
        return self.parts["u13"]

    @property
    def layers(self):
        return self.parts["layers"]

    def time_derivatives(self):
        """Exact ``(d rho/dt, d u/dt)`` by symmetric differencing of the quadratic map."""
        if self._dt is None:
            Qtt = d2Qdt2(self.Q, self.params, self.Qt)
            plus = _fields(self.vf, self.params, self.lam, self.eps, self.Q + self.Qt, self.Qt + Qtt)
            minus = _fields(self.vf, self.params, self.lam, self.eps, self.Q - self.Qt, self.Qt - Qtt)
            self._dt = ((plus["rho"] - minus["rho"]) / 2, (plus["u"] - minus["u"]) / 2)
        return self._dt


def ansatz_params(vf, profile, mu, L_h, N_h, dt=1e-3):
    """QG parameters whose vertical averages are the ansatz's own integrals."""
    r0, r1 = profile.rho_bar_wall
    return QGParams(beta=vf.beta, m=vf.m, mu=mu, damp=float(ekman.pumping_coefficient(r0, r1)),
                    L_h=L_h, N_h=N_h, dt=dt)


def build_rho1(Q, vf):
    """``rho1 = Q rho_bar / P'(rho_bar)``."""
    return _outer(Q, vf["s"][0])


def build_rho2(Q, vf):
    """``rho2 = Q^2 g(x3)``; ``g`` solves the vertical balance with ``g(0) = 0``."""
    return _outer(Q * Q, vf["g"][0])


def _u1h_terms(H, Q, Qt, mu):
    u0 = H.perp_grad(Q)
    H11 = H.d(H.d(Q, 0), 0)
    H12 = H.d(H.d(Q, 0), 1)
    H22 = H.d(H.d(Q, 1), 1)
    A1 = mu * H.grad(H.lap(Q))
    adv = np.stack([u0[0] * H11 + u0[1] * H12, u0[0] * H12 + u0[1] * H22])
    A2 = -H.grad(Qt) - adv
    A3 = -Q * u0
    A4 = H.perp_grad(Q * Q)
    return (A1, "irb"), (A2, "one"), (A3, "ip"), (A4, "w")


def build_u1(Q, Qt, vf, params, H=None):
    """Interior first-order velocity ``(u1h, u13)`` with value, d/dx3 and d2/dx3^2."""
    H = H or Horizontal(params.N_h, params.L_h)
    u1h = [0.0, 0.0, 0.0]
    for A, name in _u1h_terms(H, Q, Qt, params.mu):
        for j in range(3):
            u1h[j] = u1h[j] + _outer(A, vf[name][j])
    w0 = H.lap(Q)
    Jm = np.fft.ifft2(jacobian_hat(Q, params)).real / params.m
    B = H.lap(Qt) + Jm
    bi = H.lap(H.lap(Q))
    rb0, rb1 = vf.rb[0], vf.rb[-1]
    bottom, top = ekman.layers(rb0, rb1)
    wb = ekman.vertical_coeff(bottom, 0.0) * w0
    wt = ekman.vertical_coeff(top, 0.0) * w0
    S, M, z = vf.S, vf.M, vf.z
    s, ds = vf["s"][0], vf["s"][1]
    rb, drb = vf["rb"][0], vf["rb"][1]
    irb, dirb, d2irb = vf["irb"]
    # bottom-anchored below mid-height, top-anchored above; identical when Q obeys the QG law
    lower = z <= 0.5
    c_lo = _outer(-wb, rb0 * irb)
    c_hi = _outer(-wt, rb1 * irb)
    F_lo = -(_outer(Qt, S) + _outer(bi, z) - _outer(B, M))
    F_hi = _outer(Qt, S[-1] - S) + _outer(bi, 1.0 - z) - _outer(B, M[-1] - M)
    u13 = np.where(lower, c_lo + F_lo * irb, c_hi + F_hi * irb)
    c = np.where(lower, _outer(-wb, rb0 * np.ones_like(z)), _outer(-wt, rb1 * np.ones_like(z)))
    F = c + np.where(lower, F_lo, F_hi)
    dF = -_outer(Qt, s) - _outer(bi, np.ones_like(z)) + _outer(B, rb)
    d2F = -_outer(Qt, ds) + _outer(B, drb)
    u13_z = dF * irb + F * dirb
    u13_zz = d2F * irb + 2 * dF * dirb + F * d2irb
    return (u1h[0], u1h[1], u1h[2]), (u13, u13_z, u13_zz)


def _fields(vf, params, lam, eps, Q, Qt, H=None, keep=False):
    H = H or Horizontal(params.N_h, params.L_h)
    z = vf.z
    zeta, eta = z / eps, (1.0 - z) / eps
    rb0, rb1 = vf.rb[0], vf.rb[-1]
    bottom, top = ekman.layers(rb0, rb1)
    u0 = H.perp_grad(Q)
    u0p = perp(u0)
    w0 = H.lap(Q)
    far = 1.0 / eps

    def spiral(layer, x, sgn):
        vals = []
        for n in range(3):
            a, b = ekman.spiral_coeffs(layer, x, n)
            f = (sgn / eps) ** n
            vals.append(_outer(u0, a * f) + _outer(u0p, b * f))
        a, b = ekman.spiral_coeffs(layer, far, 0)
        return vals, a * u0 + b * u0p

    def scalar_layer(fn, layer, x, sgn, h):
        vals = [_outer(h, fn(layer, x, n) * (sgn / eps) ** n) for n in range(3)]
        return vals, fn(layer, far, 0) * h

    Sb, Yb = spiral(bottom, zeta, 1.0)
    St, Yt = spiral(top, eta, -1.0)
    lift_h = [_outer(Yb, z) + _outer(Yt, 1 - z), _outer(Yb - Yt, np.ones_like(z)), 0.0]
    # leading order horizontal velocity, grouped so both wall traces cancel exactly
    u_h0 = [(_outer(u0, np.ones_like(z)) + (Sb[0] - _outer(Yb, z))) + (St[0] - _outer(Yt, 1 - z)),
            Sb[1] + St[1] - lift_h[1], Sb[2] + St[2]]

    (u1h, u1h_z, u1h_zz), (u13, u13_z, u13_zz) = build_u1(Q, Qt, vf, params, H)
    wall0, wall1 = u1h[..., 0], u1h[..., -1]
    Cb, Yb1 = scalar_layer(ekman.corrector_coeff, bottom, zeta, 1.0, wall0)
    Ct, Yt1 = scalar_layer(ekman.corrector_coeff, top, eta, -1.0, wall1)
    u_h1 = [(u1h + (Cb[0] - _outer(Yb1, z))) + (Ct[0] - _outer(Yt1, 1 - z)),
            u1h_z + Cb[1] + Ct[1] - _outer(Yb1 - Yt1, np.ones_like(z)),
            u1h_zz + Cb[2] + Ct[2]]
    Vb, Yb3 = scalar_layer(ekman.vertical_coeff, bottom, zeta, 1.0, w0)
    Vt, Yt3 = scalar_layer(ekman.vertical_coeff, top, eta, -1.0, w0)
    u_31 = [(u13 + (Vb[0] - _outer(Yb3, z))) + (Vt[0] - _outer(Yt3, 1 - z)),
            u13_z + Vb[1] + Vt[1] - _outer(Yb3 - Yt3, np.ones_like(z)),
            u13_zz + Vb[2] + Vt[2]]

    u = [np.concatenate([u_h0[j] + eps * u_h1[j], (eps * u_31[j])[None]]) for j in range(3)]
    s, g = vf["s"], vf["g"]
    rho = vf.rb + eps * _outer(Q, s[0]) + eps ** 2 * _outer(Q * Q, g[0])
    rho_z = vf["rb"][1] + eps * _outer(Q, s[1]) + eps ** 2 * _outer(Q * Q, g[1])
    out = {"rho": rho, "rho_z": rho_z, "u": u[0], "u_z": u[1], "u_zz": u[2]}
    if keep:
        out["parts"] = {
            "rho1": build_rho1(Q, vf), "rho2": build_rho2(Q, vf),
            "u0": u0, "w0": w0, "u1h": u1h, "u13": u13, "u13_z": u13_z,
            "U0b": Sb, "U0t": St, "U1b": Cb, "U1t": Ct, "U3b": Vb, "U3t": Vt,
            "layers": (bottom, top),
        }
    return out


def min_layer_k(profile):
    r0, r1 = profile.rho_bar_wall
    return min(np.sqrt(r0 / 2), np.sqrt(r1 / 2))


def default_sigma(profile):
    return min(2.0 / 3.0, float(profile.rho_bar.min())) / 2.0


def assemble(profile, Q, eps, mu, lam, L_h, check_resolution=True, params=None):
    """Evaluate the ansatz on the profile nodes for the stream function ``Q``."""
    if not eps > 0:
        raise EpsilonRangeError("eps must be positive")
    Q = np.asarray(Q, dtype=float)
    N_h = Q.shape[0]
    vf = vertical_functions(profile)
    if params is None:
        params = ansatz_params(vf, profile, mu, L_h, N_h)
    if check_resolution:
        need = 8.0 / (min_layer_k(profile) * eps)
        if profile.N3 < need:
            raise EpsilonRangeError(f"N3={profile.N3} below 8/(k eps)={need:.1f}")
    Qt = dQdt(Q, params)
    f = _fields(vf, params, lam, eps, Q, Qt, keep=True)
    pert = f["rho"] - vf.rb
    sigma = default_sigma(profile)
    if np.abs(pert).max() > sigma / 2:
        raise EpsilonRangeError(
            f"eps={eps}: density perturbation {np.abs(pert).max():.3g} exceeds sigma/2={sigma / 2:.3g}")
    if f["rho"].min() <= 0:
        raise EpsilonRangeError("ansatz density not positive")
    return AnsatzBundle(eps=eps, profile=profile, vf=vf, params=params, lam=lam, Q=Q, Qt=Qt,
                        rho=f["rho"], rho_z=f["rho_z"], u=f["u"], u_z=f["u_z"], u_zz=f["u_zz"],
                        parts=f["parts"])


def geostrophic_residual(Q, profile, H):
    """Max residual of ``rho u_perp + P' grad_h r = 0`` and ``d3(P' r) = -r`` for ``r = s Q``."""
    vf = vertical_functions(profile)
    law = profile.law
    rb = vf.rb
    r = _outer(Q, vf["s"][0])
    P1 = law.dP(rb)
    u = H.perp_grad(Q)
    horiz = _outer(perp(u), rb) + P1 * H.grad(r)
    from .hydrostatic import centered_derivative
    pr = P1 * r
    n = len(rb)
    d3 = np.zeros(Q.shape + (n - 6,))
    for idx in np.ndindex(Q.shape):
        d3[idx] = centered_derivative(pr[idx], profile.dz)
    vert = d3 + r[..., 3:-3]
    return float(np.abs(horiz).max()), float(np.abs(vert).max())


# residuals -------------------------------------------------------------------

@dataclass
class ResidualReport:
    eps: float
    mass: np.ndarray
    mom: np.ndarray
    R_bl: np.ndarray
    S_bl: np.ndarray
    coriolis_taylor: np.ndarray
    norms: dict


def _integrate(f, vf, params):
    dA = (params.L_h / params.N_h) ** 2
    return dA * np.trapezoid(f.sum(axis=(0, 1)), vf.z)


def _l2(f, vf, params):
    f2 = f ** 2 if f.ndim == 3 else (f ** 2).sum(axis=0)
    return float(np.sqrt(_integrate(f2, vf, params)))


def residual(bundle):
    """Plug the ansatz into both equations and split off the known layer forcings."""
    vf, params, eps, lam = bundle.vf, bundle.params, bundle.eps, bundle.lam
    law = bundle.profile.law
    mu = params.mu
    H = Horizontal(params.N_h, params.L_h)
    rho, rho_z, u, u_z, u_zz = bundle.rho, bundle.rho_z, bundle.u, bundle.u_z, bundle.u_zz
    rho_t, u_t = bundle.time_derivatives()
    grad_rho = H.grad(rho)
    du = [H.grad(c) for c in u]  # du[i][j] = d_j u_i
    div_h = du[0][0] + du[1][1]
    div = div_h + u_z[2]
    mass = rho_t + grad_rho[0] * u[0] + grad_rho[1] * u[1] + rho * div_h + rho_z * u[2] + rho * u_z[2]

    adv = np.stack([u[0] * du[i][0] + u[1] * du[i][1] + u[2] * u_z[i] for i in range(3)])
    cor = np.stack([-u[1], u[0], np.zeros_like(u[0])])
    P1 = law.dP(rho)
    press = np.stack([P1 * grad_rho[0], P1 * grad_rho[1], P1 * rho_z + rho])
    visc = np.stack([mu * H.lap(c) for c in u]) + eps * u_zz
    grad_div = np.stack([H.d(div, 0), H.d(div, 1),
                         H.d(u_z[0], 0) + H.d(u_z[1], 1) + u_zz[2]])
    mom = rho * (u_t + adv) + rho * cor / eps + press / eps ** 2 - visc - lam * grad_div

    p = bundle.parts
    rb, drb = vf["rb"][0], vf["rb"][1]
    U1 = p["U1b"][0] + p["U1t"][0]
    U0 = p["U0b"][0] + p["U0t"][0]
    U3 = p["U3b"][0] + p["U3t"][0]
    grad_rho1 = H.grad(p["rho1"])
    R_bl = rb * H.div(U1) + grad_rho1[0] * U0[0] + grad_rho1[1] * U0[1] + drb * U3

    # Coriolis Taylor remainders from freezing rho_bar at the walls
    r0, r1 = vf.rb[0], vf.rb[-1]
    taylor_h = (perp(p["U0b"][0]) * (rb - r0) + perp(p["U0t"][0]) * (rb - r1)) / eps
    taylor = np.concatenate([taylor_h, np.zeros_like(taylor_h[:1])])
    S_bl = _layer_forcing(bundle, H, U0, U1, U3)

    mass_left = mass - eps * R_bl
    mom_left = mom - taylor - S_bl
    norms = {
        "mass_Linf": float(np.abs(mass).max()),
        "mass_left_Linf": float(np.abs(mass_left).max()),
        "mass_left_L2": _l2(mass_left, vf, params),
        "R_bl_L2": _l2(R_bl, vf, params),
        "mom_Linf": float(np.abs(mom).max()),
        "mom_left_Linf": float(np.abs(mom_left).max()),
        "mom_left_L2": _l2(mom_left, vf, params),
        "S_bl_L2": _l2(S_bl, vf, params),
        "S_bl_Linf": float(np.abs(S_bl).max()),
        "taylor_L2": _l2(taylor, vf, params),
    }
    return ResidualReport(eps, mass, mom, R_bl, S_bl, taylor, norms)


def _layer_forcing(bundle, H, U0, U1, U3):
    """Order-one momentum forcing carried by the Ekman layers."""
    vf, params, eps, lam = bundle.vf, bundle.params, bundle.eps, bundle.lam
    p = bundle.parts
    rb = vf["rb"][0]
    mu = params.mu
    Qt = bundle.Qt
    u0t = H.perp_grad(Qt)
    # layer velocities are linear in u0h, so their time derivative swaps in perp_grad Qt
    U0_t = _relayer(bundle, u0t)
    u0 = p["u0"]
    dU0 = [H.grad(c) for c in U0]
    du0 = [H.grad(c) for c in u0]
    U0_z = p["U0b"][1] + p["U0t"][1]
    U1_zz = p["U1b"][2] + p["U1t"][2]
    U3_zz = p["U3b"][2] + p["U3t"][2]
    U1_z = p["U1b"][1] + p["U1t"][1]
    h = []
    for i in range(2):
        term = (U0_t[i] + u0[0][..., None] * dU0[i][0] + u0[1][..., None] * dU0[i][1]
                + U0[0] * du0[i][0][..., None] + U0[1] * du0[i][1][..., None]
                + U0[0] * dU0[i][0] + U0[1] * dU0[i][1]
                + eps * (p["u13"] + U3) * U0_z[i])
        h.append(rb * term - mu * H.lap(U0[i]) - eps ** 2 * U1_zz[i])
    cor = perp(p["rho1"] * U0 + rb * U1)
    h = np.stack(h) + cor
    v = -eps ** 2 * U3_zz - lam * eps * H.div(U1_z)
    return np.concatenate([h, v[None]])


def _relayer(bundle, v):
    """Sum of both leading-order spirals driven by the horizontal field ``v``."""
    vf, eps = bundle.vf, bundle.eps
    bottom, top = bundle.parts["layers"]
    out = 0.0
    for layer, x in ((bottom, vf.z / eps), (top, (1 - vf.z) / eps)):
        a, b = ekman.spiral_coeffs(layer, x, 0)
        out = out + _outer(v, a) + _outer(perp(v), b)
    return out


def hydrostatic_bundle(profile, N_h, L_h, eps, mu=1.0, lam=0.1):
    """The ``Q = 0`` ansatz: the rest state."""
    return assemble(profile, np.zeros((N_h, N_h)), eps, mu, lam, L_h, check_resolution=False)


def residual_sweep(law, rho0, Q_fn, eps_list, N_h, L_h, mu, lam, nodes_per_layer=12, min_N3=64):
    """Residual norms across eps, with the vertical grid refined to resolve the layers."""
    rows = []
    for eps in eps_list:
        k = min_layer_k(solve_profile(law, rho0, 8))
        n = max(min_N3, int(2 ** np.ceil(np.log2(nodes_per_layer / (k * eps)))))
        prof = solve_profile(law, rho0, n)
        b = assemble(prof, Q_fn(N_h, L_h), eps, mu, lam, L_h)
        rows.append((eps, residual(b).norms))
    return rows


def write_residual_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "norm", "component"])
        for eps, norms in rows:
            for name in sorted(norms):
                w.writerow([repr(float(eps)), repr(float(norms[name])), name])


def log_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
