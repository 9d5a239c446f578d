"""Stratified rest state: the hydrostatic profile and its vertical averages.

The profile solves ``P'(rho) rho' = -rho`` on ``[0, 1]`` (gravity potential
``G = -x3``) with the bottom density as input.  Integration is classical RK4
with step ``1/N3``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .pressure import ConfigError, PressureLaw


class VacuumError(RuntimeError):
    """The density fell below the admissible floor."""


def rk4(rhs, y0, x):
    """Integrate ``y' = rhs(x, y)`` over the nodes ``x`` with one RK4 step per interval."""
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((len(x),) + y0.shape)
    out[0] = y0
    y = y0
    for n in range(len(x) - 1):
        h = x[n + 1] - x[n]
        k1 = rhs(x[n], y)
        k2 = rhs(x[n] + h / 2, y + h / 2 * k1)
        k3 = rhs(x[n] + h / 2, y + h / 2 * k2)
        k4 = rhs(x[n + 1], y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[n + 1] = y
    return out


@dataclass(frozen=True)
class VerticalAverages:
    avg_rho: float
    avg_rho_over_Pprime: float


@dataclass(frozen=True)
class HydrostaticProfile:
    """Density on ``N3 + 1`` uniform nodes of ``[0, 1]``."""

    x3: np.ndarray
    rho_bar: np.ndarray
    law: PressureLaw
    kappa: float
    closed_form_params: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N3(self):
        return len(self.x3) - 1

    @property
    def dz(self):
        return 1.0 / self.N3

    @property
    def rho_bar_wall(self):
        return float(self.rho_bar[0]), float(self.rho_bar[-1])

    def drho_bar(self):
        """Vertical derivative from the ODE itself, ``-rho / P'(rho)``."""
        return -self.rho_bar / self.law.dP(self.rho_bar)


def closed_form(law, rho0, x3):
    """Analytic profile for the monomial law."""
    x3 = np.asarray(x3, dtype=float)
    g, a = law.gamma, law.a
    if g == 1.0:
        return rho0 * np.exp(-x3 / a)
    c = a * g * rho0 ** (g - 1.0) / (g - 1.0)
    base = (g - 1.0) / (a * g) * (c - x3)
    if np.any(base <= 0.0):
        raise VacuumError("closed-form profile reaches vacuum inside [0, 1]")
    return np.power(base, 1.0 / (g - 1.0))


def solve_profile(law, rho0, N3, kappa_min=1e-8):
    """RK4 solve of the hydrostatic ODE from ``x3 = 0`` upward."""
    if N3 < 2:
        raise ConfigError("N3 must be at least 2")
    if not rho0 > 0.0:
        raise ConfigError("bottom density must be positive")
    x3 = np.linspace(0.0, 1.0, N3 + 1)

    def rhs(_x, r):
        if r <= kappa_min:
            raise VacuumError(f"vacuum reached below x3 = {_x:.4f}")
        return -r / law.dP(r)

    rho = rk4(rhs, rho0, x3)
    if np.any(rho <= kappa_min) or not np.all(np.isfinite(rho)):
        raise VacuumError("vacuum reached before x3 = 1")
    return HydrostaticProfile(
        x3=x3,
        rho_bar=rho,
        law=law,
        kappa=float(rho.min()),
        closed_form_params=(law.gamma, law.a, float(rho0)),
    )


def constant_profile(law, value, N3):
    """A uniform density column; not a hydrostatic state, used for checks."""
    x3 = np.linspace(0.0, 1.0, N3 + 1)
    return HydrostaticProfile(x3, np.full(N3 + 1, float(value)), law, float(value))


def potential(profile, law=None):
    """``G = H'(rho_bar)`` at the profile nodes (gravity potential up to a constant)."""
    law = law or profile.law
    return law.dH(profile.rho_bar)


# sixth-order centred first derivative
_C6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def centered_derivative(f, h):
    """Sixth-order centred difference at interior nodes ``3 .. N-3``."""
    f = np.asarray(f, dtype=float)
    n = len(f)
    out = np.zeros(n - 6)
    for j, c in enumerate(_C6):
        if c:
            out += c * f[j:n - 6 + j]
    return out / h


def ode_residual(profile, law=None):
    """``max |P'(rho) D rho + rho|`` over interior nodes."""
    law = law or profile.law
    r = profile.rho_bar
    d = centered_derivative(r, profile.dz)
    return float(np.max(np.abs(law.dP(r[3:-3]) * d + r[3:-3])))


def balance_residual(profile, law=None):
    """``max |D P(rho) - rho D G|`` over interior nodes (well-balancing check)."""
    law = law or profile.law
    r = profile.rho_bar
    G = potential(profile, law)
    dP = centered_derivative(law.P(r), profile.dz)
    dG = centered_derivative(G, profile.dz)
    return float(np.max(np.abs(dP - r[3:-3] * dG)))


def cumulative_integral(f, x3):
    """Fourth-order cumulative integral ``int_0^x3 f``."""
    out = np.zeros_like(np.asarray(f, dtype=float))
    out[1:] = cumulative_simpson(f, x=x3)
    return out


def vertical_averages(profile, law=None):
    law = law or profile.law
    key = ("avg", law)
    if key not in profile._cache:
        r = profile.rho_bar
        m = cumulative_integral(r, profile.x3)[-1]
        b = cumulative_integral(r / law.dP(r), profile.x3)[-1]
        if not (m > 0 and b > 0):
            raise VacuumError("non-positive vertical average")
        profile._cache[key] = VerticalAverages(float(m), float(b))
    return profile._cache[key]


def export_csv(profile, path, law=None):
    G = potential(profile, law)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x3", "rho_bar", "G"])
        for row in zip(profile.x3, profile.rho_bar, G):
            w.writerow([repr(float(v)) for v in row])
