"""Closed-form Ekman boundary layers at the bottom and top walls.

Stretched coordinates are ``zeta = x3 / eps`` (bottom) and
``eta = (1 - x3) / eps`` (top); both are passed here as the non-negative
``zeta`` argument.  All derivatives are analytic.

Horizontal velocities are arrays whose leading axis has length 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pressure import DomainError


@dataclass(frozen=True)
class EkmanLayer:
    rho_wall: float
    side: str = "bottom"

    def __post_init__(self):
        if not self.rho_wall > 0.0:
            raise DomainError("wall density must be positive")
        if self.side not in ("bottom", "top"):
            raise ValueError(f"side must be 'bottom' or 'top', got {self.side!r}")

    @property
    def k(self):
        return float(np.sqrt(self.rho_wall / 2.0))

    @property
    def sign(self):
        """Sign relating ``d/dzeta`` to ``eps * d/dx3``."""
        return 1.0 if self.side == "bottom" else -1.0


def layers(rho0, rho1):
    return EkmanLayer(rho0, "bottom"), EkmanLayer(rho1, "top")


def perp(v):
    """``v_perp = (-v2, v1)``."""
    return np.stack([-v[1], v[0]])


def _check_zeta(zeta):
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0.0):
        raise DomainError("stretched coordinate must be non-negative")
    return zeta


def spiral_coeffs(layer, zeta, order=0):
    """Scalar factors ``(a, b)`` with ``d^n/dzeta^n u_bl = a * u0h + b * perp(u0h)``.

    Uses the complex form ``u_bl = -exp(-(1+i) k zeta) u0h`` where multiplying
    by ``i`` is the perp rotation.
    """
    zeta = _check_zeta(zeta)
    k = layer.k
    c = -((-(1 + 1j) * k) ** order) * np.exp(-(1 + 1j) * k * zeta)
    return c.real, c.imag


def _combine(ab, u0h):
    a, b = ab
    u0h = np.asarray(u0h, dtype=float)
    return a * u0h + b * perp(u0h)


def spiral_profile(layer, u0h, zeta, order=0):
    """``-exp(-k zeta) R(-k zeta) u0h`` and its ``zeta``-derivatives."""
    return _combine(spiral_coeffs(layer, zeta, order), u0h)


def spiral_ode_residual(layer, u0h, zeta_grid, amplitude=1.0):
    """``max |rho_wall * perp(u_bl) - d^2 u_bl / dzeta^2|`` with analytic derivatives.

    ``amplitude`` scales only the second-derivative term, which turns the exact
    solution into a non-solution for detection tests.
    """
    u = spiral_profile(layer, u0h, zeta_grid)
    d2 = amplitude * spiral_profile(layer, u0h, zeta_grid, order=2)
    return float(np.max(np.abs(layer.rho_wall * perp(u) - d2), initial=0.0))


def vertical_coeff(layer, zeta, order=0):
    """Scalar ``c`` with ``d^n/dzeta^n u13_bl = c * omega0``."""
    zeta = _check_zeta(zeta)
    k = layer.k
    # e^{-k z}(cos + sin) = Re[(1 + i) e^{-(1+i) k z}]
    z = (1 + 1j) * ((-(1 + 1j) * k) ** order) * np.exp(-(1 + 1j) * k * zeta)
    scale = -1.0 / np.sqrt(2.0 * layer.rho_wall)
    return layer.sign * scale * z.real


def vertical_corrector(layer, omega0, zeta, order=0):
    """First-order vertical velocity of the layer, driven by the vorticity ``omega0``."""
    return vertical_coeff(layer, zeta, order) * np.asarray(omega0, dtype=float)


def divergence_residual(layer, u0h_div, omega0, zeta_grid):
    """Residual of ``div_h u_bl + sign * d/dzeta u13_bl = 0``.

    ``u0h_div`` is ``div_h u0h`` (zero for geostrophic flow but kept general);
    ``div_h perp(u0h) = -omega0``.
    """
    a, b = spiral_coeffs(layer, zeta_grid)
    div_bl = a * u0h_div - b * omega0
    d = layer.sign * vertical_corrector(layer, omega0, zeta_grid, order=1)
    return float(np.max(np.abs(div_bl + d), initial=0.0))


def pumping_coefficient(rho0, rho1):
    """Ekman damping coefficient ``(sqrt(rho0) + sqrt(rho1)) / sqrt(2)``."""
    if not (rho0 > 0.0 and rho1 > 0.0):
        raise DomainError("wall densities must be positive")
    return (np.sqrt(rho0) + np.sqrt(rho1)) / np.sqrt(2.0)


def pumping_flux(rho0, rho1, omega0=1.0):
    """Wall-trace route: ``-rho1 u13_top(0) + rho0 u13_bottom(0)``; equals ``-coef * omega0``."""
    bottom, top = layers(rho0, rho1)
    return (-rho1 * vertical_corrector(top, omega0, 0.0)
            + rho0 * vertical_corrector(bottom, omega0, 0.0))


def corrector_coeff(layer, zeta, order=0):
    zeta = _check_zeta(zeta)
    k = layer.k
    return -((-k) ** order) * np.exp(-k * zeta)


def corrector_layer_u1(layer, u1_wall, zeta, order=0):
    """``-u1_wall * exp(-k zeta)`` and its ``zeta``-derivatives."""
    return corrector_coeff(layer, zeta, order) * np.asarray(u1_wall, dtype=float)


def hardy_weighted_sup(layer, zeta_grid):
    """``sup zeta^2 |u_bl| / |u0h|`` over the grid, with bound ``(2/(k e))^2``."""
    a, b = spiral_coeffs(layer, zeta_grid)
    mag = np.hypot(a, b)
    return float(np.max(zeta_grid ** 2 * mag)), (2.0 / (layer.k * np.e)) ** 2
