"""Barotropic pressure laws, internal energy and relative energy.

The monomial law ``P(rho) = a * rho**gamma`` ships with closed forms for the
internal energy ``H(rho) = rho * int_1^rho P(z)/z**2 dz`` and its first three
derivatives.  ``gamma == 1`` uses the logarithmic form ``a * rho * log(rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of a pressure-law function."""


class ConfigError(ValueError):
    """Inconsistent configuration (empty bracket, bad constants, ...)."""


@dataclass(frozen=True)
class PressureLaw:
    """Monomial barotropic law ``P = a * rho**gamma`` with ``gamma >= 1``."""

    gamma: float
    a: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ConfigError(f"gamma must be >= 1, got {self.gamma}")
        if not self.a > 0.0:
            raise ConfigError(f"a must be positive, got {self.a}")

    @classmethod
    def from_dict(cls, d):
        return cls(gamma=float(d["gamma"]), a=float(d.get("a", 1.0)))

    def to_dict(self):
        return {"gamma": self.gamma, "a": self.a}

    @property
    def isothermal(self):
        return self.gamma == 1.0

    # pressure and derivatives -------------------------------------------
    def P(self, rho):
        return self.a * np.power(rho, self.gamma)

    def dP(self, rho):
        return self.a * self.gamma * np.power(rho, self.gamma - 1.0)

    def d2P(self, rho):
        g = self.gamma
        return self.a * g * (g - 1.0) * np.power(rho, g - 2.0)

    def d3P(self, rho):
        g = self.gamma
        return self.a * g * (g - 1.0) * (g - 2.0) * np.power(rho, g - 3.0)

    # internal energy and derivatives --------------------------------------
    def H(self, rho):
        rho = np.asarray(rho, dtype=float)
        g, a = self.gamma, self.a
        if g == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = a * rho * np.log(rho)
            return np.where(rho == 0.0, 0.0, out)
        return a * rho * (np.power(rho, g - 1.0) - 1.0) / (g - 1.0)

    def dH(self, rho):
        g, a = self.gamma, self.a
        if g == 1.0:
            return a * (np.log(rho) + 1.0)
        return a * (g * np.power(rho, g - 1.0) - 1.0) / (g - 1.0)

    def d2H(self, rho):
        return self.a * self.gamma * np.power(rho, self.gamma - 2.0)

    def d3H(self, rho):
        g = self.gamma
        return self.a * g * (g - 2.0) * np.power(rho, g - 3.0)

    def H_divided(self, r0, r1):
        """``(H(r1) - H(r0)) / (r1 - r0)`` without cancellation; ``H'(r0)`` when equal."""
        r0 = np.asarray(r0, dtype=float)
        x = np.asarray(r1, dtype=float) / r0 - 1.0
        small = x == 0.0
        xs = np.where(small, 1.0, x)
        g, a = self.gamma, self.a
        if g == 1.0:
            ratio = np.where(small, 1.0, (1.0 + xs) * np.log1p(xs) / xs)
            return a * (np.log(r0) + ratio)
        ratio = np.where(small, g, np.expm1(g * np.log1p(xs)) / xs)
        return a * (np.power(r0, g - 1.0) * ratio - 1.0) / (g - 1.0)


def _as_nonneg(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or not np.all(np.isfinite(rho)):
        raise DomainError("density must be finite and non-negative")
    return rho


def _as_positive(rho, name="density"):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise DomainError(f"{name} must be finite and positive")
    return rho


def eval_P(law, rho):
    return law.P(_as_nonneg(rho))


def eval_H(law, rho):
    return law.H(_as_positive(rho))


def eval_H1(law, rho):
    return law.dH(_as_positive(rho))


def eval_H2(law, rho):
    return law.d2H(_as_positive(rho))


def relative_energy(law, rho, r):
    """``E(rho, r) = H(rho) - H(r) - H'(r) (rho - r)``, the Bregman divergence of H."""
    rho = _as_nonneg(rho)
    r = _as_positive(r, "reference density")
    return law.H(rho) - law.H(r) - law.dH(r) * (rho - r)


def sandwich_profile(law, rho, r, M=1.0):
    """Comparison function ``|rho-r|^2 1{|rho-r|<M} + |rho-r|^gamma 1{|rho-r|>=M}``."""
    d = np.abs(np.asarray(rho, dtype=float) - np.asarray(r, dtype=float))
    return np.where(d < M, d * d, np.power(d, law.gamma))


@dataclass(frozen=True)
class EntropyBounds:
    """Fitted two-sided constants for the relative-energy sandwich."""

    c1: float
    c2: float
    r_minus: float
    r_plus: float
    M: float
    rho_max: float


def fit_entropy_constants(law, r_minus, r_plus, M=1.0, rho_max=10.0, n=400, margin=0.05):
    """Fit ``c1 <= E / g <= c2`` on a dense deterministic grid of (rho, r).

    The ratio is continuous away from ``rho == r`` (where it tends to
    ``H''(r)/2``), so min/max over a fine grid widened by ``margin`` gives
    constants that hold on fresh samples.  Raises ConfigError if the bracket
    is empty.
    """
    if not (0.0 < r_minus <= r_plus):
        raise ConfigError(f"empty density bracket [{r_minus}, {r_plus}]")
    if not (M > 0.0 and rho_max > 0.0):
        raise ConfigError("M and rho_max must be positive")
    rho = np.linspace(rho_max / n, rho_max, n)
    r = np.linspace(r_minus, r_plus, max(n // 4, 2))
    R, RHO = np.meshgrid(r, rho, indexing="ij")
    g = sandwich_profile(law, RHO, R, M)
    E = relative_energy(law, RHO, R)
    # E cancels catastrophically next to the diagonal; its limit is added below
    mask = np.abs(RHO - R) > 1e-3 * R
    ratio = E[mask] / g[mask]
    # the diagonal limit H''(r)/2 and the small-rho edge are added explicitly
    lim = law.d2H(r) / 2.0
    e0 = relative_energy(law, np.zeros_like(r), r) / sandwich_profile(law, 0.0, r, M)
    lo = min(ratio.min(), lim.min(), e0.min())
    hi = max(ratio.max(), lim.max(), e0.max())
    bounds = EntropyBounds(lo * (1.0 - margin), hi * (1.0 + margin), r_minus, r_plus, M, rho_max)
    lower, value, upper, bad = entropy_bounds_check(law, RHO, R, bounds)
    if bad.any():
        raise ConfigError("fitted constants violated on the fitting grid")
    return bounds


def entropy_bounds_check(law, rho, r, bounds):
    """Return ``(lower, value, upper, violated)`` arrays for the sandwich bound."""
    r = np.asarray(r, dtype=float)
    if np.any(r < bounds.r_minus) or np.any(r > bounds.r_plus):
        raise ConfigError("reference density outside the fitted bracket")
    g = sandwich_profile(law, rho, r, bounds.M)
    value = relative_energy(law, rho, r)
    lower = bounds.c1 * g
    upper = bounds.c2 * g
    tol = 1e-13 * (1.0 + np.abs(value))
    violated = (value < lower - tol) | (value > upper + tol)
    return lower, value, upper, violated
