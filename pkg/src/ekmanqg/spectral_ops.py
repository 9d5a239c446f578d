"""Periodic Fourier-multiplier operators.

Fields are plain numpy arrays indexed ``[x1, x2]`` or ``[x1, x2, x3]``; vector
fields carry the component on a leading axis.  Every inverse Laplacian zeroes
the mean mode, so operations that need invertibility demand zero-mean input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pressure import DomainError

# sharp constant in ||u||_6 <= K ||grad u||_2 on R^3 (Aubin-Talenti)
SOBOLEV_R3 = 4.0 ** (1.0 / 3.0) / (np.sqrt(3.0) * np.pi ** (2.0 / 3.0))


@dataclass(frozen=True)
class ViscosityParams:
    mu: float
    eps_visc: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0 and self.eps_visc > 0 and self.lam > 0):
            raise ValueError("viscosities must be positive")


def wavenumbers(n, length):
    """Angular wavenumbers with the Nyquist entry zeroed so odd derivatives stay real."""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    k[n // 2] = 0.0
    return k


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid; ``shape`` and ``lengths`` have 2 or 3 entries."""

    shape: tuple
    lengths: tuple

    def __post_init__(self):
        for n in self.shape:
            if n < 2 or n & (n - 1):
                raise ValueError(f"grid sizes must be powers of two, got {self.shape}")

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def coords(self):
        return np.meshgrid(*[np.arange(n) * d for n, d in zip(self.shape, self.spacing)],
                           indexing="ij")

    def k(self):
        return np.meshgrid(*[wavenumbers(n, L) for n, L in zip(self.shape, self.lengths)],
                           indexing="ij")

    def k2(self):
        return sum(kk ** 2 for kk in self.k())


def fft(f):
    return np.fft.fftn(f)


def ifft(fh):
    return np.fft.ifftn(fh).real


def _inv_neg_lap(k2):
    with np.errstate(divide="ignore"):
        inv = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    return inv


def derivative(f, grid, axis, order=1):
    kk = grid.k()[axis]
    return ifft((1j * kk) ** order * fft(f))


def gradient(f, grid):
    fh = fft(f)
    return np.stack([ifft(1j * kk * fh) for kk in grid.k()])


def divergence(u, grid):
    return sum(ifft(1j * kk * fft(u[i])) for i, kk in enumerate(grid.k()))


def aniso_symbol(grid, p):
    """Fourier symbol of ``mu Lap_h + eps d3^2`` (``mu Lap_h`` in 2D)."""
    k = grid.k()
    s = -p.mu * (k[0] ** 2 + k[1] ** 2)
    if grid.ndim == 3:
        s = s - p.eps_visc * k[2] ** 2
    return s


def aniso_laplacian(f, grid, p):
    return ifft(aniso_symbol(grid, p) * fft(f))


def lame(u, grid, p):
    """``L u = -Lap_{mu,eps} u - lam grad div u``."""
    s = aniso_symbol(grid, p)
    k = grid.k()
    uh = [fft(c) for c in u]
    divh = sum(1j * kk * c for kk, c in zip(k, uh))
    return np.stack([ifft(-s * uh[i] - p.lam * 1j * k[i] * divh) for i in range(len(u))])


def leray_Q(u, grid):
    """Gradient part ``-grad (-Lap)^{-1} div u``."""
    k = grid.k()
    inv = _inv_neg_lap(grid.k2())
    uh = [fft(c) for c in u]
    divh = sum(1j * kk * c for kk, c in zip(k, uh))
    phi = inv * divh
    return np.stack([ifft(-1j * kk * phi) for kk in k])


def leray_P(u, grid):
    """Divergence-free part ``u - Q u``; the mean mode stays in ``P u``."""
    return u - leray_Q(u, grid)


def _commutator_scalar(h, rb, drb, grid, p):
    k = grid.k()
    k2 = grid.k2()
    inv = _inv_neg_lap(k2)
    hh = fft(h)
    sym = aniso_symbol(grid, p)
    # right side: (rb'/rb^2) (d3 (-Lap)^{-1} Lap_{mu,eps} h + eps d3 h)
    psi_h = inv * sym * hh
    rhs = drb / rb ** 2 * (ifft(1j * k[2] * psi_h) + p.eps_visc * ifft(1j * k[2] * hh))
    # left side: div([1/rb, Q] V) with V = (mu d1 h, mu d2 h, eps d3 h)
    coef = (p.mu, p.mu, p.eps_visc)
    V = [ifft(c * 1j * kk * hh) for c, kk in zip(coef, k)]
    QV = leray_Q(np.stack(V), grid)
    Qw = leray_Q(np.stack([v / rb for v in V]), grid)
    comm = QV / rb - Qw
    lhs = divergence(comm, grid)
    return rhs, lhs


def commutator_C(h, rho_bar, drho_bar, grid, p):
    """Both evaluations of the density/Leray commutator.

    ``rho_bar`` and ``drho_bar`` are 1D arrays over the (periodic) x3 axis.
    ``h`` may be scalar (3D array) or a vector field, treated per component.
    Returns ``(closed_form, defining_form)``.
    """
    rb = np.asarray(rho_bar, dtype=float)
    if np.any(rb <= 0):
        raise DomainError("rho_bar must be bounded below by a positive constant")
    rb = rb[None, None, :]
    drb = np.asarray(drho_bar, dtype=float)[None, None, :]
    h = np.asarray(h, dtype=float)
    if h.ndim == 3:
        return _commutator_scalar(h, rb, drb, grid, p)
    pairs = [_commutator_scalar(c, rb, drb, grid, p) for c in h]
    return np.stack([a for a, _ in pairs]), np.stack([b for _, b in pairs])


def random_band_limited(grid, rng, kmax=None):
    """Random real field with modes ``|n_i| <= kmax`` (default ``N/4``) in every direction."""
    kmax = min(grid.shape) // 4 if kmax is None else kmax
    mask = np.ones(grid.shape, dtype=bool)
    for ax, n in enumerate(grid.shape):
        idx = np.abs(np.fft.fftfreq(n, 1.0 / n)) <= kmax
        mask &= idx.reshape([-1 if a == ax else 1 for a in range(grid.ndim)])
    coef = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    f = np.fft.ifftn(np.where(mask, coef, 0.0)).real
    return f / np.abs(f).max()


def periodic_column(x3, mean=2.0, amp=0.2):
    """Smooth periodic stand-in for the static profile: ``(rho, d rho/dx3)``."""
    w = 2 * np.pi
    return mean + amp * np.cos(w * x3), -amp * w * np.sin(w * x3)


def commutator_gap(grid, p, rng, amp=0.2):
    """Max difference between the two commutator evaluations for one random draw."""
    rb, drb = periodic_column(grid.coords()[2][0, 0], amp=amp)
    a, b = commutator_C(random_band_limited(grid, rng), rb, drb, grid, p)
    return float(np.abs(a - b).max())


def helmholtz_2d(a, b, grid, tol=1e-12):
    """``F = -perp_grad (-Lap)^{-1} a - grad (-Lap)^{-1} b`` so that curl F = a, div F = b."""
    for name, f in (("a", a), ("b", b)):
        if abs(np.mean(f)) > tol * (1.0 + np.max(np.abs(f))):
            raise DomainError(f"{name} must have zero mean on the periodic square")
    k1, k2_ = grid.k()
    inv = _inv_neg_lap(grid.k2())
    ah = inv * fft(a)
    bh = inv * fft(b)
    # perp_grad = (-d2, d1)
    F1 = -(-1j * k2_ * ah) - 1j * k1 * bh
    F2 = -(1j * k1 * ah) - 1j * k2_ * bh
    return np.stack([ifft(F1), ifft(F2)])


def curl_2d(F, grid):
    k1, k2_ = grid.k()
    return ifft(1j * k1 * fft(F[1]) - 1j * k2_ * fft(F[0]))


def aniso_sobolev_ratio(u, kappa, grid2d, x3, du3, grad_h=None):
    """``||u||_6 / (kappa^{-1/2} ||grad_h u||_2 + kappa ||d3 u||_2)`` on the slab.

    ``u`` has shape ``(N1, N2, len(x3))`` (scalar) and vanishes at both walls;
    ``du3`` is its vertical derivative on the same nodes.  Horizontal gradients
    are spectral; integrals use rectangles in ``x_h`` and trapezoids in ``x3``.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise DomainError("ratio undefined for u = 0")
    dA = grid2d.cell_volume

    def integral(f):
        return dA * np.trapezoid(f.sum(axis=(0, 1)), x3)

    if grad_h is None:
        uh = np.fft.fft2(u, axes=(0, 1))
        k1, k2_ = grid2d.k()
        gx = np.fft.ifft2(1j * k1[..., None] * uh, axes=(0, 1)).real
        gy = np.fft.ifft2(1j * k2_[..., None] * uh, axes=(0, 1)).real
        gh2 = gx ** 2 + gy ** 2
    else:
        gh2 = np.sum(np.asarray(grad_h) ** 2, axis=0)
    L6 = integral(u ** 6) ** (1.0 / 6.0)
    A = np.sqrt(integral(gh2))
    B = np.sqrt(integral(np.asarray(du3) ** 2))
    return L6 / (kappa ** -0.5 * A + kappa * B), (L6, A, B)


def optimal_kappa(A, B):
    """Minimiser of ``kappa^{-1/2} A + kappa B``."""
    return (A / (2.0 * B)) ** (2.0 / 3.0)


def bump_family(scale, grid2d, x3, width=1.0):
    """Separable bump ``exp(-|s x_h - c|^2 / w^2) * x3 (1 - x3)`` and its x3-derivative.

    The bump is centred in the box and localised, so the periodic box behaves
    like the plane for the horizontal rescaling.
    """
    x1, x2 = grid2d.coords()
    c = [L / 2 for L in grid2d.lengths]
    r2 = ((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) * scale ** 2
    phi = np.exp(-r2 / width ** 2)[..., None]
    return phi * (x3 * (1 - x3)), phi * (1 - 2 * x3)


def sobolev_sweep(scales=(1, 2, 4), kappas=(0.1, 1.0, 10.0), n=128, length=16.0, n3=64):
    """Ratios over the bump family: fixed-kappa table and optimal-kappa value per scale."""
    grid2d = Grid((n, n), (length, length))
    x3 = np.linspace(0.0, 1.0, n3 + 1)
    table, optimal = {}, {}
    for s in scales:
        u, du3 = bump_family(s, grid2d, x3)
        for kap in kappas:
            table[(s, kap)] = aniso_sobolev_ratio(u, kap, grid2d, x3, du3)[0]
        _, (_, A, B) = aniso_sobolev_ratio(u, 1.0, grid2d, x3, du3)
        kopt = optimal_kappa(A, B)
        optimal[s] = (kopt, aniso_sobolev_ratio(u, kopt, grid2d, x3, du3)[0])
    return table, optimal
