"""Column setup and well-prepared data: the ansatz sampled onto the MAC grid."""
from __future__ import annotations

import numpy as np

from .. import ansatz
from ..hydrostatic import VacuumError, solve_profile
from ..pressure import ConfigError
from ..spectral_ops import wavenumbers
from .solver import Flow3DState


def column_profile(law, rho0, grid):
    """Hydrostatic profile on ``2K`` intervals: cell centres are the odd nodes."""
    return solve_profile(law, rho0, 2 * grid.K)


def cell_background(profile):
    return np.ascontiguousarray(profile.rho_bar[1::2])


def _shift(f, sx, sy, length):
    """Evaluate a band-limited periodic field at ``x + sx, y + sy`` (leading two axes)."""
    n = f.shape[0]
    k = wavenumbers(n, length)
    ph = np.exp(1j * (k[:, None] * sx + k[None, :] * sy))
    fh = np.fft.fft2(f, axes=(0, 1))
    return np.fft.ifft2(fh * ph.reshape(ph.shape + (1,) * (f.ndim - 2)), axes=(0, 1)).real


def sample_fields(rho, u, grid):
    """Nodal ansatz fields (nodes ``i dx`` in x_h, ``n dz/2`` in x3) to MAC locations."""
    h = 0.5 * grid.dx
    if rho.shape != (grid.N, grid.N, 2 * grid.K + 1):
        raise ConfigError("ansatz fields do not match the MAC grid")
    r = _shift(rho[..., 1::2], h, h, grid.L_h)
    u1 = _shift(u[0][..., 1::2], 2 * h, h, grid.L_h)
    u2 = _shift(u[1][..., 1::2], h, 2 * h, grid.L_h)
    u3 = _shift(u[2][..., 2:-1:2], h, h, grid.L_h)
    return r, u1, u2, u3


def sample_bundle(bundle, grid):
    return sample_fields(bundle.rho, bundle.u, grid)


def well_prepared_init(Q, profile, eps, grid, mu=1.0, lam=0.1, params=None):
    """Flow state on the ansatz at ``t = 0`` for the stream function ``Q``.

    Returns ``(state, bundle)``; ``profile`` must come from :func:`column_profile`.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (grid.N, grid.N):
        raise ConfigError("Q must live on the horizontal grid")
    if profile.N3 != 2 * grid.K:
        raise ConfigError("profile must have 2K intervals")
    bundle = ansatz.assemble(profile, Q, eps, mu, lam, grid.L_h, check_resolution=False,
                             params=params)
    rho, u1, u2, u3 = sample_bundle(bundle, grid)
    if np.any(rho <= 0):
        raise VacuumError("initial density not positive")
    return Flow3DState(rho, u1, u2, u3, t=0.0, eps=eps), bundle


def balance_residual(Q, profile, grid):
    """Geostrophic balance of the leading-order data (horizontal, vertical max residuals)."""
    return ansatz.geostrophic_residual(np.asarray(Q, dtype=float), profile,
                                       ansatz.Horizontal(grid.N, grid.L_h))
