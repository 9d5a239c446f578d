"""Reference numpy versions of the MAC-grid kernels.

Layout: ``rho[i, j, k]`` at cell centres, ``u1[i, j, k]`` on the x-face between
cells ``i`` and ``i+1``, ``u2`` likewise in y, ``u3[i, j, m]`` on the interior
z-face between cells ``m`` and ``m+1`` (walls carry no unknowns).
"""
import numpy as np


def _pad_z(f):
    """Append zero wall values on both ends of the z-face axis."""
    return np.pad(f, ((0, 0), (0, 0), (1, 1)))


def face_rho(rho):
    r1 = 0.5 * (rho + np.roll(rho, -1, 0))
    r2 = 0.5 * (rho + np.roll(rho, -1, 1))
    r3 = 0.5 * (rho[..., 1:] + rho[..., :-1])
    return r1, r2, r3


def divergence(F1, F2, F3, dx, dy, dz):
    F3p = _pad_z(F3)
    return ((F1 - np.roll(F1, 1, 0)) / dx + (F2 - np.roll(F2, 1, 1)) / dy
            + (F3p[..., 1:] - F3p[..., :-1]) / dz)


def gradient(phi, dx, dy, dz):
    return ((np.roll(phi, -1, 0) - phi) / dx, (np.roll(phi, -1, 1) - phi) / dy,
            (phi[..., 1:] - phi[..., :-1]) / dz)


def cell_kinetic(u1, u2, u3):
    a = u1 * u1
    b = u2 * u2
    c = _pad_z(u3 * u3)
    return 0.25 * (a + np.roll(a, 1, 0) + b + np.roll(b, 1, 1) + c[..., 1:] + c[..., :-1])


def vortex_force(u1, u2, u3, F1, F2, F3, rho, f0, dx, dy, dz, coriolis_only=False):
    """``-q x F`` with ``q = (curl u + f0 e3) / rho`` on edges, energy-neutral averaging."""
    # z-edges (i+1/2, j+1/2, k)
    if coriolis_only:
        w3 = f0
    else:
        w3 = (np.roll(u2, -1, 0) - u2) / dx - (np.roll(u1, -1, 1) - u1) / dy + f0
    re3 = 0.25 * (rho + np.roll(rho, -1, 0) + np.roll(rho, -1, 1) + np.roll(np.roll(rho, -1, 0), -1, 1))
    q3 = w3 / re3
    F1e = 0.5 * (F1 + np.roll(F1, -1, 1))
    F2e = 0.5 * (F2 + np.roll(F2, -1, 0))
    t = q3 * F2e
    a1 = 0.5 * (t + np.roll(t, 1, 1))
    t = q3 * F1e
    a2 = -0.5 * (t + np.roll(t, 1, 0))
    a3 = np.zeros_like(u3)
    if coriolis_only or u3.shape[2] == 0:
        return a1, a2, a3
    # x-edges (i, j+1/2, m)
    w1 = (np.roll(u3, -1, 1) - u3) / dy - (u2[..., 1:] - u2[..., :-1]) / dz
    rz = rho[..., 1:] + rho[..., :-1]
    re1 = 0.25 * (rz + np.roll(rz, -1, 1))
    q1 = w1 / re1
    F2x = 0.5 * (F2[..., 1:] + F2[..., :-1])
    F3x = 0.5 * (F3 + np.roll(F3, -1, 1))
    t = _pad_z(q1 * F3x)
    a2 = a2 + 0.5 * (t[..., 1:] + t[..., :-1])
    t = q1 * F2x
    a3 = a3 - 0.5 * (t + np.roll(t, 1, 1))
    # y-edges (i+1/2, j, m)
    w2 = (u1[..., 1:] - u1[..., :-1]) / dz - (np.roll(u3, -1, 0) - u3) / dx
    re2 = 0.25 * (rz + np.roll(rz, -1, 0))
    q2 = w2 / re2
    F1y = 0.5 * (F1[..., 1:] + F1[..., :-1])
    F3y = 0.5 * (F3 + np.roll(F3, -1, 0))
    t = _pad_z(q2 * F3y)
    a1 = a1 - 0.5 * (t[..., 1:] + t[..., :-1])
    t = q2 * F1y
    a3 = a3 + 0.5 * (t + np.roll(t, 1, 0))
    return a1, a2, a3


def _lap_h(f, dx, dy):
    return ((np.roll(f, -1, 0) - 2 * f + np.roll(f, 1, 0)) / dx ** 2
            + (np.roll(f, -1, 1) - 2 * f + np.roll(f, 1, 1)) / dy ** 2)


def _dzz_cells(f, dz):
    # no-slip wall halfway between the last cell centre and its mirror
    g = np.concatenate([-f[..., :1], f, -f[..., -1:]], axis=2)
    return (g[..., 2:] - 2 * g[..., 1:-1] + g[..., :-2]) / dz ** 2


def _dzz_faces(f, dz):
    g = _pad_z(f)
    return (g[..., 2:] - 2 * g[..., 1:-1] + g[..., :-2]) / dz ** 2


def viscous(u1, u2, u3, mu, ev, lam, dx, dy, dz):
    """``mu Lap_h u + ev d3^2 u + lam grad div u`` (per unit volume, symmetric negative)."""
    div = divergence(u1, u2, u3, dx, dy, dz)
    g1, g2, g3 = gradient(div, dx, dy, dz)
    A1 = mu * _lap_h(u1, dx, dy) + ev * _dzz_cells(u1, dz) + lam * g1
    A2 = mu * _lap_h(u2, dx, dy) + ev * _dzz_cells(u2, dz) + lam * g2
    A3 = mu * _lap_h(u3, dx, dy) + ev * _dzz_faces(u3, dz) + lam * g3
    return A1, A2, A3
