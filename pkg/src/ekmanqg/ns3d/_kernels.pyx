# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled MAC-grid kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def face_rho(double[:, :, ::1] rho):
    cdef Py_ssize_t N1 = rho.shape[0], N2 = rho.shape[1], K = rho.shape[2]
    cdef Py_ssize_t i, j, k, ip, jp
    r1 = np.empty((N1, N2, K))
    r2 = np.empty((N1, N2, K))
    r3 = np.empty((N1, N2, K - 1))
    cdef double[:, :, ::1] a = r1, b = r2, c = r3
    for i in range(N1):
        ip = i + 1 if i + 1 < N1 else 0
        for j in range(N2):
            jp = j + 1 if j + 1 < N2 else 0
            for k in range(K):
                a[i, j, k] = 0.5 * (rho[i, j, k] + rho[ip, j, k])
                b[i, j, k] = 0.5 * (rho[i, j, k] + rho[i, jp, k])
            for k in range(K - 1):
                c[i, j, k] = 0.5 * (rho[i, j, k + 1] + rho[i, j, k])
    return r1, r2, r3


def divergence(double[:, :, ::1] F1, double[:, :, ::1] F2, double[:, :, ::1] F3,
               double dx, double dy, double dz):
    cdef Py_ssize_t N1 = F1.shape[0], N2 = F1.shape[1], K = F1.shape[2]
    cdef Py_ssize_t i, j, k, im, jm
    cdef double up, lo
    out = np.empty((N1, N2, K))
    cdef double[:, :, ::1] d = out
    for i in range(N1):
        im = i - 1 if i > 0 else N1 - 1
        for j in range(N2):
            jm = j - 1 if j > 0 else N2 - 1
            for k in range(K):
                up = F3[i, j, k] if k < K - 1 else 0.0
                lo = F3[i, j, k - 1] if k > 0 else 0.0
                d[i, j, k] = ((F1[i, j, k] - F1[im, j, k]) / dx
                              + (F2[i, j, k] - F2[i, jm, k]) / dy + (up - lo) / dz)
    return out


def gradient(double[:, :, ::1] phi, double dx, double dy, double dz):
    cdef Py_ssize_t N1 = phi.shape[0], N2 = phi.shape[1], K = phi.shape[2]
    cdef Py_ssize_t i, j, k, ip, jp
    g1 = np.empty((N1, N2, K))
    g2 = np.empty((N1, N2, K))
    g3 = np.empty((N1, N2, K - 1))
    cdef double[:, :, ::1] a = g1, b = g2, c = g3
    for i in range(N1):
        ip = i + 1 if i + 1 < N1 else 0
        for j in range(N2):
            jp = j + 1 if j + 1 < N2 else 0
            for k in range(K):
                a[i, j, k] = (phi[ip, j, k] - phi[i, j, k]) / dx
                b[i, j, k] = (phi[i, jp, k] - phi[i, j, k]) / dy
            for k in range(K - 1):
                c[i, j, k] = (phi[i, j, k + 1] - phi[i, j, k]) / dz
    return g1, g2, g3


def cell_kinetic(double[:, :, ::1] u1, double[:, :, ::1] u2, double[:, :, ::1] u3):
    cdef Py_ssize_t N1 = u1.shape[0], N2 = u1.shape[1], K = u1.shape[2]
    cdef Py_ssize_t i, j, k, im, jm
    cdef double up, lo
    out = np.empty((N1, N2, K))
    cdef double[:, :, ::1] e = out
    for i in range(N1):
        im = i - 1 if i > 0 else N1 - 1
        for j in range(N2):
            jm = j - 1 if j > 0 else N2 - 1
            for k in range(K):
                up = u3[i, j, k] if k < K - 1 else 0.0
                lo = u3[i, j, k - 1] if k > 0 else 0.0
                e[i, j, k] = 0.25 * (u1[i, j, k] * u1[i, j, k] + u1[im, j, k] * u1[im, j, k]
                                     + u2[i, j, k] * u2[i, j, k] + u2[i, jm, k] * u2[i, jm, k]
                                     + up * up + lo * lo)
    return out


def vortex_force(double[:, :, ::1] u1, double[:, :, ::1] u2, double[:, :, ::1] u3,
                 double[:, :, ::1] F1, double[:, :, ::1] F2, double[:, :, ::1] F3,
                 double[:, :, ::1] rho, double f0, double dx, double dy, double dz,
                 bint coriolis_only=False):
    cdef Py_ssize_t N1 = u1.shape[0], N2 = u1.shape[1], K = u1.shape[2]
    cdef Py_ssize_t i, j, k, ip, jp
    cdef double w, q, re, Fa, Fb
    a1_ = np.zeros((N1, N2, K))
    a2_ = np.zeros((N1, N2, K))
    a3_ = np.zeros((N1, N2, K - 1))
    cdef double[:, :, ::1] a1 = a1_, a2 = a2_, a3 = a3_
    for i in range(N1):
        ip = i + 1 if i + 1 < N1 else 0
        for j in range(N2):
            jp = j + 1 if j + 1 < N2 else 0
            # z-edge (i+1/2, j+1/2, k): scatter to u1[i, j], u1[i, jp], u2[i, j], u2[ip, j]
            for k in range(K):
                if coriolis_only:
                    w = f0
                else:
                    w = ((u2[ip, j, k] - u2[i, j, k]) / dx
                         - (u1[i, jp, k] - u1[i, j, k]) / dy + f0)
                re = 0.25 * (rho[i, j, k] + rho[ip, j, k] + rho[i, jp, k] + rho[ip, jp, k])
                q = w / re
                Fa = 0.5 * (F1[i, j, k] + F1[i, jp, k])
                Fb = 0.5 * (F2[i, j, k] + F2[ip, j, k])
                a1[i, j, k] += 0.5 * q * Fb
                a1[i, jp, k] += 0.5 * q * Fb
                a2[i, j, k] -= 0.5 * q * Fa
                a2[ip, j, k] -= 0.5 * q * Fa
            if coriolis_only:
                continue
            for k in range(K - 1):
                # x-edge (i, j+1/2, face k): u2[i, j|jp, k|k+1] and u3[i, j|jp, k]
                w = ((u3[i, jp, k] - u3[i, j, k]) / dy
                     - (u2[i, j, k + 1] - u2[i, j, k]) / dz)
                re = 0.25 * (rho[i, j, k] + rho[i, jp, k] + rho[i, j, k + 1] + rho[i, jp, k + 1])
                q = w / re
                Fa = 0.5 * (F2[i, j, k] + F2[i, j, k + 1])
                Fb = 0.5 * (F3[i, j, k] + F3[i, jp, k])
                a2[i, j, k] += 0.5 * q * Fb
                a2[i, j, k + 1] += 0.5 * q * Fb
                a3[i, j, k] -= 0.5 * q * Fa
                a3[i, jp, k] -= 0.5 * q * Fa
                # y-edge (i+1/2, j, face k)
                w = ((u1[i, j, k + 1] - u1[i, j, k]) / dz
                     - (u3[ip, j, k] - u3[i, j, k]) / dx)
                re = 0.25 * (rho[i, j, k] + rho[ip, j, k] + rho[i, j, k + 1] + rho[ip, j, k + 1])
                q = w / re
                Fa = 0.5 * (F1[i, j, k] + F1[i, j, k + 1])
                Fb = 0.5 * (F3[i, j, k] + F3[ip, j, k])
                a1[i, j, k] -= 0.5 * q * Fb
                a1[i, j, k + 1] -= 0.5 * q * Fb
                a3[i, j, k] += 0.5 * q * Fa
                a3[ip, j, k] += 0.5 * q * Fa
    return a1_, a2_, a3_


def viscous(double[:, :, ::1] u1, double[:, :, ::1] u2, double[:, :, ::1] u3,
            double mu, double ev, double lam, double dx, double dy, double dz):
    cdef Py_ssize_t N1 = u1.shape[0], N2 = u1.shape[1], K = u1.shape[2]
    cdef Py_ssize_t i, j, k, ip, im, jp, jm
    cdef double cx = 1.0 / (dx * dx), cy = 1.0 / (dy * dy), cz = 1.0 / (dz * dz)
    cdef double below, above
    div_ = divergence(u1, u2, u3, dx, dy, dz)
    cdef double[:, :, ::1] dv = div_
    A1_ = np.empty((N1, N2, K))
    A2_ = np.empty((N1, N2, K))
    A3_ = np.empty((N1, N2, K - 1))
    cdef double[:, :, ::1] A1 = A1_, A2 = A2_, A3 = A3_
    for i in range(N1):
        ip = i + 1 if i + 1 < N1 else 0
        im = i - 1 if i > 0 else N1 - 1
        for j in range(N2):
            jp = j + 1 if j + 1 < N2 else 0
            jm = j - 1 if j > 0 else N2 - 1
            for k in range(K):
                below = u1[i, j, k - 1] if k > 0 else -u1[i, j, k]
                above = u1[i, j, k + 1] if k < K - 1 else -u1[i, j, k]
                A1[i, j, k] = (mu * ((u1[ip, j, k] - 2 * u1[i, j, k] + u1[im, j, k]) * cx
                                     + (u1[i, jp, k] - 2 * u1[i, j, k] + u1[i, jm, k]) * cy)
                               + ev * (above - 2 * u1[i, j, k] + below) * cz
                               + lam * (dv[ip, j, k] - dv[i, j, k]) / dx)
                below = u2[i, j, k - 1] if k > 0 else -u2[i, j, k]
                above = u2[i, j, k + 1] if k < K - 1 else -u2[i, j, k]
                A2[i, j, k] = (mu * ((u2[ip, j, k] - 2 * u2[i, j, k] + u2[im, j, k]) * cx
                                     + (u2[i, jp, k] - 2 * u2[i, j, k] + u2[i, jm, k]) * cy)
                               + ev * (above - 2 * u2[i, j, k] + below) * cz
                               + lam * (dv[i, jp, k] - dv[i, j, k]) / dy)
            for k in range(K - 1):
                below = u3[i, j, k - 1] if k > 0 else 0.0
                above = u3[i, j, k + 1] if k < K - 2 else 0.0
                A3[i, j, k] = (mu * ((u3[ip, j, k] - 2 * u3[i, j, k] + u3[im, j, k]) * cx
                                     + (u3[i, jp, k] - 2 * u3[i, j, k] + u3[i, jm, k]) * cy)
                               + ev * (above - 2 * u3[i, j, k] + below) * cz
                               + lam * (dv[i, j, k + 1] - dv[i, j, k]) / dz)
    return A1_, A2_, A3_
