"""Numba bond kernels: serial @njit loops in canonical bond order.

Serial scatter keeps trajectories bit-reproducible; the loop body mirrors
impl_numpy exactly (equivalence is pinned by tests).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def _assemble_A_kernel(x, m, rho, bi, bj, f, h, alpha_d, dim, A):
    nb = bi.shape[0]
    two_h = 2.0 * h
    for b in range(nb):
        fb = f[b]
        if fb <= 0.0:
            continue
        i = bi[b]
        j = bj[b]
        r2 = 0.0
        for d in range(dim):
            dd = x[i, d] - x[j, d]
            r2 += dd * dd
        r = np.sqrt(r2)
        if r <= 0.0 or r >= two_h:
            continue
        q = r / h
        if q <= 1.0:
            c = alpha_d * (-3.0 + 2.25 * q) / (h * h)
        else:
            c = -0.75 * alpha_d * (2.0 - q) ** 2 / (h * r)
        w_i = (m[j] / rho[j]) * fb
        w_j = (m[i] / rho[i]) * fb
        for p in range(dim):
            dxp = x[i, p] - x[j, p]
            for a in range(dim):
                dxa = x[i, a] - x[j, a]
                contrib = c * dxp * dxa
                A[i, p, a] -= w_i * contrib
                A[j, p, a] -= w_j * contrib


def assemble_A(x, m, rho, bi, bj, f, h, alpha_d, dim):
    A = np.zeros((x.shape[0], dim, dim))
    _assemble_A_kernel(x, m, rho, bi, bj, f, h, alpha_d, dim, A)
    return A


@njit(cache=True, fastmath=False)
def _rhs_kernel(
    x,
    u,
    rho,
    m,
    P,
    sigma6,
    C,
    B,
    bi,
    bj,
    f,
    h,
    alpha_d,
    w_dp,
    beta1,
    beta2,
    ap_enabled,
    gamma_t,
    gamma_c,
    ap_exp,
    bc_mask,
    bc_sigma6,
    bc_use_corrected,
    drho,
    acc,
    de,
    L,
):
    nb = bi.shape[0]
    dim = x.shape[1]
    two_h = 2.0 * h
    eps_h2 = 0.01 * h * h
    dx = np.empty(dim)
    du = np.empty(dim)
    g = np.empty(dim)
    wbar = np.empty(dim)
    tw = np.empty(dim)
    s0g = np.empty(dim)
    has_bc = bc_mask.any()
    for b in range(nb):
        i = bi[b]
        j = bj[b]
        r2 = 0.0
        for d in range(dim):
            dx[d] = x[i, d] - x[j, d]
            r2 += dx[d] * dx[d]
        r = np.sqrt(r2)
        if r <= 0.0 or r >= two_h:
            continue
        q = r / h
        if q <= 1.0:
            c = alpha_d * (-3.0 + 2.25 * q) / (h * h)
            w = alpha_d * (1.0 - 1.5 * q * q + 0.75 * q * q * q)
        else:
            c = -0.75 * alpha_d * (2.0 - q) ** 2 / (h * r)
            w = 0.25 * alpha_d * (2.0 - q) ** 3
        for d in range(dim):
            g[d] = c * dx[d]
        for d in range(dim):
            acc_w = 0.0
            for a in range(dim):
                acc_w += 0.5 * (B[i, d, a] + B[j, d, a]) * g[a]
            wbar[d] = acc_w

        if has_bc and (bc_mask[i] or bc_mask[j]):
            gd = wbar if bc_use_corrected else g
            _sym6_matvec_one(bc_sigma6, gd, dim, s0g)
            coef = 1.0 / (rho[i] * rho[j])
            if bc_mask[i]:
                for d in range(dim):
                    acc[i, d] -= m[j] * coef * s0g[d]
            if bc_mask[j]:
                for d in range(dim):
                    acc[j, d] += m[i] * coef * s0g[d]

        fb = f[b]
        if fb <= 0.0:
            continue

        udotx = 0.0
        for d in range(dim):
            du[d] = u[i, d] - u[j, d]
            udotx += du[d] * dx[d]
        pi_ij = 0.0
        if udotx <= 0.0:
            mu_ij = h * udotx / (r2 + eps_h2)
            c_bar = 0.5 * (C[i] + C[j])
            rho_bar = 0.5 * (rho[i] + rho[j])
            pi_ij = (-beta1 * c_bar * mu_ij + beta2 * mu_ij * mu_ij) / rho_bar
        pa_ij = 0.0
        if ap_enabled:
            gamma = gamma_t if (P[i] + P[j]) < 0.0 else gamma_c
            pa_ij = (
                gamma
                * (abs(P[i]) / (rho[i] * rho[i]) + abs(P[j]) / (rho[j] * rho[j]))
                * (w / w_dp) ** ap_exp
            )
        diag = pi_ij + pa_ij

        ri2 = rho[i] * rho[i]
        rj2 = rho[j] * rho[j]
        t_xx = sigma6[i, 0] / ri2 + sigma6[j, 0] / rj2 - diag
        t_yy = sigma6[i, 1] / ri2 + sigma6[j, 1] / rj2 - diag
        t_xy = sigma6[i, 3] / ri2 + sigma6[j, 3] / rj2
        if dim == 2:
            tw[0] = t_xx * wbar[0] + t_xy * wbar[1]
            tw[1] = t_xy * wbar[0] + t_yy * wbar[1]
        else:
            t_zz = sigma6[i, 2] / ri2 + sigma6[j, 2] / rj2 - diag
            t_xz = sigma6[i, 4] / ri2 + sigma6[j, 4] / rj2
            t_yz = sigma6[i, 5] / ri2 + sigma6[j, 5] / rj2
            tw[0] = t_xx * wbar[0] + t_xy * wbar[1] + t_xz * wbar[2]
            tw[1] = t_xy * wbar[0] + t_yy * wbar[1] + t_yz * wbar[2]
            tw[2] = t_xz * wbar[0] + t_yz * wbar[1] + t_zz * wbar[2]

        g_c = 0.0
        epow = 0.0
        for d in range(dim):
            g_c += du[d] * wbar[d]
            epow += du[d] * tw[d]
        g_c *= fb
        epow *= fb
        drho[i] += m[j] * g_c
        drho[j] += m[i] * g_c
        de[i] -= 0.5 * m[j] * epow
        de[j] -= 0.5 * m[i] * epow
        vol_i = fb * m[j] / rho[j]
        vol_j = fb * m[i] / rho[i]
        for d in range(dim):
            contrib = fb * tw[d]
            acc[i, d] += m[j] * contrib
            acc[j, d] -= m[i] * contrib
        for a in range(dim):
            for bb in range(dim):
                gl = du[a] * wbar[bb]
                L[i, a, bb] -= vol_i * gl
                L[j, a, bb] -= vol_j * gl


@njit(cache=True, inline="always")
def _sym6_matvec_one(T6, v, dim, out):
    if dim == 2:
        out[0] = T6[0] * v[0] + T6[3] * v[1]
        out[1] = T6[3] * v[0] + T6[1] * v[1]
    else:
        out[0] = T6[0] * v[0] + T6[3] * v[1] + T6[4] * v[2]
        out[1] = T6[3] * v[0] + T6[1] * v[1] + T6[5] * v[2]
        out[2] = T6[4] * v[0] + T6[5] * v[1] + T6[2] * v[2]


def rhs_bond_pass(
    x,
    u,
    rho,
    m,
    P,
    sigma6,
    C,
    B,
    bi,
    bj,
    f,
    h,
    alpha_d,
    w_dp,
    beta1,
    beta2,
    ap_enabled,
    gamma_t,
    gamma_c,
    ap_exp,
    bc_mask,
    bc_sigma6,
    bc_use_corrected,
):
    n, dim = x.shape
    drho = np.zeros(n)
    acc = np.zeros((n, dim))
    de = np.zeros(n)
    L = np.zeros((n, dim, dim))
    if bc_mask is None:
        bc_mask = np.zeros(n, dtype=np.bool_)
    if bc_sigma6 is None:
        bc_sigma6 = np.zeros(6)
    _rhs_kernel(
        x,
        u,
        rho,
        m,
        P,
        sigma6,
        C,
        B,
        bi,
        bj,
        f,
        h,
        alpha_d,
        w_dp,
        beta1,
        beta2,
        ap_enabled,
        gamma_t,
        gamma_c,
        ap_exp,
        bc_mask,
        bc_sigma6,
        bc_use_corrected,
        drho,
        acc,
        de,
        L,
    )
    return drho, acc, de, L


@njit(cache=True)
def _kernel_sum_kernel(x, m, rho, bi, bj, f, h, alpha_d, out):
    nb = bi.shape[0]
    dim = x.shape[1]
    for b in range(nb):
        i = bi[b]
        j = bj[b]
        r2 = 0.0
        for d in range(dim):
            dd = x[i, d] - x[j, d]
            r2 += dd * dd
        q = np.sqrt(r2) / h
        if q <= 1.0:
            w = alpha_d * (1.0 - 1.5 * q * q + 0.75 * q * q * q)
        elif q <= 2.0:
            w = 0.25 * alpha_d * (2.0 - q) ** 3
        else:
            continue
        out[i] += (m[j] / rho[j]) * f[b] * w
        out[j] += (m[i] / rho[i]) * f[b] * w


def kernel_sum(x, m, rho, bi, bj, f, h, alpha_d, dim):
    out = (m / rho) * alpha_d
    _kernel_sum_kernel(x, m, rho, bi, bj, f, h, alpha_d, out)
    return out
