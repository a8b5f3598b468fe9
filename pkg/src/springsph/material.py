"""Constitutive response, pairwise stabilization and damage criteria.

Stress is split as sigma = S - P*I with P positive in compression. Symmetric
tensors are stored in 6-component form [xx, yy, zz, xy, xz, yz]; 2D runs use
the plane-strain embedding (eps_zz = 0, S_zz carried explicitly) so the
deviator stays trace-free in the full tensor sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CRITERIA = (
    "none",
    "max_principal_strain",
    "max_principal_stress",
    "critical_stretch",
    "johnson_cook",
)

# sym6 component order and the index pairs they represent
SYM6 = ("xx", "yy", "zz", "xy", "xz", "yz")


@dataclass(frozen=True)
class JohnsonCook:
    """Five-parameter flow stress and failure-strain surfaces.

    Flow: sigma_y = (A + B*ep^n) * (1 + C*ln(rate/rate_ref)) * (1 - T*^m).
    Failure strain: ef = (d1 + d2*exp(d3*triax)) * (1 + d4*ln(rate/rate_ref))
    * (1 + d5*T*). Plastic work heats the particle adiabatically through
    (taylor_quinney / (rho * specific_heat)).
    """

    A: float
    B: float
    n: float
    C: float
    m: float
    rate_ref: float = 1.0
    T_ref: float = 293.0
    T_melt: float = 1800.0
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0
    d5: float = 0.0
    specific_heat: float = 450.0
    taylor_quinney: float = 0.9


@dataclass(frozen=True)
class Material:
    """Elastic constants plus the single active damage criterion."""

    rho0: float
    E: float
    nu: float
    criterion: str = "none"
    eps_max: float | None = None          # max principal strain threshold
    sigma_p_max: float | None = None      # max principal stress threshold (Pa)
    delta_tc: float | None = None         # critical bond stretch
    sigma_y0: float | None = None         # constant yield stress (Pa), None = elastic
    jc: JohnsonCook | None = None
    strain_measure: str = "accumulated"   # or "stress_over_E" sensitivity switch
    K: float = field(init=False)
    mu: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "K", self.E / (3.0 * (1.0 - 2.0 * self.nu)))
        object.__setattr__(self, "mu", self.E / (2.0 * (1.0 + self.nu)))
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown damage criterion {self.criterion!r}")
        needed = {
            "max_principal_strain": self.eps_max,
            "max_principal_stress": self.sigma_p_max,
            "critical_stretch": self.delta_tc,
            "johnson_cook": self.jc,
        }
        if self.criterion in needed and needed[self.criterion] is None:
            raise ValueError(f"criterion {self.criterion!r} needs its threshold parameter")

    @property
    def sound_speed(self) -> float:
        """Sound speed C = sqrt(E/rho0) used by viscosity and the CFL bound."""
        return math.sqrt(self.E / self.rho0)


def eos_pressure(rho, mat: Material):
    """Linear compressibility P = K (rho/rho0 - 1); positive in compression."""
    return mat.K * (np.asarray(rho, dtype=np.float64) / mat.rho0 - 1.0)


def strain_rate_and_spin(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a velocity gradient L into strain rate and spin, eps + omega = L."""
    L = np.asarray(L, dtype=np.float64)
    eps = 0.5 * (L + L.T)
    omega = 0.5 * (L - L.T)
    return eps, omega


def sym6_from_matrix(T: np.ndarray) -> np.ndarray:
    """Pack a symmetric 2x2 or 3x3 matrix into sym6 (2D uses plane strain)."""
    T = np.asarray(T, dtype=np.float64)
    out = np.zeros(6)
    d = T.shape[0]
    out[0] = T[0, 0]
    out[1] = T[1, 1]
    out[3] = T[0, 1]
    if d == 3:
        out[2] = T[2, 2]
        out[4] = T[0, 2]
        out[5] = T[1, 2]
    return out


def matrix_from_sym6(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    return np.array(
        [
            [s[0], s[3], s[4]],
            [s[3], s[1], s[5]],
            [s[4], s[5], s[2]],
        ]
    )


def spin3_from_matrix(W: np.ndarray) -> np.ndarray:
    """Pack the independent spin components [w_xy, w_xz, w_yz]."""
    W = np.asarray(W, dtype=np.float64)
    if W.shape[0] == 2:
        return np.array([W[0, 1], 0.0, 0.0])
    return np.array([W[0, 1], W[0, 2], W[1, 2]])


def jaumann_rate(S: np.ndarray, eps_rate: np.ndarray, spin: np.ndarray, mat: Material):
    """Deviatoric stress rate, sym6 in / sym6 out (batched over axis 0).

    S_dot = 2 mu (eps_rate - I tr(eps_rate)/3) + omega S - S omega.
    """
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    e = np.atleast_2d(np.asarray(eps_rate, dtype=np.float64))
    w = np.atleast_2d(np.asarray(spin, dtype=np.float64))
    tr = (e[:, 0] + e[:, 1] + e[:, 2]) / 3.0
    out = np.empty_like(S)
    out[:, 0] = 2.0 * mat.mu * (e[:, 0] - tr)
    out[:, 1] = 2.0 * mat.mu * (e[:, 1] - tr)
    out[:, 2] = 2.0 * mat.mu * (e[:, 2] - tr)
    out[:, 3] = 2.0 * mat.mu * e[:, 3]
    out[:, 4] = 2.0 * mat.mu * e[:, 4]
    out[:, 5] = 2.0 * mat.mu * e[:, 5]
    wxy, wxz, wyz = w[:, 0], w[:, 1], w[:, 2]
    sxx, syy, szz = S[:, 0], S[:, 1], S[:, 2]
    sxy, sxz, syz = S[:, 3], S[:, 4], S[:, 5]
    out[:, 0] += 2.0 * (wxy * sxy + wxz * sxz)
    out[:, 1] += 2.0 * (-wxy * sxy + wyz * syz)
    out[:, 2] += 2.0 * (-wxz * sxz - wyz * syz)
    out[:, 3] += wxy * (syy - sxx) + wxz * syz + wyz * sxz
    out[:, 4] += wxz * (szz - sxx) + wxy * syz - wyz * sxy
    out[:, 5] += wyz * (szz - syy) - wxy * sxz - wxz * sxy
    return out if np.asarray(eps_rate).ndim == 2 else out[0]


def second_invariant(S: np.ndarray) -> np.ndarray:
    """J2 = 0.5 S:S for sym6 tensors (batched)."""
    scalar = np.asarray(S).ndim == 1
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    j2 = 0.5 * (S[:, 0] ** 2 + S[:, 1] ** 2 + S[:, 2] ** 2) + (
        S[:, 3] ** 2 + S[:, 4] ** 2 + S[:, 5] ** 2
    )
    return float(j2[0]) if scalar else j2


def von_mises_return(S_trial: np.ndarray, sigma_y, mat: Material):
    """Radial return to the von Mises surface (Wilkins scaling).

    Returns (S_n, c_f, d_eps_pl, d_W_p) where c_f = min(sigma_y/sqrt(3 J2), 1),
    S_n = c_f S, d_eps_pl = (1-c_f)/(3 mu) sqrt(1.5 S:S) and d_W_p is the
    plastic work density increment d_eps_pl_ab S_n_ab.
    """
    scalar = np.asarray(S_trial).ndim == 1
    S = np.atleast_2d(np.asarray(S_trial, dtype=np.float64)).copy()
    sigma_y = np.broadcast_to(np.asarray(sigma_y, dtype=np.float64), S.shape[0])
    j2 = 0.5 * (S[:, 0] ** 2 + S[:, 1] ** 2 + S[:, 2] ** 2) + (
        S[:, 3] ** 2 + S[:, 4] ** 2 + S[:, 5] ** 2
    )
    seq = np.sqrt(3.0 * j2)
    c_f = np.ones_like(seq)
    yielding = seq > sigma_y
    c_f[yielding] = sigma_y[yielding] / seq[yielding]
    d_eps = (1.0 - c_f) * seq / (3.0 * mat.mu)
    d_wp = (1.0 - c_f) * c_f * j2 / mat.mu
    S_n = S * c_f[:, None]
    if scalar:
        return S_n[0], float(c_f[0]), float(d_eps[0]), float(d_wp[0])
    return S_n, c_f, d_eps, d_wp


def johnson_cook_flow(eps_pl, eps_pl_rate, T, jc: JohnsonCook):
    """JC flow stress; hardening, rate and thermal factors multiply."""
    ep = np.asarray(eps_pl, dtype=np.float64)
    rate = np.maximum(np.asarray(eps_pl_rate, dtype=np.float64), 0.0)
    rate_fac = 1.0 + jc.C * np.log(np.maximum(rate / jc.rate_ref, 1.0))
    t_star = np.clip(
        (np.asarray(T, dtype=np.float64) - jc.T_ref) / (jc.T_melt - jc.T_ref), 0.0, 1.0
    )
    return (jc.A + jc.B * ep**jc.n) * rate_fac * (1.0 - t_star**jc.m)


def johnson_cook_failure_strain(pressure, seq, eps_pl_rate, T, jc: JohnsonCook):
    """JC failure strain; triaxiality = sigma_mean/sigma_eq with sigma_mean = -P."""
    seq = np.asarray(seq, dtype=np.float64)
    triax = np.where(seq > 0.0, -np.asarray(pressure, dtype=np.float64) / np.maximum(seq, 1e-30), 0.0)
    triax = np.clip(triax, -1.5, 1.5)
    rate = np.maximum(np.asarray(eps_pl_rate, dtype=np.float64), 0.0)
    rate_fac = 1.0 + jc.d4 * np.log(np.maximum(rate / jc.rate_ref, 1.0))
    t_star = np.clip(
        (np.asarray(T, dtype=np.float64) - jc.T_ref) / (jc.T_melt - jc.T_ref), 0.0, 1.0
    )
    ef = (jc.d1 + jc.d2 * np.exp(jc.d3 * triax)) * rate_fac * (1.0 + jc.d5 * t_star)
    return np.maximum(ef, 1e-8)


def max_principal_sym6(s: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of stacked sym6 tensors, by the trigonometric method.

    Closed-form Cardano solution for symmetric 3x3; validated against
    numpy.linalg.eigvalsh in the test suite.
    """
    scalar = np.asarray(s).ndim == 1
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    d, e, f = s[:, 3], s[:, 4], s[:, 5]
    q = (a + b + c) / 3.0
    p2 = (a - q) ** 2 + (b - q) ** 2 + (c - q) ** 2 + 2.0 * (d**2 + e**2 + f**2)
    p = np.sqrt(np.maximum(p2 / 6.0, 0.0))
    out = q.copy()
    nz = p > 0.0
    if np.any(nz):
        aa, bb, cc = a[nz] - q[nz], b[nz] - q[nz], c[nz] - q[nz]
        dd, ee, ff = d[nz], e[nz], f[nz]
        detB = aa * (bb * cc - ff * ff) - dd * (dd * cc - ff * ee) + ee * (dd * ff - bb * ee)
        r = np.clip(detB / (2.0 * p[nz] ** 3), -1.0, 1.0)
        phi = np.arccos(r) / 3.0
        out[nz] = q[nz] + 2.0 * p[nz] * np.cos(phi)
    return float(out[0]) if scalar else out


def damage_principal_strain(eps_sym6: np.ndarray, eps_max: float) -> np.ndarray:
    """D = 1 iff the maximum principal accumulated strain reaches eps_max."""
    return (max_principal_sym6(eps_sym6) >= eps_max).astype(np.float64)


def damage_principal_stress(sigma_sym6: np.ndarray, sigma_p_max: float) -> np.ndarray:
    """D = 1 iff the maximum principal Cauchy stress reaches sigma_p_max."""
    return (max_principal_sym6(sigma_sym6) >= sigma_p_max).astype(np.float64)


def damage_critical_stretch(r_current, r_ref, delta_tc: float) -> np.ndarray:
    """Bond-level stretch criterion: D = 1 iff (r - r_ref)/r_ref > delta_tc.

    r_ref is the bond's reference spacing (= lattice spacing for nearest
    neighbours).
    """
    stretch = (np.asarray(r_current, dtype=np.float64) - r_ref) / r_ref
    return (stretch > delta_tc).astype(np.float64)


def artificial_viscosity(u_ij, x_ij, rho_i, rho_j, c_i, c_j, h, beta1, beta2):
    """Monaghan viscosity: active only for approaching pairs (U.X <= 0)."""
    u_ij = np.asarray(u_ij, dtype=np.float64)
    x_ij = np.asarray(x_ij, dtype=np.float64)
    udotx = float(np.dot(u_ij, x_ij))
    if udotx > 0.0:
        return 0.0
    mu_ij = h * udotx / (float(np.dot(x_ij, x_ij)) + 0.01 * h * h)
    c_bar = 0.5 * (c_i + c_j)
    rho_bar = 0.5 * (rho_i + rho_j)
    return (-beta1 * c_bar * mu_ij + beta2 * mu_ij * mu_ij) / rho_bar


def artificial_pressure(
    P_i, P_j, rho_i, rho_j, w_ratio, gamma_tension=0.3, gamma_compression=0.01, exponent=4
):
    """Short-range pairwise term suppressing the tensile instability.

    ``w_ratio`` is W(dx, h)/W(dp, h); the pair counts as tensile when
    P_i + P_j < 0 (pressure positive in compression).
    """
    gamma = gamma_tension if (P_i + P_j) < 0.0 else gamma_compression
    return gamma * (abs(P_i) / rho_i**2 + abs(P_j) / rho_j**2) * w_ratio**exponent
