"""Cubic B-spline kernel, raw gradients and kernel gradient correction.

The corrected gradient restores first-order consistency near free surfaces
and damaged regions: each particle carries a matrix B = A^-1 built from its
(interaction-weighted) neighbourhood, and pair sums use the symmetrized
form 0.5*(B_i + B_j) @ grad_W so that every pair contribution stays exactly
antisymmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# |det A| below DET_RTOL * (mean diagonal)^dim counts as singular and falls
# back to the uncorrected gradient (B = identity).
DET_RTOL = 1e-8


@dataclass(frozen=True)
class KernelConfig:
    """Smoothing configuration: length h, spatial dimension and support 2h."""

    h: float
    dim: int
    alpha_d: float = field(init=False)
    support_radius: float = field(init=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.h <= 0.0:
            raise ValueError(f"smoothing length must be positive, got {self.h}")
        if self.dim == 2:
            alpha = 10.0 / (7.0 * math.pi * self.h**2)
        else:
            alpha = 1.0 / (math.pi * self.h**3)
        object.__setattr__(self, "alpha_d", alpha)
        object.__setattr__(self, "support_radius", 2.0 * self.h)


def eval_kernel(r, cfg: KernelConfig):
    """Kernel value W(r, h). Accepts scalars or arrays of distances."""
    q = np.asarray(r, dtype=np.float64) / cfg.h
    w = np.where(
        q <= 1.0,
        1.0 - 1.5 * q**2 + 0.75 * q**3,
        np.where(q <= 2.0, 0.25 * (2.0 - np.minimum(q, 2.0)) ** 3, 0.0),
    )
    out = cfg.alpha_d * w
    return float(out) if np.isscalar(r) else out


def _grad_coeff(r, cfg: KernelConfig):
    """Coefficient c with grad_W = c * x_ij; finite at r = 0.

    c = (dW/dr)/r = alpha_d/h^2 * (-3 + 2.25 q) on the inner branch.
    """
    q = np.asarray(r, dtype=np.float64) / cfg.h
    inner = (-3.0 + 2.25 * q) / cfg.h**2
    with np.errstate(divide="ignore", invalid="ignore"):
        outer = -0.75 * (2.0 - q) ** 2 / (cfg.h * np.where(r == 0.0, 1.0, r))
    c = np.where(q <= 1.0, inner, np.where(q <= 2.0, outer, 0.0))
    return cfg.alpha_d * c


def eval_kernel_gradient(x_ij: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Gradient of W with respect to x_i for displacement x_ij = x_i - x_j.

    Returns the zero vector at x_ij = 0 (radial symmetry) and outside the
    support. Antisymmetric under i <-> j by construction.
    """
    x_ij = np.asarray(x_ij, dtype=np.float64)
    r = float(np.linalg.norm(x_ij))
    if r == 0.0 or r >= cfg.support_radius:
        return np.zeros_like(x_ij)
    return float(_grad_coeff(r, cfg)) * x_ij


@dataclass
class CorrectionMatrix:
    """Per-particle gradient correction: B = A^-1 with a singular fallback."""

    A: np.ndarray
    B: np.ndarray
    condition_flag: bool


def correction_matrix(
    x_i: np.ndarray,
    neighbors: list[tuple[np.ndarray, float, float, float]],
    cfg: KernelConfig,
) -> CorrectionMatrix:
    """Assemble A^{beta,alpha} = -sum_j (m_j/rho_j) f_ij x_ij^beta W_ij,alpha.

    ``neighbors`` holds (x_j, m_j, rho_j, f_ij) tuples. Damaged bonds are
    weighted by f_ij so the corrected operator sees the same topology as the
    conservation equations. A singular A (one-sided or degenerate
    neighbourhood) falls back to B = identity instead of aborting.
    """
    dim = cfg.dim
    A = np.zeros((dim, dim))
    for x_j, m_j, rho_j, f_ij in neighbors:
        x_ij = np.asarray(x_i, dtype=np.float64) - np.asarray(x_j, dtype=np.float64)
        grad = eval_kernel_gradient(x_ij, cfg)
        A -= (m_j / rho_j) * f_ij * np.outer(x_ij, grad)
    return invert_correction(A)


def invert_correction(A: np.ndarray) -> CorrectionMatrix:
    """Invert A with the scale-invariant singularity test."""
    dim = A.shape[0]
    mean_diag = float(np.trace(A)) / dim
    det = float(np.linalg.det(A))
    if mean_diag <= 0.0 or abs(det) < DET_RTOL * mean_diag**dim:
        return CorrectionMatrix(A=A, B=np.eye(dim), condition_flag=True)
    return CorrectionMatrix(A=A, B=np.linalg.inv(A), condition_flag=False)


def corrected_symmetrized_gradient(
    x_ij: np.ndarray, B_i: np.ndarray, B_j: np.ndarray, cfg: KernelConfig
) -> np.ndarray:
    """Pair gradient 0.5 * (B_i + B_j) @ grad_W(x_ij).

    Shared by both bond endpoints, so W_bar(i,j) = -W_bar(j,i) exactly and
    pairwise momentum exchange cancels to round-off.
    """
    g = eval_kernel_gradient(x_ij, cfg)
    return 0.5 * (np.asarray(B_i) + np.asarray(B_j)) @ g


def invert_corrections_batch(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized B = A^-1 over stacked (n, dim, dim) matrices.

    Returns (B, condition_flags). Used by the numpy compute backend; the
    numba backend carries its own analytic inverse.
    """
    n, dim, _ = A.shape
    mean_diag = np.trace(A, axis1=1, axis2=2) / dim
    with np.errstate(invalid="ignore"):
        det = np.linalg.det(A)
        bad = ~np.isfinite(det) | (mean_diag <= 0.0) | (
            np.abs(det) < DET_RTOL * np.abs(mean_diag) ** dim
        )
    B = np.empty_like(A)
    ok = ~bad
    if np.any(ok):
        B[ok] = np.linalg.inv(A[ok])
    B[bad] = np.eye(dim)
    return B, bad
