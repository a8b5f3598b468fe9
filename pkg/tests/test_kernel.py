"""Kernel values, gradients and the gradient correction.

Expected numbers come from hand evaluation of the spline branches, numerical
quadrature, finite differences and brute-force lattice assembly.
"""

import math

import numpy as np
import pytest

from springsph.kernel import (
    CorrectionMatrix,
    KernelConfig,
    correction_matrix,
    corrected_symmetrized_gradient,
    eval_kernel,
    eval_kernel_gradient,
    invert_corrections_batch,
)


def lattice2d(nx, ny, dp):
    xs = (np.arange(nx) + 0.5) * dp
    ys = (np.arange(ny) + 0.5) * dp
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def test_kernel_peak_value_2d():
    cfg = KernelConfig(h=1.0, dim=2)
    assert eval_kernel(0.0, cfg) == pytest.approx(10.0 / (7.0 * math.pi), rel=1e-12)


def test_kernel_support_boundary():
    for h in (0.3, 1.0, 2.5):
        cfg = KernelConfig(h=h, dim=2)
        assert eval_kernel(2.0 * h, cfg) == 0.0
        assert eval_kernel(2.5 * h, cfg) == 0.0


def test_kernel_midpoint_branch():
    # q=1 branch: 1 - 1.5 + 0.75 = 0.25
    cfg = KernelConfig(h=1.0, dim=2)
    assert eval_kernel(1.0, cfg) == pytest.approx(0.25 * 10.0 / (7.0 * math.pi), rel=1e-12)


def test_kernel_monotone_nonincreasing_and_nonnegative():
    cfg = KernelConfig(h=0.7, dim=3)
    r = np.linspace(0.0, 2.5 * cfg.h, 512)
    w = eval_kernel(r, cfg)
    assert np.all(w >= 0.0)
    assert np.all(np.diff(w) <= 1e-15)


@pytest.mark.parametrize("dim", [2, 3])
def test_kernel_normalization_quadrature(dim):
    """Midpoint-rule integral of W over its support equals 1 within 1e-3."""
    h = 0.8
    cfg = KernelConfig(h=h, dim=dim)
    n = 160 if dim == 2 else 72
    span = np.linspace(-2 * h, 2 * h, n, endpoint=False)
    cell = span[1] - span[0]
    span = span + 0.5 * cell
    grids = np.meshgrid(*([span] * dim), indexing="ij")
    r = np.sqrt(sum(g**2 for g in grids))
    total = eval_kernel(r.ravel(), cfg).sum() * cell**dim
    assert total == pytest.approx(1.0, abs=1e-3)


def test_gradient_zero_cases():
    cfg = KernelConfig(h=1.0, dim=2)
    assert np.all(eval_kernel_gradient(np.zeros(2), cfg) == 0.0)
    assert np.all(eval_kernel_gradient(np.array([2.0, 0.0]), cfg) == 0.0)
    assert np.all(eval_kernel_gradient(np.array([3.0, 1.0]), cfg) == 0.0)


def test_gradient_antisymmetric_under_swap():
    cfg = KernelConfig(h=1.0, dim=3)
    x = np.array([0.4, -0.3, 0.8])
    ga = eval_kernel_gradient(x, cfg)
    gb = eval_kernel_gradient(-x, cfg)
    np.testing.assert_allclose(ga, -gb, rtol=0, atol=0)


def test_gradient_matches_finite_difference():
    cfg = KernelConfig(h=1.0, dim=2)
    x = np.array([0.5, 0.0])
    g = eval_kernel_gradient(x, cfg)
    d = 1e-7
    fd = np.array(
        [
            (eval_kernel(np.linalg.norm(x + [d, 0]), cfg) - eval_kernel(np.linalg.norm(x - [d, 0]), cfg)),
            (eval_kernel(np.linalg.norm(x + [0, d]), cfg) - eval_kernel(np.linalg.norm(x - [0, d]), cfg)),
        ]
    ) / (2 * d)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-12)


def test_gradient_finite_difference_random_points():
    rng = np.random.default_rng(7)
    for dim in (2, 3):
        cfg = KernelConfig(h=0.6, dim=dim)
        for _ in range(25):
            x = rng.uniform(-1.1, 1.1, size=dim)
            r = np.linalg.norm(x)
            if r < 1e-3 or abs(r - cfg.h) < 1e-3 or r > 1.95 * cfg.h:
                continue
            g = eval_kernel_gradient(x, cfg)
            d = 1e-7
            for ax in range(dim):
                e = np.zeros(dim)
                e[ax] = d
                fd = (
                    eval_kernel(np.linalg.norm(x + e), cfg)
                    - eval_kernel(np.linalg.norm(x - e), cfg)
                ) / (2 * d)
                assert g[ax] == pytest.approx(fd, rel=2e-6, abs=1e-10)


def test_correction_no_neighbors_flags_singular():
    cfg = KernelConfig(h=1.0, dim=2)
    cm = correction_matrix(np.zeros(2), [], cfg)
    assert cm.condition_flag
    np.testing.assert_array_equal(cm.B, np.eye(2))


def test_correction_collinear_neighborhood_flags_singular():
    cfg = KernelConfig(h=1.0, dim=2)
    xi = np.zeros(2)
    nbrs = [(np.array([s, 0.0]), 1.0, 1.0, 1.0) for s in (-1.0, -0.5, 0.5, 1.0)]
    cm = correction_matrix(xi, nbrs, cfg)
    assert cm.condition_flag


def brute_force_correction(points, idx, dp, cfg, f=1.0):
    """Assemble A by direct double loop; oracle for the fast paths."""
    nbrs = []
    for j, xj in enumerate(points):
        if j == idx:
            continue
        d = np.linalg.norm(points[idx] - xj)
        if d <= cfg.support_radius:
            nbrs.append((xj, dp**cfg.dim, 1.0, f))
    return correction_matrix(points[idx], nbrs, cfg)


@pytest.mark.parametrize("h_ratio", [1.3, 1.5, 2.0])
def test_corrected_gradient_reproduces_linear_field(h_ratio):
    dp = 0.1
    cfg = KernelConfig(h=h_ratio * dp, dim=2)
    pts = lattice2d(17, 17, dp)
    center = np.argmin(np.linalg.norm(pts - pts.mean(axis=0), axis=1))
    cm = brute_force_correction(pts, center, dp, cfg)
    assert not cm.condition_flag
    # corrected gradient of f(x) = x must be (1, 0)
    grad = np.zeros(2)
    for j, xj in enumerate(pts):
        if j == center:
            continue
        x_ij = pts[center] - xj
        if np.linalg.norm(x_ij) > cfg.support_radius:
            continue
        w_hat = cm.B @ eval_kernel_gradient(x_ij, cfg)
        grad += dp**2 * (xj[0] - pts[center][0]) * w_hat
    np.testing.assert_allclose(grad, [1.0, 0.0], atol=1e-10)


def test_corrected_gradient_affine_fields_random_lattice_distortion():
    """First-order consistency holds on an irregular interior neighbourhood."""
    rng = np.random.default_rng(3)
    dp = 0.1
    cfg = KernelConfig(h=2.0 * dp, dim=2)
    pts = lattice2d(13, 13, dp)
    pts += rng.uniform(-0.2 * dp, 0.2 * dp, size=pts.shape)
    center = 13 * 6 + 6
    cm = brute_force_correction(pts, center, dp, cfg)
    assert not cm.condition_flag
    c = np.array([1.7, -0.4])
    grad = np.zeros(2)
    for j, xj in enumerate(pts):
        if j == center:
            continue
        x_ij = pts[center] - xj
        if np.linalg.norm(x_ij) > cfg.support_radius:
            continue
        grad += dp**2 * (c @ (xj - pts[center])) * (cm.B @ eval_kernel_gradient(x_ij, cfg))
    np.testing.assert_allclose(grad, c, atol=1e-8)


def test_symmetrized_gradient_reduces_and_antisymmetric():
    cfg = KernelConfig(h=1.0, dim=2)
    x = np.array([0.5, 0.2])
    raw = eval_kernel_gradient(x, cfg)
    same = corrected_symmetrized_gradient(x, np.eye(2), np.eye(2), cfg)
    np.testing.assert_allclose(same, raw, rtol=0, atol=0)
    B_i = np.array([[1.2, 0.1], [0.1, 0.9]])
    B_j = np.array([[1.05, -0.2], [-0.2, 1.1]])
    wij = corrected_symmetrized_gradient(x, B_i, B_j, cfg)
    wji = corrected_symmetrized_gradient(-x, B_j, B_i, cfg)
    np.testing.assert_array_equal(wij, -wji)


def test_partition_of_unity_on_lattice():
    dp = 0.1
    for h_ratio in (1.3, 1.5, 2.0):
        cfg = KernelConfig(h=h_ratio * dp, dim=2)
        pts = lattice2d(17, 17, dp)
        center = 17 * 8 + 8
        total = eval_kernel(0.0, cfg) * dp**2
        for j, xj in enumerate(pts):
            if j == center:
                continue
            r = np.linalg.norm(pts[center] - xj)
            total += dp**2 * eval_kernel(r, cfg)
        assert total == pytest.approx(1.0, rel=0.02)


def test_divergence_of_linear_velocity_field():
    """div(u) for u = (x, 0) assembled with the symmetrized corrected gradient."""
    dp = 0.05
    cfg = KernelConfig(h=2.0 * dp, dim=2)
    pts = lattice2d(21, 21, dp)
    # deep interior: every neighbour is itself interior, so B_j = B_i
    Bs = {}
    for idx in range(len(pts)):
        Bs[idx] = brute_force_correction(pts, idx, dp, cfg).B
    center = 21 * 10 + 10
    div = 0.0
    for j, xj in enumerate(pts):
        if j == center:
            continue
        x_ij = pts[center] - xj
        if np.linalg.norm(x_ij) > cfg.support_radius:
            continue
        wbar = corrected_symmetrized_gradient(x_ij, Bs[center], Bs[j], cfg)
        u_ij = np.array([pts[center][0] - xj[0], 0.0])
        div += -dp**2 * u_ij @ wbar
    assert div == pytest.approx(1.0, abs=1e-8)


def test_batch_inversion_matches_scalar_path():
    rng = np.random.default_rng(11)
    mats = []
    for _ in range(40):
        M = rng.normal(size=(2, 2))
        mats.append(M @ M.T + 0.5 * np.eye(2))
    mats.append(np.zeros((2, 2)))
    mats.append(np.diag([1.0, 0.0]))
    A = np.stack(mats)
    B, flags = invert_corrections_batch(A)
    for k in range(A.shape[0]):
        if flags[k]:
            np.testing.assert_array_equal(B[k], np.eye(2))
        else:
            np.testing.assert_allclose(A[k] @ B[k], np.eye(2), atol=1e-9)
