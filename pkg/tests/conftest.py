"""Shared builders for small particle states used across the test suite."""

import numpy as np

from springsph.bonds import build_network
from springsph.dynamics import SimState
from springsph.kernel import KernelConfig
from springsph.material import Material


def block_positions(nx, ny, dp, nz=None):
    xs = (np.arange(nx) + 0.5) * dp
    ys = (np.arange(ny) + 0.5) * dp
    if nz is None:
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])
    zs = (np.arange(nz) + 0.5) * dp
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


def make_state(
    x,
    dp,
    material=None,
    h_ratio=2.0,
    seam=None,
    **overrides,
):
    """Assemble a SimState around given positions with quiet defaults."""
    x = np.asarray(x, dtype=np.float64)
    n, dim = x.shape
    if material is None:
        material = Material(rho0=2450.0, E=32e9, nu=0.2)
    cfg = KernelConfig(h=h_ratio * dp, dim=dim)
    net = build_network(x, cfg, seam=seam)
    st = SimState(
        x=x.copy(),
        u=np.zeros((n, dim)),
        rho=np.full(n, material.rho0),
        m=np.full(n, material.rho0 * dp**dim),
        e=np.zeros(n),
        S6=np.zeros((n, 6)),
        P=np.zeros(n),
        eps6=np.zeros((n, 6)),
        eps_pl=np.zeros(n),
        eps_pl_rate=np.zeros(n),
        W_p=np.zeros(n),
        temperature=np.full(n, 293.0),
        damage=np.zeros(n),
        network=net,
        kernel=cfg,
        material=material,
        dp=dp,
        **overrides,
    )
    return st
