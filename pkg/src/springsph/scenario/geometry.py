"""Particle lattices, notch seams and mirror-ghost construction.

Pre-notches are realized by suppressing bonds whose segment crosses the
seam, never by removing particles. Lattices are cell-centred so seams and
symmetry planes fall between particle rows.
"""

from __future__ import annotations

import numpy as np


def lattice_2d(length: float, width: float, dp: float, y0: float = 0.0) -> np.ndarray:
    nx = int(round(length / dp))
    ny = int(round(width / dp))
    xs = (np.arange(nx) + 0.5) * dp
    ys = (np.arange(ny) + 0.5) * dp + y0
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def lattice_3d(lx: float, ly: float, lz: float, dp: float, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    ns = [int(round(l / dp)) for l in (lx, ly, lz)]
    axes = [(np.arange(n) + 0.5) * dp + o for n, o in zip(ns, origin)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


def cylinder_x(length: float, radius: float, dp: float) -> np.ndarray:
    """Cubic lattice clipped to a cylinder around the x axis."""
    box = lattice_3d(length, 2 * radius, 2 * radius, dp, origin=(0.0, -radius, -radius))
    r2 = box[:, 1] ** 2 + box[:, 2] ** 2
    return box[r2 <= radius**2]


def horizontal_seam(y_cut: float, x_min: float, x_max: float):
    """Predicate: bond segment crosses the seam {y = y_cut, x in [x_min, x_max]}."""

    def crossing(xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
        yi, yj = xi[:, 1] - y_cut, xj[:, 1] - y_cut
        crosses = yi * yj < 0.0
        denom = np.where(crosses, yj - yi, 1.0)
        s = -yi / denom
        x_at = xi[:, 0] + s * (xj[:, 0] - xi[:, 0])
        return crosses & (x_at >= x_min) & (x_at <= x_max)

    return crossing


def circle_blocker(cx: float, cy: float, r: float):
    """Predicate: bond segment passes through the circular hole (chord bonds)."""

    def crossing(xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
        # distance from circle centre to the segment
        d = xj[:, :2] - xi[:, :2]
        w = np.column_stack([cx - xi[:, 0], cy - xi[:, 1]])
        dd = np.einsum("bk,bk->b", d, d)
        t = np.clip(np.einsum("bk,bk->b", w, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        closest = xi[:, :2] + t[:, None] * d
        dist2 = (closest[:, 0] - cx) ** 2 + (closest[:, 1] - cy) ** 2
        return dist2 < r * r

    return crossing


def combine_seams(*preds):
    def crossing(xi, xj):
        out = np.zeros(len(xi), dtype=bool)
        for p in preds:
            out |= p(xi, xj)
        return out

    return crossing


def punch_hole(x: np.ndarray, cx: float, cy: float, r: float) -> np.ndarray:
    keep = (x[:, 0] - cx) ** 2 + (x[:, 1] - cy) ** 2 > r * r
    return x[keep]


def add_mirror_ghosts(x: np.ndarray, axis: int, offset: float, depth: float):
    """Append mirror images of particles within ``depth`` of the plane.

    Returns (x_all, ghost_src) where ghost_src is -1 for real particles and
    the source index for ghosts. Assumes all particles sit on the kept side
    (coordinate >= offset).
    """
    near = np.nonzero(x[:, axis] - offset < depth)[0]
    ghosts = x[near].copy()
    ghosts[:, axis] = 2.0 * offset - ghosts[:, axis]
    x_all = np.vstack([x, ghosts])
    ghost_src = np.full(len(x_all), -1, dtype=np.int64)
    ghost_src[len(x) :] = near
    return x_all, ghost_src


def ghost_pair_excluder(ghost_src: np.ndarray):
    """Drop ghost-ghost pairs; ghost derivatives are discarded anyway."""

    def exclude(i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return (ghost_src[i] >= 0) & (ghost_src[j] >= 0)

    return exclude
