"""Pseudo-spring bond network: built once over the initial configuration.

Every particle pair within the kernel support at t=0 carries a spring that
stores its reference length and a damage factor D in [0, 1]. The interaction
factor f = 1 - D scales the pair's kernel interaction; f = 0 means the crack
has passed between the pair. The pair set never changes after construction,
only D evolves (and never decreases).
"""

from __future__ import annotations

import numpy as np

from springsph.kernel import KernelConfig


class BondNetwork:
    """Structure-of-arrays bond storage with canonical i < j ordering."""

    def __init__(self, i: np.ndarray, j: np.ndarray, r0: np.ndarray, n_particles: int):
        order = np.lexsort((j, i))
        self.i = np.ascontiguousarray(i[order], dtype=np.int64)
        self.j = np.ascontiguousarray(j[order], dtype=np.int64)
        self.r0 = np.ascontiguousarray(r0[order], dtype=np.float64)
        self.n_particles = int(n_particles)
        self.damage = np.zeros(self.n_bonds, dtype=np.float64)
        self.f = np.ones(self.n_bonds, dtype=np.float64)
        self.break_time = np.full(self.n_bonds, np.nan)
        # CSR adjacency over the undirected pair set, built once.
        ends = np.concatenate([self.i, self.j])
        other = np.concatenate([self.j, self.i])
        bond_ids = np.tile(np.arange(self.n_bonds, dtype=np.int64), 2)
        order = np.argsort(ends, kind="stable")
        self.adj_particle = other[order]
        self.adj_bond = bond_ids[order]
        deg = np.bincount(ends, minlength=n_particles)
        self.adj_offsets = np.zeros(n_particles + 1, dtype=np.int64)
        np.cumsum(deg, out=self.adj_offsets[1:])

    @property
    def n_bonds(self) -> int:
        return self.i.shape[0]

    def neighbors(self, p: int) -> np.ndarray:
        return self.adj_particle[self.adj_offsets[p] : self.adj_offsets[p + 1]]

    def bonds_of(self, p: int) -> np.ndarray:
        return self.adj_bond[self.adj_offsets[p] : self.adj_offsets[p + 1]]

    def undamaged_neighbors(self, p: int) -> np.ndarray:
        """Neighbour set connected through springs with f = 1."""
        b = self.bonds_of(p)
        return self.neighbors(p)[self.f[b] >= 1.0]

    def damaged_neighbors(self, p: int) -> np.ndarray:
        """Neighbour set connected through springs with 0 <= f < 1."""
        b = self.bonds_of(p)
        return self.neighbors(p)[self.f[b] < 1.0]

    def commit_particle_damage(self, D: np.ndarray, t: float) -> np.ndarray:
        """Two-phase commit of spring damage D_ij = 0.5 (D_i + D_j).

        Reads a frozen particle damage array, applies the monotone clamp and
        returns the indices of bonds newly broken (f reached 0) at time t.
        """
        return self.commit_bond_damage(0.5 * (D[self.i] + D[self.j]), t)

    def commit_bond_damage(self, D_new: np.ndarray, t: float) -> np.ndarray:
        """Monotone per-bond commit: D_ij <- max(D_ij, D_new)."""
        D_new = np.asarray(D_new, dtype=np.float64)
        if np.any((D_new < 0.0) | (D_new > 1.0)):
            raise ValueError("bond damage must lie in [0, 1]")
        was_intact = self.f > 0.0
        np.maximum(self.damage, D_new, out=self.damage)
        self.f = 1.0 - self.damage
        newly_broken = np.nonzero(was_intact & (self.f <= 0.0))[0]
        self.break_time[newly_broken] = t
        return newly_broken

    def broken_bond_fraction(self) -> np.ndarray:
        """Per-particle fraction of bonds with f = 0; isolated particles -> 1."""
        broken = self.f <= 0.0
        num = np.bincount(self.i, weights=broken, minlength=self.n_particles)
        num += np.bincount(self.j, weights=broken, minlength=self.n_particles)
        deg = np.bincount(self.i, minlength=self.n_particles) + np.bincount(
            self.j, minlength=self.n_particles
        )
        frac = np.ones(self.n_particles)
        has = deg > 0
        frac[has] = num[has] / deg[has]
        return frac


def spring_damage(previous: float, D_i: float, D_j: float) -> float:
    """Spring damage from endpoint damages with the monotone clamp."""
    return max(previous, 0.5 * (D_i + D_j))


def set_bond_damage(network: BondNetwork, bond: int, D: float, t: float = 0.0) -> None:
    """Raise one bond's damage to at least D (used by bond-level criteria)."""
    if not 0.0 <= D <= 1.0:
        raise ValueError(f"bond damage must lie in [0, 1], got {D}")
    update = network.damage.copy()
    update[bond] = D
    network.commit_bond_damage(update, t)


def _hash_cells(x: np.ndarray, cell: float) -> np.ndarray:
    return np.floor(x / cell).astype(np.int64)


def find_pairs(x: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (i, j) pairs with |x_i - x_j| <= radius, i < j, via a uniform hash grid.

    Cell size equals the search radius, so candidates live in the half
    stencil of neighbouring cells. Exact: verified against the O(n^2) search
    in the test suite.
    """
    x = np.asarray(x, dtype=np.float64)
    n, dim = x.shape
    cells = _hash_cells(x, radius)
    # Order-preserving group of particle indices per occupied cell.
    cell_map: dict[tuple, np.ndarray] = {}
    keys = [tuple(c) for c in cells]
    buckets: dict[tuple, list[int]] = {}
    for idx, key in enumerate(keys):
        buckets.setdefault(key, []).append(idx)
    for key, members in buckets.items():
        cell_map[key] = np.asarray(members, dtype=np.int64)

    if dim == 2:
        half = [(0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    else:
        half = [(0, 0, 0)]
        for dz in (0, 1):
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if (dz, dy, dx) > (0, 0, 0):
                        half.append((dx, dy, dz))

    out_i, out_j, out_r = [], [], []
    r2 = radius * radius
    for key, a in cell_map.items():
        for off in half:
            if off == half[0]:
                b = a
                same = True
            else:
                nb = tuple(k + o for k, o in zip(key, off))
                b = cell_map.get(nb)
                same = False
                if b is None:
                    continue
            if same:
                ii, jj = np.triu_indices(len(a), k=1)
                ci, cj = a[ii], a[jj]
            else:
                ci = np.repeat(a, len(b))
                cj = np.tile(b, len(a))
            d = x[ci] - x[cj]
            dist2 = np.einsum("ij,ij->i", d, d)
            keep = dist2 <= r2
            if not np.any(keep):
                continue
            ci, cj, dist2 = ci[keep], cj[keep], dist2[keep]
            swap = ci > cj
            ci2 = np.where(swap, cj, ci)
            cj2 = np.where(swap, ci, cj)
            out_i.append(ci2)
            out_j.append(cj2)
            out_r.append(np.sqrt(dist2))
    if not out_i:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), np.zeros(0)
    return np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_r)


def build_network(
    x: np.ndarray,
    cfg: KernelConfig,
    seam=None,
    exclude_pair=None,
) -> BondNetwork:
    """Bond (i, j) exists iff |x_i - x_j| <= 2h in the reference configuration.

    ``seam`` is an optional predicate on (x_i, x_j) arrays returning a bool
    mask of pairs crossed by a pre-notch; those bonds are suppressed (the
    particles themselves stay). ``exclude_pair`` likewise removes pairs by
    index (used to drop ghost-ghost bonds).
    """
    x = np.asarray(x, dtype=np.float64)
    i, j, r = find_pairs(x, cfg.support_radius)
    if np.any(r < 1e-12 * cfg.h):
        raise ValueError("coincident particles in the initial configuration")
    if seam is not None:
        crossing = seam(x[i], x[j])
        i, j, r = i[~crossing], j[~crossing], r[~crossing]
    if exclude_pair is not None:
        drop = exclude_pair(i, j)
        i, j, r = i[~drop], j[~drop], r[~drop]
    return BondNetwork(i, j, r, x.shape[0])


def crack_segments(network: BondNetwork, midpoints: np.ndarray, directions: np.ndarray):
    """Records (time, midpoint, direction) for every fully broken bond.

    ``midpoints`` / ``directions`` are per-bond values captured at break time
    by the stepper; this helper assembles the export table for bonds that
    actually broke.
    """
    broken = np.nonzero(network.f <= 0.0)[0]
    return network.break_time[broken], midpoints[broken], directions[broken]


def write_crack_csv(path, times, midpoints, directions) -> None:
    """CSV export ``time,mx,my,mz,dx,dy,dz``, one row per broken bond."""
    m3 = _pad3(midpoints)
    d3 = _pad3(directions)
    with open(path, "w") as fh:
        fh.write("time,mx,my,mz,dx,dy,dz\n")
        for t, m, d in zip(times, m3, d3):
            fh.write(
                f"{t:.9e},{m[0]:.9e},{m[1]:.9e},{m[2]:.9e},"
                f"{d[0]:.9e},{d[1]:.9e},{d[2]:.9e}\n"
            )


def _pad3(v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    if v.shape[1] == 3:
        return v
    out = np.zeros((v.shape[0], 3))
    out[:, : v.shape[1]] = v
    return out
