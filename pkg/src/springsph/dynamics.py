"""Damage-modified conservation equations and explicit time stepping.

Each step evaluates the right-hand sides twice (midpoint predictor-corrector)
against frozen state snapshots, then runs the serial commit phases in a fixed
order: plastic return, EOS, particle damage, bond-damage commit, boundary
enforcement. All pair sums run through the active accel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from springsph import accel, material as mat_mod
from springsph.bonds import BondNetwork
from springsph.kernel import KernelConfig, invert_corrections_batch
from springsph.material import Material

# sym6 shear slots coupling each axis to the other two
_MIRROR_FLIP = {0: (3, 4), 1: (3, 5), 2: (4, 5)}


class SimulationAbort(RuntimeError):
    """Raised when the state goes non-physical (negative density, NaN)."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class PrescribedRegion:
    """Velocity-driven particle set; velocity overrides the momentum update."""

    indices: np.ndarray
    kind: str = "constant"  # constant | twist
    velocity: np.ndarray | None = None
    axis: int = 0
    center: np.ndarray | None = None
    u_max: float = 0.0
    handedness: float = 1.0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.broadcast_to(self.velocity, (len(self.indices), x.shape[1]))
        if self.kind == "twist":
            # tangential field u = u_max sin((theta + pi/2)/2) about self.axis,
            # theta measured in the cross-section plane from current positions
            t1, t2 = [d for d in range(3) if d != self.axis]
            p = x[self.indices]
            y = p[:, t1] - self.center[t1]
            z = p[:, t2] - self.center[t2]
            theta = np.arctan2(z, y)
            mag = self.u_max * np.sin((theta + 0.5 * math.pi) / 2.0)
            vel = np.zeros((len(self.indices), x.shape[1]))
            vel[:, t1] = -np.sin(theta) * mag * self.handedness
            vel[:, t2] = np.cos(theta) * mag * self.handedness
            return vel
        raise ValueError(f"unknown prescribed-velocity kind {self.kind!r}")


@dataclass
class RigidWall:
    """Frictionless non-penetration plane: axis-aligned, keeps x[axis]*side >= offset*side."""

    axis: int
    offset: float
    side: int = 1  # +1 keeps particles above offset, -1 below


@dataclass
class SymmetryPlane:
    """Axis-aligned mirror plane; ghost images are baked into the network."""

    axis: int
    offset: float


@dataclass
class Rates:
    drho: np.ndarray
    acc: np.ndarray
    de: np.ndarray
    eps_rate6: np.ndarray
    spin3: np.ndarray
    S_dot6: np.ndarray


@dataclass
class SimState:
    """Full particle-system state plus the immutable bond network."""

    x: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    m: np.ndarray
    e: np.ndarray
    S6: np.ndarray
    P: np.ndarray
    eps6: np.ndarray
    eps_pl: np.ndarray
    eps_pl_rate: np.ndarray
    W_p: np.ndarray
    temperature: np.ndarray
    damage: np.ndarray
    network: BondNetwork
    kernel: KernelConfig
    material: Material
    dp: float
    beta1: float = 1.0
    beta2: float = 1.0
    ap_enabled: bool = True
    ap_gamma_tension: float = 0.3
    ap_gamma_compression: float = 0.01
    ap_exponent: float = 4.0
    cfl_number: float = 0.3
    bc_stress_mask: np.ndarray | None = None
    bc_sigma6: np.ndarray | None = None
    bc_ramp_time: float = 0.0
    bc_use_corrected: bool = False
    prescribed: list[PrescribedRegion] = field(default_factory=list)
    walls: list[RigidWall] = field(default_factory=list)
    symmetry: SymmetryPlane | None = None
    ghost_src: np.ndarray | None = None  # -1 for real particles
    t: float = 0.0
    step_count: int = 0
    dt: float = 0.0
    singular_corrections: int = 0
    crack_log: list = field(default_factory=list)

    def __post_init__(self):
        n = self.x.shape[0]
        if self.ghost_src is None:
            self.ghost_src = np.full(n, -1, dtype=np.int64)
        self._ghosts = np.nonzero(self.ghost_src >= 0)[0]
        self._sources = self.ghost_src[self._ghosts]
        self.real = self.ghost_src < 0
        self._w_dp = float(
            self.kernel.alpha_d
            * _spline_w(self.dp / self.kernel.h)
        )

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def n_real(self) -> int:
        return int(self.real.sum())

    def sound_speed(self, rho: np.ndarray | None = None) -> np.ndarray:
        rho = self.rho if rho is None else rho
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.sqrt(self.material.E / rho)

    def sigma6(self, S6=None, P=None) -> np.ndarray:
        S6 = self.S6 if S6 is None else S6
        P = self.P if P is None else P
        out = S6.copy()
        out[:, 0] -= P
        out[:, 1] -= P
        out[:, 2] -= P
        return out


def _spline_w(q: float) -> float:
    if q <= 1.0:
        return 1.0 - 1.5 * q * q + 0.75 * q**3
    if q <= 2.0:
        return 0.25 * (2.0 - q) ** 3
    return 0.0


def mirror_sym6(S6: np.ndarray, axis: int) -> np.ndarray:
    out = S6.copy()
    for slot in _MIRROR_FLIP[axis]:
        out[:, slot] *= -1.0
    return out


def refresh_ghosts(st: SimState, x, u, rho, S6, P, e=None):
    """Slave ghost rows to their mirror sources (positions, velocity, stress)."""
    if st.symmetry is None or len(st._ghosts) == 0:
        return
    g, s = st._ghosts, st._sources
    a = st.symmetry.axis
    x[g] = x[s]
    x[g, a] = 2.0 * st.symmetry.offset - x[s, a]
    u[g] = u[s]
    u[g, a] *= -1.0
    rho[g] = rho[s]
    P[g] = P[s]
    S6[g] = mirror_sym6(S6[s], a)
    if e is not None:
        e[g] = e[s]


def _mirror_B(B: np.ndarray, axis: int) -> np.ndarray:
    out = B.copy()
    dim = B.shape[1]
    for b in range(dim):
        for a in range(dim):
            if (b == axis) != (a == axis):
                out[:, b, a] *= -1.0
    return out


def eval_rhs(st: SimState, x, u, rho, S6, P, t: float) -> Rates:
    """One full right-hand-side evaluation on the given field arrays."""
    net = st.network
    cfg = st.kernel
    backend = accel.active()
    refresh_ghosts(st, x, u, rho, S6, P)
    A = backend.assemble_A(x, st.m, rho, net.i, net.j, net.f, cfg.h, cfg.alpha_d, st.dim)
    B, flags = invert_corrections_batch(A)
    st.singular_corrections = int(flags[st.real].sum())
    if st.symmetry is not None and len(st._ghosts) > 0:
        B[st._ghosts] = _mirror_B(B[st._sources], st.symmetry.axis)
    sigma6 = st.sigma6(S6, P)
    C = st.sound_speed(rho)
    bc_mask = st.bc_stress_mask
    bc_sigma = st.bc_sigma6
    if bc_sigma is not None and st.bc_ramp_time > 0.0:
        bc_sigma = bc_sigma * min(t / st.bc_ramp_time, 1.0)
    drho, acc, de, L = backend.rhs_bond_pass(
        x,
        u,
        rho,
        st.m,
        P,
        sigma6,
        C,
        B,
        net.i,
        net.j,
        net.f,
        cfg.h,
        cfg.alpha_d,
        st._w_dp,
        st.beta1,
        st.beta2,
        st.ap_enabled,
        st.ap_gamma_tension,
        st.ap_gamma_compression,
        st.ap_exponent,
        bc_mask,
        bc_sigma,
        st.bc_use_corrected,
    )
    eps6, spin3 = _strain_spin_from_L(L, st.dim)
    S_dot6 = mat_mod.jaumann_rate(S6, eps6, spin3, st.material)
    return Rates(drho, acc, de, eps6, spin3, S_dot6)


def _strain_spin_from_L(L: np.ndarray, dim: int):
    n = L.shape[0]
    eps6 = np.zeros((n, 6))
    spin3 = np.zeros((n, 3))
    eps6[:, 0] = L[:, 0, 0]
    eps6[:, 1] = L[:, 1, 1]
    eps6[:, 3] = 0.5 * (L[:, 0, 1] + L[:, 1, 0])
    spin3[:, 0] = 0.5 * (L[:, 0, 1] - L[:, 1, 0])
    if dim == 3:
        eps6[:, 2] = L[:, 2, 2]
        eps6[:, 4] = 0.5 * (L[:, 0, 2] + L[:, 2, 0])
        eps6[:, 5] = 0.5 * (L[:, 1, 2] + L[:, 2, 1])
        spin3[:, 1] = 0.5 * (L[:, 0, 2] - L[:, 2, 0])
        spin3[:, 2] = 0.5 * (L[:, 1, 2] - L[:, 2, 1])
    return eps6, spin3


def cfl_timestep(st: SimState, c_s: float | None = None) -> float:
    """dt = min_i c_s h / (C_i + |v_i|)."""
    c_s = st.cfl_number if c_s is None else c_s
    speed = np.linalg.norm(st.u, axis=1)
    C = st.sound_speed()
    return float(c_s * np.min(st.kernel.h / (C + speed)))


def apply_prescribed_velocity(st: SimState, u: np.ndarray, x: np.ndarray):
    for region in st.prescribed:
        u[region.indices] = region.evaluate(x)


def apply_rigid_walls(st: SimState, x: np.ndarray, u: np.ndarray):
    for wall in st.walls:
        side = float(wall.side)
        breach = side * (x[:, wall.axis] - wall.offset) < 0.0
        if np.any(breach):
            x[breach, wall.axis] = wall.offset
            vn = u[breach, wall.axis]
            u[breach, wall.axis] = np.where(side * vn < 0.0, 0.0, vn)


def predictor_corrector_step(st: SimState) -> None:
    """Advance one CFL-limited step and run the commit phases in order."""
    st.dt = cfl_timestep(st)
    dt = st.dt
    half = 0.5 * dt
    mat = st.material

    x0, u0 = st.x, st.u
    rho0, e0, S0 = st.rho, st.e, st.S6
    r0 = eval_rhs(st, x0, u0, rho0, S0, st.P, st.t)

    x1 = x0 + half * u0
    u1 = u0 + half * r0.acc
    rho1 = rho0 + half * r0.drho
    e1 = e0 + half * r0.de
    S1 = S0 + half * r0.S_dot6
    apply_prescribed_velocity(st, u1, x1)
    P1 = mat_mod.eos_pressure(rho1, mat)
    r1 = eval_rhs(st, x1, u1, rho1, S1, P1, st.t + half)

    # corrector: full step with midpoint rates; positions advance with the
    # predicted midpoint velocity
    st.x = x0 + dt * u1
    st.u = u0 + dt * r1.acc
    st.rho = rho0 + dt * r1.drho
    st.e = e0 + dt * r1.de
    S_trial = S0 + dt * r1.S_dot6
    st.eps6 = st.eps6 + dt * r1.eps_rate6
    apply_prescribed_velocity(st, st.u, st.x)

    # plastic return
    sigma_y = _yield_stress(st, mat)
    if sigma_y is not None:
        S_new, _, d_eps, d_wp = mat_mod.von_mises_return(S_trial, sigma_y, mat)
        st.S6 = S_new
        st.eps_pl = st.eps_pl + d_eps
        st.eps_pl_rate = d_eps / dt
        st.W_p = st.W_p + d_wp
        if mat.jc is not None:
            st.temperature = st.temperature + mat.jc.taylor_quinney * d_wp / (
                mat.rho0 * mat.jc.specific_heat
            )
    else:
        st.S6 = S_trial
        d_eps = None

    # EOS
    st.P = mat_mod.eos_pressure(st.rho, mat)

    _check_finite(st)

    # ghost rows must mirror their sources before damage is evaluated so the
    # bond commit sees consistent endpoint states
    refresh_ghosts(st, st.x, st.u, st.rho, st.S6, st.P, st.e)
    if st.symmetry is not None and len(st._ghosts) > 0:
        g, s = st._ghosts, st._sources
        st.damage[g] = st.damage[s]
        st.eps6[g] = mirror_sym6(st.eps6[s], st.symmetry.axis)
        st.eps_pl[g] = st.eps_pl[s]
        st.W_p[g] = st.W_p[s]

    # damage criteria on end-of-step state, then the bond commit
    t_new = st.t + dt
    _update_damage(st, d_eps, dt, t_new)

    # boundary enforcement
    apply_rigid_walls(st, st.x, st.u)

    st.t = t_new
    st.step_count += 1


def _yield_stress(st: SimState, mat: Material):
    if mat.jc is not None:
        return mat_mod.johnson_cook_flow(st.eps_pl, st.eps_pl_rate, st.temperature, mat.jc)
    if mat.sigma_y0 is not None:
        return np.full(st.x.shape[0], mat.sigma_y0)
    return None


def _update_damage(st: SimState, d_eps, dt: float, t_new: float):
    mat = st.material
    net = st.network
    criterion = mat.criterion
    newly = np.zeros(0, dtype=np.int64)
    if criterion == "max_principal_strain":
        if mat.strain_measure == "stress_over_E":
            measure = mat_mod.max_principal_sym6(st.sigma6()) / mat.E
        else:
            measure = mat_mod.max_principal_sym6(st.eps6)
        st.damage = np.maximum(st.damage, (measure >= mat.eps_max).astype(np.float64))
        newly = net.commit_particle_damage(st.damage, t_new)
    elif criterion == "max_principal_stress":
        peak = mat_mod.max_principal_sym6(st.sigma6())
        st.damage = np.maximum(st.damage, (peak >= mat.sigma_p_max).astype(np.float64))
        newly = net.commit_particle_damage(st.damage, t_new)
    elif criterion == "critical_stretch":
        d = st.x[net.i] - st.x[net.j]
        r = np.sqrt(np.einsum("bd,bd->b", d, d))
        stretch_broken = mat_mod.damage_critical_stretch(r, net.r0, mat.delta_tc)
        newly = net.commit_bond_damage(np.maximum(net.damage, stretch_broken), t_new)
    elif criterion == "johnson_cook":
        seq = np.sqrt(3.0 * mat_mod.second_invariant(st.S6))
        ef = mat_mod.johnson_cook_failure_strain(
            st.P, seq, st.eps_pl_rate, st.temperature, mat.jc
        )
        st.damage = np.minimum(st.damage + d_eps / ef, 1.0)
        newly = net.commit_particle_damage(st.damage, t_new)
    if len(newly):
        d = st.x[net.j[newly]] - st.x[net.i[newly]]
        norm = np.linalg.norm(d, axis=1, keepdims=True)
        norm[norm == 0.0] = 1.0
        mid = 0.5 * (st.x[net.i[newly]] + st.x[net.j[newly]])
        st.crack_log.append((np.full(len(newly), t_new), mid, d / norm))


def _check_finite(st: SimState):
    bad = ~np.isfinite(st.rho[st.real])
    if np.any(bad) or np.any(st.rho[st.real] <= 0.0):
        raise SimulationAbort(
            "density became non-physical",
            {"step": st.step_count, "t": st.t, "bad_particles": int(bad.sum())},
        )
    for name, arr in (("x", st.x), ("u", st.u), ("S6", st.S6)):
        if not np.all(np.isfinite(arr[st.real])):
            raise SimulationAbort(
                f"non-finite values in {name}",
                {"step": st.step_count, "t": st.t},
            )


def audit_row(st: SimState) -> dict:
    """Diagnostic totals over real particles for the run audit log."""
    r = st.real
    mu = st.m[r, None] * st.u[r]
    p = mu.sum(axis=0)
    p3 = np.zeros(3)
    p3[: st.dim] = p
    return {
        "step": st.step_count,
        "t": st.t,
        "dt": st.dt,
        "total_mass": float(st.m[r].sum()),
        "px": float(p3[0]),
        "py": float(p3[1]),
        "pz": float(p3[2]),
        "kinetic": float(0.5 * (st.m[r] * (st.u[r] ** 2).sum(axis=1)).sum()),
        "internal": float((st.m[r] * st.e[r]).sum()),
        "broken_bonds": int((st.network.f <= 0.0).sum()),
    }


def strain_energy(st: SimState) -> float:
    """Elastic energy from deviatoric stress and pressure, real particles."""
    r = st.real
    s = st.S6[r]
    ss = (s[:, :3] ** 2).sum(axis=1) + 2.0 * (s[:, 3:] ** 2).sum(axis=1)
    vol = st.m[r] / st.rho[r]
    return float(
        (vol * (ss / (4.0 * st.material.mu) + st.P[r] ** 2 / (2.0 * st.material.K))).sum()
    )
