"""The shipped scenarios: builders turning a ScenarioSpec into a SimState.

Five benchmark problems (pre-notched plate, plate with hole, chalk under
torsion, edge-notched plate impact, flat bullet on a rigid wall) plus two
auxiliary verification runs (wave_bar, conservation). Geometry values that
the source tables leave open (hole position, applied stress for the hole
plate, impactor block size) are defaults here and overridable in config.
"""

from __future__ import annotations

import math

import numpy as np

from springsph.bonds import build_network
from springsph.dynamics import PrescribedRegion, RigidWall, SimState, SymmetryPlane
from springsph.kernel import KernelConfig
from springsph.scenario import geometry as geo
from springsph.scenario.specs import ConfigError, LoadSpec, OutputSpec, ScenarioSpec, ViscositySpec

# Johnson-Cook block for Weldox 460E steel; externally sourced placeholder
# values (flow/damage surfaces are not part of the benchmark tables) kept in
# config so they can be swapped without touching code.
WELDOX_460E = {
    "A": 490e6,
    "B": 807e6,
    "n": 0.73,
    "C": 0.0114,
    "m": 0.94,
    "rate_ref": 5e-4,
    "T_ref": 293.0,
    "T_melt": 1800.0,
    "d1": 0.0705,
    "d2": 1.732,
    "d3": -0.54,
    "d4": -0.015,
    "d5": 0.0,
    "specific_heat": 452.0,
    "taylor_quinney": 0.9,
}


def default_spec(name: str) -> ScenarioSpec:
    try:
        factory = SCENARIOS[name]["spec"]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; available: {sorted(SCENARIOS)}")
    return factory()


def generate(spec: ScenarioSpec):
    """Build the initial SimState and the analysis context for a spec."""
    builder = SCENARIOS[spec.name]["build"]
    return builder(spec)


def _base_state(spec: ScenarioSpec, x, net, cfg, ghost_src=None) -> SimState:
    mat = spec.build_material()
    n = x.shape[0]
    dim = x.shape[1]
    return SimState(
        x=np.asarray(x, dtype=np.float64),
        u=np.zeros((n, dim)),
        rho=np.full(n, mat.rho0),
        m=np.full(n, mat.rho0 * spec.dp**dim),
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
        material=mat,
        dp=spec.dp,
        beta1=spec.viscosity.beta1,
        beta2=spec.viscosity.beta2,
        ap_enabled=spec.art_pressure.enabled,
        ap_gamma_tension=spec.art_pressure.gamma_tension,
        ap_gamma_compression=spec.art_pressure.gamma_compression,
        ap_exponent=spec.art_pressure.exponent,
        cfl_number=spec.cfl,
        ghost_src=ghost_src,
    )


# ---------------------------------------------------------------- branching

def _branching_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="branching",
        dim=2,
        dp=0.5e-3,
        h_ratio=2.0,
        t_end=80e-6,
        material={
            "rho0": 2450.0,
            "E": 32e9,
            "nu": 0.2,
            "criterion": "max_principal_strain",
            "eps_max": 0.000509,
        },
        geometry={"length": 0.1, "width": 0.04, "notch_length": 0.05},
        load=LoadSpec(sigma=1.0e6),
    )


def _build_branching(spec: ScenarioSpec):
    g = spec.geometry
    length, width, notch = g["length"], g["width"], g["notch_length"]
    x = geo.lattice_2d(length, width, spec.dp, y0=-width / 2)
    cfg = KernelConfig(h=spec.h, dim=2)
    seam = geo.horizontal_seam(0.0, 0.0, notch)
    net = build_network(x, cfg, seam=seam)
    st = _base_state(spec, x, net, cfg)
    band = cfg.support_radius
    edge = np.abs(st.x[:, 1]) > width / 2 - band
    st.bc_stress_mask = edge
    st.bc_sigma6 = np.array([0.0, spec.load.sigma, 0.0, 0.0, 0.0, 0.0])
    st.bc_ramp_time = spec.load.ramp_fraction * spec.t_end
    st.bc_use_corrected = spec.load.bc_gradient == "corrected"
    analysis = {
        "kind": "planar_crack",
        "notch_tip": [notch, 0.0],
        "axis": 0,
        "transverse": 1,
        "edge_coord": length,
        "dp": spec.dp,
    }
    return st, analysis


# ---------------------------------------------------------------- hole plate

def _hole_plate_spec(case: int) -> ScenarioSpec:
    offsets = {1: 5e-3, 2: 10e-3, 3: 15e-3}
    return ScenarioSpec(
        name=f"hole_plate_case{case}",
        dim=2,
        dp=0.3e-3,
        h_ratio=1.5,
        t_end=75e-6,
        material={
            "rho0": 2700.0,
            "E": 71.4e9,
            "nu": 0.25,
            "criterion": "max_principal_strain",
            "eps_max": 0.00483,
        },
        geometry={
            "width": 0.06,
            "height": 0.06,
            "notch_length": 0.01,
            "notch_offset": offsets[case],
            "hole_cx": 0.032,
            "hole_cy": 0.026,
            "hole_r": 0.01,
            "clamp_rows": 3,
        },
        load=LoadSpec(sigma=40e6),
    )


def _build_hole_plate(spec: ScenarioSpec):
    g = spec.geometry
    W, H = g["width"], g["height"]
    cx, cy, r = g["hole_cx"], g["hole_cy"], g["hole_r"]
    if not (r < cx < W - r and r < cy < H - r):
        raise ConfigError("hole must lie fully inside the plate")
    y_notch = g["notch_offset"]
    if abs(cy - y_notch) < r and g["notch_length"] > cx - r:
        raise ConfigError("notch seam would cut into the hole")
    x = geo.lattice_2d(W, H, spec.dp)
    x = geo.punch_hole(x, cx, cy, r)
    cfg = KernelConfig(h=spec.h, dim=2)
    seam = geo.combine_seams(
        geo.horizontal_seam(y_notch, 0.0, g["notch_length"]),
        geo.circle_blocker(cx, cy, r),
    )
    net = build_network(x, cfg, seam=seam)
    st = _base_state(spec, x, net, cfg)
    top = st.x[:, 1] > H - cfg.support_radius
    st.bc_stress_mask = top
    st.bc_sigma6 = np.array([0.0, spec.load.sigma, 0.0, 0.0, 0.0, 0.0])
    st.bc_ramp_time = spec.load.ramp_fraction * spec.t_end
    st.bc_use_corrected = spec.load.bc_gradient == "corrected"
    clamp = np.nonzero(st.x[:, 1] < g["clamp_rows"] * spec.dp)[0]
    st.prescribed.append(
        PrescribedRegion(indices=clamp, kind="constant", velocity=np.zeros(2))
    )
    analysis = {
        "kind": "planar_crack",
        "notch_tip": [g["notch_length"], y_notch],
        "axis": 0,
        "transverse": 1,
        "edge_coord": W,
        "dp": spec.dp,
        "hole": [cx, cy, r],
    }
    return st, analysis


# ------------------------------------------------------------------ kalthoff

def _kalthoff_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="kalthoff",
        dim=3,
        dp=1.0e-3,
        h_ratio=1.3,
        t_end=85e-6,
        material={
            "rho0": 8000.0,
            "E": 190e9,
            "nu": 0.3,
            "criterion": "critical_stretch",
            "delta_tc": 0.0044,
        },
        geometry={
            "width": 0.1,          # notch direction (x)
            "half_height": 0.1,    # symmetry half-model (y)
            "notch_length": 0.05,
            "notch_offset": 0.025,
            "thickness_layers": 3,
            "impactor_length": 0.02,
        },
        load=LoadSpec(impact_speed=16.5),
    )


def _build_kalthoff(spec: ScenarioSpec):
    g = spec.geometry
    dp = spec.dp
    thickness = g["thickness_layers"] * dp
    plate = geo.lattice_3d(g["width"], g["half_height"], thickness, dp)
    imp_len = g["impactor_length"]
    impactor = geo.lattice_3d(imp_len, g["notch_offset"], thickness, dp, origin=(-imp_len, 0.0, 0.0))
    pts = np.vstack([plate, impactor])
    imp_idx = np.arange(len(plate), len(pts))
    cfg = KernelConfig(h=spec.h, dim=3)
    pts_all, ghost_src = geo.add_mirror_ghosts(pts, axis=1, offset=0.0, depth=cfg.support_radius)
    seam = geo.horizontal_seam(g["notch_offset"], 0.0, g["notch_length"])
    net = build_network(pts_all, cfg, seam=seam, exclude_pair=geo.ghost_pair_excluder(ghost_src))
    st = _base_state(spec, pts_all, net, cfg, ghost_src=ghost_src)
    st.symmetry = SymmetryPlane(axis=1, offset=0.0)
    speed = spec.load.impact_speed
    st.u[imp_idx, 0] = speed
    st.prescribed.append(
        PrescribedRegion(
            indices=imp_idx, kind="constant", velocity=np.array([speed, 0.0, 0.0])
        )
    )
    analysis = {
        "kind": "kalthoff",
        "notch_tip": [g["notch_length"], g["notch_offset"], 0.5 * thickness],
        "notch_dir": [1.0, 0.0, 0.0],
        "dp": dp,
    }
    return st, analysis


# --------------------------------------------------------------------- chalk

def _chalk_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="chalk_torsion",
        dim=3,
        dp=0.8e-3,
        h_ratio=1.3,
        t_end=2.0e-4,
        material={
            "rho0": 1150.0,
            "E": 2e9,
            "nu": 0.18,
            "criterion": "max_principal_stress",
            "sigma_p_max": 15e6,
        },
        geometry={"length": 0.1, "diameter": 8e-3, "grip_length": 0.02},
        load=LoadSpec(u_max=28.3),
    )


def _build_chalk(spec: ScenarioSpec):
    g = spec.geometry
    length, radius = g["length"], g["diameter"] / 2
    x = geo.cylinder_x(length, radius, spec.dp)
    cfg = KernelConfig(h=spec.h, dim=3)
    net = build_network(x, cfg)
    st = _base_state(spec, x, net, cfg)
    center = np.array([0.0, 0.0, 0.0])
    grip = g["grip_length"]
    left = np.nonzero(st.x[:, 0] < grip)[0]
    right = np.nonzero(st.x[:, 0] > length - grip)[0]
    for idx, hand in ((left, 1.0), (right, -1.0)):
        st.prescribed.append(
            PrescribedRegion(
                indices=idx,
                kind="twist",
                axis=0,
                center=center,
                u_max=spec.load.u_max,
                handedness=hand,
            )
        )
    analysis = {
        "kind": "chalk",
        "axis": 0,
        "grip": [grip, length - grip],
        "length": length,
        "dp": spec.dp,
    }
    return st, analysis


# -------------------------------------------------------------------- taylor

def _taylor_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="taylor",
        dim=3,
        dp=0.5e-3,
        h_ratio=1.3,
        t_end=6.0e-5,
        material={
            "rho0": 7850.0,
            "E": 200e9,
            "nu": 0.33,
            "criterion": "johnson_cook",
            "jc": dict(WELDOX_460E),
        },
        geometry={"length": 0.03, "diameter": 6e-3},
        load=LoadSpec(impact_speed=600.0),
    )


def _build_taylor(spec: ScenarioSpec):
    g = spec.geometry
    length, radius = g["length"], g["diameter"] / 2
    x = geo.cylinder_x(length, radius, spec.dp)
    cfg = KernelConfig(h=spec.h, dim=3)
    net = build_network(x, cfg)
    st = _base_state(spec, x, net, cfg)
    st.u[:, 0] = -spec.load.impact_speed
    st.walls.append(RigidWall(axis=0, offset=0.0, side=1))
    analysis = {
        "kind": "taylor",
        "axis": 0,
        "length": length,
        "radius": radius,
        "dp": spec.dp,
    }
    return st, analysis


# ----------------------------------------------------------------- wave bar

def _wave_bar_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="wave_bar",
        dim=2,
        dp=0.5e-3,
        h_ratio=1.3,
        t_end=30e-6,
        material={"rho0": 2450.0, "E": 32e9, "nu": 0.0},
        geometry={"length": 0.1, "rows": 4, "pulse_speed": 1.0, "pulse_columns": 4},
        viscosity=ViscositySpec(beta1=1.0, beta2=1.0),
    )


def _build_wave_bar(spec: ScenarioSpec):
    g = spec.geometry
    x = geo.lattice_2d(g["length"], g["rows"] * spec.dp, spec.dp)
    cfg = KernelConfig(h=spec.h, dim=2)
    net = build_network(x, cfg)
    st = _base_state(spec, x, net, cfg)
    st.u[x[:, 0] < g["pulse_columns"] * spec.dp, 0] = g["pulse_speed"]
    analysis = {"kind": "none", "dp": spec.dp}
    return st, analysis


# ------------------------------------------------------------- conservation

def _conservation_spec() -> ScenarioSpec:
    return ScenarioSpec(
        name="conservation",
        dim=2,
        dp=2e-3,
        h_ratio=1.3,
        t_end=1.08e-4,
        material={"rho0": 2450.0, "E": 32e9, "nu": 0.2},
        geometry={"side": 0.06, "amplitude": 0.1},
        viscosity=ViscositySpec(beta1=0.0, beta2=0.0),
        cfl=0.15,
    )


def _build_conservation(spec: ScenarioSpec):
    g = spec.geometry
    side = g["side"]
    x = geo.lattice_2d(side, side, spec.dp)
    cfg = KernelConfig(h=spec.h, dim=2)
    net = build_network(x, cfg)
    spec.art_pressure.enabled = False
    st = _base_state(spec, x, net, cfg)
    st.ap_enabled = False
    st.u[:, 0] = g["amplitude"] * np.sin(math.pi * st.x[:, 0] / side)
    analysis = {"kind": "none", "dp": spec.dp}
    return st, analysis


SCENARIOS = {
    "branching": {"spec": _branching_spec, "build": _build_branching},
    "hole_plate_case1": {"spec": lambda: _hole_plate_spec(1), "build": _build_hole_plate},
    "hole_plate_case2": {"spec": lambda: _hole_plate_spec(2), "build": _build_hole_plate},
    "hole_plate_case3": {"spec": lambda: _hole_plate_spec(3), "build": _build_hole_plate},
    "kalthoff": {"spec": _kalthoff_spec, "build": _build_kalthoff},
    "chalk_torsion": {"spec": _chalk_spec, "build": _build_chalk},
    "taylor": {"spec": _taylor_spec, "build": _build_taylor},
    "wave_bar": {"spec": _wave_bar_spec, "build": _build_wave_bar},
    "conservation": {"spec": _conservation_spec, "build": _build_conservation},
}
