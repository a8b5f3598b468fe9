"""Particle snapshot writers: fixed-schema CSV and legacy ASCII VTK polydata."""

from __future__ import annotations

import numpy as np

from springsph.dynamics import SimState
from springsph.material import second_invariant

CSV_HEADER = "id,x,y,z,ux,uy,uz,rho,P,s_vm,eps_pl,damage,broken_frac"
VTK_FIELDS = ("ux", "uy", "uz", "rho", "P", "s_vm", "eps_pl", "damage", "broken_frac")


def snapshot_table(st: SimState) -> dict[str, np.ndarray]:
    """Per-particle output columns over real particles, 2D padded with zeros."""
    r = st.real
    n = int(r.sum())
    x3 = np.zeros((n, 3))
    u3 = np.zeros((n, 3))
    x3[:, : st.dim] = st.x[r]
    u3[:, : st.dim] = st.u[r]
    frac = st.network.broken_bond_fraction()[r]
    return {
        "id": np.arange(n),
        "x": x3[:, 0],
        "y": x3[:, 1],
        "z": x3[:, 2],
        "ux": u3[:, 0],
        "uy": u3[:, 1],
        "uz": u3[:, 2],
        "rho": st.rho[r],
        "P": st.P[r],
        "s_vm": np.sqrt(3.0 * second_invariant(st.S6[r])),
        "eps_pl": st.eps_pl[r],
        "damage": st.damage[r],
        "broken_frac": frac,
    }


def write_snapshot_csv(path, st: SimState) -> None:
    cols = snapshot_table(st)
    data = np.column_stack([cols[name] for name in CSV_HEADER.split(",")])
    np.savetxt(path, data, delimiter=",", header=CSV_HEADER, comments="", fmt="%.9e")


def read_snapshot_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected snapshot header: {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(CSV_HEADER.split(","))}


def write_snapshot_vtk(path, st: SimState, fields=None) -> None:
    """Legacy ASCII polydata point cloud with the snapshot scalars."""
    cols = snapshot_table(st)
    names = list(fields) if fields else list(VTK_FIELDS)
    unknown = set(names) - set(VTK_FIELDS)
    if unknown:
        raise ValueError(f"unknown snapshot fields: {sorted(unknown)}")
    n = len(cols["id"])
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"springsph snapshot step={st.step_count} t={st.t:.9e}\n")
        fh.write("ASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {n} double\n")
        for x, y, z in zip(cols["x"], cols["y"], cols["z"]):
            fh.write(f"{x:.9e} {y:.9e} {z:.9e}\n")
        fh.write(f"VERTICES {n} {2 * n}\n")
        for k in range(n):
            fh.write(f"1 {k}\n")
        fh.write(f"POINT_DATA {n}\n")
        for name in names:
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.9e}" for v in cols[name]))
            fh.write("\n")
