"""Run orchestration: manifest, scheduled snapshots, audit log, crack metrics.

A run directory is truncation-safe: the manifest and audit rows land on disk
as the run progresses, and an abort still leaves a final-state dump plus the
crack record collected so far.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

import springsph
from springsph import accel
from springsph.bonds import write_crack_csv
from springsph.dynamics import SimState, SimulationAbort, audit_row, predictor_corrector_step
from springsph.scenario import library, metrics as metrics_mod
from springsph.scenario.snapshots import write_snapshot_csv, write_snapshot_vtk
from springsph.scenario.specs import ScenarioSpec

AUDIT_HEADER = "step,t,dt,total_mass,px,py,pz,kinetic,internal,broken_bonds"


def collect_crack_record(st: SimState):
    if not st.crack_log:
        return np.zeros(0), np.zeros((0, 3)), np.zeros((0, 3))
    times = np.concatenate([c[0] for c in st.crack_log])
    mids = np.vstack([c[1] for c in st.crack_log])
    dirs = np.vstack([c[2] for c in st.crack_log])
    if mids.shape[1] == 2:
        mids = np.column_stack([mids, np.zeros(len(mids))])
        dirs = np.column_stack([dirs, np.zeros(len(dirs))])
    return times, mids, dirs


def run(
    spec: ScenarioSpec,
    out_dir: str | Path,
    deterministic: bool = False,
    threads: int | None = None,
    progress=None,
) -> Path:
    """Execute the scenario to t_end, writing all artifacts into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if threads is not None and accel.active_name() == "numba":
        import numba

        numba.set_num_threads(max(1, threads))

    st, analysis = library.generate(spec)
    manifest = {
        "scenario": spec.name,
        "config": spec.to_dict(),
        "analysis": analysis,
        "code_version": springsph.__version__,
        "backend": accel.active_name(),
        "deterministic": bool(deterministic),
        "threads": threads,
        "n_particles": st.n_real,
        "n_bonds": int(st.network.n_bonds),
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "completed": False,
    }
    _write_json(out / "manifest.json", manifest)

    snap_interval = spec.t_end / max(spec.output.snapshots, 1)
    next_snap = 0.0
    snap_id = 0
    wall0 = time.time()
    status = "completed"
    error_msg = None

    with open(out / "audit.csv", "w") as audit:
        audit.write(AUDIT_HEADER + "\n")
        _audit_write(audit, st)
        try:
            while st.t < spec.t_end:
                if st.t >= next_snap:
                    _snapshot(out, st, spec, snap_id)
                    snap_id += 1
                    next_snap += snap_interval
                predictor_corrector_step(st)
                if st.step_count % spec.output.audit_interval == 0:
                    _audit_write(audit, st)
                if progress is not None and st.step_count % 200 == 0:
                    progress(st)
        except SimulationAbort as exc:
            status = "aborted"
            error_msg = f"{exc} {exc.diagnostics}"
        _audit_write(audit, st)

    _snapshot(out, st, spec, snap_id)
    times, mids, dirs = collect_crack_record(st)
    write_crack_csv(out / "crack_segments.csv", times, mids, dirs)
    result = metrics_mod.compute_metrics(
        times, mids, analysis, spec.t_end, n_slices=spec.output.snapshots
    )
    result["status"] = status
    _write_json(out / "metrics.json", result)

    manifest.update(
        {
            "completed": status == "completed",
            "status": status,
            "error": error_msg,
            "steps": st.step_count,
            "t_final": st.t,
            "wall_seconds": time.time() - wall0,
            "singular_corrections_last_step": st.singular_corrections,
        }
    )
    _write_json(out / "manifest.json", manifest)
    if status != "completed":
        raise SimulationAbort(error_msg or "aborted")
    return out


def _snapshot(out: Path, st: SimState, spec: ScenarioSpec, snap_id: int):
    write_snapshot_csv(out / f"snap_{snap_id:04d}.csv", st)
    if spec.output.vtk:
        write_snapshot_vtk(out / f"snap_{snap_id:04d}.vtk", st, spec.output.fields)


def _audit_write(fh, st: SimState):
    row = audit_row(st)
    fh.write(
        f"{row['step']},{row['t']:.9e},{row['dt']:.9e},{row['total_mass']:.9e},"
        f"{row['px']:.9e},{row['py']:.9e},{row['pz']:.9e},"
        f"{row['kinetic']:.9e},{row['internal']:.9e},{row['broken_bonds']}\n"
    )
    fh.flush()


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def analyze_run(run_dir: str | Path, metric: str | None = None) -> dict:
    """Recompute crack metrics from a finished run directory."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json in {run_dir}")
    manifest = json.loads(manifest_path.read_text())
    analysis = manifest["analysis"]
    t_end = manifest["config"]["t_end"]
    seg_path = run_dir / "crack_segments.csv"
    if seg_path.exists():
        data = np.loadtxt(seg_path, delimiter=",", skiprows=1, ndmin=2)
        if data.size == 0:
            data = data.reshape(0, 7)
        times, mids = data[:, 0], data[:, 1:4]
    else:
        times, mids = np.zeros(0), np.zeros((0, 3))
    full = metrics_mod.compute_metrics(
        times, mids, analysis, t_end, n_slices=manifest["config"]["output"]["snapshots"]
    )
    if metric is None:
        return full
    picks = {
        "speed": ["tip_time", "tip_position", "tip_speed", "peak_speed"],
        "branching": ["initiation_time", "branch_onset", "branch_count", "boundary_arrival"],
        "angle": ["crack_angle_deg"],
    }
    if metric not in picks:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(picks)}")
    return {k: full[k] for k in picks[metric] if k in full}
