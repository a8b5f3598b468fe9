"""Backend benchmark: time the same scenario steps on numba and numpy paths."""

from __future__ import annotations

import time

from springsph import accel
from springsph.dynamics import predictor_corrector_step
from springsph.scenario.library import generate
from springsph.scenario.specs import ScenarioSpec


def time_backend(spec: ScenarioSpec, steps: int, backend: str) -> dict:
    prev = accel.active_name()
    accel.set_backend(backend)
    try:
        st, _ = generate(spec)
        # one warm-up step so numba compilation stays out of the timing
        predictor_corrector_step(st)
        t0 = time.perf_counter()
        for _ in range(steps):
            predictor_corrector_step(st)
        dt = time.perf_counter() - t0
    finally:
        accel.set_backend(prev)
    # two RHS evaluations per step, each visiting every bond twice (A + rhs)
    bond_updates = 4 * st.network.n_bonds * steps
    return {
        "steps": steps,
        "seconds": dt,
        "steps_per_second": steps / dt,
        "bond_updates_per_second": bond_updates / dt,
        "n_particles": st.n_real,
        "n_bonds": int(st.network.n_bonds),
    }


def compare_backends(spec: ScenarioSpec, steps: int = 50) -> dict:
    report = {}
    for name in accel.available():
        report[name] = time_backend(spec, steps, name)
    return report
