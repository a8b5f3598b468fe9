"""Command line entry point: simulate, analyze and bench subcommands.

Exit codes: 0 ok, 1 runtime abort, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from springsph import accel
from springsph.dynamics import SimulationAbort
from springsph.scenario.library import SCENARIOS, default_spec
from springsph.scenario.runner import analyze_run, run
from springsph.scenario.specs import ConfigError, apply_config, load_config


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="springsph", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write a run directory")
    sim.add_argument("scenario", help=f"one of: {', '.join(sorted(SCENARIOS))}")
    sim.add_argument("--config", help="YAML config overlaying the scenario defaults")
    sim.add_argument("--dp", type=float, help="particle spacing override (m)")
    sim.add_argument("--sigma", type=float, help="boundary stress override (Pa)")
    sim.add_argument("--tend", type=float, help="end time override (s)")
    sim.add_argument("--out", default=None, help="run directory (default runs/<scenario>-<stamp>)")
    sim.add_argument("--deterministic", action="store_true", help="record and enforce the serial deterministic reduction")
    sim.add_argument("--threads", type=int, default=None, help="compute threads for the numba backend")

    ana = sub.add_parser("analyze", help="recompute crack metrics from a run directory")
    ana.add_argument("run_dir")
    ana.add_argument("--metric", choices=["speed", "branching", "angle"], default=None)

    ben = sub.add_parser("bench", help="compare numba and numpy backends on one scenario")
    ben.add_argument("--scenario", default="branching")
    ben.add_argument("--steps", type=int, default=50)
    ben.add_argument("--dp", type=float, default=None)
    return p


def _resolve_spec(args):
    if args.scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {args.scenario!r}; available: {', '.join(sorted(SCENARIOS))}"
        )
    spec = default_spec(args.scenario)
    if args.config:
        spec = apply_config(spec, load_config(args.config))
    if args.dp is not None:
        spec.dp = args.dp
    if args.sigma is not None:
        spec.load.sigma = args.sigma
    if args.tend is not None:
        spec.t_end = args.tend
    spec.build_material()
    return spec


def cmd_simulate(args) -> int:
    spec = _resolve_spec(args)
    out = args.out or f"runs/{spec.name}-{time.strftime('%Y%m%d-%H%M%S')}"
    print(f"[springsph] scenario={spec.name} dp={spec.dp:g} t_end={spec.t_end:g} backend={accel.active_name()}")

    def progress(st):
        print(f"  step {st.step_count:6d}  t={st.t * 1e6:9.2f} us  broken={int((st.network.f <= 0).sum())}")

    run_dir = run(
        spec,
        out,
        deterministic=args.deterministic,
        threads=args.threads,
        progress=progress,
    )
    print(f"[springsph] run complete: {run_dir}")
    return 0


def cmd_analyze(args) -> int:
    result = analyze_run(args.run_dir, args.metric)
    print(json.dumps(result, indent=2))
    return 0


def cmd_bench(args) -> int:
    from springsph.bench import compare_backends

    spec = default_spec(args.scenario)
    if args.dp is not None:
        spec.dp = args.dp
    report = compare_backends(spec, args.steps)
    for name, stats in report.items():
        print(
            f"{name:>6}: {stats['seconds']:8.2f} s for {stats['steps']} steps "
            f"({stats['steps_per_second']:.2f} steps/s, {stats['bond_updates_per_second']:.3g} bond-updates/s)"
        )
    if "numba" in report and "numpy" in report:
        print(f"speedup numba/numpy: {report['numpy']['seconds'] / report['numba']['seconds']:.1f}x")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "bench":
            return cmd_bench(args)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SimulationAbort as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
