"""Benchmark scenario generators, run orchestration and crack analytics."""

from springsph.scenario.specs import ScenarioSpec, load_config, spec_from_dict
from springsph.scenario.library import SCENARIOS, default_spec
from springsph.scenario.runner import run

__all__ = [
    "ScenarioSpec",
    "SCENARIOS",
    "default_spec",
    "load_config",
    "spec_from_dict",
    "run",
]
