"""Scenario configuration: dataclass schema, YAML loading, strict validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from springsph.material import JohnsonCook, Material


class ConfigError(ValueError):
    """Bad scenario configuration; maps to CLI exit code 2."""


@dataclass
class ViscositySpec:
    beta1: float = 1.0
    beta2: float = 1.0


@dataclass
class ArtPressureSpec:
    enabled: bool = True
    gamma_tension: float = 0.3
    gamma_compression: float = 0.01
    exponent: float = 4.0


@dataclass
class LoadSpec:
    sigma: float | None = None        # boundary stress amplitude (Pa)
    ramp_fraction: float = 0.01       # fraction of t_end; 0 = step load
    bc_gradient: str = "raw"          # raw | corrected
    impact_speed: float | None = None
    u_max: float | None = None        # twist amplitude (m/s)


@dataclass
class OutputSpec:
    snapshots: int = 50
    audit_interval: int = 1
    fields: list[str] | None = None   # VTK scalar subset; None = all
    vtk: bool = True


@dataclass
class ScenarioSpec:
    name: str
    dim: int
    dp: float
    h_ratio: float
    t_end: float
    material: dict
    geometry: dict = field(default_factory=dict)
    load: LoadSpec = field(default_factory=LoadSpec)
    viscosity: ViscositySpec = field(default_factory=ViscositySpec)
    art_pressure: ArtPressureSpec = field(default_factory=ArtPressureSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    cfl: float = 0.3

    @property
    def h(self) -> float:
        return self.h_ratio * self.dp

    def build_material(self) -> Material:
        try:
            return material_from_dict(self.material)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid material block: {exc}") from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_MATERIAL_KEYS = {
    "rho0",
    "E",
    "nu",
    "criterion",
    "eps_max",
    "sigma_p_max",
    "delta_tc",
    "sigma_y0",
    "strain_measure",
    "jc",
}


def material_from_dict(d: dict) -> Material:
    unknown = set(d) - _MATERIAL_KEYS
    if unknown:
        raise ConfigError(f"unknown material keys: {sorted(unknown)}")
    kw = dict(d)
    jc = kw.pop("jc", None)
    if jc is not None:
        jc_fields = {f.name for f in dataclasses.fields(JohnsonCook)}
        bad = set(jc) - jc_fields
        if bad:
            raise ConfigError(f"unknown jc keys: {sorted(bad)}")
        try:
            kw["jc"] = JohnsonCook(**jc)
        except TypeError as exc:
            raise ConfigError(f"incomplete jc block: {exc}") from exc
    return Material(**kw)


def _merge_into(spec_value, update: dict, path: str):
    """Recursive strict overlay of a config dict onto a dataclass or dict."""
    if dataclasses.is_dataclass(spec_value):
        names = {f.name for f in dataclasses.fields(spec_value)}
        for key, val in update.items():
            if key not in names:
                raise ConfigError(f"unknown key {path}{key}")
            current = getattr(spec_value, key)
            if isinstance(val, dict) and (
                dataclasses.is_dataclass(current) or isinstance(current, dict)
            ):
                _merge_into(current, val, f"{path}{key}.")
            else:
                setattr(spec_value, key, val)
        return spec_value
    if isinstance(spec_value, dict):
        spec_value.update(update)
        return spec_value
    raise ConfigError(f"cannot merge into {path!r}")


def apply_config(spec: ScenarioSpec, cfg: dict) -> ScenarioSpec:
    cfg = dict(cfg)
    declared = cfg.pop("scenario", None)
    if declared is not None and declared != spec.name:
        raise ConfigError(
            f"config declares scenario {declared!r} but {spec.name!r} was requested"
        )
    # material block is a plain dict with its own key check
    mat = cfg.pop("material", None)
    if mat is not None:
        unknown = set(mat) - _MATERIAL_KEYS
        if unknown:
            raise ConfigError(f"unknown material keys: {sorted(unknown)}")
        merged = dict(spec.material)
        for k, v in mat.items():
            if k == "jc" and isinstance(spec.material.get("jc"), dict) and isinstance(v, dict):
                merged["jc"] = {**spec.material["jc"], **v}
            else:
                merged[k] = v
        spec.material = merged
    _merge_into(spec, cfg, path="")
    spec.build_material()  # validate early
    return spec


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return data


def spec_from_dict(data: dict) -> ScenarioSpec:
    """Build a spec from a full config dict (used by manifest round-trips)."""
    from springsph.scenario.library import default_spec

    name = data.get("scenario") or data.get("name")
    if not name:
        raise ConfigError("config must carry a scenario name")
    spec = default_spec(name)
    payload = {k: v for k, v in data.items() if k not in ("scenario", "name")}
    return apply_config(spec, payload)
