"""Flat, unit-suffixed scenario configuration.

A config file is a single JSON object whose keys are dotted names ending in
an SI unit suffix, e.g. ``beam.length_m`` or ``override.g_Hz``.  Keys ending
in ``_Hz`` hold cyclic frequencies ν and are stored internally as angular
values 2πν.  Dimensionless keys carry no suffix; keys in the transfer and
effective sections are expressed in units of a reference coupling
(``_per_lam``, ``_inv_lam``, ``_per_g``, ``_per_geff``).
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from ..constants import TWO_PI
from ..device import BeamSpec, CavitySpec, DeviceSpec, DriveSpec, ElectrodeConfig, MagnetSpec

SCENARIOS = ("params", "sweep", "cool", "rabi", "transfer", "effective", "validate")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


@dataclass(frozen=True)
class Key:
    kind: type
    default: Any
    scale: float = 1.0
    nullable: bool = False
    choices: tuple = ()


def _f(default, scale=1.0, nullable=False):
    return Key(float, default, scale, nullable)


def _i(default):
    return Key(int, default)


def _s(default, choices=()):
    return Key(str, default, choices=choices)


def _b(default):
    return Key(bool, default)


_BEAM = BeamSpec(length=80e-6, radius=100e-9)
_CAV = CavitySpec()
_DRIVE = DriveSpec()
_MAG = MagnetSpec()
_DEV = DeviceSpec(beam=_BEAM)

SCHEMA: dict[str, Key] = {
    "scenario": _s(None, SCENARIOS),
    "device.variant": _s("gap", ("gap", "electrode")),
    "device.temperature_K": _f(_DEV.temperature),
    "device.gamma_s_Hz": _f(_DEV.gamma_s / TWO_PI, TWO_PI),
    "device.field_gradient_T_per_m": _f(_DEV.field_gradient, nullable=True),
    "beam.length_m": _f(_BEAM.length),
    "beam.radius_m": _f(_BEAM.radius),
    "beam.youngs_modulus_Pa": _f(_BEAM.youngs_modulus),
    "beam.density_kg_per_m3": _f(_BEAM.density),
    "beam.relative_permittivity": _f(_BEAM.relative_permittivity),
    "beam.quality_factor": _f(_BEAM.quality_factor),
    "beam.inertia": _s(_BEAM.inertia, ("reduced", "standard")),
    "cavity.stripline_length_m": _f(_CAV.stripline_length),
    "cavity.electrode_distance_m": _f(_CAV.electrode_distance),
    "cavity.effective_permittivity": _f(_CAV.effective_permittivity),
    "cavity.quality_factor": _f(_CAV.quality_factor),
    "cavity.beam_x_m": _f(_CAV.beam_position[0]),
    "cavity.beam_y_m": _f(None, nullable=True),
    "cavity.beam_z_m": _f(_CAV.beam_position[2]),
    "cavity.lateral_period_m": _f(None, nullable=True),
    "cavity.mode_amplitude_anchor": _f(_CAV.mode_amplitude_anchor),
    "cavity.mode_gradient_anchor_per_m": _f(_CAV.mode_gradient_anchor),
    "cavity.electrode.geometry_factor": _f(None, nullable=True),
    "cavity.electrode.height_m": _f(None, nullable=True),
    "cavity.electrode.u0_V": _f(None, nullable=True),
    "cavity.electrode.capacitance_F": _f(None, nullable=True),
    "drive.ac_amplitude_V_per_m": _f(_DRIVE.ac_amplitude),
    "drive.ac_frequency_Hz": _f(None, TWO_PI, nullable=True),
    "magnet.length_m": _f(_MAG.length),
    "magnet.width_m": _f(_MAG.width),
    "magnet.thickness_m": _f(_MAG.thickness),
    "magnet.magnetization_A_per_m": _f(_MAG.magnetization),
    "magnet.standoff_m": _f(_MAG.standoff),
    "magnet.bias_field_T": _f(_MAG.bias_field),
    # numerics
    "numerics.n_mech": _i(8),
    "numerics.n_cav": _i(8),
    "numerics.t_end_s": _f(200e-6),
    "numerics.n_times": _i(201),
    # cooling
    "cool.mode": _s("trajectory", ("trajectory", "steady")),
    "cool.form": _s("corrected", ("corrected", "conjugate_source")),
    "cool.n_b0": _f(None, nullable=True),
    "cool.g_over_kappa_start": _f(0.1),
    "cool.g_over_kappa_stop": _f(5.0),
    "cool.g_over_kappa_num": _i(50),
    # Rabi
    "rabi.n_m0": _f(0.3),
    "rabi.dissipative": _b(True),
    # transfer, in units of the spin-phonon coupling
    "transfer.g0_per_lam": _f(1.8),
    "transfer.kappa_per_lam": _f(0.1),
    "transfer.gamma_m_per_lam": _f(1e-4),
    "transfer.gamma_s_per_lam": _f(0.1),
    "transfer.n_th": _f(1000.0),
    "transfer.n_m0": _f(0.1),
    "transfer.width_inv_lam": _f(2.0),
    "transfer.t_center_inv_lam": _f(0.0),
    "transfer.t_start_inv_lam": _f(0.0),
    "transfer.t_end_inv_lam": _f(8.0),
    "transfer.shape": _s("gaussian", ("gaussian", "constant")),
    "transfer.dissipative": _b(True),
    # adiabatic elimination, in units of the photon-phonon coupling
    "effective.delta_per_g": _f(10.0),
    "effective.lam_per_g": _f(1.0),
    "effective.kappa_per_geff": _f(0.1),
    "effective.gamma_s_per_geff": _f(0.1),
    "effective.gamma_m_per_geff": _f(1e-3),
    "effective.n_th": _f(0.0),
    "effective.fit_periods": _f(3.0),
    # sweeps
    "sweep.var": _s(None),
    "sweep.grid": Key(str, None, nullable=True),
    # validate
    "validate.filter": Key(str, None, nullable=True),
    # output
    "output.directory": _s("out"),
    "output.formats": Key(list, ["csv", "json"]),
}

# CouplingSet field -> (config suffix, scale to internal units)
OVERRIDES = {
    "omega_m": ("_Hz", TWO_PI), "omega_1": ("_Hz", TWO_PI), "omega_c": ("_Hz", TWO_PI),
    "detuning": ("_Hz", TWO_PI), "field_zpf": ("_V_per_m", 1.0), "g": ("_Hz", TWO_PI),
    "lam": ("_Hz", TWO_PI), "kappa": ("_Hz", TWO_PI), "gamma_m": ("_Hz", TWO_PI),
    "gamma_s": ("_Hz", TWO_PI), "n_th": ("", 1.0), "mass": ("_kg", 1.0),
    "field_gradient": ("_T_per_m", 1.0), "mode_gradient": ("_per_m", 1.0),
}
for _name, (_suffix, _scale) in OVERRIDES.items():
    SCHEMA[f"override.{_name}{_suffix}"] = _f(None, _scale, nullable=True)

_TARGET = re.compile(r"^target\.([A-Za-z0-9_]+)\.(min|max|monotone)$")


@dataclass(frozen=True)
class Target:
    name: str
    kind: str  # min, max or monotone
    value: Any

    def check(self, scalars: Mapping[str, Any], columns: Mapping[str, Any]) -> tuple[bool, str]:
        if self.kind == "monotone":
            if self.name not in columns:
                return False, f"column {self.name!r} not produced"
            col = [float(x) for x in columns[self.name]]
            diffs = [b - a for a, b in zip(col, col[1:])]
            ok = all(d > 0 for d in diffs) if self.value == "increasing" else all(d < 0 for d in diffs)
            return ok, f"{self.name} {self.value}: {'yes' if ok else 'no'}"
        if self.name not in scalars:
            return False, f"scalar {self.name!r} not produced"
        v = scalars[self.name]
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False, f"{self.name} undefined"
        ok = v >= self.value if self.kind == "min" else v <= self.value
        return bool(ok), f"{self.name} = {v:.6g} ({self.kind} {self.value:.6g})"


@dataclass
class ScenarioConfig:
    """Validated configuration: raw values as written plus the defaults filled in."""

    values: dict
    targets: list = field(default_factory=list)
    source: str | None = None

    @property
    def scenario(self) -> str:
        return self.values["scenario"]

    def raw(self, key: str):
        return self.values[key]

    def si(self, key: str):
        """Value converted to internal units (rad/s for ``_Hz`` keys)."""
        v = self.values[key]
        if v is None or SCHEMA[key].kind is not float:
            return v
        return v * SCHEMA[key].scale

    def overrides(self) -> dict:
        out = {}
        for name, (suffix, _) in OVERRIDES.items():
            key = f"override.{name}{suffix}"
            if self.values[key] is not None:
                out[name] = self.si(key)
        return out

    def with_value(self, key: str, value) -> "ScenarioConfig":
        vals = dict(self.values)
        vals[key] = _coerce(key, value)
        return ScenarioConfig(vals, list(self.targets), self.source)

    def echo(self) -> dict:
        out = dict(self.values)
        for t in self.targets:
            out[f"target.{t.name}.{t.kind}"] = t.value
        return out


def _coerce(key: str, value):
    spec = SCHEMA[key]
    if value is None:
        if spec.nullable or spec.default is None:
            return None
        raise ConfigError(f"{key} may not be null")
    if spec.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} expects a number, got {value!r}")
        v = float(value)
        if not math.isfinite(v):
            raise ConfigError(f"{key} must be finite")
        return v
    if spec.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key} expects an integer, got {value!r}")
        return int(value)
    if spec.kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} expects true/false, got {value!r}")
        return value
    if spec.kind is list:
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise ConfigError(f"{key} expects a list of strings")
        return list(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} expects a string, got {value!r}")
    if spec.choices and value not in spec.choices:
        raise ConfigError(f"{key} must be one of {spec.choices}, got {value!r}")
    return value


def parse_value(key: str, text: str):
    """Parse a ``--override key=value`` right-hand side."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def from_mapping(data: Mapping[str, Any], source: str | None = None) -> ScenarioConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    values = {k: spec.default for k, spec in SCHEMA.items()}
    targets = []
    for key, val in data.items():
        m = _TARGET.match(key)
        if m:
            name, kind = m.groups()
            if kind == "monotone":
                if val not in ("increasing", "decreasing"):
                    raise ConfigError(f"{key} must be 'increasing' or 'decreasing'")
            elif isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{key} expects a number")
            targets.append(Target(name, kind, val if kind == "monotone" else float(val)))
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        if isinstance(val, dict):
            raise ConfigError(f"{key}: nested objects are not allowed; use dotted keys")
        values[key] = _coerce(key, val)
    if values["scenario"] is None:
        raise ConfigError("missing required key 'scenario'")
    cfg = ScenarioConfig(values, targets, source)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    v = cfg.values
    if v["numerics.n_mech"] < 2 or v["numerics.n_cav"] < 2:
        raise ConfigError("Fock cutoffs must be at least 2")
    if v["numerics.n_times"] < 2:
        raise ConfigError("numerics.n_times must be at least 2")
    if v["numerics.t_end_s"] <= 0:
        raise ConfigError("numerics.t_end_s must be positive")
    bad = set(v["output.formats"]) - {"csv", "json"}
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}")
    if v["scenario"] == "sweep" and v["sweep.var"] is None:
        raise ConfigError("sweep scenario needs sweep.var")
    if v["sweep.var"] is not None:
        check_sweep_var(v["sweep.var"])
        if v["sweep.grid"] is not None:
            parse_grid(v["sweep.grid"])
    electrode = [v[k] for k in ("cavity.electrode.geometry_factor", "cavity.electrode.height_m")]
    if v["device.variant"] == "electrode" and None in electrode:
        raise ConfigError("electrode variant needs cavity.electrode.geometry_factor and height_m")
    try:
        device_spec(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def check_sweep_var(name: str) -> None:
    spec = SCHEMA.get(name)
    if spec is None or spec.kind not in (float, int) or name.startswith(("numerics.", "sweep.")):
        raise ConfigError(f"cannot sweep {name!r}: not a numeric parameter key")


def parse_grid(text: str) -> list[float]:
    """``start:stop:num`` (linear), ``log:start:stop:num`` or ``v1,v2,...``."""
    try:
        if ":" in text:
            parts = text.split(":")
            log = parts[0] == "log"
            if log:
                parts = parts[1:]
            if len(parts) != 3:
                raise ValueError
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            if num == 1:
                return [start]
            if log:
                if start <= 0 or stop <= 0:
                    raise ValueError
                r = (stop / start) ** (1.0 / (num - 1))
                return [start * r ** i for i in range(num)]
            step = (stop - start) / (num - 1)
            return [start + i * step for i in range(num)]
        out = [float(x) for x in text.split(",")]
        if not out:
            raise ValueError
        return out
    except (ValueError, IndexError):
        raise ConfigError(f"bad grid {text!r}; use start:stop:num, log:start:stop:num or v1,v2") from None


def device_spec(cfg: ScenarioConfig) -> DeviceSpec:
    s = cfg.si
    beam = BeamSpec(length=s("beam.length_m"), radius=s("beam.radius_m"),
                    youngs_modulus=s("beam.youngs_modulus_Pa"), density=s("beam.density_kg_per_m3"),
                    relative_permittivity=s("beam.relative_permittivity"),
                    quality_factor=s("beam.quality_factor"), inertia=s("beam.inertia"))
    electrode = None
    if s("cavity.electrode.geometry_factor") is not None and s("cavity.electrode.height_m") is not None:
        electrode = ElectrodeConfig(s("cavity.electrode.geometry_factor"), s("cavity.electrode.height_m"),
                                    s("cavity.electrode.u0_V"), s("cavity.electrode.capacitance_F"))
    cavity = CavitySpec(stripline_length=s("cavity.stripline_length_m"),
                        electrode_distance=s("cavity.electrode_distance_m"),
                        effective_permittivity=s("cavity.effective_permittivity"),
                        quality_factor=s("cavity.quality_factor"),
                        beam_position=(s("cavity.beam_x_m"), s("cavity.beam_y_m"), s("cavity.beam_z_m")),
                        lateral_period=s("cavity.lateral_period_m"),
                        mode_amplitude_anchor=s("cavity.mode_amplitude_anchor"),
                        mode_gradient_anchor=s("cavity.mode_gradient_anchor_per_m"),
                        electrode=electrode)
    drive = DriveSpec(ac_amplitude=s("drive.ac_amplitude_V_per_m"), ac_frequency=s("drive.ac_frequency_Hz"))
    magnet = MagnetSpec(length=s("magnet.length_m"), width=s("magnet.width_m"),
                        thickness=s("magnet.thickness_m"), magnetization=s("magnet.magnetization_A_per_m"),
                        standoff=s("magnet.standoff_m"), bias_field=s("magnet.bias_field_T"))
    return DeviceSpec(beam=beam, cavity=cavity, drive=drive, magnet=magnet,
                      temperature=s("device.temperature_K"), gamma_s=s("device.gamma_s_Hz"),
                      field_gradient=s("device.field_gradient_T_per_m"))


def load(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    return from_mapping(data, str(p))


PRESETS = ("params_device", "sweep_length", "cool_trajectory", "cool_steady_scan", "rabi_dissipative",
           "transfer_gaussian", "effective_model")


def preset_path(name: str):
    return resources.files("hybridsim.cli").joinpath("presets", f"{name}.json")


def load_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    data = json.loads(preset_path(name).read_text(encoding="utf-8"))
    return from_mapping(data, f"preset:{name}")


def resolve(path_or_preset: str) -> ScenarioConfig:
    """A file path, or the bare name of a shipped preset."""
    p = Path(path_or_preset)
    if p.exists():
        return load(p)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in PRESETS:
        return load_preset(stem)
    raise ConfigError(f"no such config file or preset: {path_or_preset}")


def apply_overrides(cfg: ScenarioConfig, items: list[str]) -> ScenarioConfig:
    data = cfg.echo()
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        data[key.strip()] = parse_value(key, text.strip())
    return from_mapping(data, cfg.source)
