"""
Configuration: a YAML document deep-merged over the packaged default file, then validated into dataclasses.
Unknown keys are rejected at every level.
"""

from __future__ import annotations

import copy
import dataclasses
import math
import typing
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .material import PRESETS, MagnetSpec, MagnetState, preset
from .motor import MagnetInstance, PoleAssembly


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class MagnetConfig:
    material: str
    l_m: float
    A_m: float
    pc: float
    k_d: float
    k_q: float
    alpha_deg: float
    leakage: float
    active: bool
    initial_remanence: float


@dataclasses.dataclass(frozen=True)
class MagnetsConfig:
    hcf: MagnetConfig
    lcf2: MagnetConfig
    lcf3: MagnetConfig


@dataclasses.dataclass(frozen=True)
class MotorConfig:
    turns_per_pole: float
    pole_pairs: int
    rated_speed_rpm: float
    phase_turns: float
    harmonic_3: float
    elements: int
    pc_spread: float
    magnets: MagnetsConfig


@dataclasses.dataclass(frozen=True)
class ProtocolConfig:
    samples_per_period: int
    pulse_current_A: float
    durations: tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    theta_range_deg: tuple[float, ...]
    theta_steps: int
    current_range_A: tuple[float, ...]
    current_steps: int
    parallelism: int


@dataclasses.dataclass(frozen=True)
class OutputConfig:
    dir: str


@dataclasses.dataclass(frozen=True)
class Config:
    materials: dict[str, dict[str, Any]]
    motor: MotorConfig
    protocol: ProtocolConfig
    sweep: SweepConfig
    output: OutputConfig

    def __post_init__(self) -> None:
        m = self.motor
        if m.elements < 1:
            raise ConfigError(f"motor.elements must be >= 1, got {m.elements}")
        if not 0 <= m.pc_spread < 1:
            raise ConfigError(f"motor.pc_spread must be in [0, 1), got {m.pc_spread}")
        if m.pole_pairs < 1 or m.rated_speed_rpm <= 0 or m.phase_turns <= 0:
            raise ConfigError("motor.pole_pairs, rated_speed_rpm and phase_turns must be positive")
        if self.protocol.samples_per_period < 64:
            raise ConfigError(f"protocol.samples_per_period must be >= 64, got {self.protocol.samples_per_period}")
        if len(self.protocol.durations) != 5 or any(d <= 0 for d in self.protocol.durations):
            raise ConfigError(f"protocol.durations must be five positive numbers, got {self.protocol.durations}")
        for key in ("theta_range_deg", "current_range_A"):
            r = getattr(self.sweep, key)
            if len(r) != 2 or not all(math.isfinite(v) for v in r):
                raise ConfigError(f"sweep.{key} must be two finite numbers, got {r}")
        if self.sweep.parallelism < 1:
            raise ConfigError(f"sweep.parallelism must be >= 1, got {self.sweep.parallelism}")
        for name in ("hcf", "lcf2", "lcf3"):
            self.material(getattr(m.magnets, name).material)

    @staticmethod
    def default() -> Config:
        return Config.from_dict({})

    @staticmethod
    def load(path: str | Path) -> Config:
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return Config.from_dict(doc)

    @staticmethod
    def from_dict(overrides: dict[str, Any]) -> Config:
        return _build(Config, _deep_merge(default_document(), overrides), "")

    def to_dict(self) -> dict[str, Any]:
        return _to_plain(dataclasses.asdict(self))

    def with_overrides(self, overrides: dict[str, Any]) -> Config:
        return _build(Config, _deep_merge(self.to_dict(), overrides), "")

    def material(self, name: str) -> MagnetSpec:
        """Resolves a material name against the config's own materials first, then the preset catalog."""
        entry = self.materials.get(name)
        if entry is None:
            if name not in PRESETS:
                raise ConfigError(f"unknown material {name!r}; valid names: {', '.join([*self.materials, *PRESETS])}")
            return preset(name)
        entry = dict(entry)
        base = entry.pop("base", None)
        fields = {f.name for f in dataclasses.fields(MagnetSpec)} - {"name"}
        unknown = set(entry) - fields
        if unknown:
            raise ConfigError(f"materials.{name}: unknown keys {sorted(unknown)}")
        try:
            if base is not None:
                return preset(base).replace(name=name, **entry)
            return MagnetSpec(name=name, **entry)
        except (TypeError, ValueError, KeyError) as ex:
            raise ConfigError(f"materials.{name}: {ex}") from ex

    def build_assembly(self) -> PoleAssembly:
        m = self.motor
        n = m.elements
        spread = [0.0] if n == 1 else [m.pc_spread * (2 * k / (n - 1) - 1) for k in range(n)]
        magnets = []
        for mc in (m.magnets.hcf, m.magnets.lcf2, m.magnets.lcf3):
            spec = self.material(mc.material)
            magnets.append(
                MagnetInstance(
                    spec=spec,
                    elements=[MagnetState(spec, mc.initial_remanence) for _ in range(n)],
                    pc=[mc.pc * (1 + s) for s in spread],
                    l_m=mc.l_m,
                    A_m=mc.A_m,
                    k_d=mc.k_d,
                    k_q=mc.k_q,
                    alpha=math.radians(mc.alpha_deg),
                    leakage=mc.leakage,
                    active=mc.active,
                )
            )
        return PoleAssembly(
            magnets=magnets,
            turns_per_pole=m.turns_per_pole,
            pole_pairs=m.pole_pairs,
            rated_speed=m.rated_speed_rpm,
            phase_turns=m.phase_turns,
            harmonic_3=m.harmonic_3,
        )


def default_document() -> dict[str, Any]:
    text = resources.files("memflux").joinpath("data/default.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _deep_merge(base: dict[str, Any], over: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _to_plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _build(cls: type, doc: Any, where: str) -> Any:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where or '<root>'}: expected a mapping, got {type(doc).__name__}")
    hints = typing.get_type_hints(cls)
    names = [f.name for f in dataclasses.fields(cls)]
    unknown = set(doc) - set(names)
    if unknown:
        raise ConfigError(f"{where or '<root>'}: unknown keys {sorted(unknown)}")
    missing = set(names) - set(doc)
    if missing:
        raise ConfigError(f"{where or '<root>'}: missing keys {sorted(missing)}")
    kwargs = {n: _coerce(hints[n], doc[n], f"{where}.{n}" if where else n) for n in names}
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"{where or '<root>'}: {ex}") from ex


def _coerce(tp: Any, value: Any, where: str) -> Any:
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, where)
    origin = typing.get_origin(tp)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return tuple(_coerce(float, v, where) for v in value)
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a mapping, got {value!r}")
        return {str(k): dict(v) for k, v in value.items()}
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported type {tp}")
