"""Flat ``section.key = value`` scenario files.

Every key carries its unit in its name. Missing keys take the defaults
below (the measured testbed constants); unknown keys are rejected.

Example::

    # fog scenario
    atmosphere.visibility_km = 1.0
    laser.md = 1.0
    run.seed = 7
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..channel_model import Atmosphere, LinkGeometry, default_absorption_table, load_absorption_csv
from ..errors import ConfigError, DomainError
from ..link_model import LinkHardware, NoiseProfile


@dataclass(frozen=True)
class LaserSection:
    wavelength_nm: float = 4720.0
    p_out_w: float = 0.0129
    p_max_w: float = 0.021
    md: float = 1.0


@dataclass(frozen=True)
class DetectorSection:
    gain: float = 26.5
    responsivity_v_per_w: float = 2793.0
    saturation_w: float = 0.0012
    sigma_detector_v: float = 0.0023


@dataclass(frozen=True)
class NoiseSection:
    sigma_source_v_at_ref: float = 0.040
    ref_oa_db: float = 13.0
    ref_p_out_w: float = 0.0129


@dataclass(frozen=True)
class GeometrySection:
    tx_aperture_radius_m: float = 0.10
    rx_aperture_radius_m: float = 0.10
    beam_waist_m: float = 0.10
    continuous_geometric: bool = False


@dataclass(frozen=True)
class AtmosphereSection:
    visibility_km: float = 1.0
    altitude_m: float = 50.0
    wind_mps: float = 30.0 / 3.6
    absorption_csv: str = ""
    cn2_override: float | None = None
    hv_ground_cn2: float = 1.7e-14


@dataclass(frozen=True)
class RunSection:
    n_packets: int = 62_500
    seed: int = 0
    n_bits: int = 72


_SECTIONS = {
    "laser": LaserSection,
    "detector": DetectorSection,
    "noise": NoiseSection,
    "geometry": GeometrySection,
    "atmosphere": AtmosphereSection,
    "run": RunSection,
}

# field name -> declared type, resolved once (annotations are strings here)
_TYPES = {
    "float": float,
    "int": int,
    "bool": bool,
    "str": str,
    "float | None": (float, None),
}


@dataclass(frozen=True)
class ScenarioConfig:
    laser: LaserSection = field(default_factory=LaserSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    geometry: GeometrySection = field(default_factory=GeometrySection)
    atmosphere: AtmosphereSection = field(default_factory=AtmosphereSection)
    run: RunSection = field(default_factory=RunSection)
    base_dir: Path | None = field(default=None, compare=False)

    def hardware(self, **overrides) -> LinkHardware:
        kw = dict(
            gain=self.detector.gain,
            responsivity_v_per_w=self.detector.responsivity_v_per_w,
            p_out_w=self.laser.p_out_w,
            p_max_w=self.laser.p_max_w,
            md=self.laser.md,
            saturation_w=self.detector.saturation_w,
        )
        kw.update(overrides)
        return LinkHardware(**kw)

    def noise_profile(self) -> NoiseProfile:
        return NoiseProfile(
            sigma_detector_v=self.detector.sigma_detector_v,
            sigma_source_v_at_ref=self.noise.sigma_source_v_at_ref,
            ref_oa_db=self.noise.ref_oa_db,
            ref_p_out_w=self.noise.ref_p_out_w,
        )

    def absorption_table(self) -> tuple[tuple[float, float], ...]:
        path = self.atmosphere.absorption_csv
        if not path:
            return default_absorption_table()
        p = Path(path)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        try:
            return load_absorption_csv(p)
        except OSError as exc:
            raise ConfigError(f"cannot read absorption table {p}: {exc}") from None

    def atmosphere_model(self) -> Atmosphere:
        a = self.atmosphere
        return Atmosphere(
            visibility_km=a.visibility_km,
            altitude_m=a.altitude_m,
            wind_mps=a.wind_mps,
            cn2_override=a.cn2_override,
            absorption_table=self.absorption_table(),
            hv_ground_cn2=a.hv_ground_cn2,
        )

    def link_geometry(self) -> LinkGeometry:
        g = self.geometry
        return LinkGeometry(
            tx_aperture_radius_m=g.tx_aperture_radius_m,
            rx_aperture_radius_m=g.rx_aperture_radius_m,
            beam_waist_m=g.beam_waist_m,
            continuous_geometric=g.continuous_geometric,
        )

    def items(self):
        for name in _SECTIONS:
            section = getattr(self, name)
            for f in dataclasses.fields(section):
                yield f"{name}.{f.name}", getattr(section, f.name)


def _parse_value(key: str, kind, text: str) -> Any:
    text = text.strip()
    if kind == (float, None):
        if text.lower() in ("none", ""):
            return None
        kind = float
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind is int:
            return int(text)
        if kind is float:
            v = float(text)
            if not math.isfinite(v):
                raise ValueError(f"non-finite value {text!r}")
            return v
        return text
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, base_dir: Path | None = None) -> ScenarioConfig:
    values: dict[str, dict[str, Any]] = {name: {} for name in _SECTIONS}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        seen.add(key)
        section, _, name = key.partition(".")
        cls = _SECTIONS.get(section)
        if cls is None:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        if name not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[section][name] = _parse_value(key, _TYPES[fields[name].type], value)
    try:
        sections = {name: cls(**values[name]) for name, cls in _SECTIONS.items()}
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg = ScenarioConfig(**sections, base_dir=base_dir)
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, base_dir=p.parent)


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    current = None
    for key, value in cfg.items():
        section = key.split(".", 1)[0]
        if section != current:
            if current is not None:
                lines.append("")
            current = section
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def validate(cfg: ScenarioConfig) -> None:
    """Build every model object once so bad values fail at load time."""
    try:
        cfg.hardware()
        cfg.noise_profile()
        cfg.link_geometry()
        Atmosphere(
            visibility_km=cfg.atmosphere.visibility_km,
            altitude_m=cfg.atmosphere.altitude_m,
            wind_mps=cfg.atmosphere.wind_mps,
            cn2_override=cfg.atmosphere.cn2_override,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.laser.wavelength_nm <= 0:
        raise ConfigError("laser.wavelength_nm must be positive")
    if cfg.run.n_packets < 1 or cfg.run.n_bits < 1:
        raise ConfigError("run.n_packets and run.n_bits must be >= 1")
