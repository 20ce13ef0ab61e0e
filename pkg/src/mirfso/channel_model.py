"""Distance-dependent attenuation of a horizontal free-space optical path.

Losses are split by mechanism: aerosol (Mie) scattering from the Kruse
visibility model, molecular Rayleigh scattering, tabulated absorption,
scintillation from the Hufnagel-Valley turbulence profile and geometric
spreading of a Gaussian beam. All functions are pure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DomainError, RangeError

DB_PER_NEPER = 10.0 * math.log10(math.e)
VISIBLE_REFERENCE_NM = 550.0
# Extinction that leaves 2 % of 550 nm light after one visibility length.
KRUSE_CONSTANT = -math.log(0.02)

RAYLEIGH_BETA0_PER_KM = 0.0116
RAYLEIGH_EXPONENT = 4.09
HV_GROUND_CN2 = 1.7e-14

DEFAULT_ABSORPTION_CSV = "absorption_default.csv"


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value!r}")


def _non_negative(name: str, value: float) -> None:
    if not value >= 0:
        raise DomainError(f"{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class Atmosphere:
    """Meteorological state of the path.

    ``absorption_table`` holds ``(wavelength_nm, alpha_db_per_km)`` pairs
    with strictly increasing wavelengths. It carries molecular plus aerosol
    absorption; nothing is computed line-by-line here.
    """

    visibility_km: float = 23.0
    altitude_m: float = 50.0
    wind_mps: float = 30.0 / 3.6
    cn2_override: float | None = None
    absorption_table: tuple[tuple[float, float], ...] = ()
    rayleigh_beta0_per_km: float = RAYLEIGH_BETA0_PER_KM
    rayleigh_exponent: float = RAYLEIGH_EXPONENT
    hv_ground_cn2: float = HV_GROUND_CN2

    def __post_init__(self):
        _positive("visibility_km", self.visibility_km)
        _non_negative("altitude_m", self.altitude_m)
        _non_negative("wind_mps", self.wind_mps)
        if self.cn2_override is not None:
            _positive("cn2_override", self.cn2_override)
        table = tuple((float(w), float(a)) for w, a in self.absorption_table)
        _check_table(table)
        object.__setattr__(self, "absorption_table", table)

    @property
    def cn2(self) -> float:
        if self.cn2_override is not None:
            return self.cn2_override
        return hufnagel_valley_cn2(self.altitude_m, self.wind_mps, self.hv_ground_cn2)


def _check_table(table: Sequence[tuple[float, float]]) -> None:
    wavelengths = [w for w, _ in table]
    for w, a in table:
        if not w > 0:
            raise ConfigError(f"absorption wavelength must be positive, got {w}")
        if not a >= 0:
            raise ConfigError(f"absorption coefficient must be >= 0, got {a} at {w} nm")
    for lo, hi in zip(wavelengths, wavelengths[1:]):
        if hi == lo:
            raise ConfigError(f"duplicate absorption wavelength {lo} nm")
        if hi < lo:
            raise ConfigError("absorption wavelengths must be strictly increasing")


@dataclass(frozen=True)
class LinkGeometry:
    """Transmitter/receiver apertures and the launched beam waist.

    ``beam_waist_m`` defaults to the transmitter aperture radius.
    ``continuous_geometric`` drops the zero-loss zone inside twice the
    Rayleigh length and keeps only the capture-area clamp.
    """

    tx_aperture_radius_m: float = 0.10
    rx_aperture_radius_m: float = 0.10
    beam_waist_m: float | None = None
    continuous_geometric: bool = False

    def __post_init__(self):
        _positive("tx_aperture_radius_m", self.tx_aperture_radius_m)
        _positive("rx_aperture_radius_m", self.rx_aperture_radius_m)
        if self.beam_waist_m is None:
            object.__setattr__(self, "beam_waist_m", self.tx_aperture_radius_m)
        _positive("beam_waist_m", self.beam_waist_m)

    @property
    def capture_area_m2(self) -> float:
        return math.pi * self.rx_aperture_radius_m**2


@dataclass(frozen=True)
class AttenuationBreakdown:
    """Per-mechanism losses in dB at one distance; ``total_db`` is their sum."""

    aerosol_scattering_db: float
    rayleigh_scattering_db: float
    absorption_db: float
    scintillation_db: float
    geometric_db: float
    total_db: float = field(init=False)

    def __post_init__(self):
        parts = (
            self.aerosol_scattering_db,
            self.rayleigh_scattering_db,
            self.absorption_db,
            self.scintillation_db,
            self.geometric_db,
        )
        for p in parts:
            if not p >= 0:
                raise DomainError(f"attenuation components must be >= 0, got {parts}")
        object.__setattr__(self, "total_db", math.fsum(parts))

    def as_dict(self) -> dict[str, float]:
        return {
            "aerosol_db": self.aerosol_scattering_db,
            "rayleigh_db": self.rayleigh_scattering_db,
            "absorption_db": self.absorption_db,
            "scintillation_db": self.scintillation_db,
            "geometric_db": self.geometric_db,
            "total_db": self.total_db,
        }


# ---------------------------------------------------------------------------
# absorption table I/O


def load_absorption_csv(path: str | Path) -> tuple[tuple[float, float], ...]:
    """Read a ``wavelength_nm,alpha_db_per_km`` table.

    Raises
    ------
    ConfigError
        On a wrong header, unparsable rows, duplicates or non-monotone
        wavelengths.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_absorption_rows(csv.reader(fh), str(path))


def default_absorption_table() -> tuple[tuple[float, float], ...]:
    """The shipped table covering 1557.7, 3998.6 and 4720.0 nm."""
    ref = resources.files("mirfso") / "data" / DEFAULT_ABSORPTION_CSV
    with ref.open("r", encoding="utf-8", newline="") as fh:
        return _parse_absorption_rows(csv.reader(fh), DEFAULT_ABSORPTION_CSV)


def default_absorption_path() -> Path:
    return Path(str(resources.files("mirfso") / "data" / DEFAULT_ABSORPTION_CSV))


def _parse_absorption_rows(rows, source: str) -> tuple[tuple[float, float], ...]:
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ConfigError(f"{source}: empty absorption file")
    header = [c.strip() for c in rows[0]]
    if header != ["wavelength_nm", "alpha_db_per_km"]:
        raise ConfigError(f"{source}: expected header 'wavelength_nm,alpha_db_per_km', got {rows[0]}")
    table = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ConfigError(f"{source}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            table.append((float(row[0]), float(row[1])))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    _check_table(table)
    return tuple(table)


def write_absorption_csv(table: Sequence[tuple[float, float]], path: str | Path) -> None:
    _check_table(table)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["wavelength_nm", "alpha_db_per_km"])
        for w, a in table:
            writer.writerow([repr(float(w)), repr(float(a))])


# ---------------------------------------------------------------------------
# per-mechanism coefficients


def kruse_exponent(visibility_km: float) -> float:
    """Size-distribution exponent of the Kruse model.

    Exactly 6 km and 50 km fall in the lower-visibility branch.
    """
    _positive("visibility_km", visibility_km)
    if visibility_km > 50.0:
        return 1.6
    if visibility_km > 6.0:
        return 1.3
    return 0.585 * visibility_km ** (1.0 / 3.0)


def aerosol_scattering_db_per_km(
    wavelength_nm: float, visibility_km: float, kruse_constant: float = KRUSE_CONSTANT
) -> float:
    """Mie scattering by fog/haze aerosol, in dB/km.

    Parameters
    ----------
    wavelength_nm : float
        Carrier wavelength.
    visibility_km : float
        Meteorological visibility (2 % contrast at 550 nm).
    kruse_constant : float, optional
        Extinction in nepers over one visibility length. Defaults to
        ``-ln(0.02)``; the commonly printed rounding is 3.91.
    """
    _positive("wavelength_nm", wavelength_nm)
    p = kruse_exponent(visibility_km)
    return DB_PER_NEPER * kruse_constant / visibility_km * (wavelength_nm / VISIBLE_REFERENCE_NM) ** (-p)


def rayleigh_scattering_db_per_km(
    wavelength_nm: float,
    beta0_per_km: float = RAYLEIGH_BETA0_PER_KM,
    exponent: float = RAYLEIGH_EXPONENT,
) -> float:
    """Molecular scattering as a power law anchored at 550 nm (sea level)."""
    _positive("wavelength_nm", wavelength_nm)
    return DB_PER_NEPER * beta0_per_km * (VISIBLE_REFERENCE_NM / wavelength_nm) ** exponent


def absorption_db_per_km(wavelength_nm: float, atmosphere: Atmosphere) -> float:
    """Linear interpolation in the atmosphere's absorption table."""
    table = atmosphere.absorption_table
    if not table:
        raise ConfigError("absorption table is empty")
    wl = np.array([w for w, _ in table])
    alpha = np.array([a for _, a in table])
    if not wl[0] <= wavelength_nm <= wl[-1]:
        raise RangeError(f"{wavelength_nm} nm outside absorption table [{wl[0]}, {wl[-1]}] nm")
    return float(np.interp(wavelength_nm, wl, alpha))


def hufnagel_valley_cn2(altitude_m: float, wind_mps: float, ground_cn2: float = HV_GROUND_CN2) -> float:
    """Refractive-index structure parameter Cn^2 [m^-2/3] at ``altitude_m``."""
    _non_negative("altitude_m", altitude_m)
    _non_negative("wind_mps", wind_mps)
    h = altitude_m
    return (
        0.00594 * (wind_mps / 27.0) ** 2 * (1e-5 * h) ** 10 * math.exp(-h / 1000.0)
        + 2.7e-16 * math.exp(-h / 1500.0)
        + ground_cn2 * math.exp(-h / 100.0)
    )


def scintillation_db(wavelength_nm: float, link_m: float, cn2: float) -> float:
    """Scintillation margin ``2*sqrt(23.17 k^(7/6) Cn^2 L^(11/6))`` in dB."""
    _positive("wavelength_nm", wavelength_nm)
    _positive("link_m", link_m)
    _positive("cn2", cn2)
    k = 2.0 * math.pi / (wavelength_nm * 1e-9)
    return 2.0 * math.sqrt(23.17 * k ** (7.0 / 6.0) * cn2 * link_m ** (11.0 / 6.0))


def rayleigh_length_m(beam_waist_m: float, wavelength_nm: float) -> float:
    _positive("beam_waist_m", beam_waist_m)
    _positive("wavelength_nm", wavelength_nm)
    return math.pi * beam_waist_m**2 / (wavelength_nm * 1e-9)


def beam_radius_m(beam_waist_m: float, wavelength_nm: float, distance_m: float) -> float:
    z_r = rayleigh_length_m(beam_waist_m, wavelength_nm)
    return beam_waist_m * math.sqrt(1.0 + (distance_m / z_r) ** 2)


def geometric_attenuation_db(geometry: LinkGeometry, wavelength_nm: float, distance_m: float) -> float:
    """Beam-spreading loss relative to the receiver capture area.

    No loss is charged within twice the Rayleigh length (unless
    ``geometry.continuous_geometric``); beyond it the loss is the ratio of
    beam area to capture area, clamped at zero. With the waist equal to
    the receiver radius this produces a ~7 dB step at ``2*z_R``.
    """
    _non_negative("distance_m", distance_m)
    z_r = rayleigh_length_m(geometry.beam_waist_m, wavelength_nm)
    if not geometry.continuous_geometric and distance_m <= 2.0 * z_r:
        return 0.0
    w = beam_radius_m(geometry.beam_waist_m, wavelength_nm, distance_m)
    ratio = math.pi * w * w / geometry.capture_area_m2
    if ratio <= 1.0:
        return 0.0
    return 10.0 * math.log10(ratio)


def total_attenuation(
    atmosphere: Atmosphere, geometry: LinkGeometry, wavelength_nm: float, distance_m: float
) -> AttenuationBreakdown:
    """All loss mechanisms at ``distance_m``; an empty absorption table counts as zero."""
    _positive("wavelength_nm", wavelength_nm)
    _non_negative("distance_m", distance_m)
    if distance_m == 0:
        return AttenuationBreakdown(0.0, 0.0, 0.0, 0.0, 0.0)
    d_km = distance_m / 1000.0
    absorption = absorption_db_per_km(wavelength_nm, atmosphere) if atmosphere.absorption_table else 0.0
    return AttenuationBreakdown(
        aerosol_scattering_db=aerosol_scattering_db_per_km(wavelength_nm, atmosphere.visibility_km) * d_km,
        rayleigh_scattering_db=rayleigh_scattering_db_per_km(
            wavelength_nm, atmosphere.rayleigh_beta0_per_km, atmosphere.rayleigh_exponent
        )
        * d_km,
        absorption_db=absorption * d_km,
        scintillation_db=scintillation_db(wavelength_nm, distance_m, atmosphere.cn2),
        geometric_db=geometric_attenuation_db(geometry, wavelength_nm, distance_m),
    )


class LinkLength(NamedTuple):
    distance_m: float
    unbounded: bool


def max_link_length_m(
    atmosphere: Atmosphere,
    geometry: LinkGeometry,
    wavelength_nm: float,
    budget_db: float,
    *,
    scan_step_m: float = 10.0,
    resolution_m: float = 1.0,
    d_max_m: float = 100_000.0,
) -> LinkLength:
    """Longest distance whose total loss stays within ``budget_db``.

    A coarse forward scan brackets the first crossing, then bisection
    narrows it to ``resolution_m``. Because the scan stops at the first
    bracket, a discontinuous jump over the budget (the geometric step)
    resolves to the last distance before the jump.
    """
    _positive("budget_db", budget_db)

    def over(d: float) -> bool:
        return total_attenuation(atmosphere, geometry, wavelength_nm, d).total_db > budget_db

    lo = 0.0
    hi = None
    d = scan_step_m
    while d <= d_max_m:
        if over(d):
            hi = d
            break
        lo = d
        d += scan_step_m
    if hi is None:
        if not over(d_max_m):
            return LinkLength(d_max_m, True)
        hi = d_max_m
    while hi - lo > resolution_m:
        mid = 0.5 * (lo + hi)
        if over(mid):
            hi = mid
        else:
            lo = mid
    return LinkLength(lo, False)
