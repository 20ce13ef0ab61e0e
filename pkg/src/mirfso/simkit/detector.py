"""Optical waveform rendering and the receiver front end."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

from ..codec import CHIP_RATE_HZ, ChipStream
from ..errors import DomainError


@dataclass(frozen=True)
class DetectorChainConfig:
    """Photodetector, transimpedance stage and filters.

    Defaults sample at 16 points per 230.4 kHz chip. The low-pass corner
    (2.5 MHz) sits above that Nyquist frequency; it is discretized from
    the analog RC response rather than by a warped transform, so it stays
    well defined there.
    """

    responsivity_v_per_w: float = 2793.0
    ac_gain: float = 26.5
    saturation_w: float = 0.0012
    lowpass_cutoff_hz: float = 2.5e6
    ac_coupling_cutoff_hz: float = 10.0
    sample_rate_hz: float = 16 * CHIP_RATE_HZ
    chip_rate_hz: float = CHIP_RATE_HZ

    def __post_init__(self):
        for name in (
            "responsivity_v_per_w",
            "ac_gain",
            "saturation_w",
            "lowpass_cutoff_hz",
            "ac_coupling_cutoff_hz",
            "sample_rate_hz",
            "chip_rate_hz",
        ):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.sample_rate_hz < 4 * self.chip_rate_hz:
            raise DomainError("sample rate must be at least 4x the chip rate")
        spc = self.sample_rate_hz / self.chip_rate_hz
        if abs(spc - round(spc)) > 1e-9:
            raise DomainError(f"sample rate must be an integer multiple of the chip rate, got {spc:g}")
        if self.ac_coupling_cutoff_hz >= self.sample_rate_hz / 2:
            raise DomainError("AC-coupling corner must lie below Nyquist")

    @property
    def samples_per_chip(self) -> int:
        return int(round(self.sample_rate_hz / self.chip_rate_hz))

    @property
    def volts_per_watt(self) -> float:
        return self.ac_gain * self.responsivity_v_per_w


def md_levels(mean_power_w: float, md: float) -> tuple[float, float]:
    """High/low optical levels with peak-to-peak = ``md`` x mean (Manchester mean)."""
    if mean_power_w < 0:
        raise DomainError("mean power must be >= 0")
    if not 0 <= md <= 2:
        raise DomainError(f"md must be in [0, 2], got {md}")
    return mean_power_w * (1 + md / 2), mean_power_w * (1 - md / 2)


def render_waveform(
    chips: ChipStream | np.ndarray, p_high_w: float, p_low_w: float, cfg: DetectorChainConfig
) -> np.ndarray:
    """Rectangular optical power waveform, ``samples_per_chip`` samples per chip.

    A 2-D chip array (one row per packet) renders row-wise.
    """
    if p_low_w < 0 or p_low_w > p_high_w:
        raise DomainError(f"need 0 <= p_low ({p_low_w}) <= p_high ({p_high_w})")
    c = chips.chips if isinstance(chips, ChipStream) else np.asarray(chips)
    levels = np.where(c.astype(bool), p_high_w, p_low_w)
    return np.repeat(levels, cfg.samples_per_chip, axis=-1)


class ChainOutput(NamedTuple):
    voltage: np.ndarray
    saturated: np.ndarray | bool


def _rc_coefficient(cutoff_hz: float, sample_rate_hz: float) -> float:
    return math.exp(-2.0 * math.pi * cutoff_hz / sample_rate_hz)


def detector_chain(
    optical_w: np.ndarray, cfg: DetectorChainConfig, initial_level_w: float | np.ndarray | None = None
) -> ChainOutput:
    """Convert optical power to the AC-coupled, low-passed output voltage.

    The filters start in the steady state of a constant input at
    ``initial_level_w`` (default: the record mean), which is the state a
    long DC-balanced stream leaves them in. Pass ``initial_level_w=0`` to
    start from rest.

    ``saturated`` is per row for 2-D input.
    """
    p = np.asarray(optical_w, dtype=float)
    v_sat = cfg.volts_per_watt * cfg.saturation_w
    v = cfg.volts_per_watt * p
    saturated = (p >= cfg.saturation_w).any(axis=-1)
    v = np.minimum(v, v_sat)

    if initial_level_w is None:
        v0 = v.mean(axis=-1)
    else:
        v0 = np.minimum(cfg.volts_per_watt * np.asarray(initial_level_w, dtype=float), v_sat)
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), v.shape[:-1])[..., None]

    a_lp = _rc_coefficient(cfg.lowpass_cutoff_hz, cfg.sample_rate_hz)
    lp, _ = lfilter([1.0 - a_lp], [1.0, -a_lp], v, axis=-1, zi=a_lp * v0)

    # y[n] = a (y[n-1] + x[n] - x[n-1]); zero output for a constant v0 history
    a_hp = _rc_coefficient(cfg.ac_coupling_cutoff_hz, cfg.sample_rate_hz)
    hp, _ = lfilter([a_hp, -a_hp], [1.0, -a_hp], lp, axis=-1, zi=-a_hp * v0)

    if hp.ndim == 1:
        return ChainOutput(hp, bool(saturated))
    return ChainOutput(hp, saturated)
