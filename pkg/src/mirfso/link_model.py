"""Analytic link budget: SNR, BER, PER, optical attenuation and noise regimes.

The amplitude convention throughout is that an SNR in dB converts to the
Q-function argument as ``10**(snr_db / 20)``, i.e. the ratio of the
half-swing ``S_RX / 2`` to the RMS noise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from scipy.special import erfc

from .errors import DomainError

PACKET_BITS = 72
ERROR_FREE_PER = 1.0 / 62_500


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class LinkHardware:
    """Transmitter and receiver constants.

    ``p_out_w`` is the laser power in use; ``p_max_w`` is the highest
    single-mode power and is what :func:`moa_for_per` budgets with.
    """

    gain: float = 26.5
    responsivity_v_per_w: float = 2793.0
    p_out_w: float = 0.0129
    p_max_w: float = 0.021
    md: float = 1.0
    saturation_w: float = 0.0012
    allow_overdrive: bool = False

    def __post_init__(self):
        for name in ("gain", "responsivity_v_per_w", "p_out_w", "p_max_w", "saturation_w"):
            _positive(name, getattr(self, name))
        if not 0 < self.md <= 1:
            raise DomainError(f"md must be in (0, 1], got {self.md!r}")
        if self.p_out_w > self.p_max_w and not self.allow_overdrive:
            raise DomainError(
                f"p_out_w={self.p_out_w} exceeds p_max_w={self.p_max_w}; set allow_overdrive to permit"
            )

    @property
    def volts_per_watt(self) -> float:
        return self.gain * self.responsivity_v_per_w


@dataclass(frozen=True)
class NoiseProfile:
    """RMS noise amplitudes referred to the decision point.

    The source (laser intensity) noise is calibrated at one operating point
    and scales linearly with received optical power.
    """

    sigma_detector_v: float = 0.0023
    sigma_source_v_at_ref: float = 0.040
    ref_oa_db: float = 13.0
    ref_p_out_w: float = 0.0129

    def __post_init__(self):
        if not self.sigma_detector_v >= 0:
            raise DomainError(f"sigma_detector_v must be >= 0, got {self.sigma_detector_v!r}")
        if not self.sigma_source_v_at_ref >= 0:
            raise DomainError(f"sigma_source_v_at_ref must be >= 0, got {self.sigma_source_v_at_ref!r}")
        _positive("ref_p_out_w", self.ref_p_out_w)

    def sigma_source_v(self, oa_db: float, p_out_w: float) -> float:
        return self.sigma_source_v_at_ref * 10.0 ** (-(oa_db - self.ref_oa_db) / 10.0) * (p_out_w / self.ref_p_out_w)

    def sigma_total_v(self, oa_db: float, p_out_w: float) -> float:
        return math.hypot(self.sigma_detector_v, self.sigma_source_v(oa_db, p_out_w))


class Regime(str, enum.Enum):
    HAR = "HAR"
    LAR = "LAR"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    crossover_moa_db: float
    snr_db: float
    sigma_total_v: float
    lar_plateau_db: float
    har_snr_db: float


# ---------------------------------------------------------------------------
# error statistics


def q_function(x: float) -> float:
    """Gaussian tail probability ``P(N(0,1) > x)``."""
    return 0.5 * float(erfc(x / math.sqrt(2.0)))


def q_inverse(p: float, tol: float = 1e-12) -> float:
    """Solve ``Q(x) = p`` by bisection.

    Bracket is [-40, 40]; the loop stops when the bracket is narrower
    than ``tol``.
    """
    if not 0 < p < 1:
        raise DomainError(f"q_inverse needs 0 < p < 1, got {p!r}")
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def snr_db(s_rx_pp_v: float, sigma_rms_v: float) -> float:
    _positive("s_rx_pp_v", s_rx_pp_v)
    _positive("sigma_rms_v", sigma_rms_v)
    return 20.0 * math.log10(s_rx_pp_v / (2.0 * sigma_rms_v))


def ber_from_snr_db(snr: float) -> float:
    if snr == -math.inf:
        return 0.5
    return q_function(10.0 ** (snr / 20.0))


def snr_db_for_ber(ber: float) -> float:
    """Inverse of :func:`ber_from_snr_db`; needs ``0 < ber < 0.5``."""
    if not 0 < ber < 0.5:
        raise DomainError(f"ber must be in (0, 0.5), got {ber!r}")
    return 20.0 * math.log10(q_inverse(ber))


def per_from_ber(ber: float, n_bits: int = PACKET_BITS) -> float:
    """Packet error rate for independent bit errors."""
    if not 0 <= ber <= 1:
        raise DomainError(f"ber must be in [0, 1], got {ber!r}")
    if n_bits < 1:
        raise DomainError(f"n_bits must be >= 1, got {n_bits!r}")
    # -expm1(N log1p(-b)) keeps precision when b is tiny
    if ber == 1:
        return 1.0
    return -math.expm1(n_bits * math.log1p(-ber))


def ber_from_per(per: float, n_bits: int = PACKET_BITS) -> float:
    if not 0 <= per < 1:
        raise DomainError(f"per must be in [0, 1), got {per!r}")
    if n_bits < 1:
        raise DomainError(f"n_bits must be >= 1, got {n_bits!r}")
    return -math.expm1(math.log1p(-per) / n_bits)


def per_from_snr_db(snr: float, n_bits: int = PACKET_BITS) -> float:
    return per_from_ber(ber_from_snr_db(snr), n_bits)


# ---------------------------------------------------------------------------
# attenuation budget


def incident_power_w(s_rx_pp_v: float, hw: LinkHardware) -> float:
    """Mean optical power on the detector implied by a received swing."""
    _positive("s_rx_pp_v", s_rx_pp_v)
    return s_rx_pp_v / (hw.volts_per_watt * hw.md)


def optical_attenuation_db(s_rx_pp_v: float, hw: LinkHardware) -> float:
    """Channel attenuation inferred from the received peak-to-peak swing.

    Raises
    ------
    DomainError
        If the implied incident power reaches detector saturation.
    """
    p_inc = incident_power_w(s_rx_pp_v, hw)
    if p_inc >= hw.saturation_w:
        raise DomainError(
            f"incident power {p_inc:.4g} W at or above saturation {hw.saturation_w:.4g} W"
        )
    return -10.0 * math.log10(p_inc / hw.p_out_w)


def zero_attenuation_snr_db(hw: LinkHardware, sigma_v: float, p_w: float | None = None) -> float:
    """SNR with no channel loss against noise ``sigma_v`` (the HAR intercept)."""
    p = hw.p_max_w if p_w is None else p_w
    return snr_db(hw.volts_per_watt * hw.md * p, sigma_v)


class MoaResult(NamedTuple):
    moa_db: float
    reachable: bool
    snr_required_db: float


def moa_for_per(
    per_target: float, hw: LinkHardware, noise: NoiseProfile, n_bits: int = PACKET_BITS
) -> MoaResult:
    """Largest detector-limited attenuation meeting ``per_target`` at ``p_max``."""
    if not 0 < per_target < 1:
        raise DomainError(f"per_target must be in (0, 1), got {per_target!r}")
    ber = ber_from_per(per_target, n_bits)
    snr_req = snr_db_for_ber(ber) if ber < 0.5 else -math.inf
    d = zero_attenuation_snr_db(hw, noise.sigma_detector_v)
    if snr_req > d:
        return MoaResult(0.0, False, snr_req)
    if snr_req == -math.inf:
        return MoaResult(math.inf, True, snr_req)
    return MoaResult((d - snr_req) / 2.0, True, snr_req)


def crossover_moa_db(hw: LinkHardware, noise: NoiseProfile) -> float:
    """Attenuation at which source and detector noise amplitudes are equal."""
    if noise.sigma_source_v_at_ref == 0:
        return -math.inf
    if noise.sigma_detector_v == 0:
        return math.inf
    sigma_src_at_ref = noise.sigma_source_v_at_ref * hw.p_out_w / noise.ref_p_out_w
    return noise.ref_oa_db + 10.0 * math.log10(sigma_src_at_ref / noise.sigma_detector_v)


def snr_at_attenuation_db(oa_db: float, hw: LinkHardware, noise: NoiseProfile) -> float:
    """SNR with both noise sources added in quadrature at ``hw.p_out_w``."""
    s_rx = hw.volts_per_watt * hw.md * hw.p_out_w * 10.0 ** (-oa_db / 10.0)
    return snr_db(s_rx, noise.sigma_total_v(oa_db, hw.p_out_w))


def snr_piecewise_db(moa_db: float, hw: LinkHardware, noise: NoiseProfile) -> RegimeReport:
    """Evaluate the two-regime SNR model at one attenuation.

    The LAR plateau is the source-noise-only SNR (independent of
    attenuation); the HAR value falls 2 dB per dB. The reported SNR uses
    the quadrature sum and joins the two asymptotes continuously.
    """
    if not moa_db >= 0:
        raise DomainError(f"moa_db must be >= 0, got {moa_db!r}")
    s_rx = hw.volts_per_watt * hw.md * hw.p_out_w * 10.0 ** (-moa_db / 10.0)
    sigma_src = noise.sigma_source_v(moa_db, hw.p_out_w)
    sigma_tot = math.hypot(noise.sigma_detector_v, sigma_src)
    plateau = snr_db(s_rx, sigma_src) if sigma_src > 0 else math.inf
    har = snr_db(s_rx, noise.sigma_detector_v) if noise.sigma_detector_v > 0 else math.inf
    return RegimeReport(
        regime=Regime.LAR if sigma_src > noise.sigma_detector_v else Regime.HAR,
        crossover_moa_db=crossover_moa_db(hw, noise),
        snr_db=snr_db(s_rx, sigma_tot),
        sigma_total_v=sigma_tot,
        lar_plateau_db=plateau,
        har_snr_db=har,
    )


def attenuation_for_snr_db(
    target_snr_db: float, hw: LinkHardware, noise: NoiseProfile, lo: float = -60.0, hi: float = 200.0
) -> float:
    """Attenuation at which :func:`snr_at_attenuation_db` equals the target.

    SNR decreases monotonically with attenuation, so plain bisection works.
    Raises ``DomainError`` if the target is above the source-noise plateau.
    """
    if snr_at_attenuation_db(lo, hw, noise) < target_snr_db:
        raise DomainError(f"SNR {target_snr_db} dB unreachable with this hardware and noise")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if snr_at_attenuation_db(mid, hw, noise) > target_snr_db:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


class MdThreshold(NamedTuple):
    """Outcome of :func:`md_threshold_for_error_free`.

    ``status`` is ``"ok"``, ``"unreachable"`` (target missed even at
    MD = 1; ``md`` is then 1.0) or ``"trivial"`` (target met as MD -> 0;
    ``md`` is then 0.0).
    """

    md: float
    status: str


def md_threshold_for_error_free(
    oa_db: float,
    hw: LinkHardware,
    noise: NoiseProfile,
    per_target: float = ERROR_FREE_PER,
    n_bits: int = PACKET_BITS,
    tol: float = 1e-9,
) -> MdThreshold:
    """Smallest modulation depth meeting ``per_target`` at fixed attenuation."""
    if not 0 < per_target < 1:
        raise DomainError(f"per_target must be in (0, 1), got {per_target!r}")

    def per_at(md: float) -> float:
        snr = snr_at_attenuation_db(oa_db, _with_md(hw, md), noise)
        return per_from_snr_db(snr, n_bits)

    if per_target >= per_from_ber(0.5, n_bits):
        return MdThreshold(0.0, "trivial")
    if per_at(1.0) > per_target:
        return MdThreshold(1.0, "unreachable")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if per_at(mid) <= per_target:
            hi = mid
        else:
            lo = mid
    return MdThreshold(hi, "ok")


def _with_md(hw: LinkHardware, md: float) -> LinkHardware:
    return replace(hw, md=md)
