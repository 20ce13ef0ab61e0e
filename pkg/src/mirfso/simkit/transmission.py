"""Bit-true Monte Carlo of the OOK/Manchester link.

Every packet draws from its own counter-based generator keyed by
``(seed, packet_index)``, so results do not depend on batching or on the
number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import codec
from ..errors import DomainError, SyncLossError
from ..link_model import LinkHardware, NoiseProfile, snr_at_attenuation_db
from .detector import DetectorChainConfig, detector_chain, md_levels, render_waveform
from .noise import DEFAULT_FLICKER_BAND_HZ, flicker_from_draws, octave_corners

SATURATION_WARN_FRACTION = 0.01
_PREAMBLE_CHIPS = 2 * 8 * len(codec.EQUALIZATION)


@dataclass(frozen=True)
class Scenario:
    """One static-channel transmission experiment.

    ``threshold_mode="preamble"`` sets each packet's comparator threshold
    to the mean of its equalization segment; ``"fixed"`` uses
    ``fixed_threshold_v``. ``sampling`` is passed to
    :func:`mirfso.codec.digitize`; the default single mid-chip sample makes
    the decision noise equal the waveform RMS noise.
    """

    hw: LinkHardware
    noise: NoiseProfile
    oa_db: float
    n_packets: int
    seed: int = 0
    detector: DetectorChainConfig = field(default_factory=DetectorChainConfig)
    flicker_band_hz: tuple[float, float] = DEFAULT_FLICKER_BAND_HZ
    threshold_mode: str = "preamble"
    fixed_threshold_v: float = 0.0
    sampling: str = "mid"
    eye_traces: int = 200
    batch_size: int = 500

    def __post_init__(self):
        if self.n_packets < 1:
            raise DomainError(f"n_packets must be >= 1, got {self.n_packets}")
        if self.threshold_mode not in ("preamble", "fixed"):
            raise DomainError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")

    @property
    def chain(self) -> DetectorChainConfig:
        return replace(
            self.detector,
            responsivity_v_per_w=self.hw.responsivity_v_per_w,
            ac_gain=self.hw.gain,
            saturation_w=self.hw.saturation_w,
        )

    @property
    def received_power_w(self) -> float:
        return self.hw.p_out_w * 10.0 ** (-self.oa_db / 10.0)

    @property
    def sigma_source_v(self) -> float:
        return self.noise.sigma_source_v(self.oa_db, self.hw.p_out_w)

    @property
    def analytic_snr_db(self) -> float:
        return snr_at_attenuation_db(self.oa_db, self.hw, self.noise)


@dataclass(frozen=True)
class TransmissionResult:
    estimate: codec.PerEstimate
    eye: np.ndarray
    sample_rate_hz: float
    signal_pp_v: float
    sigma_measured_v: float
    saturated_packets: int

    @property
    def measured_snr_db(self) -> float:
        if self.sigma_measured_v <= 0 or self.signal_pp_v <= 0:
            return math.inf
        return 20.0 * math.log10(self.signal_pp_v / (2.0 * self.sigma_measured_v))


def packet_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass
class _Tally:
    errored: int = 0
    saturated: int = 0
    n: np.ndarray = field(default_factory=lambda: np.zeros(2))
    s: np.ndarray = field(default_factory=lambda: np.zeros(2))
    ss: np.ndarray = field(default_factory=lambda: np.zeros(2))
    eye: list = field(default_factory=list)

    def merge(self, other: "_Tally") -> None:
        self.errored += other.errored
        self.saturated += other.saturated
        self.n += other.n
        self.s += other.s
        self.ss += other.ss
        self.eye.extend(other.eye)


def _run_batch(scenario: Scenario, start: int, stop: int) -> _Tally:
    cfg = scenario.chain
    spc = cfg.samples_per_chip
    n_samples = 2 * codec.FRAME_BITS * spc
    sigma_det = scenario.noise.sigma_detector_v
    sigma_src = scenario.sigma_source_v
    band = (scenario.flicker_band_hz[0], min(scenario.flicker_band_hz[1], cfg.sample_rate_hz / 2))
    corners = octave_corners(band) if sigma_src > 0 else None

    rows = stop - start
    frames = np.empty((rows, codec.FRAME_BITS), dtype=np.uint8)
    awgn = np.empty((rows, n_samples))
    if corners is not None:
        w = np.empty((rows, corners.size, n_samples))
        y0 = np.empty((rows, corners.size))
    for r, i in enumerate(range(start, stop)):
        rng = packet_rng(scenario.seed, i)
        payload = rng.integers(0, 256, codec.PAYLOAD_BYTES, dtype=np.uint8).tobytes()
        frames[r] = codec.build_packet(payload).bits()
        awgn[r] = rng.standard_normal(n_samples)
        if corners is not None:
            w[r] = rng.standard_normal((corners.size, n_samples))
            y0[r] = rng.standard_normal(corners.size)

    chips = np.empty((rows, 2 * codec.FRAME_BITS), dtype=np.uint8)
    chips[:, 0::2] = 1 - frames
    chips[:, 1::2] = frames
    p_high, p_low = md_levels(scenario.received_power_w, scenario.hw.md)
    optical = render_waveform(chips, p_high, p_low, cfg)
    out = detector_chain(optical, cfg, initial_level_w=0.5 * (p_high + p_low))
    v = out.voltage + sigma_det * awgn
    if corners is not None:
        v += sigma_src * flicker_from_draws(w, y0, corners, cfg.sample_rate_hz)

    if scenario.threshold_mode == "preamble":
        threshold = v[:, : _PREAMBLE_CHIPS * spc].mean(axis=1)
    else:
        threshold = np.full(rows, scenario.fixed_threshold_v)
    decided = codec.digitize(v, threshold, spc, mode=scenario.sampling)

    tally = _Tally(saturated=int(np.count_nonzero(out.saturated)))
    for r in range(rows):
        try:
            res = codec.synchronize_and_extract(decided[r])
        except SyncLossError:
            tally.errored += 1
            continue
        fs = res.frame_start_bit
        got = res.bits[fs : fs + codec.FRAME_BITS] if fs >= 0 else None
        if got is None or got.size != codec.FRAME_BITS or not np.array_equal(got, frames[r]):
            tally.errored += 1

    # decision-point statistics for the measured SNR
    chips_view = v.reshape(rows, -1, spc)
    if scenario.sampling == "mid":
        level = chips_view[..., spc // 2]
    else:
        q = spc // 4
        level = chips_view[..., q : spc - q].mean(axis=-1)
    d = level - threshold[:, None]
    for cls in (0, 1):
        sel = d[chips == cls]
        tally.n[cls] = sel.size
        tally.s[cls] = sel.sum()
        tally.ss[cls] = np.square(sel).sum()

    need = scenario.eye_traces
    trace_len = 4 * spc
    if need > 0 and start * codec.FRAME_BITS // 2 < need:
        traces = v.reshape(-1, trace_len)
        tally.eye = list(traces[: max(0, need - start * (codec.FRAME_BITS // 2))])
    return tally


def _batches(n: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _run_batch_star(args):
    return _run_batch(*args)


def simulate_transmission(scenario: Scenario, workers: int = 1) -> TransmissionResult:
    """Send ``scenario.n_packets`` random-payload packets through the link.

    Per packet: random payload, framing, Manchester encoding, optical
    rendering at the attenuated power, detector chain, detector AWGN plus
    scaled laser flicker noise, comparator, sync search and comparison of
    all frame bits against what was sent.
    """
    jobs = [(scenario, a, b) for a, b in _batches(scenario.n_packets, scenario.batch_size)]
    total = _Tally()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for t in pool.map(_run_batch_star, jobs):
                total.merge(t)
    else:
        for job in jobs:
            total.merge(_run_batch(*job))

    sat_flag = total.saturated > SATURATION_WARN_FRACTION * scenario.n_packets
    est = codec.make_per_estimate(total.errored, scenario.n_packets, saturation_flag=sat_flag, seed=scenario.seed)

    mean = total.s / total.n
    ss = total.ss - total.n * mean**2
    sigma = math.sqrt(max(ss.sum(), 0.0) / max(total.n.sum() - 2, 1))
    eye = np.array(total.eye[: scenario.eye_traces]) if total.eye else np.empty((0, 4 * scenario.chain.samples_per_chip))
    return TransmissionResult(
        estimate=est,
        eye=eye,
        sample_rate_hz=scenario.chain.sample_rate_hz,
        signal_pp_v=float(mean[1] - mean[0]),
        sigma_measured_v=sigma,
        saturated_packets=total.saturated,
    )
