"""Physical-layer Monte Carlo: waveforms, receiver chain, noise and PER."""

from .detector import ChainOutput, DetectorChainConfig, detector_chain, md_levels, render_waveform
from .eye import eye_export, eye_time_axis_us, fold_traces
from .noise import NoiseSynthesis, flicker_unit, gen_awgn, gen_flicker, octave_corners
from .transmission import Scenario, TransmissionResult, packet_rng, simulate_transmission

__all__ = [
    "ChainOutput",
    "DetectorChainConfig",
    "NoiseSynthesis",
    "Scenario",
    "TransmissionResult",
    "detector_chain",
    "eye_export",
    "eye_time_axis_us",
    "flicker_unit",
    "fold_traces",
    "gen_awgn",
    "gen_flicker",
    "md_levels",
    "octave_corners",
    "packet_rng",
    "render_waveform",
    "simulate_transmission",
]
