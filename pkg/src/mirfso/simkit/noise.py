"""Seedable noise sources: white Gaussian detector noise and 1/f laser noise.

The flicker generator sums first-order (AR(1)) low-pass processes with
octave-spaced corner frequencies and equal variances; their Lorentzian
spectra add up to a 1/f power spectrum between the lowest and highest
corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ..errors import DomainError

DEFAULT_FLICKER_BAND_HZ = (10.0, 2.5e6)


@dataclass(frozen=True)
class NoiseSynthesis:
    sigma_detector_v: float
    sigma_source_v: float
    flicker_band_hz: tuple[float, float] = DEFAULT_FLICKER_BAND_HZ
    seed: int = 0

    def __post_init__(self):
        if self.sigma_detector_v < 0 or self.sigma_source_v < 0:
            raise DomainError("noise amplitudes must be >= 0")


def gen_awgn(sigma_v: float, n: int, seed=None) -> np.ndarray:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if sigma_v < 0:
        raise DomainError(f"sigma_v must be >= 0, got {sigma_v}")
    rng = np.random.default_rng(seed)
    return sigma_v * rng.standard_normal(n)


def octave_corners(band: tuple[float, float]) -> np.ndarray:
    f_lo, f_hi = band
    n = int(np.floor(np.log2(f_hi / f_lo))) + 1
    return f_lo * 2.0 ** np.arange(n)


def _check_band(band: tuple[float, float], sample_rate: float) -> None:
    f_lo, f_hi = band
    if not 0 < f_lo < f_hi <= sample_rate / 2:
        raise DomainError(f"flicker band {band} must satisfy 0 < f_lo < f_hi <= Nyquist ({sample_rate / 2:g} Hz)")


def flicker_from_draws(w: np.ndarray, y0: np.ndarray, corners: np.ndarray, sample_rate: float) -> np.ndarray:
    """Filter white draws into unit-variance 1/f noise.

    ``w`` has shape ``(rows, k, n)`` and ``y0`` ``(rows, k)``, one slice per
    octave source; ``y0`` seeds each AR(1) source from its stationary
    distribution so short records need no warm-up.
    """
    k = corners.size
    a = np.exp(-2.0 * np.pi * corners / sample_rate)
    gain = np.sqrt(1.0 - a * a)
    out = np.zeros((w.shape[0], w.shape[-1]))
    for j in range(k):
        # y[i] = a y[i-1] + sqrt(1-a^2) w[i], with y[-1] ~ N(0, 1)
        y, _ = lfilter([gain[j]], [1.0, -a[j]], w[:, j, :], axis=-1, zi=(a[j] * y0[:, j])[:, None])
        out += y
    return out / np.sqrt(k)


def flicker_unit(rng: np.random.Generator, band: tuple[float, float], n: int, sample_rate: float) -> np.ndarray:
    """Stationary 1/f noise with unit expected variance."""
    corners = octave_corners(band)
    w = rng.standard_normal((1, corners.size, n))
    y0 = rng.standard_normal((1, corners.size))
    return flicker_from_draws(w, y0, corners, sample_rate)[0]


def gen_flicker(
    sigma_v: float, band: tuple[float, float], n: int, sample_rate: float, seed=None
) -> np.ndarray:
    """1/f noise rescaled so the sample standard deviation equals ``sigma_v``."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if sigma_v < 0:
        raise DomainError(f"sigma_v must be >= 0, got {sigma_v}")
    _check_band(band, sample_rate)
    x = flicker_unit(np.random.default_rng(seed), band, n, sample_rate)
    x -= x.mean()
    return sigma_v * x / x.std()
