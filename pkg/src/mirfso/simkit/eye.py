"""Eye-diagram export."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from ..errors import UsageError


def eye_time_axis_us(n_samples: int, sample_rate_hz: float) -> np.ndarray:
    return np.arange(n_samples) / sample_rate_hz * 1e6


def eye_export(eye_matrix: np.ndarray, sample_rate_hz: float, path: str | Path | None = None) -> str:
    """Render folded traces as CSV: a time header (us), then one row per trace.

    Returns the CSV text and also writes it to ``path`` when given.
    """
    m = np.asarray(eye_matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise UsageError("eye matrix must be a non-empty 2-D array")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"t_us={t:.6f}" for t in eye_time_axis_us(m.shape[1], sample_rate_hz)])
    for row in m:
        writer.writerow([repr(float(x)) for x in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def fold_traces(waveform: np.ndarray, samples_per_bit: int, bits_per_trace: int = 2) -> np.ndarray:
    """Cut a bit-aligned waveform into consecutive ``bits_per_trace`` windows."""
    w = np.asarray(waveform, dtype=float).ravel()
    span = samples_per_bit * bits_per_trace
    n = w.size // span
    return w[: n * span].reshape(n, span)
