"""Packet framing, Manchester/OOK line coding, slicing and PER bookkeeping.

Frame layout (9 bytes, MSB first)::

    AA AA AA | A3 59 | p0 p1 p2 p3
    equalize   sync    payload

Manchester polarity follows IEEE 802.3: bit 1 is a low-to-high chip pair,
bit 0 high-to-low.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DecodeError, FramingError, SyncLossError, UsageError

EQUALIZATION = bytes([0xAA, 0xAA, 0xAA])
SYNC_WORD = bytes([0xA3, 0x59])
PAYLOAD_BYTES = 4
FRAME_BYTES = len(EQUALIZATION) + len(SYNC_WORD) + PAYLOAD_BYTES
FRAME_BITS = 8 * FRAME_BYTES
SYNC_OFFSET_BITS = 8 * len(EQUALIZATION)
BAUD_RATE_HZ = 115_200.0
CHIP_RATE_HZ = 2 * BAUD_RATE_HZ

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class Packet:
    equalization: bytes
    sync: bytes
    payload: bytes

    def __post_init__(self):
        if self.equalization != EQUALIZATION or self.sync != SYNC_WORD:
            raise FramingError("packet header does not match the fixed equalization/sync fields")
        if len(self.payload) != PAYLOAD_BYTES:
            raise FramingError(f"payload must be {PAYLOAD_BYTES} bytes, got {len(self.payload)}")

    def to_bytes(self) -> bytes:
        return self.equalization + self.sync + self.payload

    def bits(self) -> np.ndarray:
        return bytes_to_bits(self.to_bytes())


@dataclass(frozen=True)
class ChipStream:
    chips: np.ndarray
    chip_rate_hz: float = CHIP_RATE_HZ

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.uint8)
        if chips.ndim != 1:
            raise UsageError("chip stream must be one-dimensional")
        if chips.size and chips.max() > 1:
            raise UsageError("chips must be 0 or 1")
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return int(self.chips.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChipStream):
            return NotImplemented
        return self.chip_rate_hz == other.chip_rate_hz and np.array_equal(self.chips, other.chips)

    __hash__ = None


@dataclass(frozen=True)
class PerEstimate:
    """Packet error count with a Wilson 95 % score interval."""

    packets_sent: int
    packets_errored: int
    per: float
    ci95_low: float
    ci95_high: float
    saturation_flag: bool = False
    seed: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "packets_sent": self.packets_sent,
            "packets_errored": self.packets_errored,
            "per": self.per,
            "ci95_low": self.ci95_low,
            "ci95_high": self.ci95_high,
            "saturation_flag": self.saturation_flag,
            "seed": self.seed,
        }


def wilson_interval(errored: int, sent: int, z: float = _Z95) -> tuple[float, float]:
    if sent < 1:
        raise UsageError("wilson interval needs at least one trial")
    p = errored / sent
    denom = 1.0 + z * z / sent
    centre = (p + z * z / (2 * sent)) / denom
    half = z * math.sqrt(p * (1 - p) / sent + z * z / (4 * sent * sent)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def make_per_estimate(errored: int, sent: int, *, saturation_flag: bool = False, seed: int | None = None) -> PerEstimate:
    if not 0 <= errored <= sent:
        raise UsageError(f"errored={errored} must lie in [0, sent={sent}]")
    lo, hi = wilson_interval(errored, sent)
    return PerEstimate(sent, errored, errored / sent, lo, hi, saturation_flag, seed)


# ---------------------------------------------------------------------------
# framing and line coding


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits: Sequence[int]) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise FramingError(f"bit count {bits.size} is not a whole number of bytes")
    return np.packbits(bits).tobytes()


def build_packet(payload: bytes) -> Packet:
    payload = bytes(payload)
    if len(payload) != PAYLOAD_BYTES:
        raise FramingError(f"payload must be {PAYLOAD_BYTES} bytes, got {len(payload)}")
    return Packet(EQUALIZATION, SYNC_WORD, payload)


def manchester_encode(bits: Sequence[int], chip_rate_hz: float = CHIP_RATE_HZ) -> ChipStream:
    bits = np.asarray(bits, dtype=np.uint8)
    chips = np.empty(2 * bits.size, dtype=np.uint8)
    chips[0::2] = 1 - bits
    chips[1::2] = bits
    return ChipStream(chips, chip_rate_hz)


def encode_packet(packet: Packet, chip_rate_hz: float = CHIP_RATE_HZ) -> ChipStream:
    return manchester_encode(packet.bits(), chip_rate_hz)


def manchester_decode(chips: ChipStream | np.ndarray) -> np.ndarray:
    """Strict inverse of :func:`manchester_encode`.

    Raises
    ------
    FramingError
        Odd chip count.
    DecodeError
        A ``(0, 0)`` or ``(1, 1)`` pair; ``position`` is the bit index.
    """
    c = _chip_array(chips)
    if c.size % 2:
        raise FramingError(f"odd chip count {c.size}")
    first, second = c[0::2], c[1::2]
    bad = np.flatnonzero(first == second)
    if bad.size:
        raise DecodeError(f"Manchester violation at bit {bad[0]}", int(bad[0]))
    return second.copy()


def _chip_array(chips) -> np.ndarray:
    if isinstance(chips, ChipStream):
        return chips.chips
    return np.asarray(chips, dtype=np.uint8)


def digitize(
    waveform: np.ndarray, threshold_v: float | np.ndarray, samples_per_chip: int, mode: str = "central"
) -> np.ndarray:
    """Comparator: one hard decision per chip.

    ``mode="central"`` compares the mean of the middle half of each chip's
    samples; ``mode="mid"`` uses the single sample at the chip centre.
    Works on the last axis, so a 2-D batch of waveforms is accepted;
    ``threshold_v`` may then be one value per row.

    Returns the chip decisions as ``uint8`` (1 where ``>= threshold``).
    """
    w = np.asarray(waveform, dtype=float)
    if samples_per_chip < 1:
        raise FramingError("samples_per_chip must be >= 1")
    if w.shape[-1] % samples_per_chip:
        raise FramingError(f"waveform length {w.shape[-1]} not divisible by {samples_per_chip} samples per chip")
    chips = w.reshape(*w.shape[:-1], -1, samples_per_chip)
    if mode == "central":
        q = samples_per_chip // 4
        lo, hi = q, samples_per_chip - q
        if hi <= lo:
            lo, hi = 0, samples_per_chip
        level = chips[..., lo:hi].mean(axis=-1)
    elif mode == "mid":
        level = chips[..., samples_per_chip // 2]
    else:
        raise UsageError(f"unknown digitize mode {mode!r}")
    thr = np.asarray(threshold_v, dtype=float)
    if thr.ndim:
        thr = thr[..., None]
    return (level >= thr).astype(np.uint8)


class SyncResult(NamedTuple):
    """Output of :func:`synchronize_and_extract`.

    ``bits`` are the decoded bits for the locked chip phase (the level of
    each pair's second chip), ``frame_start_bit`` indexes the first
    equalization bit in ``bits``.
    """

    payload: bytes
    bit_errors_detectable: bool
    chip_phase: int
    frame_start_bit: int
    bits: np.ndarray


_SYNC_BITS = bytes_to_bits(SYNC_WORD)


def synchronize_and_extract(chips: ChipStream | np.ndarray) -> SyncResult:
    """Lock onto the sync word and return the following payload.

    The chip phase is the one with fewer Manchester violations. Bits are
    read from the second chip of each pair, so an isolated chip error
    surfaces as a violation (``bit_errors_detectable``) but still yields a
    bit decision. The first exact match of the sync pattern wins.

    Raises
    ------
    SyncLossError
        No sync match with a full payload after it.
    """
    c = _chip_array(chips)
    if c.size < 2 * (len(_SYNC_BITS) + 8 * PAYLOAD_BYTES):
        raise SyncLossError("chip stream shorter than sync word plus payload")
    phases = []
    for phase in (0, 1):
        n = (c.size - phase) // 2
        pairs = c[phase : phase + 2 * n].reshape(n, 2)
        violations = pairs[:, 0] == pairs[:, 1]
        phases.append((int(violations.sum()), phase, pairs[:, 1], violations))
    phases.sort(key=lambda t: (t[0], t[1]))

    need = len(_SYNC_BITS) + 8 * PAYLOAD_BYTES
    for _, phase, bits, violations in phases:
        if bits.size < need:
            continue
        windows = np.lib.stride_tricks.sliding_window_view(bits[: bits.size - 8 * PAYLOAD_BYTES], len(_SYNC_BITS))
        hits = np.flatnonzero((windows == _SYNC_BITS).all(axis=1))
        if hits.size == 0:
            continue
        s = int(hits[0])
        start = s + len(_SYNC_BITS)
        payload_bits = bits[start : start + 8 * PAYLOAD_BYTES]
        frame_start = s - SYNC_OFFSET_BITS
        region = violations[max(frame_start, 0) : start + 8 * PAYLOAD_BYTES]
        return SyncResult(
            payload=bits_to_bytes(payload_bits),
            bit_errors_detectable=bool(region.any()),
            chip_phase=phase,
            frame_start_bit=frame_start,
            bits=bits,
        )
    raise SyncLossError("sync word not found at either chip phase")


def per_count(sent_payloads: Sequence[bytes], received: Sequence[bytes | BaseException | None]) -> PerEstimate:
    """Count packets with any payload bit wrong or a failed decode.

    ``received`` entries are decoded payloads, or ``None``/an exception
    instance for packets that could not be decoded.
    """
    if len(sent_payloads) != len(received):
        raise UsageError(f"{len(sent_payloads)} sent vs {len(received)} received")
    if not sent_payloads:
        raise UsageError("no packets to count")
    errored = 0
    for s, r in zip(sent_payloads, received):
        if r is None or isinstance(r, BaseException) or bytes(r) != bytes(s):
            errored += 1
    return make_per_estimate(errored, len(sent_payloads))


# ---------------------------------------------------------------------------
# flat binary replay files: <uint64 little-endian length> <raw bytes>

_LEN = struct.Struct("<Q")


def _write_blob(path: str | Path, blob: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(_LEN.pack(len(blob)))
        fh.write(blob)


def _read_blob(path: str | Path) -> bytes:
    data = Path(path).read_bytes()
    if len(data) < _LEN.size:
        raise FramingError(f"{path}: missing length header")
    (n,) = _LEN.unpack_from(data)
    body = data[_LEN.size :]
    if len(body) != n:
        raise FramingError(f"{path}: header says {n} bytes, file has {len(body)}")
    return body


def write_chips(stream: ChipStream, path: str | Path) -> None:
    """One byte (0x00/0x01) per chip after the length header."""
    _write_blob(path, stream.chips.tobytes())


def read_chips(path: str | Path, chip_rate_hz: float = CHIP_RATE_HZ) -> ChipStream:
    body = np.frombuffer(_read_blob(path), dtype=np.uint8)
    if body.size and body.max() > 1:
        raise FramingError(f"{path}: chip bytes must be 0 or 1")
    return ChipStream(body.copy(), chip_rate_hz)


def write_payloads(payloads: Sequence[bytes], path: str | Path) -> None:
    """Concatenated 4-byte payloads after the length header (in bytes)."""
    for p in payloads:
        if len(p) != PAYLOAD_BYTES:
            raise FramingError(f"payload must be {PAYLOAD_BYTES} bytes, got {len(p)}")
    _write_blob(path, b"".join(bytes(p) for p in payloads))


def read_payloads(path: str | Path) -> list[bytes]:
    body = _read_blob(path)
    if len(body) % PAYLOAD_BYTES:
        raise FramingError(f"{path}: {len(body)} bytes is not a whole number of payloads")
    return [body[i : i + PAYLOAD_BYTES] for i in range(0, len(body), PAYLOAD_BYTES)]
