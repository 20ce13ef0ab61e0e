import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirfso import codec
from mirfso.errors import DecodeError, FramingError, SyncLossError, UsageError


def test_build_packet():
    p = codec.build_packet(bytes(4))
    assert p.to_bytes() == bytes.fromhex("AAAAAAA35900000000")
    assert codec.build_packet(bytes.fromhex("DEADBEEF")).to_bytes()[-4:] == bytes.fromhex("DEADBEEF")
    assert p.bits().size == codec.FRAME_BITS == 72
    with pytest.raises(FramingError):
        codec.build_packet(bytes(5))


def test_manchester_encode_convention():
    assert codec.manchester_encode([1]).chips.tolist() == [0, 1]
    assert codec.manchester_encode([1, 0]).chips.tolist() == [0, 1, 1, 0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_constant_average_and_round_trip(bits):
    chips = codec.manchester_encode(bits)
    assert chips.chips.sum() * 2 == chips.chips.size
    assert codec.manchester_decode(chips).tolist() == bits


def test_manchester_decode_errors():
    assert codec.manchester_decode(np.array([0, 1, 1, 0])).tolist() == [1, 0]
    with pytest.raises(DecodeError) as exc:
        codec.manchester_decode(np.array([1, 1, 0, 1]))
    assert exc.value.position == 0
    with pytest.raises(DecodeError) as exc:
        codec.manchester_decode(np.array([0, 1, 0, 0]))
    assert exc.value.position == 1
    with pytest.raises(FramingError):
        codec.manchester_decode(np.array([0, 1, 0]))


def test_round_trip_random_bit_strings():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        bits = rng.integers(0, 2, rng.integers(1, 80))
        assert np.array_equal(codec.manchester_decode(codec.manchester_encode(bits)), bits)


def test_digitize():
    spc = 16
    assert codec.digitize(np.ones(4 * spc), 0.0, spc).tolist() == [1, 1, 1, 1]
    chips = codec.encode_packet(codec.build_packet(b"\x01\x02\x03\x04")).chips
    wave = np.repeat(chips.astype(float) * 2 - 1, spc)
    for mode in ("central", "mid"):
        assert np.array_equal(codec.digitize(wave, 0.0, spc, mode=mode), chips)
    assert not codec.digitize(wave, 5.0, spc).any()
    with pytest.raises(FramingError):
        codec.digitize(np.ones(17), 0.0, spc)
    with pytest.raises(UsageError):
        codec.digitize(np.ones(16), 0.0, spc, mode="peak")


def test_digitize_row_thresholds():
    wave = np.array([[1.0] * 4, [1.0] * 4])
    out = codec.digitize(wave, np.array([0.0, 2.0]), 2)
    assert out.tolist() == [[1, 1], [0, 0]]


def test_sync_round_trip_exhaustive_first_byte():
    rng = np.random.default_rng(7)
    for first in range(256):
        for _ in range(3):
            payload = bytes([first]) + rng.integers(0, 256, 3, dtype=np.uint8).tobytes()
            chips = codec.encode_packet(codec.build_packet(payload))
            res = codec.synchronize_and_extract(chips)
            assert res.payload == payload
            assert not res.bit_errors_detectable
            assert res.frame_start_bit == 0


def test_sync_word_never_matches_inside_header():
    header = codec.bytes_to_bits(codec.EQUALIZATION + codec.SYNC_WORD)
    sync = codec.bytes_to_bits(codec.SYNC_WORD)
    hits = [s for s in range(header.size - sync.size + 1) if np.array_equal(header[s : s + sync.size], sync)]
    assert hits == [codec.SYNC_OFFSET_BITS]


@pytest.mark.parametrize("shift", [1, 3, 5, 7])
def test_sync_locks_with_odd_chip_offset(shift):
    payload = b"\xde\xad\xbe\xef"
    chips = codec.encode_packet(codec.build_packet(payload)).chips
    rng = np.random.default_rng(shift)
    # lead-in: alternating idle chips, so it carries no sync pattern
    lead = np.resize(np.array([1, 0], dtype=np.uint8), shift)
    stream = np.concatenate([lead, chips, rng.integers(0, 2, 3, dtype=np.uint8)])
    res = codec.synchronize_and_extract(stream)
    assert res.payload == payload
    assert res.chip_phase == shift % 2


def test_sync_loss_on_flipped_sync_bits():
    chips = codec.encode_packet(codec.build_packet(bytes(4))).chips.copy()
    for b in (codec.SYNC_OFFSET_BITS, codec.SYNC_OFFSET_BITS + 9):
        chips[2 * b : 2 * b + 2] ^= 1  # valid Manchester pair, wrong bit
    with pytest.raises(SyncLossError):
        codec.synchronize_and_extract(chips)


def test_single_chip_error_is_detectable():
    chips = codec.encode_packet(codec.build_packet(b"\x00\xff\x00\xff")).chips.copy()
    chips[2 * 50] ^= 1  # first chip of a payload bit
    res = codec.synchronize_and_extract(chips)
    assert res.bit_errors_detectable
    assert res.payload == b"\x00\xff\x00\xff"


def test_per_count():
    sent = [bytes([i % 256, 0, 0, 0]) for i in range(62_500)]
    assert codec.per_count(sent, list(sent)).per == 0.0
    recv = list(sent)
    recv[10] = b"\xff\xff\xff\xff"
    est = codec.per_count(sent, recv)
    assert est.packets_errored == 1
    assert est.per == pytest.approx(1.6e-5)
    assert est.ci95_low < est.per < est.ci95_high
    fails = [None] * 10
    fails[3] = SyncLossError("x")
    assert codec.per_count(sent[:10], fails).per == 1.0
    with pytest.raises(UsageError):
        codec.per_count(sent[:2], sent[:3])


def test_wilson_interval_known_value():
    # 10/100 at z=1.96: textbook values
    lo, hi = codec.wilson_interval(10, 100)
    assert lo == pytest.approx(0.05523, abs=1e-4)
    assert hi == pytest.approx(0.17437, abs=1e-4)


def test_binary_replay_files(tmp_path):
    stream = codec.encode_packet(codec.build_packet(b"abcd"))
    codec.write_chips(stream, tmp_path / "c.bin")
    assert codec.read_chips(tmp_path / "c.bin") == stream
    payloads = [b"abcd", b"\x00\x01\x02\x03"]
    codec.write_payloads(payloads, tmp_path / "p.bin")
    assert codec.read_payloads(tmp_path / "p.bin") == payloads
