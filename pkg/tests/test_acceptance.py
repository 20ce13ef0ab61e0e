"""The ten acceptance criteria, each at its stated tolerance."""

import math

import numpy as np
import pytest

from mirfso import codec
from mirfso import link_model as lm
from mirfso.channel_model import (
    Atmosphere,
    LinkGeometry,
    aerosol_scattering_db_per_km,
    default_absorption_table,
    max_link_length_m,
)
from mirfso.cli_io.commands import montecarlo_crossover_db
from mirfso.simkit import Scenario, simulate_transmission

HW = lm.LinkHardware()
NOISE = lm.NoiseProfile()
HW_MAX = lm.LinkHardware(p_out_w=0.021)


def test_criterion_01_moa_error_free(acceptance):
    moa = lm.moa_for_per(1.6e-5, HW, NOISE, 72).moa_db
    ok = abs(moa - 48.3) <= 1.0
    assert acceptance(1, ok, f"MOA(1.6e-5) = {moa:.3f} dB, target 48.3 +/- 1")


def test_criterion_02_moa_1e3(acceptance):
    moa = lm.moa_for_per(1e-3, HW, NOISE, 72).moa_db
    ok = abs(moa - 49.5) <= 1.0 and abs(moa - 49.1) <= 1.0
    assert acceptance(2, ok, f"MOA(1e-3) = {moa:.3f} dB, reference 49.5 +/- 1")


def test_criterion_03_slope_law(acceptance):
    diff = lm.moa_for_per(1e-1, HW, NOISE).moa_db - lm.moa_for_per(1e-4, HW, NOISE).moa_db
    ok = abs(diff - 2.0) <= 0.3
    assert acceptance(3, ok, f"MOA(1e-1) - MOA(1e-4) = {diff:.3f} dB, target 2.0 +/- 0.3")


def test_criterion_04_error_free_snr(acceptance):
    snr = lm.snr_db_for_ber(lm.ber_from_per(1.6e-5, 72))
    ok = 13.8 <= snr <= 14.3
    assert acceptance(4, ok, f"SNR_req = {snr:.3f} dB, window [13.8, 14.3]")


@pytest.mark.slow
def test_criterion_05_regime_crossover(acceptance):
    analytic = lm.crossover_moa_db(HW, NOISE)
    # HAR asymptote of the analytic model, far past the crossover
    far = [lm.snr_at_attenuation_db(x, HW, NOISE) for x in (60.0, 70.0)]
    analytic_slope = (far[1] - far[0]) / 10.0

    hw = lm.LinkHardware(md=0.01)
    moa = np.arange(13.0, 42.0, 4.0)
    measured = []
    for k, oa in enumerate(moa):
        sc = Scenario(hw=hw, noise=NOISE, oa_db=float(oa), n_packets=10_000, seed=500 + k, eye_traces=0)
        measured.append(simulate_transmission(sc).measured_snr_db)
    mc_cross, mc_slope = montecarlo_crossover_db(moa, measured, plateau_points=2, har_points=3)

    ok = (
        abs(analytic - 25.4) <= 0.1
        and abs(mc_cross - analytic) <= 3.0
        and abs(analytic_slope + 2.0) <= 0.1
        and abs(mc_slope + 2.0) <= 0.1
    )
    detail = (
        f"analytic crossover {analytic:.3f} dB; MC crossover {mc_cross:.2f} dB; "
        f"HAR slope analytic {analytic_slope:.3f}, MC {mc_slope:.3f} dB/dB"
    )
    assert acceptance(5, ok, detail)


@pytest.mark.slow
def test_criterion_06_md_threshold(acceptance):
    thr = lm.md_threshold_for_error_free(13.0, HW, NOISE, lm.ERROR_FREE_PER, 72)
    analytic_ok = thr.status == "ok" and 0.006 <= thr.md <= 0.013

    def errors(md, seed):
        sc = Scenario(hw=lm.LinkHardware(md=md), noise=NOISE, oa_db=13.0, n_packets=10_000, seed=seed, eye_traces=0)
        return simulate_transmission(sc).estimate.packets_errored

    low = errors(0.006, 61)
    high = errors(0.013, 62)
    # MC brackets the threshold: errors below the band, error-free at its top
    mc_ok = low > 0 and high == 0
    detail = f"analytic MD threshold {100 * thr.md:.3f}%; MC errors {low} at 0.6%, {high} at 1.3% (10^4 packets)"
    assert acceptance(6, analytic_ok and mc_ok, detail)


@pytest.mark.slow
def test_criterion_07_montecarlo_vs_analytic(acceptance):
    awgn = lm.NoiseProfile(sigma_source_v_at_ref=0.0)
    parts = []
    ok = True
    for k, snr in enumerate((8.0, 10.0, 12.0)):
        oa = lm.attenuation_for_snr_db(snr, HW_MAX, awgn)
        sc = Scenario(hw=HW_MAX, noise=awgn, oa_db=oa, n_packets=62_500, seed=700 + k, eye_traces=0)
        est = simulate_transmission(sc).estimate
        p = 1.0 - (1.0 - lm.q_function(10 ** (snr / 20))) ** 72
        se = math.sqrt(p * (1 - p) / est.packets_sent)
        z = (est.per - p) / se
        ok &= abs(z) <= 3.0
        parts.append(f"{snr:g} dB: {est.per:.5f} vs {p:.5f} ({z:+.2f} SE)")
    assert acceptance(7, ok, "; ".join(parts))


def test_criterion_08_visibility_definition(acceptance):
    parts = []
    ok = True
    for v in (1.0, 10.0, 23.0):
        t = 10 ** (-aerosol_scattering_db_per_km(550.0, v) * v / 10)
        ok &= abs(t / 0.02 - 1) <= 1e-3
        parts.append(f"V={v:g} km: {100 * t:.5f}%")
    assert acceptance(8, ok, "; ".join(parts))


def test_criterion_09_table1(acceptance):
    geo = LinkGeometry()
    reference = {4720.0: 8000.0, 3998.6: 7800.0, 1557.7: 4500.0}

    def lengths(table):
        atm = Atmosphere(visibility_km=1.0, absorption_table=table)
        return {wl: max_link_length_m(atm, geo, wl, 48.0).distance_m for wl in reference}

    shipped = lengths(default_absorption_table())
    bare = lengths(())
    within = all(abs(shipped[wl] / reference[wl] - 1) <= 0.25 for wl in reference)
    ordering = all(
        L[4720.0] > L[1557.7] and abs(L[4720.0] - L[3998.6]) / L[4720.0] <= 0.15 for L in (shipped, bare)
    )
    detail = "shipped table: " + ", ".join(f"{wl:g} nm {shipped[wl] / 1000:.2f} km" for wl in reference)
    detail += "; zero absorption: " + ", ".join(f"{bare[wl] / 1000:.2f}" for wl in reference) + " km"
    assert acceptance(9, within and ordering, detail)


def test_criterion_10_codec_properties(acceptance):
    # framing, coding, optics, receiver chain, comparator and sync, without noise
    quiet = lm.NoiseProfile(sigma_detector_v=0.0, sigma_source_v_at_ref=0.0)
    sc = Scenario(hw=HW_MAX, noise=quiet, oa_db=45.0, n_packets=10_000, seed=10, eye_traces=0)
    errored = simulate_transmission(sc).estimate.packets_errored

    rng = np.random.default_rng(10)

    bits = rng.integers(0, 2, 100_000)
    constant_avg = 2 * int(codec.manchester_encode(bits).chips.sum()) == 200_000

    sync_ok = True
    for first in range(256):
        for _ in range(3):
            payload = bytes([first]) + rng.integers(0, 256, 3, dtype=np.uint8).tobytes()
            chips = codec.encode_packet(codec.build_packet(payload)).chips
            for lead in (np.empty(0, np.uint8), np.array([1], np.uint8)):
                res = codec.synchronize_and_extract(np.concatenate([lead, chips]))
                sync_ok &= res.payload == payload and res.frame_start_bit == 0
    ok = errored == 0 and constant_avg and sync_ok
    detail = f"{errored} errored of 10^4 round trips; constant average {constant_avg}; sync unique {sync_ok}"
    assert acceptance(10, ok, detail)
