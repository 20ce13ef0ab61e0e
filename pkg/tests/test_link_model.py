import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirfso import link_model as lm
from mirfso.errors import DomainError

HW = lm.LinkHardware()
NOISE = lm.NoiseProfile()

# Frozen mpmath evaluations.
Q_3162 = 7.83448e-4
Q_5012 = 2.69336e-7
PER_10DB = 0.0548168
PER_6DB = 0.812854
D_DB = 110.575565
MOA = {1.6e-5: (48.25585, 14.06387), 1e-3: (49.06476, 12.44604), 1e-1: (50.55210, 9.47137), 1e-4: (48.57921, 13.41714)}


def test_q_function_values():
    assert lm.q_function(0.0) == 0.5
    assert lm.q_function(3.162) == pytest.approx(Q_3162, rel=1e-5)
    assert lm.q_function(5.012) == pytest.approx(Q_5012, rel=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.floats(-8.0, 30.0))
def test_q_function_against_mpmath(x):
    ref = mp.mpf(1) / 2 * mp.erfc(mp.mpf(x) / mp.sqrt(2))
    assert lm.q_function(x) == pytest.approx(float(ref), rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-15, 0.999))
def test_q_inverse_round_trip(p):
    assert lm.q_function(lm.q_inverse(p)) == pytest.approx(p, rel=1e-8)


def test_snr_db():
    assert lm.snr_db(0.1, 0.0023) == pytest.approx(26.74484, abs=1e-4)
    assert lm.snr_db(2.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert lm.snr_db(0.2, 0.0023) - lm.snr_db(0.1, 0.0023) == pytest.approx(6.0206, abs=1e-4)
    with pytest.raises(DomainError):
        lm.snr_db(0.0, 1.0)


def test_ber_from_snr():
    assert lm.ber_from_snr_db(-math.inf) == 0.5
    assert lm.ber_from_snr_db(10.0) == pytest.approx(7.82701e-4, rel=1e-5)
    assert lm.ber_from_snr_db(13.0) == pytest.approx(3.96925e-6, rel=1e-5)


def test_per_ber_conversions():
    assert lm.per_from_ber(0.0) == 0.0
    assert lm.per_from_ber(1.0) == 1.0
    assert lm.per_from_ber(7.86e-4, 72) == pytest.approx(0.0550415, rel=1e-5)
    assert lm.ber_from_per(0.0) == 0.0
    assert lm.ber_from_per(1.6e-5, 72) == pytest.approx(2.22224e-7, rel=1e-5)
    assert lm.ber_from_per(1e-3, 72) == pytest.approx(1.38957e-5, rel=1e-5)


def test_per_from_snr_values():
    assert lm.per_from_snr_db(10.0) == pytest.approx(PER_10DB, rel=1e-5)
    assert lm.per_from_snr_db(6.0) == pytest.approx(PER_6DB, rel=1e-5)
    assert lm.per_from_snr_db(9.0) == pytest.approx(0.159677, rel=1e-5)
    assert lm.per_from_snr_db(14.07) == pytest.approx(1.5704e-5, rel=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-12, 0.9), st.integers(1, 500))
def test_per_ber_inverse(per, n):
    assert lm.per_from_ber(lm.ber_from_per(per, n), n) == pytest.approx(per, rel=1e-9)


def test_optical_attenuation():
    hw = lm.LinkHardware(p_out_w=0.021)
    assert lm.optical_attenuation_db(0.1, hw) == pytest.approx(41.91536, abs=1e-4)
    assert lm.incident_power_w(0.1, hw) == pytest.approx(1.35109e-6, rel=1e-5)
    full = hw.volts_per_watt * hw.md * hw.p_out_w
    with pytest.raises(DomainError):
        lm.optical_attenuation_db(full, hw)
    unclipped = lm.LinkHardware(p_out_w=0.021, saturation_w=1.0)
    assert lm.optical_attenuation_db(full, unclipped) == pytest.approx(0.0, abs=1e-12)
    half = lm.LinkHardware(p_out_w=0.021, md=0.5)
    assert lm.optical_attenuation_db(0.1, hw) - lm.optical_attenuation_db(0.1, half) == pytest.approx(3.0103, abs=1e-4)


def test_zero_attenuation_snr():
    assert lm.zero_attenuation_snr_db(HW, 0.0023) == pytest.approx(D_DB, abs=1e-5)


@pytest.mark.parametrize("target", sorted(MOA))
def test_moa_for_per(target):
    moa, snr_req = MOA[target]
    r = lm.moa_for_per(target, HW, NOISE)
    assert r.reachable
    assert r.moa_db == pytest.approx(moa, abs=1e-4)
    assert r.snr_required_db == pytest.approx(snr_req, abs=1e-4)


def test_moa_limits_and_monotone():
    near_half = lm.moa_for_per(1 - 2.0**-72 * 0.999 - 1e-12, HW, NOISE)
    assert near_half.moa_db > 54.0
    targets = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
    moas = [lm.moa_for_per(t, HW, NOISE).moa_db for t in targets]
    assert all(a < b for a, b in zip(moas, moas[1:]))
    weak = lm.LinkHardware(p_out_w=1e-9, p_max_w=1e-9)
    assert not lm.moa_for_per(1.6e-5, weak, NOISE).reachable
    with pytest.raises(DomainError):
        lm.moa_for_per(1.0, HW, NOISE)


def test_crossover_and_regimes():
    assert lm.crossover_moa_db(HW, NOISE) == pytest.approx(25.40332, abs=1e-4)
    x = lm.crossover_moa_db(HW, NOISE)
    rep = lm.snr_piecewise_db(x, HW, NOISE)
    assert rep.lar_plateau_db - rep.snr_db == pytest.approx(10 * math.log10(2), abs=1e-9)
    assert lm.snr_piecewise_db(13.0, HW, NOISE).regime is lm.Regime.LAR
    assert lm.snr_piecewise_db(40.0, HW, NOISE).regime is lm.Regime.HAR
    delta = lm.snr_piecewise_db(50.0, HW, NOISE).snr_db - lm.snr_piecewise_db(48.0, HW, NOISE).snr_db
    assert delta == pytest.approx(-4.0, abs=0.1)


def test_crossover_independent_of_md():
    for md in (1.0, 0.5, 0.01):
        assert lm.crossover_moa_db(lm.LinkHardware(md=md), NOISE) == pytest.approx(25.40332, abs=1e-4)


def test_halving_md_lowers_plateau_6db():
    a = lm.snr_piecewise_db(13.0, lm.LinkHardware(md=1.0), NOISE).lar_plateau_db
    b = lm.snr_piecewise_db(13.0, lm.LinkHardware(md=0.5), NOISE).lar_plateau_db
    assert a - b == pytest.approx(6.0206, abs=1e-4)


def test_attenuation_for_snr_inverts():
    for target in (8.0, 10.0, 12.0):
        oa = lm.attenuation_for_snr_db(target, HW, NOISE)
        assert lm.snr_at_attenuation_db(oa, HW, NOISE) == pytest.approx(target, abs=1e-9)
    with pytest.raises(DomainError):
        lm.attenuation_for_snr_db(200.0, HW, NOISE)


def test_md_threshold():
    r = lm.md_threshold_for_error_free(13.0, HW, NOISE)
    assert r.status == "ok"
    assert r.md == pytest.approx(0.008455, abs=2e-6)
    assert 0.006 <= r.md <= 0.013
    doubled = lm.NoiseProfile(sigma_detector_v=0.0046, sigma_source_v_at_ref=0.080)
    assert lm.md_threshold_for_error_free(13.0, HW, doubled).md == pytest.approx(2 * r.md, rel=1e-6)
    assert lm.md_threshold_for_error_free(13.0, HW, NOISE, per_target=0.5).status == "ok"
    assert lm.md_threshold_for_error_free(13.0, HW, NOISE, per_target=0.999, n_bits=8).status == "trivial"
    assert lm.md_threshold_for_error_free(90.0, HW, NOISE).status == "unreachable"


def test_hardware_validation():
    with pytest.raises(DomainError):
        lm.LinkHardware(md=0.0)
    with pytest.raises(DomainError):
        lm.LinkHardware(p_out_w=0.03)
    assert lm.LinkHardware(p_out_w=0.03, allow_overdrive=True).p_out_w == 0.03
    with pytest.raises(DomainError):
        lm.NoiseProfile(sigma_detector_v=-1.0)
