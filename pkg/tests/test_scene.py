"""Scene geometry, echo synthesis, and the receive-chain response.

The echo oracle is cross-correlation: the lag of the correlation peak
between the transmit record and its echo must equal the two-way delay to
sub-sample precision.
"""
import numpy as np
import pytest
from scipy.constants import c as C

from jrcss.core import RealWaveform, Timebase, lowpass
from jrcss.errors import SignalError
from jrcss.scene import (
    RfResponseSpec,
    Scatterer,
    Scene,
    Turntable,
    apply_rf_response,
    echo,
    scatterer_ranges,
)

RNG = np.random.default_rng(404)


def bandlimited_noise(tb: Timebase, cutoff_hz: float, seed: int = 0) -> RealWaveform:
    x = np.random.default_rng(seed).standard_normal(tb.n_samples)
    return lowpass(RealWaveform(tb, x), cutoff_hz)


def xcorr_delay_s(tx: RealWaveform, rx: RealWaveform) -> float:
    """Circular cross-correlation peak lag with parabolic refinement."""
    n = tx.timebase.n_samples
    corr = np.fft.irfft(np.fft.rfft(rx.samples) * np.conj(np.fft.rfft(tx.samples)), n=n)
    i = int(np.argmax(corr))
    a, b, cc = corr[(i - 1) % n], corr[i], corr[(i + 1) % n]
    denom = a - 2 * b + cc
    delta = 0.0 if denom == 0 else 0.5 * (a - cc) / denom
    return ((i + delta) % n) * tx.timebase.dt_s


# ---------------------------------------------------------------------------
# geometry

def test_turntable_angle_law():
    tt = Turntable(center_range_m=1.47, rotation_period_s=10.0, phase0_rad=0.3)
    assert tt.angle_rad(0.0) == pytest.approx(0.3)
    assert tt.angle_rad(2.5) == pytest.approx(0.3 - np.pi / 2)
    frozen = Turntable(center_range_m=1.0, rotation_period_s=0.0, phase0_rad=-0.7)
    np.testing.assert_allclose(frozen.angle_rad([0.0, 5.0, 100.0]), -0.7)


def test_scatterer_ranges_hand_geometry():
    # scatterer at body (x, y); world position at angle theta is
    # (rc + x cos - y sin, x sin + y cos) with the antenna at the origin
    scene = Scene(
        scatterers=(Scatterer(0.1, 0.0), Scatterer(0.0, 0.2)),
        turntable=Turntable(center_range_m=2.0, rotation_period_s=8.0, phase0_rad=0.0),
    )
    r0 = scatterer_ranges(scene, 0.0)
    np.testing.assert_allclose(r0, [2.1, np.hypot(2.0, 0.2)], rtol=1e-12)
    # quarter turn clockwise: theta = -pi/2
    r1 = scatterer_ranges(scene, 2.0)
    np.testing.assert_allclose(r1, [np.hypot(2.0, -0.1), np.hypot(2.2, 0.0)], rtol=1e-12)
    # vectorized slow time
    rr = scatterer_ranges(scene, np.array([0.0, 2.0]))
    assert rr.shape == (2, 2)
    np.testing.assert_allclose(rr[:, 0], r0)


def test_scene_validation():
    with pytest.raises(SignalError, match="bad-scene"):
        Scene(scatterers=())
    with pytest.raises(SignalError, match="bad-scene"):
        Scatterer(0.0, 0.0, reflectivity=0.0)
    with pytest.raises(SignalError, match="bad-scene"):
        Turntable(center_range_m=-1.0)
    with pytest.raises(SignalError, match="bad-scene"):
        Scene(scatterers=(Scatterer(0, 0),), propagation_loss="r2")


# ---------------------------------------------------------------------------
# echoes

def test_echo_delay_matches_xcorr_oracle():
    fs = 1e9
    tb = Timebase(fs, 1 << 14)
    tx = bandlimited_noise(tb, 2e8, seed=1)
    print("range(m)  delay error (samples)")
    for trial in range(8):
        r = float(RNG.uniform(0.5, 2.0))
        scene = Scene((Scatterer(0.0, 0.0),), Turntable(r, 0.0))
        rx = echo(tx, scene)
        got = xcorr_delay_s(tx, rx)
        err_samp = (got - 2 * r / C) * fs
        print(f"  {r:6.3f}   {err_samp:+.4f}")
        assert abs(err_samp) < 0.1, f"trial {trial}: {err_samp} samples off"


def test_echo_superposition_and_reflectivity():
    tb = Timebase(1e9, 4096)
    tx = bandlimited_noise(tb, 2e8, seed=2)
    tt = Turntable(1.2, 0.0)
    s1, s2 = Scatterer(0.05, 0.0, reflectivity=1.0), Scatterer(-0.07, 0.02, reflectivity=0.4)
    both = echo(tx, Scene((s1, s2), tt))
    sum_of_parts = echo(tx, Scene((s1,), tt)).samples + echo(tx, Scene((s2,), tt)).samples
    np.testing.assert_allclose(both.samples, sum_of_parts, atol=1e-10)
    # reflectivity is a pure amplitude factor
    weak = echo(tx, Scene((Scatterer(0.05, 0.0, reflectivity=0.25),), tt))
    strong = echo(tx, Scene((Scatterer(0.05, 0.0, reflectivity=1.0),), tt))
    np.testing.assert_allclose(weak.samples, 0.25 * strong.samples, atol=1e-12)


def test_echo_r4_propagation_loss():
    tb = Timebase(1e9, 4096)
    tx = bandlimited_noise(tb, 2e8, seed=3)
    near = echo(tx, Scene((Scatterer(0, 0),), Turntable(0.5, 0.0), propagation_loss="r4"))
    far = echo(tx, Scene((Scatterer(0, 0),), Turntable(1.0, 0.0), propagation_loss="r4"))
    ratio = np.max(np.abs(near.samples)) / np.max(np.abs(far.samples))
    print(f"r4 amplitude ratio 0.5m/1.0m: {ratio:.2f} (expect 16)")
    assert abs(ratio - 16.0) < 0.5


def test_echo_out_of_window():
    tb = Timebase(1e9, 1024)  # ~1 us record; 200 m means 1.3 us delay
    tx = bandlimited_noise(tb, 2e8)
    with pytest.raises(SignalError, match="target-out-of-window"):
        echo(tx, Scene((Scatterer(0, 0),), Turntable(200.0, 0.0)))


# ---------------------------------------------------------------------------
# receive chain

def tone_amp_db(w: RealWaveform, f: float) -> float:
    spec = np.fft.rfft(w.samples)
    freqs = np.fft.rfftfreq(w.timebase.n_samples, w.timebase.dt_s)
    return 20 * np.log10(np.abs(spec[np.argmin(np.abs(freqs - f))]))


def test_rf_response_tilt_and_rejection():
    fs = 40e9
    tb = Timebase(fs, 40000)  # 1 MHz bins
    t = tb.t()
    f_lo, f_mid, f_out = 8e9, 12e9, 2e9
    x = sum(np.cos(2 * np.pi * f * t) for f in (f_lo, f_mid, f_out))
    spec = RfResponseSpec(passband_hz=(8e9, 14e9), out_of_band_rejection_db=60.0,
                          tilt_db_per_ghz=-1.5)
    out = apply_rf_response(RealWaveform(tb, x), spec)
    in_w = RealWaveform(tb, x)
    # tilt is referenced to the low edge: 0 dB at 8 GHz, -6 dB at 12 GHz
    d_lo = tone_amp_db(out, f_lo) - tone_amp_db(in_w, f_lo)
    d_mid = tone_amp_db(out, f_mid) - tone_amp_db(in_w, f_mid)
    d_out = tone_amp_db(out, f_out) - tone_amp_db(in_w, f_out)
    print(f"gain at 8/12/2 GHz: {d_lo:+.2f} / {d_mid:+.2f} / {d_out:+.2f} dB")
    assert abs(d_lo - 0.0) < 0.02
    # the rejection floor adds ~0.009 dB on top of the tilt gain here
    assert abs(d_mid - (-6.0)) < 0.02
    assert d_out < -55.0


def test_rf_response_noise_calibration_and_determinism():
    fs = 40e9
    tb = Timebase(fs, 1 << 16)
    t = tb.t()
    x = np.cos(2 * np.pi * 10e9 * t)
    spec = RfResponseSpec(noise_snr_db=20.0)
    a = apply_rf_response(RealWaveform(tb, x), spec, rng_seed=7)
    b = apply_rf_response(RealWaveform(tb, x), spec, rng_seed=7)
    np.testing.assert_array_equal(a.samples, b.samples)
    c2 = apply_rf_response(RealWaveform(tb, x), spec, rng_seed=8)
    assert not np.array_equal(a.samples, c2.samples)
    # measured in-band SNR should sit near the requested 20 dB
    clean = apply_rf_response(RealWaveform(tb, x), RfResponseSpec())
    noise = a.samples - clean.samples
    freqs = np.fft.rfftfreq(tb.n_samples, tb.dt_s)
    band = (freqs >= 5.85e9) & (freqs <= 14.5e9)
    p_sig = np.sum(np.abs(np.fft.rfft(clean.samples))[band] ** 2)
    p_noise = np.sum(np.abs(np.fft.rfft(noise))[band] ** 2)
    snr_db = 10 * np.log10(p_sig / p_noise)
    print(f"requested 20 dB in-band SNR, measured {snr_db:.2f} dB")
    assert abs(snr_db - 20.0) < 1.0


def test_rf_response_validation():
    with pytest.raises(SignalError, match="bad-rf-spec"):
        RfResponseSpec(passband_hz=(5e9, 4e9))
    with pytest.raises(SignalError, match="bad-rf-spec"):
        RfResponseSpec(out_of_band_rejection_db=-3.0)
    with pytest.raises(SignalError, match="empty-record"):
        apply_rf_response(RealWaveform(Timebase(1e9, 0), np.zeros(0)), RfResponseSpec())
