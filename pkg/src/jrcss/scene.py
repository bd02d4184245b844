"""Radar scene geometry and the RF channel between antennas.

The scene is a set of point scatterers on a turntable a fixed distance from
a monostatic antenna.  Echoes are built with exact fractional-sample delays
(frequency-domain phase ramps); the delay is circular, which corresponds to
steady-state operation with a periodic transmit waveform.  The RF front end
(amplifier + mixer + antennas) is a band mask with a gain tilt and an
optional calibrated-SNR noise injection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.constants import c as SPEED_OF_LIGHT

from .core import RealWaveform
from .errors import SignalError


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer in the turntable frame (x toward the antenna at
    rotation angle zero)."""

    x_m: float
    y_m: float
    reflectivity: float = 1.0

    def __post_init__(self):
        if self.reflectivity <= 0:
            raise SignalError("bad-scene", "reflectivity must be positive")


@dataclass(frozen=True)
class Turntable:
    """Rotating mount: clockwise rotation, one turn per rotation_period_s.

    rotation_period_s = 0 keeps the scene frozen at phase0_rad.
    """

    center_range_m: float = 1.47
    rotation_period_s: float = 24.56
    phase0_rad: float = 0.0

    def __post_init__(self):
        if self.center_range_m <= 0:
            raise SignalError("bad-scene", "center_range_m must be positive")
        if self.rotation_period_s < 0:
            raise SignalError("bad-scene", "rotation_period_s must be >= 0")

    def angle_rad(self, slow_time_s):
        if self.rotation_period_s == 0:
            return np.broadcast_to(self.phase0_rad, np.shape(slow_time_s)).astype(float)
        return self.phase0_rad - 2.0 * np.pi * np.asarray(slow_time_s, dtype=float) / self.rotation_period_s


@dataclass(frozen=True)
class Scene:
    scatterers: tuple
    turntable: Turntable = Turntable()
    propagation_loss: str = "none"  # "none" or "r4" (two-way point target)

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if not self.scatterers:
            raise SignalError("bad-scene", "scene needs at least one scatterer")
        if self.propagation_loss not in ("none", "r4"):
            raise SignalError("bad-scene", "propagation_loss must be 'none' or 'r4'")


def scatterer_ranges(scene: Scene, slow_time_s) -> np.ndarray:
    """Antenna-to-scatterer ranges at the given slow time(s).

    Returns shape (n_scatterers,) for a scalar time, else
    (n_scatterers, n_times).
    """
    theta = scene.turntable.angle_rad(slow_time_s)
    rc = scene.turntable.center_range_m
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    ranges = []
    for s in scene.scatterers:
        xw = rc + s.x_m * cos_t - s.y_m * sin_t
        yw = s.x_m * sin_t + s.y_m * cos_t
        ranges.append(np.hypot(xw, yw))
    return np.array(ranges)


def echo(tx: RealWaveform, scene: Scene, slow_time_s: float = 0.0) -> RealWaveform:
    """Monostatic echo of the transmit record at one slow-time instant.

    Each scatterer contributes a two-way-delayed, reflectivity-weighted copy
    of the transmit waveform; delays are applied as exact phase ramps in the
    frequency domain (stop-and-hop: geometry is frozen within the record).
    """
    ranges = scatterer_ranges(scene, float(slow_time_s))
    delays = 2.0 * ranges / SPEED_OF_LIGHT
    if np.any(delays >= tx.timebase.duration_s):
        raise SignalError(
            "target-out-of-window",
            "two-way delay exceeds the transmit record duration",
        )
    n = tx.timebase.n_samples
    freqs = sfft.rfftfreq(n, d=tx.timebase.dt_s)
    spec = sfft.rfft(tx.samples)
    accum = np.zeros_like(spec)
    for s, r, tau in zip(scene.scatterers, ranges, delays):
        gain = s.reflectivity * (r**-4 if scene.propagation_loss == "r4" else 1.0)
        accum += gain * np.exp(-2j * np.pi * freqs * tau)
    return RealWaveform(tx.timebase, sfft.irfft(spec * accum, n=n))


@dataclass(frozen=True)
class RfResponseSpec:
    """Receive-chain frequency response and noise.

    passband_hz             : (low, high) edges of the usable band
    out_of_band_rejection_db: attenuation outside the band
    tilt_db_per_ghz         : gain slope across the band, referenced to the
                              low edge (negative = rolls off toward high f)
    noise_snr_db            : if set, white Gaussian noise is added so the
                              in-band SNR equals this value
    """

    passband_hz: tuple[float, float] = (5.85e9, 14.5e9)
    out_of_band_rejection_db: float = 60.0
    tilt_db_per_ghz: float = 0.0
    noise_snr_db: float | None = None

    def __post_init__(self):
        low, high = self.passband_hz
        if not 0 <= low < high:
            raise SignalError("bad-rf-spec", "passband_hz must satisfy 0 <= low < high")
        if self.out_of_band_rejection_db < 0:
            raise SignalError("bad-rf-spec", "out_of_band_rejection_db must be >= 0")


def apply_rf_response(
    w: RealWaveform, spec: RfResponseSpec, rng_seed: int | None = 0
) -> RealWaveform:
    """Run a waveform through the band-limited, tilted receive chain.

    The mask is zero-phase: in-band gain follows the tilt, out-of-band gain
    is the rejection floor, with raised-cosine edges over 5% of the band
    width.  Noise (if configured) is white across the record's Nyquist band
    but calibrated so that the noise power falling inside the passband sits
    at `noise_snr_db` below the filtered signal power.  Deterministic for a
    given seed.
    """
    low, high = spec.passband_hz
    n = w.timebase.n_samples
    if n == 0:
        raise SignalError("empty-record", "cannot filter an empty record")
    freqs = sfft.rfftfreq(n, d=w.timebase.dt_s)
    edge = 0.05 * (high - low)
    floor = 10.0 ** (-spec.out_of_band_rejection_db / 20.0)
    tilt_gain_db = spec.tilt_db_per_ghz * (np.clip(freqs, low, high) - low) / 1e9
    in_gain = 10.0 ** (tilt_gain_db / 20.0)
    # raised-cosine blend between floor and in-band gain at each edge
    ramp_lo = np.clip((freqs - (low - edge)) / edge, 0.0, 1.0)
    ramp_hi = np.clip(((high + edge) - freqs) / edge, 0.0, 1.0)
    blend = 0.5 * (1.0 - np.cos(np.pi * ramp_lo)) * 0.5 * (1.0 - np.cos(np.pi * ramp_hi))
    mask = floor + (in_gain - floor) * blend
    filtered = sfft.irfft(sfft.rfft(w.samples) * mask, n=n)
    if spec.noise_snr_db is not None:
        band = (freqs >= low) & (freqs <= high)
        fspec = sfft.rfft(filtered)
        # one-sided Parseval with rfft bin weighting
        weights = np.full(fspec.shape, 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[-1] = 1.0
        p_inband = np.sum(weights[band] * np.abs(fspec[band]) ** 2) / n**2
        snr_lin = 10.0 ** (spec.noise_snr_db / 10.0)
        bw = high - low
        nyq = w.timebase.nyquist_hz
        sigma2 = p_inband / snr_lin * (nyq / bw)
        rng = np.random.default_rng(rng_seed)
        filtered = filtered + rng.normal(0.0, np.sqrt(sigma2), size=n)
    return RealWaveform(w.timebase, filtered)
