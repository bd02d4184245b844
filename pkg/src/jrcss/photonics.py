"""Stimulated-Brillouin-scattering filter stage and the sensing-side optics.

The swept lower sideband of the transmit light acts as a frequency-sweeping
carrier; a second modulator puts the signal under test (SUT) onto it as
double sidebands with a partially suppressed carrier.  The narrow SBS gain
window then converts frequency to time: each line sweeping through the
window produces a short optical power pulse on the monitor photodiode.

The SBS interaction is modeled as a static LTI gain filter (pump depletion
and transients ignored): Lorentzian power gain in dB,
G(d) = G0 * (Gamma/2)^2 / (d^2 + (Gamma/2)^2), centered a Brillouin shift
below the pump.  `pump_offset_hz` moves the pump (and the gain window) that
much further below the reference carrier, which shifts the start of the
sensing band from 0 up to `pump_offset_hz`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.integrate import cumulative_trapezoid

from .core import ComplexEnvelope, RealWaveform, Timebase, lowpass, require_same_grid
from .errors import FilterTransientWarning, SignalError

_SUT_KINDS = ("tone", "multitone", "lfm", "nlfm", "step", "table")


@dataclass(frozen=True)
class SbsFilterSpec:
    """Static Lorentzian Brillouin gain window.

    bfs_hz         : Brillouin frequency shift (gain sits this far below the pump)
    pump_offset_hz : extra pump down-shift; start of the sensing band
    linewidth_hz   : full width at half the peak dB gain
    peak_gain_db   : on-resonance power gain
    include_phase  : include the minimum-phase response of the gain line
    """

    bfs_hz: float = 10.8e9
    pump_offset_hz: float = 0.0
    linewidth_hz: float = 20e6
    peak_gain_db: float = 20.0
    include_phase: bool = False

    def __post_init__(self):
        if self.bfs_hz <= 0:
            raise SignalError("bad-filter", "bfs_hz must be positive")
        if self.linewidth_hz <= 0:
            raise SignalError("bad-filter", "linewidth_hz must be positive")
        if self.peak_gain_db < 0:
            raise SignalError("bad-filter", "peak_gain_db must be non-negative")

    @property
    def gain_center_offset_hz(self) -> float:
        """Gain-window center as an envelope frequency (below the carrier)."""
        return -(self.bfs_hz + self.pump_offset_hz)


@dataclass(frozen=True)
class SutSpec:
    """Signal under test, described by its instantaneous frequency law.

    kind: one of tone / multitone / lfm / nlfm / step / table.
      tone      : freq_hz
      multitone : freqs_hz (simultaneous pure tones), optional amplitudes
      lfm       : f_start_hz -> f_stop_hz ramp repeating every period_s
      nlfm      : f(t) = polynomial in (t/period_s), coefficients `coeffs`
                  in Hz, highest order first (numpy polyval convention)
      step      : freqs_hz visited in order, dwell_s each, repeating
      table     : piecewise-linear f(t) through (times_s, freqs_hz),
                  repeating every times_s[-1]
    """

    kind: str = "tone"
    freq_hz: float = 1.0e9
    freqs_hz: tuple = ()
    amplitude: float = 1.0
    amplitudes: tuple = ()
    f_start_hz: float = 0.0
    f_stop_hz: float = 0.0
    period_s: float = 0.0
    coeffs: tuple = ()
    dwell_s: float = 0.0
    times_s: tuple = ()
    table_freqs_hz: tuple = ()

    def __post_init__(self):
        if self.kind not in _SUT_KINDS:
            raise SignalError("bad-sut", f"kind must be one of {_SUT_KINDS}")
        if self.amplitude < 0:
            raise SignalError("bad-sut", "amplitude must be non-negative")
        if self.kind in ("lfm", "nlfm") and self.period_s <= 0:
            raise SignalError("bad-sut", f"{self.kind} needs period_s > 0")
        if self.kind == "nlfm" and not self.coeffs:
            raise SignalError("bad-sut", "nlfm needs polynomial coeffs")
        if self.kind == "multitone" and not self.freqs_hz:
            raise SignalError("bad-sut", "multitone needs freqs_hz")
        if self.kind == "step":
            if not self.freqs_hz or self.dwell_s <= 0:
                raise SignalError("bad-sut", "step needs freqs_hz and dwell_s > 0")
        if self.kind == "table":
            if len(self.times_s) < 2 or len(self.times_s) != len(self.table_freqs_hz):
                raise SignalError("bad-sut", "table needs matching times_s/table_freqs_hz")
            if self.times_s[0] != 0 or np.any(np.diff(self.times_s) <= 0):
                raise SignalError("bad-sut", "times_s must start at 0 and increase")

    def instantaneous_freq(self, t_s: np.ndarray) -> np.ndarray:
        """Analytic instantaneous frequency law (Hz) for single-line kinds.

        Not defined for multitone (several lines at once).
        """
        t = np.asarray(t_s, dtype=float)
        if self.kind == "tone":
            return np.full_like(t, self.freq_hz)
        if self.kind == "lfm":
            tau = np.mod(t, self.period_s)
            rate = (self.f_stop_hz - self.f_start_hz) / self.period_s
            return self.f_start_hz + rate * tau
        if self.kind == "nlfm":
            tau = np.mod(t, self.period_s)
            return np.polyval(self.coeffs, tau / self.period_s)
        if self.kind == "step":
            period = self.dwell_s * len(self.freqs_hz)
            idx = np.floor(np.mod(t, period) / self.dwell_s).astype(np.int64)
            return np.asarray(self.freqs_hz, dtype=float)[idx]
        if self.kind == "table":
            period = self.times_s[-1]
            return np.interp(np.mod(t, period), self.times_s, self.table_freqs_hz)
        raise SignalError("bad-sut", f"{self.kind} has no single instantaneous frequency")


def gen_sut(spec: SutSpec, timebase: Timebase) -> RealWaveform:
    """Synthesize the SUT waveform on the given grid.

    Single-line kinds integrate the instantaneous-frequency law to a
    continuous phase; multitone sums fixed tones.  Zero amplitude gives a
    zero record.
    """
    t = timebase.t()
    if spec.kind == "multitone":
        amps = spec.amplitudes or (spec.amplitude,) * len(spec.freqs_hz)
        if len(amps) != len(spec.freqs_hz):
            raise SignalError("bad-sut", "amplitudes length must match freqs_hz")
        out = np.zeros(timebase.n_samples)
        for f, a in zip(spec.freqs_hz, amps):
            out += a * np.cos(2.0 * np.pi * f * t)
        return RealWaveform(timebase, out)
    f_inst = spec.instantaneous_freq(t)
    if np.max(np.abs(f_inst), initial=0.0) >= timebase.nyquist_hz:
        raise SignalError("undersampled-chirp", "SUT frequency law exceeds Nyquist")
    phase = 2.0 * np.pi * cumulative_trapezoid(f_inst, dx=timebase.dt_s, initial=0.0)
    return RealWaveform(timebase, spec.amplitude * np.cos(phase))


def cs_dsb_modulate(
    probe_in: ComplexEnvelope, sut: RealWaveform, carrier_suppression_db: float = 6.0
) -> ComplexEnvelope:
    """Carrier-suppressed double-sideband modulation of the SUT onto the probe.

    Behavioral model: the output field is [rho + sut(t)] * probe(t), i.e.
    unit modulation index, so a unit-amplitude SUT tone leaves first-order
    sidebands at half the unsuppressed carrier amplitude.  The default 6 dB
    suppression puts the residual carrier at the sideband level, which is
    what provides the timing reference line for the sensing receiver.
    """
    require_same_grid(probe_in, sut)
    if carrier_suppression_db < 0:
        raise SignalError("bad-filter", "carrier_suppression_db must be non-negative")
    rho = 10.0 ** (-carrier_suppression_db / 20.0)
    return ComplexEnvelope(
        probe_in.timebase, probe_in.ref_freq_hz, (rho + sut.samples) * probe_in.samples
    )


def sbs_filter(probe: ComplexEnvelope, spec: SbsFilterSpec) -> ComplexEnvelope:
    """Apply the Brillouin gain window to the probe field (LTI, frequency domain).

    Warns if the record is shorter than ~10 gain-linewidth coherence times,
    where the filter's own transient would dominate the output.
    """
    tb = probe.timebase
    if tb.n_samples == 0:
        raise SignalError("empty-record", "cannot filter an empty record")
    if tb.duration_s < 10.0 / spec.linewidth_hz:
        warnings.warn(
            "filter-transient-dominated: record is shorter than 10 linewidth "
            "coherence times; output is transient-dominated",
            FilterTransientWarning,
        )
    center = spec.gain_center_offset_hz
    if not (-tb.nyquist_hz < center < tb.nyquist_hz):
        raise SignalError(
            "filter-out-of-band",
            f"gain center {center:g} Hz (envelope frequency) is outside the record's band",
        )
    freqs = sfft.fftfreq(tb.n_samples, d=tb.dt_s)
    half = 0.5 * spec.linewidth_hz
    detune = freqs - center
    lorentz = half**2 / (detune**2 + half**2)
    kappa = np.log(10.0) * spec.peak_gain_db / 20.0
    if spec.include_phase:
        h = np.exp(kappa * half / (half + 1j * detune))
    else:
        h = np.exp(kappa * lorentz)
    out = sfft.ifft(sfft.fft(probe.samples) * h)
    return ComplexEnvelope(tb, probe.ref_freq_hz, out)


def pd1_detect(
    field: ComplexEnvelope, responsivity: float = 1.0, post_lowpass_hz: float = 50e6
) -> RealWaveform:
    """Monitor photodiode: square-law detect, lowpass, and DC-block.

    The lowpass keeps only the slow optical-power variations (the
    frequency-to-time pulses); all the fast beat products between the
    spectral lines land far above the default 50 MHz cutoff.
    """
    if responsivity <= 0:
        raise SignalError("bad-responsivity", "responsivity must be positive")
    current = responsivity * np.abs(field.samples) ** 2
    filtered = lowpass(RealWaveform(field.timebase, current), post_lowpass_hz)
    return RealWaveform(field.timebase, filtered.samples - np.mean(filtered.samples))
