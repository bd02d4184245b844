"""Transmit-side waveform generation and electro-optic modulation.

Generates the linear FM sweep and the ASK data signal, combines them with a
behavioral carrier-suppressed twin-single-sideband (CS-TSSB) modulator model
(LFM on the lower optical sideband, ASK on the upper), and square-law
photodetection.  The modulator model is level-accurate, not device-accurate:
suppression and rejection are direct amplitude ratios rather than bias-point
physics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import hilbert

from .core import ComplexEnvelope, RealWaveform, Timebase, require_same_grid
from .errors import SignalError

# LFSR feedback taps (x^a + x^b + 1) for the supported PRBS orders.
_PRBS_TAPS = {7: (7, 6), 15: (15, 14), 23: (23, 18)}


@dataclass(frozen=True)
class ChirpPlan:
    """Periodic linear FM sweep: f_start -> f_stop over each period."""

    f_start_hz: float
    f_stop_hz: float
    period_s: float
    n_periods: int = 1

    def __post_init__(self):
        if self.period_s <= 0:
            raise SignalError("bad-chirp", "period_s must be positive")
        if self.f_start_hz < 0 or self.f_stop_hz < 0:
            raise SignalError("bad-chirp", "sweep frequencies must be non-negative")
        if self.f_start_hz == self.f_stop_hz:
            raise SignalError("bad-chirp", "f_start_hz and f_stop_hz must differ")
        if self.n_periods < 1:
            raise SignalError("bad-chirp", "n_periods must be >= 1")

    @property
    def bandwidth_hz(self) -> float:
        return abs(self.f_stop_hz - self.f_start_hz)

    @property
    def sweep_rate_hz_per_s(self) -> float:
        """Signed sweep rate (negative for a falling sweep)."""
        return (self.f_stop_hz - self.f_start_hz) / self.period_s

    @property
    def duration_s(self) -> float:
        return self.period_s * self.n_periods

    def instantaneous_freq(self, t_s: np.ndarray) -> np.ndarray:
        """Commanded frequency at time t (periodic in period_s)."""
        tau = np.mod(t_s, self.period_s)
        return self.f_start_hz + self.sweep_rate_hz_per_s * tau


@dataclass(frozen=True)
class AskPlan:
    """Amplitude-shift-keyed data signal on an electrical carrier.

    amplitude_levels is (low, high) with low >= 0 and high > low; bits are
    tiled to fill whatever record the generator is asked for.
    """

    carrier_hz: float
    baud_rate: float
    bits: np.ndarray
    amplitude_levels: tuple[float, float] = (0.2, 1.0)
    pulse_shape: str = "rect"  # "rect" or "raised-cosine"
    rolloff: float = 0.35  # raised-cosine excess bandwidth

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.baud_rate <= 0:
            raise SignalError("bad-ask", "carrier_hz and baud_rate must be positive")
        low, high = self.amplitude_levels
        if low < 0 or high <= low:
            raise SignalError("bad-ask", "need 0 <= low < high amplitude levels")
        if self.pulse_shape not in ("rect", "raised-cosine"):
            raise SignalError("bad-ask", f"unknown pulse_shape {self.pulse_shape!r}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise SignalError("bad-ask", "rolloff must be in [0, 1]")
        bits = np.asarray(self.bits)
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise SignalError("bad-ask", "bits must be 0/1")
        object.__setattr__(self, "bits", bits.astype(np.uint8))


@dataclass(frozen=True)
class ModulatorSpec:
    """Behavioral CS-TSSB modulator imperfections (amplitude ratios in dB)."""

    carrier_suppression_db: float = 30.0
    sideband_rejection_db: float = 30.0


def gen_lfm(plan: ChirpPlan, sample_rate_hz: float) -> RealWaveform:
    """Generate the periodic LFM sweep as a real waveform.

    Phase restarts at zero at each period boundary, so an n-period record is
    exactly periodic.  Raises "undersampled-chirp" if the sweep reaches the
    Nyquist frequency.
    """
    f_max = max(plan.f_start_hz, plan.f_stop_hz)
    if f_max >= 0.5 * sample_rate_hz:
        raise SignalError(
            "undersampled-chirp",
            f"sweep reaches {f_max:g} Hz but Nyquist is {0.5 * sample_rate_hz:g} Hz",
        )
    n_per = plan.period_s * sample_rate_hz
    if abs(n_per - round(n_per)) > 1e-6:
        raise SignalError("bad-chirp", "period_s must span an integer number of samples")
    n = int(round(n_per)) * plan.n_periods
    tb = Timebase(sample_rate_hz, n)
    tau = np.mod(tb.t(), plan.period_s)
    phase = 2.0 * np.pi * (plan.f_start_hz * tau + 0.5 * plan.sweep_rate_hz_per_s * tau**2)
    return RealWaveform(tb, np.cos(phase))


def _rc_pulse(t_over_ts: np.ndarray, beta: float) -> np.ndarray:
    """Raised-cosine Nyquist pulse, unit amplitude at t=0."""
    x = t_over_ts
    out = np.sinc(x)
    if beta > 0:
        denom = 1.0 - (2.0 * beta * x) ** 2
        # limit value at the denominator zeros
        sing = np.isclose(denom, 0.0)
        denom[sing] = 1.0
        out = out * np.cos(np.pi * beta * x) / denom
        out[sing] = np.sinc(1.0 / (2.0 * beta)) * np.pi / 4.0
    return out


def ask_envelope(plan: AskPlan, timebase: Timebase) -> np.ndarray:
    """Baseband amplitude envelope of the ASK signal (bits tiled to fit)."""
    if plan.bits.size == 0:
        raise SignalError("no-data", "ASK plan has an empty bit sequence")
    low, high = plan.amplitude_levels
    if plan.pulse_shape == "rect":
        sym = np.floor(timebase.t() * plan.baud_rate).astype(np.int64) % plan.bits.size
        return np.where(plan.bits[sym] > 0, high, low)
    # raised-cosine shaping: superpose Nyquist pulses at the symbol centers
    # via circular convolution (records are treated as periodic), so the
    # envelope still hits the commanded level exactly at each center
    ts = 1.0 / plan.baud_rate
    dt = timebase.dt_s
    sps = int(round(ts / dt))
    if sps < 2:
        raise SignalError("bad-ask", "need >= 2 samples per symbol for pulse shaping")
    n_sym_total = int(np.ceil(timebase.duration_s / ts))
    centers = (np.arange(n_sym_total) + 0.5) * ts
    bit_vals = np.where(plan.bits[np.arange(n_sym_total) % plan.bits.size] > 0, high, low)
    span = 16  # pulse truncated at +/-16 symbols
    k = np.arange(-span * sps, span * sps + 1)
    kernel = _rc_pulse(k * dt / ts, plan.rolloff)
    impulses = np.zeros(timebase.n_samples)
    idx = np.round((centers - timebase.t0_s) / dt).astype(np.int64) % timebase.n_samples
    np.add.at(impulses, idx, bit_vals - low)
    kern_full = np.zeros(timebase.n_samples)
    kern_full[: k.size] = kernel
    kern_full = np.roll(kern_full, -span * sps)  # kernel t=0 at index 0
    env = np.fft.irfft(np.fft.rfft(impulses) * np.fft.rfft(kern_full), n=timebase.n_samples)
    return low + env


def gen_ask(plan: AskPlan, timebase: Timebase) -> RealWaveform:
    """ASK waveform on its electrical carrier over the given grid."""
    env = ask_envelope(plan, timebase)
    carrier = np.cos(2.0 * np.pi * plan.carrier_hz * timebase.t())
    return RealWaveform(timebase, env * carrier)


def gen_prbs(seed: int, n_bits: int, order: int = 15) -> np.ndarray:
    """Pseudo-random binary sequence from a Fibonacci LFSR.

    Deterministic for a given (seed, order); seed selects the starting
    register state.
    """
    if order not in _PRBS_TAPS:
        raise SignalError("bad-prbs-order", f"order must be one of {sorted(_PRBS_TAPS)}")
    if n_bits <= 0:
        raise SignalError("no-data", "n_bits must be positive")
    a, b = _PRBS_TAPS[order]
    mask = (1 << order) - 1
    state = (int(seed) % mask) + 1  # any value in [1, 2^order - 1]
    out = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        out[i] = state & 1
        newbit = ((state >> (order - a)) ^ (state >> (order - b))) & 1
        state = (state >> 1) | (newbit << (order - 1))
    return out


def cs_tssb_modulate(
    lfm: RealWaveform,
    ask: RealWaveform,
    mod: ModulatorSpec = ModulatorSpec(),
    fc_ref_hz: float = 0.0,
) -> ComplexEnvelope:
    """Carrier-suppressed twin-SSB modulation of two drives onto one carrier.

    The LFM drive lands on the lower optical sideband (envelope frequencies
    -f_lfm(t)), the ASK drive on the upper (+f_ask).  Finite sideband
    rejection leaves mirror images of each drive at the stated amplitude
    ratio; finite carrier suppression leaves a residual line at the carrier,
    scaled relative to the RMS sideband amplitude.
    """
    require_same_grid(lfm, ask)
    lfm_a = hilbert(lfm.samples)
    ask_a = hilbert(ask.samples)
    env = np.conj(lfm_a) + ask_a
    g_img = 10.0 ** (-mod.sideband_rejection_db / 20.0)
    if g_img > 0:
        env = env + g_img * (lfm_a + np.conj(ask_a))
    g_car = 10.0 ** (-mod.carrier_suppression_db / 20.0)
    if g_car > 0:
        sideband_rms = np.sqrt(np.mean(np.abs(lfm_a) ** 2 + np.abs(ask_a) ** 2))
        env = env + g_car * sideband_rms
    return ComplexEnvelope(lfm.timebase, fc_ref_hz, env)


def photodetect(field: ComplexEnvelope, responsivity: float = 1.0) -> RealWaveform:
    """Square-law photodetection of an optical field envelope, AC-coupled."""
    if responsivity <= 0:
        raise SignalError("bad-responsivity", "responsivity must be positive")
    current = responsivity * np.abs(field.samples) ** 2
    return RealWaveform(field.timebase, current - np.mean(current))
