"""Core signal-record types and spectral utilities.

All records carry an explicit uniform sampling grid (`Timebase`).  Real
electrical signals live in `RealWaveform` (float64); optical fields are
`ComplexEnvelope` records (complex128) holding the field relative to a
reference carrier frequency, so absolute optical frequencies never appear.

Filtering is done with zero-phase frequency-domain masks: deterministic,
no group delay, and exact passband flatness, which the downstream pulse
timing relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import SignalError

# Reported magnitude floor (dB) for zero bins / empty spectra.
DB_FLOOR = -400.0


@dataclass(frozen=True)
class Timebase:
    """Uniform sampling grid.

    sample_rate_hz : samples per second
    n_samples      : record length
    t0_s           : time of the first sample
    """

    sample_rate_hz: float
    n_samples: int
    t0_s: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.sample_rate_hz) or self.sample_rate_hz <= 0:
            raise SignalError("bad-timebase", "sample_rate_hz must be positive")
        if int(self.n_samples) != self.n_samples or self.n_samples < 0:
            raise SignalError("bad-timebase", "n_samples must be a non-negative integer")

    @property
    def dt_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return 0.5 * self.sample_rate_hz

    def t(self) -> np.ndarray:
        """Sample-time axis in seconds."""
        return self.t0_s + np.arange(self.n_samples) / self.sample_rate_hz


def _check_samples(timebase: Timebase, samples: np.ndarray, kind: str) -> np.ndarray:
    arr = np.asarray(samples)
    if arr.ndim != 1:
        raise SignalError("bad-samples", "samples must be one-dimensional")
    if arr.shape[0] != timebase.n_samples:
        raise SignalError(
            "bad-samples",
            f"length {arr.shape[0]} does not match timebase n_samples {timebase.n_samples}",
        )
    arr = arr.astype(np.complex128 if kind == "complex" else np.float64, copy=False)
    if arr.size and not np.all(np.isfinite(arr.view(np.float64))):
        raise SignalError("bad-samples", "samples contain NaN or Inf")
    return arr


@dataclass(frozen=True)
class RealWaveform:
    """Real-valued record (electrical signal, photocurrent, ...)."""

    timebase: Timebase
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _check_samples(self.timebase, self.samples, "real"))


@dataclass(frozen=True)
class ComplexEnvelope:
    """Complex field envelope relative to a reference carrier.

    `ref_freq_hz` is the offset of the envelope's zero frequency from the
    chain's reference carrier; an entry at envelope frequency f represents
    a spectral line at ref_freq_hz + f.
    """

    timebase: Timebase
    ref_freq_hz: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _check_samples(self.timebase, self.samples, "complex"))


@dataclass(frozen=True)
class Spectrum:
    """FFT magnitude/phase on a strictly increasing frequency axis."""

    freq_axis_hz: np.ndarray
    magnitude_db: np.ndarray
    phase_rad: np.ndarray


def _window(name: str, n: int) -> np.ndarray:
    if name == "rect":
        return np.ones(n)
    if name == "hann":
        # periodic Hann, standard for spectral analysis
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    raise SignalError("unknown-window", f"window must be 'rect' or 'hann', got {name!r}")


def fft_spectrum(w: RealWaveform | ComplexEnvelope, window: str = "rect") -> Spectrum:
    """Windowed FFT of a record.

    Real records give a one-sided spectrum (0 .. Nyquist); complex envelopes
    give a two-sided spectrum with the axis offset by ``ref_freq_hz``.
    Magnitudes are raw bin magnitudes in dB (no normalization), floored at
    DB_FLOOR so all-zero records are representable.
    """
    n = w.timebase.n_samples
    if n == 0:
        raise SignalError("empty-record", "cannot take the spectrum of an empty record")
    win = _window(window, n)
    xw = w.samples * win
    if isinstance(w, RealWaveform):
        spec = sfft.rfft(xw)
        freqs = sfft.rfftfreq(n, d=w.timebase.dt_s)
    else:
        spec = sfft.fftshift(sfft.fft(xw))
        freqs = w.ref_freq_hz + sfft.fftshift(sfft.fftfreq(n, d=w.timebase.dt_s))
    mag = np.abs(spec)
    floor_amp = 10.0 ** (DB_FLOOR / 20.0)
    magnitude_db = 20.0 * np.log10(np.maximum(mag, floor_amp))
    return Spectrum(freq_axis_hz=freqs, magnitude_db=magnitude_db, phase_rad=np.angle(spec))


def _lowpass_mask(freqs_hz: np.ndarray, cutoff_hz: float) -> np.ndarray:
    """Zero-phase lowpass gain mask: unity through cutoff, raised-cosine
    roll-off over [cutoff, 1.2*cutoff], zero beyond."""
    f = np.abs(freqs_hz)
    stop = 1.2 * cutoff_hz
    mask = np.ones_like(f)
    trans = (f > cutoff_hz) & (f < stop)
    mask[trans] = 0.5 * (1.0 + np.cos(np.pi * (f[trans] - cutoff_hz) / (stop - cutoff_hz)))
    mask[f >= stop] = 0.0
    return mask


def lowpass(w: RealWaveform | ComplexEnvelope, cutoff_hz: float):
    """Zero-phase lowpass filter.

    Passband is exactly flat up to ``cutoff_hz``; the raised-cosine
    transition reaches full stop at 1.2x cutoff (-6 dB at 1.1x).  For a
    complex envelope the cutoff applies to envelope frequencies (offsets
    from ``ref_freq_hz``).
    """
    if not np.isfinite(cutoff_hz) or cutoff_hz <= 0:
        raise SignalError("bad-cutoff", "cutoff_hz must be positive")
    if cutoff_hz >= w.timebase.nyquist_hz:
        raise SignalError(
            "cutoff-above-nyquist",
            f"cutoff {cutoff_hz:g} Hz >= Nyquist {w.timebase.nyquist_hz:g} Hz",
        )
    n = w.timebase.n_samples
    if n == 0:
        raise SignalError("empty-record", "cannot filter an empty record")
    if isinstance(w, RealWaveform):
        spec = sfft.rfft(w.samples)
        spec *= _lowpass_mask(sfft.rfftfreq(n, d=w.timebase.dt_s), cutoff_hz)
        return RealWaveform(w.timebase, sfft.irfft(spec, n=n))
    spec = sfft.fft(w.samples)
    spec *= _lowpass_mask(sfft.fftfreq(n, d=w.timebase.dt_s), cutoff_hz)
    return ComplexEnvelope(w.timebase, w.ref_freq_hz, sfft.ifft(spec))


def decimate(w: RealWaveform | ComplexEnvelope, factor: int):
    """Reduce the sample rate by an integer factor with internal anti-aliasing.

    The anti-alias filter is flat up to 0.9x the new Nyquist, so repeated
    decimation composes: decimate(w, a*b) matches decimate(decimate(w, a), b)
    for any in-band content.
    """
    if int(factor) != factor or factor < 1:
        raise SignalError("bad-factor", "decimation factor must be a positive integer")
    factor = int(factor)
    if w.timebase.n_samples < factor:
        raise SignalError(
            "record-too-short",
            f"record of {w.timebase.n_samples} samples cannot be decimated by {factor}",
        )
    if factor == 1:
        return w
    new_rate = w.timebase.sample_rate_hz / factor
    # 0.42 * rate puts the filter's full stop at ~the new Nyquist
    filtered = lowpass(w, 0.42 * new_rate)
    sliced = filtered.samples[::factor]
    tb = Timebase(new_rate, sliced.shape[0], w.timebase.t0_s)
    if isinstance(w, RealWaveform):
        return RealWaveform(tb, sliced)
    return ComplexEnvelope(tb, w.ref_freq_hz, sliced)


def require_same_grid(a: RealWaveform | ComplexEnvelope, b: RealWaveform | ComplexEnvelope) -> None:
    """Raise unless two records share one sampling grid."""
    if a.timebase != b.timebase:
        raise SignalError("grid-mismatch", "records are on different sampling grids")
