"""De-chirp ranging and turntable ISAR imaging.

The receiver mixes the echo with a copy of the transmit waveform; each
point target becomes a constant beat tone at f_b = 2 R (B/T) / c, so an FFT
over one sweep is a range profile with bin spacing c/(2B).  Imaging stacks
the complex range profiles over a rotation arc and takes an FFT along slow
time per range cell; the Doppler axis scales to cross-range by
lambda / (2 * omega) with omega the turntable rate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.signal import find_peaks

from .core import RealWaveform, decimate, lowpass, require_same_grid
from .errors import SignalError
from .waveform import ChirpPlan

_3DB = 20.0 * np.log10(np.sqrt(0.5))  # -3.0103 dB


@dataclass(frozen=True)
class RangeProfile:
    """One-sweep de-chirped spectrum mapped to range."""

    range_axis_m: np.ndarray
    magnitude_db: np.ndarray
    beat_freq_axis_hz: np.ndarray
    range_bin_m: float  # nominal resolution c / (2B)


@dataclass(frozen=True)
class RangePeak:
    range_m: float
    magnitude_db: float
    width_3db_m: float


@dataclass(frozen=True)
class IsarImage:
    """Range / cross-range intensity image with its scaling metadata."""

    image_db: np.ndarray  # [n_range, n_cross]
    range_axis_m: np.ndarray
    cross_range_axis_m: np.ndarray
    wavelength_m: float
    delta_theta_rad: float
    n_sweeps: int


def dechirp(rx: RealWaveform, lo: RealWaveform, if_lowpass_hz: float = 18e6) -> RealWaveform:
    """Mix the received waveform with the transmit copy and keep the beat band."""
    require_same_grid(rx, lo)
    return lowpass(RealWaveform(rx.timebase, rx.samples * lo.samples), if_lowpass_hz)


def _one_sweep(beat: RealWaveform, chirp: ChirpPlan, adc_rate_hz: float, sweep_index: int):
    """Decimate the beat record to the ADC rate and slice out one sweep."""
    fs = beat.timebase.sample_rate_hz
    factor = fs / adc_rate_hz
    if abs(factor - round(factor)) > 1e-9 or factor < 1:
        raise SignalError("bad-adc-rate", "simulation rate must be an integer multiple of adc_rate_hz")
    # aliasing guard: anything above the ADC Nyquist would fold into the profile
    spec = sfft.rfft(beat.samples)
    freqs = sfft.rfftfreq(beat.timebase.n_samples, d=beat.timebase.dt_s)
    p_hi = np.sum(np.abs(spec[freqs > 0.5 * adc_rate_hz]) ** 2)
    p_all = np.sum(np.abs(spec) ** 2)
    if p_all > 0 and p_hi / p_all > 1e-2:
        raise SignalError(
            "adc-undersampled",
            f"beat record has {100 * p_hi / p_all:.1f}% of its energy above the ADC Nyquist",
        )
    sampled = decimate(beat, int(round(factor)))
    n_sweep = int(round(chirp.period_s * adc_rate_hz))
    start = sweep_index * n_sweep
    if start < 0 or start + n_sweep > sampled.timebase.n_samples:
        raise SignalError("record-too-short", "record does not cover the requested sweep")
    return sampled.samples[start : start + n_sweep], n_sweep


def range_profile(
    beat: RealWaveform,
    chirp: ChirpPlan,
    adc_rate_hz: float = 40e6,
    window: str = "rect",
    zero_pad: int = 16,
    sweep_index: int = 0,
) -> RangeProfile:
    """Range profile of one sweep of the de-chirped signal.

    Rectangular windowing by default: the de-chirped peak then has the
    canonical 1/T-wide main lobe.  zero_pad interpolates the spectrum so
    peak positions and 3 dB widths can be read off smoothly.
    """
    seg, n_sweep = _one_sweep(beat, chirp, adc_rate_hz, sweep_index)
    if window == "hann":
        seg = seg * (0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n_sweep) / n_sweep))
    elif window != "rect":
        raise SignalError("unknown-window", f"window must be 'rect' or 'hann', got {window!r}")
    nfft = int(zero_pad) * n_sweep
    spec = sfft.rfft(seg, n=nfft)
    beat_freqs = sfft.rfftfreq(nfft, d=1.0 / adc_rate_hz)
    k = chirp.bandwidth_hz / chirp.period_s
    ranges = beat_freqs * SPEED_OF_LIGHT / (2.0 * k)
    mag = np.abs(spec)
    mag_db = 20.0 * np.log10(np.maximum(mag, 1e-300))
    return RangeProfile(
        range_axis_m=ranges,
        magnitude_db=mag_db,
        beat_freq_axis_hz=beat_freqs,
        range_bin_m=SPEED_OF_LIGHT / (2.0 * chirp.bandwidth_hz),
    )


def _parabolic_refine(y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex (offset in samples, value) of the parabola through y[i-1:i+2]."""
    if i <= 0 or i >= y.size - 1:
        return 0.0, y[i]
    a, b, cc = y[i - 1], y[i], y[i + 1]
    denom = a - 2.0 * b + cc
    if denom == 0:
        return 0.0, b
    delta = 0.5 * (a - cc) / denom
    return delta, b - 0.25 * (a - cc) * delta


def _width_3db(x_axis: np.ndarray, y_db: np.ndarray, i_peak: int, peak_db: float):
    """Interpolated width of the lobe around i_peak at peak_db - 3 dB."""
    target = peak_db + _3DB
    lo = i_peak
    while lo > 0 and y_db[lo] > target:
        lo -= 1
    hi = i_peak
    while hi < y_db.size - 1 and y_db[hi] > target:
        hi += 1
    if y_db[lo] > target or y_db[hi] > target:
        return None  # lobe runs off the record
    x_lo = np.interp(target, [y_db[lo], y_db[lo + 1]], [x_axis[lo], x_axis[lo + 1]])
    x_hi = np.interp(target, [y_db[hi], y_db[hi - 1]], [x_axis[hi], x_axis[hi - 1]])
    return x_hi - x_lo


def estimate_range(
    profile: RangeProfile, n_peaks: int = 1, min_separation_m: float | None = None
) -> list[RangePeak]:
    """Strongest peaks of a range profile, parabolic-refined, sorted by level.

    Peaks closer than min_separation_m (default: one nominal range bin) to a
    stronger peak are treated as part of its lobe.  If fewer than n_peaks
    rise above the noise floor, the shorter list is returned with a warning.
    """
    if min_separation_m is None:
        min_separation_m = profile.range_bin_m
    grid = profile.range_axis_m[1] - profile.range_axis_m[0]
    dist = max(1, int(round(min_separation_m / grid)))
    idx, _ = find_peaks(profile.magnitude_db, distance=dist)
    floor_db = np.median(profile.magnitude_db) + 6.0
    idx = idx[profile.magnitude_db[idx] > floor_db]
    order = np.argsort(profile.magnitude_db[idx])[::-1]
    peaks = []
    for i in idx[order][:n_peaks]:
        delta, mag_db = _parabolic_refine(profile.magnitude_db, int(i))
        rng = profile.range_axis_m[i] + delta * grid
        width = _width_3db(profile.range_axis_m, profile.magnitude_db, int(i), mag_db)
        peaks.append(RangePeak(rng, mag_db, width if width is not None else np.nan))
    if len(peaks) < n_peaks:
        warnings.warn(f"only {len(peaks)} of {n_peaks} requested peaks rise above the floor")
    return peaks


def isar_image(
    beats: list[RealWaveform],
    chirp: ChirpPlan,
    center_freq_hz: float,
    accumulation_s: float,
    rotation_period_s: float,
    adc_rate_hz: float = 40e6,
    zero_pad: int = 8,
) -> IsarImage:
    """Range-Doppler image from per-sweep de-chirped records.

    Each record is one sweep taken at the slow time stored in its
    timebase.t0_s; the sweeps must be uniformly spaced.  Rectangular
    windows on both axes keep the point response at its canonical
    resolution: c/(2B) in range and lambda/(2 * delta_theta) cross-range.
    """
    if len(beats) < 8:
        raise SignalError("too-few-sweeps", "ISAR needs at least 8 sweeps")
    slow_t = np.array([b.timebase.t0_s for b in beats])
    steps = np.diff(slow_t)
    if steps.size == 0 or np.any(steps <= 0) or np.ptp(steps) > 1e-9 * np.mean(steps):
        raise SignalError("nonuniform-slow-time", "sweeps must be uniformly spaced in slow time")
    if rotation_period_s <= 0 or accumulation_s <= 0:
        raise SignalError("bad-scene", "rotation_period_s and accumulation_s must be positive")
    rows = []
    for b in beats:
        seg, n_sweep = _one_sweep(b, chirp, adc_rate_hz, 0)
        rows.append(sfft.rfft(seg, n=zero_pad * n_sweep))
    matrix = np.array(rows)  # [n_sweeps, n_range]
    n_sweeps = matrix.shape[0]
    nfft_slow = zero_pad * n_sweeps
    img = sfft.fftshift(sfft.fft(matrix, n=nfft_slow, axis=0), axes=0)  # [n_cross, n_range]
    intensity = np.abs(img).T  # [n_range, n_cross]
    k = chirp.bandwidth_hz / chirp.period_s
    beat_freqs = sfft.rfftfreq(zero_pad * int(round(chirp.period_s * adc_rate_hz)), d=1.0 / adc_rate_hz)
    range_axis = beat_freqs * SPEED_OF_LIGHT / (2.0 * k)
    wavelength = SPEED_OF_LIGHT / center_freq_hz
    omega = 2.0 * np.pi / rotation_period_s
    doppler = sfft.fftshift(sfft.fftfreq(nfft_slow, d=steps.mean()))
    cross_axis = doppler * wavelength / (2.0 * omega)
    delta_theta = 2.0 * np.pi * accumulation_s / rotation_period_s
    image_db = 20.0 * np.log10(np.maximum(intensity, 1e-300))
    return IsarImage(
        image_db=image_db,
        range_axis_m=range_axis,
        cross_range_axis_m=cross_axis,
        wavelength_m=wavelength,
        delta_theta_rad=delta_theta,
        n_sweeps=n_sweeps,
    )


@dataclass(frozen=True)
class PsfReport:
    range_width_3db_m: float
    cross_range_width_3db_m: float
    peak_range_m: float
    peak_cross_range_m: float
    peak_db: float


def measure_psf(image: IsarImage) -> PsfReport:
    """3 dB widths of the dominant point response along both image axes.

    Raises "psf-ambiguous" if the image has no single isolated peak (a
    second response within 3 dB outside the main lobe) or a cut's 3 dB
    width cannot be bracketed.
    """
    flat = int(np.argmax(image.image_db))
    i_r, i_c = np.unravel_index(flat, image.image_db.shape)
    peak_db = image.image_db[i_r, i_c]
    # isolation check: nothing outside the peak's own -3 dB lobe may reach -3 dB
    row_cut = image.image_db[:, i_c]
    col_cut = image.image_db[i_r, :]
    mask = image.image_db >= peak_db - 3.0
    main = _connected_region(mask, (i_r, i_c))
    if np.any(mask & ~main):
        raise SignalError("psf-ambiguous", "another response lies within 3 dB of the peak")
    w_range = _width_3db(image.range_axis_m, row_cut, int(i_r), peak_db)
    w_cross = _width_3db(image.cross_range_axis_m, col_cut, int(i_c), peak_db)
    if w_range is None or w_cross is None:
        raise SignalError("psf-ambiguous", "3 dB contour is not contained in the image")
    return PsfReport(
        range_width_3db_m=float(w_range),
        cross_range_width_3db_m=float(w_cross),
        peak_range_m=float(image.range_axis_m[i_r]),
        peak_cross_range_m=float(image.cross_range_axis_m[i_c]),
        peak_db=float(peak_db),
    )


def _connected_region(mask: np.ndarray, seed: tuple[int, int]) -> np.ndarray:
    """4-connected flood fill of `mask` from `seed`."""
    from scipy.ndimage import label

    labels, _ = label(mask)
    return labels == labels[seed]


@dataclass(frozen=True)
class TwoPointReport:
    """Resolvability readout for a two-scatterer image."""

    peak_a_db: float
    peak_b_db: float
    valley_depth_db: float  # deepest cut between the peaks, relative to the weaker one
    location_a_m: tuple[float, float]  # (range, cross-range)
    location_b_m: tuple[float, float]


def two_point_valley(image: IsarImage, min_separation_m: tuple[float, float] = (0.0125, 0.0124)) -> TwoPointReport:
    """Find the two strongest mutually-separated peaks and the cut between them.

    The second peak is the image maximum outside a +-min_separation_m
    exclusion window (half a nominal resolution cell per axis) around the
    first, so overlapping responses report a shallow or zero valley rather
    than failing.  The valley is the minimum of the bilinear interpolation
    of the dB image along the straight segment joining the peaks.
    """
    from scipy.ndimage import map_coordinates

    z = image.image_db
    i0 = np.unravel_index(int(np.argmax(z)), z.shape)
    d_r = image.range_axis_m[1] - image.range_axis_m[0]
    d_c = image.cross_range_axis_m[1] - image.cross_range_axis_m[0]
    n_r = max(2, int(round(min_separation_m[0] / d_r)))
    n_c = max(2, int(round(min_separation_m[1] / d_c)))
    masked = z.copy()
    r0, c0 = i0
    masked[max(0, r0 - n_r):r0 + n_r + 1, max(0, c0 - n_c):c0 + n_c + 1] = -np.inf
    i1 = np.unravel_index(int(np.argmax(masked)), masked.shape)
    r1, c1 = i1
    n_pts = 400
    cut = map_coordinates(z, np.vstack([np.linspace(r0, r1, n_pts), np.linspace(c0, c1, n_pts)]), order=1)
    weaker = min(z[i0], z[i1])
    depth = float(cut[3:-3].min() - weaker)
    return TwoPointReport(
        peak_a_db=float(z[i0]),
        peak_b_db=float(z[i1]),
        valley_depth_db=depth,
        location_a_m=(float(image.range_axis_m[r0]), float(image.cross_range_axis_m[c0])),
        location_b_m=(float(image.range_axis_m[r1]), float(image.cross_range_axis_m[c1])),
    )
