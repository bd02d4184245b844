"""Frequency-to-time-mapping spectrum sensing on the monitor photocurrent.

Within each sweep, a line at frequency f crosses the Brillouin gain window
at a time offset T * (f - f_x) / B after the band-start crossing, so pulse
timing maps affinely to frequency: f = f_x + B * (t - t0) / T.  The
residual swept carrier supplies a reference pulse at the band start when
the sensing band is unshifted, confirming band alignment sweep by sweep;
with a shifted band the reference leaves the sweep and estimates are
flagged uncalibrated.  The sweep time origin t0 itself is taken from the
acquisition trigger by default (capture is synchronous with the sweep),
with the measured reference centroid available as an alternative anchor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RealWaveform, decimate
from .errors import ConfigError, SignalError


@dataclass(frozen=True)
class PulseEvent:
    """One detected crossing pulse (absolute centroid time)."""

    time_s: float
    peak_amplitude: float
    width_s: float
    sweep_index: int


@dataclass(frozen=True)
class FrequencyEstimate:
    freq_hz: float
    sweep_index: int
    calibrated: bool  # True when timed against a measured reference pulse
    time_s: float = 0.0  # centroid time of the underlying pulse event


@dataclass(frozen=True)
class Spectrogram:
    """Per-sweep columns of the photocurrent mapped onto a frequency axis."""

    freq_axis_hz: np.ndarray
    time_axis_s: np.ndarray  # sweep start times
    intensity: np.ndarray  # [n_freq, n_sweeps]
    blank_band_hz: tuple[float, float] | None  # rows zeroed around the reference


@dataclass(frozen=True)
class RateResolution:
    adc_rate_hz: float
    resolved: bool
    worst_valley_db: float  # least-negative valley across sweeps (nan if < 2 pulses)
    n_sweeps: int


def _sweep_samples(w: RealWaveform, sweep_period_s: float) -> int:
    n_per = sweep_period_s * w.timebase.sample_rate_hz
    if abs(n_per - round(n_per)) > 1e-6 or round(n_per) < 2:
        raise SignalError("bad-timebase", "sweep period must span >= 2 whole samples")
    n_per = int(round(n_per))
    if w.timebase.n_samples < n_per:
        raise SignalError("record-too-short", "record does not cover one full sweep")
    return n_per


def detect_pulses(
    pd1: RealWaveform,
    sweep_period_s: float,
    threshold_frac: float = 0.3,
    noise_floor_mult: float = 8.0,
) -> list[PulseEvent]:
    """Find crossing pulses: per-sweep thresholding + amplitude-weighted centroids.

    A sample belongs to a pulse when it exceeds threshold_frac times its own
    sweep's maximum; contiguous samples form one event (events may straddle
    a sweep boundary).  An absolute floor of noise_floor_mult times the
    record's median absolute level rejects records that contain nothing but
    background ripple.  Centroiding, not argmax, sets the event time: at the
    default 100 MSa/s readout the sample spacing alone would already be a
    15 MHz quantization of the frequency axis.
    """
    if not 0 < threshold_frac < 1:
        raise SignalError("bad-threshold", "threshold_frac must be in (0, 1)")
    n_per = _sweep_samples(pd1, sweep_period_s)
    s = pd1.samples
    n_sweeps = s.size // n_per
    used = n_sweeps * n_per
    sweep_max = np.max(s[:used].reshape(n_sweeps, n_per), axis=1)
    thr = np.repeat(threshold_frac * sweep_max, n_per)
    if s.size > used:  # tail shorter than a sweep reuses the last threshold
        thr = np.concatenate([thr, np.full(s.size - used, thr[-1])])
    floor = noise_floor_mult * np.median(np.abs(s))
    mask = (s > thr) & (s > 0)
    if not mask.any():
        return []
    idx = np.flatnonzero(mask)
    splits = np.flatnonzero(np.diff(idx) > 1) + 1
    events = []
    dt = pd1.timebase.dt_s
    t0 = pd1.timebase.t0_s
    for run in np.split(idx, splits):
        seg = s[run]
        peak = float(np.max(seg))
        if peak <= floor:
            continue
        centroid = t0 + dt * float(np.sum(run * seg) / np.sum(seg))
        sweep = max(0, int(np.floor((centroid - t0) / sweep_period_s)))
        events.append(
            PulseEvent(
                time_s=centroid,
                peak_amplitude=peak,
                width_s=run.size * dt,
                sweep_index=sweep,
            )
        )
    return events


def _circular_dist(t: float, phase: float, period: float) -> float:
    d = np.mod(t - phase + 0.5 * period, period) - 0.5 * period
    return abs(float(d))


def fttm_estimate(
    events: list[PulseEvent],
    f_b_hz: float,
    sweep_period_s: float,
    f_x_hz: float = 0.0,
    ref_phase_s: float = 0.0,
    ref_tolerance_s: float | None = None,
    expect_reference: bool = True,
    anchor: str = "trigger",
) -> list[FrequencyEstimate]:
    """Convert pulse times to frequencies, per sweep, against a time origin.

    ref_phase_s is the intra-sweep time at which the band-start frequency
    f_x crosses the gain window (zero in the standard configuration).  When
    expect_reference is true, the event nearest that phase (within
    ref_tolerance_s, circularly) in each sweep is classified as the
    reference pulse; estimates in a sweep that has one are flagged
    calibrated.  With a shifted sensing band the reference line never
    enters the sweep, so pass expect_reference=False.

    anchor selects the time origin t0 of each sweep:

    - "trigger": t0 = ref_phase_s + k * T on the acquisition clock, valid
      because capture is synchronous with the sweep generator.  This is the
      default: the reference pulse straddles the sweep turnaround, so its
      centroid sits a few ns late of the true crossing and would leak a
      systematic offset into every estimate.
    - "measured": t0 is the measured reference centroid in that sweep
      (falls back to the trigger origin, uncalibrated, if none was seen).
    """
    if anchor not in ("trigger", "measured"):
        raise ConfigError("bad-anchor", f"unknown anchor mode {anchor!r}")
    if ref_tolerance_s is None:
        ref_tolerance_s = 0.01 * sweep_period_s
    period = sweep_period_s
    refs: list[PulseEvent] = []
    signals: list[PulseEvent] = []
    for ev in sorted(events, key=lambda e: e.time_s):
        if expect_reference and _circular_dist(ev.time_s, ref_phase_s, period) < ref_tolerance_s:
            refs.append(ev)
        else:
            signals.append(ev)
    ref_times = np.array([r.time_s for r in refs])
    out = []
    for ev in signals:
        k = int(np.floor((ev.time_s - ref_phase_s) / period))
        t0_virtual = ref_phase_s + k * period
        t0 = t0_virtual
        calibrated = False
        if ref_times.size:
            # A sweep is calibrated when its own reference pulse was seen:
            # the latest reference at or before the signal event, less than
            # one period old.  (The reference centroid can only trail its
            # nominal phase, so >= t0_virtual - tolerance is implied.)
            before = ref_times[ref_times <= ev.time_s]
            if before.size and ev.time_s - before[-1] < period:
                calibrated = True
                if anchor == "measured":
                    t0 = float(before[-1])
        freq = f_x_hz + f_b_hz * (ev.time_s - t0) / period
        out.append(FrequencyEstimate(freq_hz=float(freq), sweep_index=k,
                                     calibrated=calibrated, time_s=ev.time_s))
    return out


def assemble_spectrogram(
    pd1: RealWaveform,
    sweep_period_s: float,
    f_b_hz: float,
    f_x_hz: float = 0.0,
    ref_phase_s: float = 0.0,
    blank_s: float = 80e-9,
) -> Spectrogram:
    """Stack per-sweep photocurrent magnitude as spectrogram columns.

    Row j carries intra-sweep time tau_j mapped to
    f = f_x + f_b * (tau_j - ref_phase_s) / T.  Rows within blank_s of the
    reference phase (including the wrap at the sweep end) are zeroed, since
    the reference pulse is timing, not signal.
    """
    n_per = _sweep_samples(pd1, sweep_period_s)
    n_sweeps = pd1.timebase.n_samples // n_per
    cols = np.abs(pd1.samples[: n_sweeps * n_per].reshape(n_sweeps, n_per)).T.copy()
    dt = pd1.timebase.dt_s
    tau = np.arange(n_per) * dt
    freq_axis = f_x_hz + f_b_hz * (tau - ref_phase_s) / sweep_period_s
    blank_band = None
    if blank_s > 0:
        near_ref = np.minimum(
            np.abs(tau - ref_phase_s), sweep_period_s - np.abs(tau - ref_phase_s)
        ) < blank_s
        cols[near_ref, :] = 0.0
        blank_band = (
            f_x_hz - f_b_hz * blank_s / sweep_period_s,
            f_x_hz + f_b_hz * blank_s / sweep_period_s,
        )
    time_axis = pd1.timebase.t0_s + np.arange(n_sweeps) * sweep_period_s
    return Spectrogram(
        freq_axis_hz=freq_axis,
        time_axis_s=time_axis,
        intensity=cols,
        blank_band_hz=blank_band,
    )


def resolution_study(
    pd1_full: RealWaveform,
    sweep_period_s: float,
    adc_rates_hz: list[float],
    threshold_frac: float = 0.3,
    ref_phase_s: float = 0.0,
    ref_tolerance_s: float | None = None,
) -> list[RateResolution]:
    """Two-tone separability of the readout at several acquisition rates.

    The full-rate photocurrent is decimated to each rate (with the matching
    anti-alias filter, which is what physically merges nearby pulses at low
    rates).  A rate counts as resolved only if every sweep shows two
    non-reference pulses with a valley at least 3 dB (power) below the
    smaller pulse between them.
    """
    results = []
    for rate in adc_rates_hz:
        factor = pd1_full.timebase.sample_rate_hz / rate
        if abs(factor - round(factor)) > 1e-9 or factor < 1:
            raise SignalError("bad-adc-rate", "simulation rate must be an integer multiple of each rate")
        low = decimate(pd1_full, int(round(factor)))
        n_per = _sweep_samples(low, sweep_period_s)
        n_sweeps = low.timebase.n_samples // n_per
        events = detect_pulses(low, sweep_period_s, threshold_frac)
        tol = 0.01 * sweep_period_s if ref_tolerance_s is None else ref_tolerance_s
        worst = -np.inf
        resolved = n_sweeps > 0
        for k in range(n_sweeps):
            evs = [
                e
                for e in events
                if e.sweep_index == k
                and _circular_dist(e.time_s - low.timebase.t0_s, ref_phase_s, sweep_period_s) >= tol
            ]
            if len(evs) < 2:
                resolved = False
                worst = np.nan
                break
            evs.sort(key=lambda e: e.peak_amplitude, reverse=True)
            e1, e2 = sorted(evs[:2], key=lambda e: e.time_s)
            i1 = int(round((e1.time_s - low.timebase.t0_s) / low.timebase.dt_s))
            i2 = int(round((e2.time_s - low.timebase.t0_s) / low.timebase.dt_s))
            between = low.samples[i1 : i2 + 1]
            valley = float(np.min(between)) if between.size else np.nan
            smaller = min(e1.peak_amplitude, e2.peak_amplitude)
            if not np.isfinite(valley) or valley <= 0 or smaller <= 0:
                valley_db = -np.inf if valley <= 0 else np.nan
            else:
                valley_db = 10.0 * np.log10(valley / smaller)
            worst = max(worst, valley_db)
            if not valley_db <= -3.0:
                resolved = False
        results.append(
            RateResolution(
                adc_rate_hz=float(rate),
                resolved=bool(resolved),
                worst_valley_db=float(worst),
                n_sweeps=int(n_sweeps),
            )
        )
    return results
