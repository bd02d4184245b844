"""Self-mixing ASK receiver.

Squaring the ASK-modulated sweep folds the carrier out regardless of its
instantaneous frequency, leaving the squared data envelope at baseband.
The receive chain's gain slope turns into a slow multiplicative trend on
that envelope over each sweep; it is tracked with a moving-maximum (the
high-rail) smoothed by a moving average, and divided out before slicing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, uniform_filter1d

from .core import RealWaveform, lowpass
from .errors import SignalError


@dataclass(frozen=True)
class EyeDiagram:
    """Folded two-symbol traces and the normalized worst-case eye opening.

    eye_opening = (min(high rail) - max(low rail)) / (mean high - mean low)
    at the best sampling instant; 1 is ideal, <= 0 is a closed eye.
    """

    trace_matrix: np.ndarray  # [n_traces, 2 * samples_per_symbol]
    samples_per_symbol: int
    eye_opening: float


@dataclass(frozen=True)
class BerReport:
    n_bits: int
    n_errors: int
    ber: float
    threshold_used: float
    timing_offset_used: int  # samples into the first symbol


def self_mix(rx: RealWaveform, lowpass_hz: float = 2.5e9) -> RealWaveform:
    """Square-law envelope recovery: lowpass(rx^2).

    The cutoff must hold the squared-envelope bandwidth while rejecting the
    double-frequency carrier terms; one cutoff serves every payload rate so
    different bauds see an identical chain.
    """
    return lowpass(RealWaveform(rx.timebase, rx.samples**2), lowpass_hz)


def _trend(samples: np.ndarray, window: int) -> np.ndarray:
    high_rail = maximum_filter1d(samples, size=window, mode="nearest")
    return uniform_filter1d(high_rail, size=window, mode="nearest")


def compensate_envelope(
    env: RealWaveform, symbol_rate_baud: float, trend_window_symbols: int = 64
) -> RealWaveform:
    """Divide out the slow envelope trend left by the receive chain's tilt.

    The trend estimate is a moving maximum over `trend_window_symbols`
    symbols (tracking the high amplitude rail) smoothed by a moving average
    of the same length.  Applying the compensation twice is a no-op to
    within the smoothing ripple.
    """
    s = env.samples
    peak = np.max(s, initial=0.0)
    if peak <= 0:
        raise SignalError("no-signal", "envelope has no positive excursion to normalize")
    window = int(round(trend_window_symbols * env.timebase.sample_rate_hz / symbol_rate_baud))
    if window < 2:
        raise SignalError("no-signal", "trend window shorter than two samples")
    trend = _trend(s, window)
    trend = np.maximum(trend, 1e-12 * peak)
    return RealWaveform(env.timebase, s / trend)


def _symbol_samples(env: RealWaveform, baud: float) -> int:
    sps = env.timebase.sample_rate_hz / baud
    if abs(sps - round(sps)) > 1e-9 or round(sps) < 4:
        raise SignalError("bad-rate", "need an integer >= 4 samples per symbol")
    return int(round(sps))


def _split_levels(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Two-means split of sample values; returns (low values, high values, threshold)."""
    lo, hi = np.min(samples), np.max(samples)
    thr = 0.5 * (lo + hi)
    for _ in range(32):
        high = samples[samples > thr]
        low = samples[samples <= thr]
        if high.size == 0 or low.size == 0:
            break
        new_thr = 0.5 * (np.mean(high) + np.mean(low))
        if new_thr == thr:
            break
        thr = new_thr
    return samples[samples <= thr], samples[samples > thr], thr


def _opening(traces: np.ndarray, col: int) -> float:
    """Normalized eye opening of one sampling column of the trace matrix."""
    vals = traces[:, col]
    low, high, _ = _split_levels(vals)
    if low.size == 0 or high.size == 0:
        return -1.0
    span = np.mean(high) - np.mean(low)
    if span <= 0:
        return -1.0
    return float((np.min(high) - np.max(low)) / span)


def eye_diagram(env: RealWaveform, baud: float, trace_symbols: int = 2) -> EyeDiagram:
    """Fold the envelope into two-symbol traces and score the eye opening."""
    sps = _symbol_samples(env, baud)
    n_sym = env.timebase.n_samples // sps
    if n_sym < 50:
        raise SignalError("record-too-short", "need at least 50 symbols for an eye diagram")
    span = trace_symbols * sps
    n_traces = (env.timebase.n_samples - span) // sps
    traces = np.lib.stride_tricks.sliding_window_view(env.samples, span)[:: sps][:n_traces]
    # score at candidate instants across the central symbol
    cols = (sps // 2) + np.arange(sps)
    opening = max(_opening(traces, int(c)) for c in cols)
    return EyeDiagram(trace_matrix=np.array(traces), samples_per_symbol=sps, eye_opening=opening)


def demod_ask(env: RealWaveform, baud: float, ref_bits: np.ndarray) -> BerReport:
    """Slice the recovered envelope against the reference bits.

    Symbol timing is chosen by scanning a one-symbol range of sampling
    offsets for the widest eye; the threshold is the two-means split of the
    decision samples.  Both steps are scale-invariant, so any overall gain
    on the envelope leaves the BER unchanged.
    """
    ref = np.asarray(ref_bits).astype(np.uint8)
    if ref.size == 0:
        raise SignalError("no-data", "reference bit sequence is empty")
    sps = _symbol_samples(env, baud)
    if ref.size * sps > env.timebase.n_samples:
        raise SignalError("record-too-short", "record covers fewer symbols than ref_bits")
    best = (-np.inf, 0)
    for off in range(sps):
        idx = off + np.arange(ref.size) * sps
        vals = env.samples[idx]
        low, high, _ = _split_levels(vals)
        if low.size == 0 or high.size == 0:
            continue
        span = np.mean(high) - np.mean(low)
        score = (np.min(high) - np.max(low)) / span if span > 0 else -np.inf
        if score > best[0]:
            best = (score, off)
    off = best[1]
    vals = env.samples[off + np.arange(ref.size) * sps]
    _, _, thr = _split_levels(vals)
    bits_hat = (vals > thr).astype(np.uint8)
    n_err = int(np.count_nonzero(bits_hat != ref))
    return BerReport(
        n_bits=int(ref.size),
        n_errors=n_err,
        ber=n_err / ref.size,
        threshold_used=float(thr),
        timing_offset_used=int(off),
    )
