"""Scenario execution: build the shared transmit chain, run one receiver
pipeline, and emit plot-ready CSV plus machine-readable JSON metrics.

Artifact contract (all under the output directory):

- every pipeline writes ``metrics.json`` (byte-identical for a fixed
  scenario + seed: keys sorted, floats at shortest round-trip, non-finite
  values serialized as null) and ``run_report.json`` (adds wall time).
- generate      -> tx_spectrum.csv, ask_envelope.csv
- radar-range   -> ranging.csv, range_profile.csv
- radar-isar    -> isar_image.csv, psf.json
- comm          -> ber.json, eye.csv, compensated_waveform.csv
- sense         -> spectrogram.csv, frequency_estimates.json
- rate-study    -> resolution.csv

Monte Carlo repeats run on a thread pool (numpy FFTs release the GIL);
``JRCSS_THREADS`` caps the worker count.  All randomness is drawn from
per-task seeds split deterministically from the scenario seed, so results
do not depend on the thread count.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .comms import compensate_envelope, demod_ask, eye_diagram, self_mix
from .core import ComplexEnvelope, RealWaveform, Timebase, decimate, fft_spectrum
from .errors import ConfigError, SignalError
from .photonics import cs_dsb_modulate, gen_sut, pd1_detect, sbs_filter
from .radar import dechirp, estimate_range, isar_image, measure_psf, range_profile, two_point_valley
from .scenario import Scenario, scenario_digest, scenario_to_dict
from .scene import apply_rf_response, echo, scatterer_ranges
from .sensing import assemble_spectrogram, detect_pulses, fttm_estimate, resolution_study
from .waveform import AskPlan, ChirpPlan, cs_tssb_modulate, gen_ask, gen_lfm, gen_prbs, photodetect


@dataclass(frozen=True)
class RunReport:
    scenario_digest: str
    pipeline: str
    metrics: dict
    artifacts: list[str]
    wall_time_s: float


# ---------------------------------------------------------------------------
# plumbing

def _max_workers(n_tasks: int) -> int:
    cap = os.environ.get("JRCSS_THREADS", "").strip()
    if cap:
        try:
            cap_n = int(cap)
        except ValueError:
            raise ConfigError("bad-thread-cap", f"JRCSS_THREADS={cap!r} is not an integer")
        if cap_n < 1:
            raise ConfigError("bad-thread-cap", "JRCSS_THREADS must be >= 1")
    else:
        cap_n = os.cpu_count() or 1
    return max(1, min(n_tasks, cap_n, os.cpu_count() or 1))


def _map_tasks(fn, args_list):
    """Ordered map over tasks, threaded when it helps."""
    workers = _max_workers(len(args_list))
    if workers == 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def _jsonable(obj):
    """Builtin-ified copy with non-finite floats mapped to null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _spawn_seeds(seed: int, n: int) -> list[int]:
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(n)]


# ---------------------------------------------------------------------------
# shared transmit chain

def _tx_chain(s: Scenario):
    """LFM + ASK through the twin-sideband modulator and the transmit PD."""
    lfm = gen_lfm(s.chirp, s.sim_sample_rate_hz)
    bits = gen_prbs(s.ask.prbs_seed, s.ask.n_bits, s.ask.prbs_order)
    plan = AskPlan(
        carrier_hz=s.ask.carrier_hz,
        baud_rate=s.ask.baud_rate,
        bits=bits,
        amplitude_levels=s.ask.amplitude_levels,
        pulse_shape=s.ask.pulse_shape,
        rolloff=s.ask.rolloff,
    )
    ask_w = gen_ask(plan, lfm.timebase)
    field = cs_tssb_modulate(lfm, ask_w, s.modulator)
    rf = photodetect(field)
    return lfm, bits, plan, field, rf


def _rf_chirp(s: Scenario) -> ChirpPlan:
    """The photodetected beat sweeps at chirp +- ASK carrier offset."""
    return ChirpPlan(
        f_start_hz=s.chirp.f_start_hz + s.ask.carrier_hz,
        f_stop_hz=s.chirp.f_stop_hz + s.ask.carrier_hz,
        period_s=s.chirp.period_s,
        n_periods=s.chirp.n_periods,
    )


def _ref_phase_s(s: Scenario) -> float:
    """Intra-sweep time at which the band-start frequency crosses the gain."""
    return s.chirp.period_s * (s.chirp.f_start_hz - s.sbs.bfs_hz) / abs(s.chirp.bandwidth_hz)


# ---------------------------------------------------------------------------
# pipelines

def _run_generate(s: Scenario, out: Path) -> dict:
    lfm, bits, plan, field, rf = _tx_chain(s)
    rf = apply_rf_response(rf, replace(s.rf, noise_snr_db=None))
    spec = fft_spectrum(rf)
    keep = spec.magnitude_db >= spec.magnitude_db.max() - 60.0
    stride = max(1, int(np.count_nonzero(keep)) // 4000)
    rows = list(zip(spec.freq_axis_hz[keep][::stride], spec.magnitude_db[keep][::stride]))
    _write_csv(out / "tx_spectrum.csv", ["freq_hz", "magnitude_db"], rows)

    env = gen_ask(plan, lfm.timebase)
    n_head = min(env.timebase.n_samples, 4000)
    t = env.timebase.t()[:n_head]
    _write_csv(out / "ask_envelope.csv", ["time_s", "amplitude"],
               list(zip(t, np.abs(env.samples[:n_head]))))

    pk = spec.magnitude_db.max()
    occupied = spec.freq_axis_hz[spec.magnitude_db >= pk - 20.0]
    return {
        "n_samples": rf.timebase.n_samples,
        "sim_sample_rate_hz": rf.timebase.sample_rate_hz,
        "rf_rms": float(np.sqrt(np.mean(rf.samples**2))),
        "band_low_hz": float(occupied.min()),
        "band_high_hz": float(occupied.max()),
        "sweep_rate_hz_per_s": s.chirp.sweep_rate_hz_per_s,
        "n_bits": int(bits.size),
    }


def _run_radar_range(s: Scenario, out: Path) -> dict:
    _, _, _, _, rf = _tx_chain(s)
    tx = apply_rf_response(rf, replace(s.rf, noise_snr_db=None))
    plan = _rf_chirp(s)
    n_peaks = len(s.scene.scatterers)
    if s.radar.n_slow_times > 1:
        slow = np.linspace(0.0, s.radar.slow_span_s, s.radar.n_slow_times)
    else:
        slow = np.array([0.0])
    seeds = _spawn_seeds(s.seed, s.repeats)

    def one_repeat(task):
        rep, seed = task
        rng_seeds = _spawn_seeds(seed, len(slow))
        rows = []
        for i, st in enumerate(slow):
            rx = echo(tx, s.scene, slow_time_s=float(st))
            if s.rf.noise_snr_db is not None:
                rx = apply_rf_response(rx, s.rf, rng_seed=rng_seeds[i])
            beat = dechirp(rx, tx)
            prof = range_profile(beat, plan, s.radar.adc_rate_hz, zero_pad=s.radar.zero_pad)
            peaks = estimate_range(prof, n_peaks=n_peaks)
            true_r = np.sort(np.atleast_1d(scatterer_ranges(s.scene, float(st))))
            est_r = np.sort([p.range_m for p in peaks])
            err = (est_r - true_r[: est_r.size]) if est_r.size else np.array([])
            rows.append((rep, float(st), true_r, est_r, err,
                         [p.width_3db_m for p in peaks]))
        return rows

    all_rows = [r for rows in _map_tasks(one_repeat, list(enumerate(seeds))) for r in rows]

    csv_rows = []
    for rep, st, true_r, est_r, err, widths in all_rows:
        csv_rows.append((rep, st,
                         ";".join(repr(float(v)) for v in true_r),
                         ";".join(repr(float(v)) for v in est_r),
                         ";".join(repr(float(v)) for v in err),
                         ";".join(repr(float(v)) for v in widths)))
    _write_csv(out / "ranging.csv",
               ["repeat", "slow_time_s", "true_ranges_m", "est_ranges_m", "errors_m", "widths_3db_m"],
               csv_rows)

    # reference profile from a clean first sweep
    rx0 = echo(tx, s.scene, slow_time_s=float(slow[0]))
    prof0 = range_profile(dechirp(rx0, tx), plan, s.radar.adc_rate_hz, zero_pad=s.radar.zero_pad)
    stride = max(1, prof0.range_axis_m.size // 5000)
    _write_csv(out / "range_profile.csv", ["range_m", "magnitude_db"],
               list(zip(prof0.range_axis_m[::stride], prof0.magnitude_db[::stride])))

    errs = np.concatenate([e for _, _, _, _, e, _ in all_rows if e.size]) if all_rows else np.array([])
    widths = np.concatenate([w for *_, w in all_rows if len(w)])
    metrics = {
        "n_measurements": len(all_rows),
        "n_peaks_requested": n_peaks,
        "max_abs_error_m": float(np.max(np.abs(errs))) if errs.size else None,
        "mean_error_m": float(np.mean(errs)) if errs.size else None,
        "rms_error_m": float(np.sqrt(np.mean(errs**2))) if errs.size else None,
        "mean_width_3db_m": float(np.mean(widths)) if widths.size else None,
        "range_bin_m": float(prof0.range_bin_m),
    }
    if n_peaks == 2:
        seps = [abs(e[1] - e[0]) for _, _, _, e, _, _ in all_rows if e.size == 2]
        true_seps = [abs(t[1] - t[0]) for _, _, t, _, _, _ in all_rows]
        if seps:
            dev = [abs(a - b) for a, b in zip(seps, true_seps)]
            metrics["separation_mean_m"] = float(np.mean(seps))
            metrics["separation_max_dev_m"] = float(np.max(dev))
    return metrics


def _run_radar_isar(s: Scenario, out: Path) -> dict:
    _, _, _, _, rf = _tx_chain(s)
    tx = apply_rf_response(rf, replace(s.rf, noise_snr_db=None))
    plan = _rf_chirp(s)
    if s.scene.turntable.rotation_period_s <= 0:
        raise ConfigError("invalid-section",
                          "radar-isar needs scene.turntable.rotation_period_s > 0")
    n = s.radar.n_slow_times
    slow = np.arange(n) * (s.radar.accumulation_s / n)
    seeds = _spawn_seeds(s.seed, n)

    def one_sweep(task):
        i, st = task
        rx = echo(tx, s.scene, slow_time_s=float(st))
        if s.rf.noise_snr_db is not None:
            rx = apply_rf_response(rx, s.rf, rng_seed=seeds[i])
        beat = dechirp(rx, tx)
        tb = beat.timebase
        return RealWaveform(Timebase(tb.sample_rate_hz, tb.n_samples, t0_s=float(st)), beat.samples)

    beats = _map_tasks(one_sweep, list(enumerate(slow)))
    img = isar_image(beats, plan, plan.f_start_hz + plan.sweep_rate_hz_per_s * plan.period_s / 2,
                     s.radar.accumulation_s, s.scene.turntable.rotation_period_s,
                     s.radar.adc_rate_hz, zero_pad=s.radar.isar_zero_pad)

    header = ["range_m\\cross_m"] + [repr(float(c)) for c in img.cross_range_axis_m]
    rows = [[repr(float(img.range_axis_m[i]))] + [repr(float(v)) for v in img.image_db[i]]
            for i in range(img.range_axis_m.size)]
    with (out / "isar_image.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)

    metrics: dict = {
        "n_sweeps": img.n_sweeps,
        "wavelength_m": img.wavelength_m,
        "delta_theta_rad": img.delta_theta_rad,
        "cross_bin_m": float(img.cross_range_axis_m[1] - img.cross_range_axis_m[0]),
    }
    psf_obj: dict = {}
    if len(s.scene.scatterers) == 1:
        rep = measure_psf(img)
        psf_obj = {
            "range_width_3db_m": rep.range_width_3db_m,
            "cross_range_width_3db_m": rep.cross_range_width_3db_m,
            "peak_range_m": rep.peak_range_m,
            "peak_cross_range_m": rep.peak_cross_range_m,
            "peak_db": rep.peak_db,
        }
    elif len(s.scene.scatterers) == 2:
        tp = two_point_valley(img)
        psf_obj = {
            "peak_a_db": tp.peak_a_db,
            "peak_b_db": tp.peak_b_db,
            "valley_depth_db": tp.valley_depth_db,
            "location_a_m": list(tp.location_a_m),
            "location_b_m": list(tp.location_b_m),
        }
    _write_json(out / "psf.json", psf_obj)
    metrics.update(psf_obj)
    return metrics


def _run_comm(s: Scenario, out: Path) -> dict:
    _, bits, plan, _, rf = _tx_chain(s)
    seeds = _spawn_seeds(s.seed, 1)
    rx = apply_rf_response(rf, s.rf, rng_seed=seeds[0])
    env = self_mix(rx, s.comm.selfmix_lowpass_hz)

    # pre-compensation upper envelope across each sweep, 100 ns blocks
    n = env.timebase.n_samples
    n_blocks = max(8, int(round(s.chirp.period_s / 100e-9))) * s.chirp.n_periods
    n_blocks = min(n_blocks, n)
    seg = env.samples[: n - n % n_blocks].reshape(n_blocks, -1).max(axis=1)
    per_sweep = seg.reshape(s.chirp.n_periods, -1)
    mono_frac = float(np.mean(np.diff(per_sweep, axis=1) > 0))
    span_db = float(np.mean(10 * np.log10(per_sweep[:, -1] / per_sweep[:, 0])))

    comp = compensate_envelope(env, s.ask.baud_rate, s.comm.trend_window_symbols)
    nsym = int(round(s.ask.baud_rate * s.chirp.period_s)) * s.chirp.n_periods
    ref = np.tile(bits, nsym // bits.size + 1)[:nsym]
    eye_pre = eye_diagram(env, s.ask.baud_rate)
    eye_post = eye_diagram(comp, s.ask.baud_rate)
    ber = demod_ask(comp, s.ask.baud_rate, ref)

    _write_json(out / "ber.json", {
        "n_bits": ber.n_bits, "n_errors": ber.n_errors, "ber": ber.ber,
        "threshold_used": ber.threshold_used, "timing_offset_used": ber.timing_offset_used,
    })
    traces = eye_post.trace_matrix[:200]
    _write_csv(out / "eye.csv",
               [f"s{j}" for j in range(traces.shape[1])],
               [tuple(row) for row in traces])
    n_head = min(comp.timebase.n_samples, 8000)
    _write_csv(out / "compensated_waveform.csv", ["time_s", "amplitude"],
               list(zip(comp.timebase.t()[:n_head], comp.samples[:n_head])))
    return {
        "ber": ber.ber,
        "n_bits": ber.n_bits,
        "n_errors": ber.n_errors,
        "eye_opening_pre": eye_pre.eye_opening,
        "eye_opening_post": eye_post.eye_opening,
        "trend_monotone_fraction": mono_frac,
        "trend_span_db": span_db,
        "baud_rate": s.ask.baud_rate,
    }


def _tone_list(s: Scenario) -> list[float]:
    if s.sut.kind == "tone":
        return [s.sut.freq_hz]
    if s.sut.kind == "multitone":
        return list(s.sut.freqs_hz)
    return []


def _run_sense(s: Scenario, out: Path) -> dict:
    _, _, _, field, _ = _tx_chain(s)
    period = s.chirp.period_s
    f_b = abs(s.chirp.bandwidth_hz)
    f_x = s.sbs.pump_offset_hz
    expect_ref = s.sbs.pump_offset_hz == 0.0
    ref_phase = _ref_phase_s(s)
    factor = int(round(s.sim_sample_rate_hz / s.sense.osc_rate_hz))

    def acquire(mod, seed):
        rng = np.random.default_rng(seed)
        sbs = s.sbs
        if s.sense.bfs_jitter_hz > 0:
            sbs = replace(sbs, bfs_hz=sbs.bfs_hz + rng.normal(0.0, s.sense.bfs_jitter_hz))
        low = decimate(pd1_detect(sbs_filter(mod, sbs)), factor)
        if s.sense.osc_snr_db is not None:
            sigma = float(np.max(np.abs(low.samples))) / 10 ** (s.sense.osc_snr_db / 20)
            low = RealWaveform(low.timebase, low.samples + rng.normal(0.0, sigma, low.timebase.n_samples))
        events = detect_pulses(low, period, s.sense.threshold_frac)
        ests = fttm_estimate(events, f_b, period, f_x_hz=f_x, ref_phase_s=ref_phase,
                             expect_reference=expect_ref)
        return low, events, ests

    sweep = list(s.sense.tone_sweep_hz)
    if sweep:
        # one acquisition per listed input frequency (repeats not used)
        seeds = _spawn_seeds(s.seed, len(sweep))

        def one_tone(task):
            i, tone = task
            sut = gen_sut(replace(s.sut, kind="tone", freq_hz=tone), field.timebase)
            return acquire(cs_dsb_modulate(field, sut), seeds[i])

        results = _map_tasks(one_tone, list(enumerate(sweep)))
    else:
        sut = gen_sut(s.sut, field.timebase)
        mod = cs_dsb_modulate(field, sut)
        seeds = _spawn_seeds(s.seed, s.repeats)
        results = _map_tasks(lambda t: acquire(mod, t[1]), list(enumerate(seeds)))

    est_rows = []
    for rep, (_, events, ests) in enumerate(results):
        for e in ests:
            est_rows.append({"repeat": rep, "sweep_index": e.sweep_index,
                             "freq_hz": e.freq_hz, "time_s": e.time_s,
                             "calibrated": e.calibrated})
    _write_json(out / "frequency_estimates.json", est_rows)

    gram = assemble_spectrogram(results[0][0], period, f_b, f_x_hz=f_x,
                                ref_phase_s=ref_phase, blank_s=s.sense.blank_s)
    rows = [[repr(float(gram.freq_axis_hz[i]))] + [repr(float(v)) for v in gram.intensity[i]]
            for i in range(gram.freq_axis_hz.size)]
    with (out / "spectrogram.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["freq_hz\\sweep_t_s"] + [repr(float(t)) for t in gram.time_axis_s])
        w.writerows(rows)

    metrics: dict = {
        "n_repeats": s.repeats,
        "n_events_total": int(sum(len(ev) for _, ev, _ in results)),
        "n_estimates_total": len(est_rows),
        "band_start_hz": f_x,
        "band_stop_hz": f_x + f_b,
    }
    if sweep:
        per_tone = {}
        times, truths = [], []
        for i, tone in enumerate(sweep):
            got = [e.freq_hz for _, _, ests in [results[i]] for e in ests]
            per_tone[f"{tone:g}"] = _tone_stats(got, tone)
            for _, _, ests in [results[i]]:
                for e in ests:
                    times.append(e.time_s - (ref_phase + e.sweep_index * period))
                    truths.append(tone)
        errors = [v["max_abs_error_hz"] for v in per_tone.values() if v["max_abs_error_hz"] is not None]
        metrics["per_tone"] = per_tone
        metrics["worst_abs_error_hz"] = max(errors) if errors else None
        metrics["n_tones_detected"] = sum(1 for v in per_tone.values() if v["n"] > 0)
        if len(times) >= 2:
            slope = float(np.polyfit(np.array(times), np.array(truths), 1)[0])
            metrics["slope_hz_per_s"] = slope
            metrics["slope_expected_hz_per_s"] = f_b / period
            metrics["slope_rel_error"] = abs(slope * period / f_b - 1.0)
    else:
        tones = _tone_list(s)
        if tones:
            per_tone = {}
            half_gap = min(np.diff(sorted(tones)), default=np.inf) / 2 if len(tones) > 1 else np.inf
            window = min(60e6, half_gap)
            for f in tones:
                got = [r["freq_hz"] for r in est_rows if abs(r["freq_hz"] - f) < window]
                per_tone[f"{f:g}"] = _tone_stats(got, f)
            metrics["per_tone"] = per_tone
    return metrics


def _tone_stats(got: list[float], f: float) -> dict:
    arr = np.asarray(got, dtype=float)
    return {
        "n": int(arr.size),
        "mean_error_hz": float(np.mean(arr) - f) if arr.size else None,
        "std_hz": float(np.std(arr)) if arr.size > 1 else None,
        "max_abs_error_hz": float(np.max(np.abs(arr - f))) if arr.size else None,
    }


def _run_rate_study(s: Scenario, out: Path) -> dict:
    _, _, _, field, _ = _tx_chain(s)
    sut = gen_sut(s.sut, field.timebase)
    mod = cs_dsb_modulate(field, sut)
    pd1 = pd1_detect(sbs_filter(mod, s.sbs))
    results = resolution_study(pd1, s.chirp.period_s, s.adc_rates_hz,
                               threshold_frac=s.sense.threshold_frac,
                               ref_phase_s=_ref_phase_s(s))
    _write_csv(out / "resolution.csv",
               ["adc_rate_hz", "resolved", "worst_valley_db", "n_sweeps"],
               [(r.adc_rate_hz, int(r.resolved), r.worst_valley_db, r.n_sweeps) for r in results])
    return {
        "rates": {
            f"{r.adc_rate_hz:g}": {"resolved": bool(r.resolved),
                                   "worst_valley_db": r.worst_valley_db}
            for r in results
        }
    }


_PIPELINE_FNS = {
    "generate": _run_generate,
    "radar-range": _run_radar_range,
    "radar-isar": _run_radar_isar,
    "comm": _run_comm,
    "sense": _run_sense,
    "rate-study": _run_rate_study,
}


def run(scenario: Scenario, out_dir: str | Path | None = None) -> RunReport:
    """Execute the scenario's pipeline and write artifacts + reports."""
    t_start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fn = _PIPELINE_FNS[scenario.pipeline]
    metrics = fn(scenario, out)
    _write_json(out / "metrics.json", metrics)
    digest = scenario_digest(scenario)
    artifacts = sorted(p.name for p in out.iterdir() if p.is_file() and p.name != "run_report.json")
    report = RunReport(
        scenario_digest=digest,
        pipeline=scenario.pipeline,
        metrics=_jsonable(metrics),
        artifacts=artifacts,
        wall_time_s=time.perf_counter() - t_start,
    )
    _write_json(out / "run_report.json", {
        "scenario_digest": report.scenario_digest,
        "pipeline": report.pipeline,
        "metrics": report.metrics,
        "artifacts": report.artifacts,
        "wall_time_s": report.wall_time_s,
        "scenario": scenario_to_dict(scenario),
    })
    return report
