"""Pipeline runner: artifact contract, metrics structure, reproducibility.

The headline invariant: a fixed scenario + seed produces byte-identical
metrics regardless of how many worker threads execute the repeats.
"""
import json

import pytest

from jrcss.errors import ConfigError
from jrcss.pipelines import run
from jrcss.scenario import build_scenario, scenario_digest, scenario_to_dict


def test_generate_artifact_contract(tmp_path):
    s = build_scenario({})
    rep = run(s, tmp_path)
    assert rep.pipeline == "generate"
    assert rep.scenario_digest == scenario_digest(s)
    assert rep.artifacts == ["ask_envelope.csv", "metrics.json", "tx_spectrum.csv"]
    assert rep.wall_time_s > 0
    on_disk = json.loads((tmp_path / "metrics.json").read_text())
    assert on_disk == rep.metrics
    report = json.loads((tmp_path / "run_report.json").read_text())
    assert report["scenario"] == scenario_to_dict(s)
    assert report["artifacts"] == rep.artifacts
    assert on_disk["n_bits"] == 2000
    assert on_disk["rf_rms"] > 0


SENSE_RAW = {
    "pipeline": "sense",
    "repeats": 3,
    "sut": {"kind": "tone", "freq_hz": 1.5e9},
    "sbs": {"peak_gain_db": 30.0},
    "sense": {"osc_snr_db": 20.0, "bfs_jitter_hz": 5e6},
}


def run_bytes(raw, tmp_path, tag):
    out = tmp_path / tag
    run(build_scenario(raw), out)
    return (out / "metrics.json").read_bytes(), (out / "frequency_estimates.json").read_bytes()


def test_sense_metrics_identical_across_thread_counts(tmp_path, monkeypatch):
    monkeypatch.setenv("JRCSS_THREADS", "1")
    m1, e1 = run_bytes(SENSE_RAW, tmp_path, "t1")
    monkeypatch.setenv("JRCSS_THREADS", "4")
    m4, e4 = run_bytes(SENSE_RAW, tmp_path, "t4")
    monkeypatch.delenv("JRCSS_THREADS")
    m_default, e_default = run_bytes(SENSE_RAW, tmp_path, "td")
    assert m1 == m4 == m_default
    assert e1 == e4 == e_default
    metrics = json.loads(m1)
    stats = metrics["per_tone"]["1.5e+09"]
    print(f"tone stats over noisy repeats: {stats}")
    assert stats["n"] == 3  # one sweep per repeat
    assert abs(stats["mean_error_hz"]) < 10e6
    assert metrics["band_start_hz"] == 0.0
    assert metrics["band_stop_hz"] == 6e9
    rows = json.loads(e1)
    assert len(rows) == 3
    # positive BFS jitter pushes the reference crossing out of the sweep
    # (the gain center sits exactly at the band edge), so calibration is
    # per-repeat here; the trigger anchor keeps the estimates good anyway
    assert all(isinstance(r["calibrated"], bool) for r in rows)
    assert {r["repeat"] for r in rows} == {0, 1, 2}


def test_sense_noiseless_run_is_calibrated(tmp_path):
    raw = {"pipeline": "sense", "sut": {"kind": "tone", "freq_hz": 1.5e9},
           "sbs": {"peak_gain_db": 30.0}}
    rep = run(build_scenario(raw), tmp_path)
    rows = json.loads((tmp_path / "frequency_estimates.json").read_text())
    assert len(rows) == 1
    assert rows[0]["calibrated"] is True
    assert abs(rows[0]["freq_hz"] - 1.5e9) < 5e6


def test_rate_study_two_tone(tmp_path):
    raw = {
        "pipeline": "rate-study",
        "adc_rates_hz": [100e6, 10e6],
        "chirp": {"n_periods": 3},
        "sut": {"kind": "multitone", "freqs_hz": [1.92e9, 2.0e9]},
        "sbs": {"peak_gain_db": 30.0},
    }
    rep = run(build_scenario(raw), tmp_path)
    assert rep.artifacts == ["metrics.json", "resolution.csv"]
    rates = rep.metrics["rates"]
    print(f"rate study: {rates}")
    assert rates["1e+08"]["resolved"] is True
    # a valley that dips to zero is -inf dB, which serializes as null
    v = rates["1e+08"]["worst_valley_db"]
    assert v is None or v <= -3.0
    assert rates["1e+07"]["resolved"] is False
    header = (tmp_path / "resolution.csv").read_text().splitlines()[0]
    assert header == "adc_rate_hz,resolved,worst_valley_db,n_sweeps"


def test_comm_clean_channel(tmp_path):
    rep = run(build_scenario({"pipeline": "comm"}), tmp_path)
    assert rep.artifacts == ["ber.json", "compensated_waveform.csv", "eye.csv", "metrics.json"]
    m = rep.metrics
    print(f"clean comm: ber={m['ber']}, eye_post={m['eye_opening_post']:.3f}")
    assert m["ber"] == 0.0
    assert m["n_bits"] == 2000
    assert m["eye_opening_post"] > 0.5
    ber = json.loads((tmp_path / "ber.json").read_text())
    assert ber["n_errors"] == 0


def test_radar_range_default_target(tmp_path):
    rep = run(build_scenario({"pipeline": "radar-range"}), tmp_path)
    assert rep.artifacts == ["metrics.json", "range_profile.csv", "ranging.csv"]
    m = rep.metrics
    print(f"single target: max error {m['max_abs_error_m'] * 1e3:.3f} mm, "
          f"width {m['mean_width_3db_m'] * 1e3:.2f} mm")
    assert m["max_abs_error_m"] < 2e-3
    assert m["range_bin_m"] == pytest.approx(0.025, rel=1e-3)
    assert 0.020 < m["mean_width_3db_m"] < 0.026
    assert "separation_mean_m" not in m  # single scatterer


def test_radar_isar_requires_rotation(tmp_path):
    raw = {"pipeline": "radar-isar", "scene": {"turntable": {"rotation_period_s": 0.0}}}
    with pytest.raises(ConfigError, match="rotation_period_s"):
        run(build_scenario(raw), tmp_path)
