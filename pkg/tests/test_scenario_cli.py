"""Scenario schema validation and the command-line front end.

Config mistakes must exit 2 with the offending JSON path in the message,
physical inconsistencies exit 3, and runtime signal-chain failures exit 4;
the success path prints a machine-readable report line.
"""
import json
import re
from pathlib import Path

import pytest

from jrcss.cli import main
from jrcss.errors import ConfigError, PhysicsError
from jrcss.scenario import (
    PIPELINES,
    build_scenario,
    load_scenario,
    scenario_digest,
    scenario_to_dict,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def test_empty_object_is_a_complete_scenario():
    s = build_scenario({})
    assert s.pipeline == "generate"
    assert (s.chirp.f_start_hz, s.chirp.f_stop_hz, s.chirp.period_s) == (10.8e9, 4.8e9, 4e-6)
    assert (s.ask.carrier_hz, s.ask.baud_rate, s.ask.n_bits) == (3e9, 0.5e9, 2000)
    assert s.sbs.bfs_hz == 10.8e9 and s.sbs.pump_offset_hz == 0.0
    assert s.scene.turntable.center_range_m == 1.47
    assert s.sense.osc_rate_hz == 100e6
    assert s.adc_rates_hz == (100e6, 50e6, 20e6, 10e6)
    assert s.sim_sample_rate_hz == 40e9


def test_digest_is_content_addressed():
    a = build_scenario({})
    b = build_scenario({"seed": 0})  # explicit default
    assert scenario_digest(a) == scenario_digest(b)
    c = build_scenario({"seed": 1})
    assert scenario_digest(a) != scenario_digest(c)
    # the fully-resolved dict re-validates to the same identity
    assert scenario_digest(build_scenario(scenario_to_dict(a))) == scenario_digest(a)


@pytest.mark.parametrize(
    "raw, code, path_fragment",
    [
        ({"chirp": {"period_s": 0}}, "schema-violation", "chirp.period_s"),
        ({"chirp": {"bogus": 1}}, "unknown-field", "chirp.bogus"),
        ({"bogus": 1}, "unknown-field", "bogus"),
        ({"seed": "abc"}, "schema-violation", "seed"),
        ({"seed": -1}, "schema-violation", "seed"),
        ({"repeats": 0}, "schema-violation", "repeats"),
        ({"pipeline": "fly"}, "schema-violation", "pipeline"),
        ({"ask": {"amplitude_levels": [1.0, 0.2]}}, "schema-violation", "ask.amplitude_levels"),
        ({"ask": {"prbs_order": 9}}, "schema-violation", "ask.prbs_order"),
        ({"sense": {"threshold_frac": 1.5}}, "schema-violation", "sense.threshold_frac"),
        ({"sense": {"tone_sweep_hz": [1e9, -2e9]}}, "schema-violation", "sense.tone_sweep_hz"),
        ({"scene": {"scatterers": []}}, "schema-violation", "scene.scatterers"),
        ({"scene": {"scatterers": [{"x_m": 0, "z_m": 1}]}}, "unknown-field", "scene.scatterers[0].z_m"),
        ({"rf": {"passband_hz": [5e9, 4e9]}}, "schema-violation", "rf.passband_hz"),
        ({"sut": {"kind": "warble"}}, "schema-violation", "sut.kind"),
        ({"chirp": "fast"}, "schema-violation", "chirp"),
    ],
)
def test_schema_errors_carry_field_paths(raw, code, path_fragment):
    with pytest.raises(ConfigError) as ei:
        build_scenario(raw)
    assert ei.value.code == code
    assert path_fragment in str(ei.value)


def test_non_object_top_level():
    with pytest.raises(ConfigError, match="schema-violation"):
        build_scenario([1, 2])


def test_dataclass_validator_errors_become_invalid_section():
    with pytest.raises(ConfigError) as ei:
        build_scenario({"chirp": {"f_start_hz": 5e9, "f_stop_hz": 5e9}})
    assert ei.value.code == "invalid-section"


@pytest.mark.parametrize(
    "raw",
    [
        {"ask": {"carrier_hz": 25e9}},  # carrier at/above simulation Nyquist
        {"chirp": {"f_start_hz": 18e9, "f_stop_hz": 12e9}},  # beat exceeds Nyquist
        {"adc_rates_hz": [30e6]},  # does not divide the simulation rate
        {"sense": {"osc_rate_hz": 30e6}},
        {"chirp": {"period_s": 1.00000001e-6}},  # fractional sample count
    ],
)
def test_physical_inconsistencies_are_physics_errors(raw):
    with pytest.raises(PhysicsError) as ei:
        build_scenario(raw)
    assert ei.value.code == "physical-inconsistency"
    assert not isinstance(ei.value, ConfigError)


def test_load_scenario_file_errors(tmp_path):
    with pytest.raises(ConfigError) as ei:
        load_scenario(tmp_path / "missing.json")
    assert ei.value.code == "no-such-file"
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError) as ei:
        load_scenario(bad)
    assert ei.value.code == "parse-error"
    ok = tmp_path / "ok.json"
    ok.write_text('{"pipeline": "sense"}')
    assert load_scenario(ok).pipeline == "sense"


def test_shipped_scenarios_all_validate():
    files = sorted(SCENARIO_DIR.glob("*.json"))
    assert len(files) >= 20
    for f in files:
        s = load_scenario(f)
        assert s.pipeline in PIPELINES, f.name


# ---------------------------------------------------------------------------
# CLI process behavior (in-process; main() returns the exit code)

def test_cli_validate_defaults(capsys):
    assert main(["validate"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert re.fullmatch(r"[0-9a-f]{64}", out["digest"])
    assert out["pipeline"] == "generate"


def test_cli_seed_override_changes_digest(capsys):
    main(["validate"])
    base = json.loads(capsys.readouterr().out)["digest"]
    main(["validate", "--seed", "5"])
    seeded = json.loads(capsys.readouterr().out)["digest"]
    assert base != seeded


def test_cli_config_errors_exit_2(tmp_path, capsys):
    assert main(["sense", "--scenario", str(tmp_path / "missing.json")]) == 2
    assert "no-such-file" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("[not a scenario")
    assert main(["generate", "--scenario", str(bad)]) == 2
    assert "parse-error" in capsys.readouterr().err
    assert main(["generate", "--repeats", "0"]) == 2
    assert "repeats" in capsys.readouterr().err


def test_cli_physics_error_exit_3(tmp_path, capsys):
    f = tmp_path / "hot.json"
    f.write_text(json.dumps({"ask": {"carrier_hz": 25e9}}))
    assert main(["validate", "--scenario", str(f)]) == 3
    assert "physical-inconsistency" in capsys.readouterr().err


def test_cli_runtime_signal_error_exit_4(tmp_path, capsys):
    f = tmp_path / "far.json"
    f.write_text(json.dumps({"scene": {"turntable": {"center_range_m": 1000.0}}}))
    assert main(["radar-range", "--scenario", str(f), "--out", str(tmp_path / "o")]) == 4
    assert "target-out-of-window" in capsys.readouterr().err


def test_cli_bad_thread_cap_exit_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("JRCSS_THREADS", "lots")
    rc = main(["radar-range", "--repeats", "2", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "bad-thread-cap" in capsys.readouterr().err


def test_cli_generate_success_path(tmp_path, capsys):
    rc = main(["generate", "--out", str(tmp_path / "o")])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pipeline"] == "generate"
    for name in ("tx_spectrum.csv", "ask_envelope.csv", "metrics.json"):
        assert name in out["artifacts"]
        assert (tmp_path / "o" / name).is_file()
    metrics = json.loads((tmp_path / "o" / "metrics.json").read_text())
    assert 5.5e9 < metrics["band_low_hz"] < 7e9
    assert 13e9 < metrics["band_high_hz"] < 14.6e9


def test_cli_subcommand_overrides_scenario_pipeline(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"pipeline": "sense"}))
    rc = main(["generate", "--scenario", str(f), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["pipeline"] == "generate"
