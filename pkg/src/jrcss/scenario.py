"""Declarative scenario configs for the batch runner.

A scenario is a JSON object whose sections mirror the library dataclasses
(chirp, ask, modulator, sbs, scene, rf, sut) plus pipeline-specific knobs
(radar, sense, comm).  Every physical quantity carries an SI-unit suffix in
its key name (_hz, _s, _m, _db) so a config file can be audited without
opening the code.  Missing keys fall back to the bench defaults below; an
empty file ``{}`` is a complete, runnable scenario.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ConfigError, PhysicsError
from .photonics import SbsFilterSpec, SutSpec
from .scene import Scatterer, Scene, Turntable, RfResponseSpec
from .waveform import ChirpPlan, ModulatorSpec

PIPELINES = ("generate", "radar-range", "radar-isar", "comm", "sense", "rate-study")

# Bench defaults: negative 6-GHz sweep over 4 us, 3-GHz ASK carrier at
# 0.5 Gbaud, Brillouin shift equal to the sweep start so the sensing band
# begins at DC.
DEFAULT_SIM_RATE_HZ = 40e9
DEFAULT_ADC_RATES_HZ = (100e6, 50e6, 20e6, 10e6)


@dataclass(frozen=True)
class AskConfig:
    """Data-payload settings; the bit pattern itself is derived from a PRBS."""

    carrier_hz: float = 3.0e9
    baud_rate: float = 0.5e9
    n_bits: int = 2000
    prbs_seed: int = 7
    prbs_order: int = 15
    amplitude_levels: tuple[float, float] = (0.2, 1.0)
    pulse_shape: str = "rect"
    rolloff: float = 0.35


@dataclass(frozen=True)
class RadarParams:
    adc_rate_hz: float = 40e6
    zero_pad: int = 16
    n_slow_times: int = 1
    slow_span_s: float = 0.0
    accumulation_s: float = 2.2
    isar_zero_pad: int = 8


@dataclass(frozen=True)
class SenseParams:
    osc_rate_hz: float = 100e6
    threshold_frac: float = 0.3
    osc_snr_db: float | None = None
    bfs_jitter_hz: float = 0.0
    blank_s: float = 80e-9
    # Non-empty: run one acquisition per listed frequency (overriding the
    # configured tone) instead of repeating the configured input.
    tone_sweep_hz: tuple[float, ...] = ()


@dataclass(frozen=True)
class CommParams:
    selfmix_lowpass_hz: float = 2.5e9
    trend_window_symbols: int = 64


@dataclass(frozen=True)
class Scenario:
    pipeline: str = "generate"
    seed: int = 0
    repeats: int = 1
    output_dir: str = "out"
    sim_sample_rate_hz: float = DEFAULT_SIM_RATE_HZ
    adc_rates_hz: tuple[float, ...] = DEFAULT_ADC_RATES_HZ
    chirp: ChirpPlan = field(default_factory=lambda: ChirpPlan(10.8e9, 4.8e9, 4e-6, 1))
    ask: AskConfig = field(default_factory=AskConfig)
    modulator: ModulatorSpec = field(default_factory=ModulatorSpec)
    sbs: SbsFilterSpec = field(default_factory=SbsFilterSpec)
    scene: Scene = field(default_factory=lambda: Scene(scatterers=[Scatterer(0.0, 0.0)]))
    rf: RfResponseSpec = field(default_factory=RfResponseSpec)
    sut: SutSpec = field(default_factory=SutSpec)
    radar: RadarParams = field(default_factory=RadarParams)
    sense: SenseParams = field(default_factory=SenseParams)
    comm: CommParams = field(default_factory=CommParams)


# ---------------------------------------------------------------------------
# validation helpers: every reader carries the JSON field path so schema
# errors point at the offending key.

def _fail(code: str, path: str, why: str):
    raise ConfigError(code, f"{path}: {why}")


def _get_obj(raw: dict, path: str, key: str) -> dict:
    sub = raw.get(key, {})
    if not isinstance(sub, dict):
        _fail("schema-violation", f"{path}{key}", "expected an object")
    return sub


def _num(sub: dict, path: str, key: str, default, *, positive=False, nonneg=False,
         allow_none=False):
    val = sub.get(key, default)
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail("schema-violation", f"{path}.{key}", "expected a number")
    val = float(val)
    if positive and not val > 0:
        _fail("schema-violation", f"{path}.{key}", "must be > 0")
    if nonneg and val < 0:
        _fail("schema-violation", f"{path}.{key}", "must be >= 0")
    return val


def _int(sub: dict, path: str, key: str, default, *, minimum=None):
    val = sub.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        _fail("schema-violation", f"{path}.{key}", "expected an integer")
    if minimum is not None and val < minimum:
        _fail("schema-violation", f"{path}.{key}", f"must be >= {minimum}")
    return int(val)


def _str(sub: dict, path: str, key: str, default, *, choices=None):
    val = sub.get(key, default)
    if not isinstance(val, str):
        _fail("schema-violation", f"{path}.{key}", "expected a string")
    if choices is not None and val not in choices:
        _fail("schema-violation", f"{path}.{key}", f"must be one of {sorted(choices)}")
    return val


def _bool(sub: dict, path: str, key: str, default):
    val = sub.get(key, default)
    if not isinstance(val, bool):
        _fail("schema-violation", f"{path}.{key}", "expected true/false")
    return val


def _num_list(sub: dict, path: str, key: str, default, positive: bool = False) -> tuple[float, ...]:
    val = sub.get(key, default)
    if not isinstance(val, (list, tuple)) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
    ):
        _fail("schema-violation", f"{path}.{key}", "expected a list of numbers")
    if positive and any(v <= 0 for v in val):
        _fail("schema-violation", f"{path}.{key}", "entries must be > 0")
    return tuple(float(v) for v in val)


def _check_known(sub: dict, path: str, known: set[str]):
    for key in sub:
        if key not in known:
            _fail("unknown-field", f"{path}.{key}" if path else key, "not a recognized field")


def _build_chirp(raw: dict) -> ChirpPlan:
    sub = _get_obj(raw, "", "chirp")
    _check_known(sub, "chirp", {"f_start_hz", "f_stop_hz", "period_s", "n_periods"})
    return ChirpPlan(
        f_start_hz=_num(sub, "chirp", "f_start_hz", 10.8e9, positive=True),
        f_stop_hz=_num(sub, "chirp", "f_stop_hz", 4.8e9, positive=True),
        period_s=_num(sub, "chirp", "period_s", 4e-6, positive=True),
        n_periods=_int(sub, "chirp", "n_periods", 1, minimum=1),
    )


def _build_ask(raw: dict) -> AskConfig:
    sub = _get_obj(raw, "", "ask")
    _check_known(sub, "ask", {"carrier_hz", "baud_rate", "n_bits", "prbs_seed",
                              "prbs_order", "amplitude_levels", "pulse_shape", "rolloff"})
    levels = _num_list(sub, "ask", "amplitude_levels", [0.2, 1.0])
    if len(levels) != 2 or not 0 <= levels[0] < levels[1]:
        _fail("schema-violation", "ask.amplitude_levels", "expected [low, high] with 0 <= low < high")
    order = _int(sub, "ask", "prbs_order", 15)
    if order not in (7, 15, 23):
        _fail("schema-violation", "ask.prbs_order", "must be 7, 15, or 23")
    return AskConfig(
        carrier_hz=_num(sub, "ask", "carrier_hz", 3.0e9, positive=True),
        baud_rate=_num(sub, "ask", "baud_rate", 0.5e9, positive=True),
        n_bits=_int(sub, "ask", "n_bits", 2000, minimum=1),
        prbs_seed=_int(sub, "ask", "prbs_seed", 7, minimum=1),
        prbs_order=order,
        amplitude_levels=(levels[0], levels[1]),
        pulse_shape=_str(sub, "ask", "pulse_shape", "rect", choices={"rect", "raised-cosine"}),
        rolloff=_num(sub, "ask", "rolloff", 0.35, nonneg=True),
    )


def _build_modulator(raw: dict) -> ModulatorSpec:
    sub = _get_obj(raw, "", "modulator")
    _check_known(sub, "modulator", {"carrier_suppression_db", "sideband_rejection_db"})
    return ModulatorSpec(
        carrier_suppression_db=_num(sub, "modulator", "carrier_suppression_db", 30.0, nonneg=True),
        sideband_rejection_db=_num(sub, "modulator", "sideband_rejection_db", 30.0, nonneg=True),
    )


def _build_sbs(raw: dict) -> SbsFilterSpec:
    sub = _get_obj(raw, "", "sbs")
    _check_known(sub, "sbs", {"bfs_hz", "pump_offset_hz", "linewidth_hz",
                              "peak_gain_db", "include_phase"})
    return SbsFilterSpec(
        bfs_hz=_num(sub, "sbs", "bfs_hz", 10.8e9, positive=True),
        pump_offset_hz=_num(sub, "sbs", "pump_offset_hz", 0.0, nonneg=True),
        linewidth_hz=_num(sub, "sbs", "linewidth_hz", 20e6, positive=True),
        peak_gain_db=_num(sub, "sbs", "peak_gain_db", 20.0, positive=True),
        include_phase=_bool(sub, "sbs", "include_phase", False),
    )


def _build_scene(raw: dict) -> Scene:
    sub = _get_obj(raw, "", "scene")
    _check_known(sub, "scene", {"scatterers", "turntable", "propagation_loss"})
    scat_raw = sub.get("scatterers", [{"x_m": 0.0, "y_m": 0.0}])
    if not isinstance(scat_raw, list) or not scat_raw:
        _fail("schema-violation", "scene.scatterers", "expected a non-empty list")
    scatterers = []
    for i, s in enumerate(scat_raw):
        if not isinstance(s, dict):
            _fail("schema-violation", f"scene.scatterers[{i}]", "expected an object")
        _check_known(s, f"scene.scatterers[{i}]", {"x_m", "y_m", "reflectivity"})
        scatterers.append(Scatterer(
            x_m=_num(s, f"scene.scatterers[{i}]", "x_m", 0.0),
            y_m=_num(s, f"scene.scatterers[{i}]", "y_m", 0.0),
            reflectivity=_num(s, f"scene.scatterers[{i}]", "reflectivity", 1.0, positive=True),
        ))
    tt = _get_obj(sub, "scene.", "turntable")
    _check_known(tt, "scene.turntable", {"center_range_m", "rotation_period_s", "phase0_rad"})
    turntable = Turntable(
        center_range_m=_num(tt, "scene.turntable", "center_range_m", 1.47, positive=True),
        rotation_period_s=_num(tt, "scene.turntable", "rotation_period_s", 24.56, nonneg=True),
        phase0_rad=_num(tt, "scene.turntable", "phase0_rad", 0.0),
    )
    loss = _str(sub, "scene", "propagation_loss", "none", choices={"none", "r4"})
    return Scene(scatterers=scatterers, turntable=turntable, propagation_loss=loss)


def _build_rf(raw: dict) -> RfResponseSpec:
    sub = _get_obj(raw, "", "rf")
    _check_known(sub, "rf", {"passband_hz", "out_of_band_rejection_db",
                             "tilt_db_per_ghz", "noise_snr_db"})
    band = _num_list(sub, "rf", "passband_hz", [5.85e9, 14.5e9])
    if len(band) != 2 or not 0 < band[0] < band[1]:
        _fail("schema-violation", "rf.passband_hz", "expected [low, high] with 0 < low < high")
    return RfResponseSpec(
        passband_hz=(band[0], band[1]),
        out_of_band_rejection_db=_num(sub, "rf", "out_of_band_rejection_db", 60.0, nonneg=True),
        tilt_db_per_ghz=_num(sub, "rf", "tilt_db_per_ghz", 0.0),
        noise_snr_db=_num(sub, "rf", "noise_snr_db", None, allow_none=True),
    )


def _build_sut(raw: dict) -> SutSpec:
    sub = _get_obj(raw, "", "sut")
    _check_known(sub, "sut", {"kind", "freq_hz", "freqs_hz", "amplitude", "amplitudes",
                              "f_start_hz", "f_stop_hz", "period_s", "coeffs",
                              "dwell_s", "times_s", "table_freqs_hz"})
    kind = _str(sub, "sut", "kind", "tone",
                choices={"tone", "multitone", "lfm", "nlfm", "step", "table"})
    return SutSpec(
        kind=kind,
        freq_hz=_num(sub, "sut", "freq_hz", 1.0e9, positive=True),
        freqs_hz=_num_list(sub, "sut", "freqs_hz", []),
        amplitude=_num(sub, "sut", "amplitude", 1.0, positive=True),
        amplitudes=_num_list(sub, "sut", "amplitudes", []),
        f_start_hz=_num(sub, "sut", "f_start_hz", 1.0e9, positive=True),
        f_stop_hz=_num(sub, "sut", "f_stop_hz", 2.0e9, positive=True),
        period_s=_num(sub, "sut", "period_s", 4e-6, positive=True),
        coeffs=_num_list(sub, "sut", "coeffs", []),
        dwell_s=_num(sub, "sut", "dwell_s", 1e-6, positive=True),
        times_s=_num_list(sub, "sut", "times_s", []),
        table_freqs_hz=_num_list(sub, "sut", "table_freqs_hz", []),
    )


def _build_radar(raw: dict) -> RadarParams:
    sub = _get_obj(raw, "", "radar")
    _check_known(sub, "radar", {"adc_rate_hz", "zero_pad", "n_slow_times",
                                "slow_span_s", "accumulation_s", "isar_zero_pad"})
    return RadarParams(
        adc_rate_hz=_num(sub, "radar", "adc_rate_hz", 40e6, positive=True),
        zero_pad=_int(sub, "radar", "zero_pad", 16, minimum=1),
        n_slow_times=_int(sub, "radar", "n_slow_times", 1, minimum=1),
        slow_span_s=_num(sub, "radar", "slow_span_s", 0.0, nonneg=True),
        accumulation_s=_num(sub, "radar", "accumulation_s", 2.2, positive=True),
        isar_zero_pad=_int(sub, "radar", "isar_zero_pad", 8, minimum=1),
    )


def _build_sense(raw: dict) -> SenseParams:
    sub = _get_obj(raw, "", "sense")
    _check_known(sub, "sense", {"osc_rate_hz", "threshold_frac", "osc_snr_db",
                                "bfs_jitter_hz", "blank_s", "tone_sweep_hz"})
    frac = _num(sub, "sense", "threshold_frac", 0.3, positive=True)
    if not frac < 1:
        _fail("schema-violation", "sense.threshold_frac", "must be < 1")
    return SenseParams(
        osc_rate_hz=_num(sub, "sense", "osc_rate_hz", 100e6, positive=True),
        threshold_frac=frac,
        osc_snr_db=_num(sub, "sense", "osc_snr_db", None, allow_none=True),
        bfs_jitter_hz=_num(sub, "sense", "bfs_jitter_hz", 0.0, nonneg=True),
        blank_s=_num(sub, "sense", "blank_s", 80e-9, nonneg=True),
        tone_sweep_hz=_num_list(sub, "sense", "tone_sweep_hz", (), positive=True),
    )


def _build_comm(raw: dict) -> CommParams:
    sub = _get_obj(raw, "", "comm")
    _check_known(sub, "comm", {"selfmix_lowpass_hz", "trend_window_symbols"})
    return CommParams(
        selfmix_lowpass_hz=_num(sub, "comm", "selfmix_lowpass_hz", 2.5e9, positive=True),
        trend_window_symbols=_int(sub, "comm", "trend_window_symbols", 64, minimum=2),
    )


_TOP_KEYS = {"pipeline", "seed", "repeats", "output_dir", "sim_sample_rate_hz",
             "adc_rates_hz", "chirp", "ask", "modulator", "sbs", "scene", "rf",
             "sut", "radar", "sense", "comm"}


def build_scenario(raw: dict) -> Scenario:
    """Validate a parsed JSON object and fill bench defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("schema-violation", "top level: expected a JSON object")
    _check_known(raw, "", _TOP_KEYS)
    try:
        scenario = Scenario(
            pipeline=_str(raw, "", "pipeline", "generate", choices=set(PIPELINES)),
            seed=_int(raw, "", "seed", 0, minimum=0),
            repeats=_int(raw, "", "repeats", 1, minimum=1),
            output_dir=_str(raw, "", "output_dir", "out"),
            sim_sample_rate_hz=_num(raw, "", "sim_sample_rate_hz", DEFAULT_SIM_RATE_HZ, positive=True),
            adc_rates_hz=_num_list(raw, "", "adc_rates_hz", list(DEFAULT_ADC_RATES_HZ)),
            chirp=_build_chirp(raw),
            ask=_build_ask(raw),
            modulator=_build_modulator(raw),
            sbs=_build_sbs(raw),
            scene=_build_scene(raw),
            rf=_build_rf(raw),
            sut=_build_sut(raw),
            radar=_build_radar(raw),
            sense=_build_sense(raw),
            comm=_build_comm(raw),
        )
    except ConfigError:
        raise
    except Exception as exc:  # dataclass validators (SignalError etc.) name the bad value
        raise ConfigError("invalid-section", str(exc)) from exc
    _check_physics(scenario)
    return scenario


def _check_physics(s: Scenario):
    """Cross-field consistency that individual sections cannot see."""
    nyq = s.sim_sample_rate_hz / 2
    if s.ask.carrier_hz >= nyq:
        raise PhysicsError("physical-inconsistency",
                          f"ask.carrier_hz {s.ask.carrier_hz:g} is at/above the simulation Nyquist {nyq:g}")
    top = max(s.chirp.f_start_hz, s.chirp.f_stop_hz)
    if top >= nyq:
        raise PhysicsError("physical-inconsistency",
                          f"chirp sweeps to {top:g} Hz, at/above the simulation Nyquist {nyq:g}")
    if top + s.ask.carrier_hz >= nyq:
        raise PhysicsError("physical-inconsistency",
                          "photodetected chirp+carrier beat would exceed the simulation Nyquist")
    n = s.sim_sample_rate_hz * s.chirp.period_s
    if abs(n - round(n)) > 1e-6:
        raise PhysicsError("physical-inconsistency",
                          "chirp.period_s must span a whole number of simulation samples")
    for rate in s.adc_rates_hz:
        ratio = s.sim_sample_rate_hz / rate
        if abs(ratio - round(ratio)) > 1e-9:
            raise PhysicsError("physical-inconsistency",
                              f"adc_rates_hz entry {rate:g} must divide sim_sample_rate_hz")
    for name, rate in (("radar.adc_rate_hz", s.radar.adc_rate_hz),
                       ("sense.osc_rate_hz", s.sense.osc_rate_hz)):
        ratio = s.sim_sample_rate_hz / rate
        if abs(ratio - round(ratio)) > 1e-9:
            raise PhysicsError("physical-inconsistency",
                              f"{name} {rate:g} must divide sim_sample_rate_hz")


def load_scenario(path: str | Path) -> Scenario:
    """Read, parse, and validate a scenario file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError("no-such-file", str(p))
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("parse-error", f"{p}: {exc}") from exc
    return build_scenario(raw)


def scenario_to_dict(s: Scenario) -> dict:
    """Plain nested dict of the fully-resolved scenario (defaults included)."""
    d = asdict(s)
    # asdict handles nested dataclasses; tuples become lists via json round-trip
    return json.loads(json.dumps(d))


def scenario_digest(s: Scenario) -> str:
    """Stable identity of the resolved scenario: formatting-independent."""
    blob = json.dumps(scenario_to_dict(s), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
