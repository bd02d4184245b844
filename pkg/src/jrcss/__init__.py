"""Photonics-based joint radar / communication / spectrum-sensing simulator.

One shared optical transmit chain (a carrier-suppressed twin-SSB modulator
driving an LFM sweep and an ASK payload) feeds three digital receivers:
de-chirp ranging / ISAR imaging, self-mixing ASK demodulation, and
frequency-to-time-mapping spectrum sensing through a Brillouin gain window.
"""

from .comms import BerReport, EyeDiagram, compensate_envelope, demod_ask, eye_diagram, self_mix
from .core import (
    ComplexEnvelope,
    RealWaveform,
    Spectrum,
    Timebase,
    decimate,
    fft_spectrum,
    lowpass,
)
from .errors import ConfigError, FilterTransientWarning, JrcssError, PhysicsError, SignalError
from .photonics import SbsFilterSpec, SutSpec, cs_dsb_modulate, gen_sut, pd1_detect, sbs_filter
from .radar import (
    IsarImage,
    PsfReport,
    RangePeak,
    RangeProfile,
    TwoPointReport,
    dechirp,
    estimate_range,
    isar_image,
    measure_psf,
    range_profile,
    two_point_valley,
)
from .scenario import (
    AskConfig,
    CommParams,
    PIPELINES,
    RadarParams,
    Scenario,
    SenseParams,
    build_scenario,
    load_scenario,
    scenario_digest,
    scenario_to_dict,
)
from .scene import (
    RfResponseSpec,
    Scatterer,
    Scene,
    Turntable,
    apply_rf_response,
    echo,
    scatterer_ranges,
)
from .pipelines import RunReport, run
from .sensing import (
    FrequencyEstimate,
    PulseEvent,
    RateResolution,
    Spectrogram,
    assemble_spectrogram,
    detect_pulses,
    fttm_estimate,
    resolution_study,
)
from .waveform import (
    AskPlan,
    ChirpPlan,
    ModulatorSpec,
    cs_tssb_modulate,
    gen_ask,
    gen_lfm,
    gen_prbs,
    photodetect,
)

__version__ = "0.1.0"
