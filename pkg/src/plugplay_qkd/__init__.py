"""Simulator of a bidirectional phase-coding QKD link with active global-phase randomization.

The package models the full optical round trip of a two-way ("plug & play")
BB84 system: pulse pair generation on an asymmetric interferometer, fiber
transport, phase encoding, a stepped-pattern global-phase randomizer wrapped
around a Faraday mirror, attenuation to single-photon level, and gated
threshold detection. On top of the session simulator sit the verification
experiments: the trigger-delay scan of the sifted error rate, a chi-square
uniformity audit of the emitted phases, and the photon-number density
matrices that show what randomization does to an observer without a phase
reference.
"""

from .errors import ValidationError
from .experiments import (
    DelayScanResult,
    DiscreteUniformPhase,
    FixedPhase,
    FockDensityMatrix,
    UniformPhase,
    delay_scan,
    export_csv,
    export_density_csv,
    fock_density_matrix,
    offdiag_norm,
    scan_point_seed,
    uniformity_chisq,
)
from .optics import (
    DetectorConfig,
    PolarizedAmplitude,
    Pulse,
    PulsePair,
    apply_phase,
    attenuate_to_mean_photon,
    click_probability,
    detect,
    faraday_swap,
    interfere,
    mzi_split,
    propagate_fiber,
)
from .protocol import (
    BASES,
    BasisBit,
    DetectionRecord,
    DetectionRecords,
    QberEstimate,
    SessionConfig,
    SessionResult,
    estimate_qber,
    export_records_csv,
    run_session,
    sift,
)
from .randomizer import (
    CODE_LEVELS,
    DEFAULT_FRAME_LEN,
    PhasePattern,
    RandomizerTiming,
    code_to_phase,
    generate_pattern,
    load_pattern,
    modulate_pi,
    phase_at,
    save_pattern,
)

__version__ = "0.1.0"

__all__ = [
    "ValidationError",
    "PolarizedAmplitude",
    "Pulse",
    "PulsePair",
    "DetectorConfig",
    "mzi_split",
    "faraday_swap",
    "apply_phase",
    "attenuate_to_mean_photon",
    "interfere",
    "click_probability",
    "detect",
    "propagate_fiber",
    "CODE_LEVELS",
    "DEFAULT_FRAME_LEN",
    "PhasePattern",
    "RandomizerTiming",
    "generate_pattern",
    "code_to_phase",
    "phase_at",
    "modulate_pi",
    "save_pattern",
    "load_pattern",
    "BASES",
    "BasisBit",
    "SessionConfig",
    "SessionResult",
    "DetectionRecord",
    "DetectionRecords",
    "QberEstimate",
    "run_session",
    "sift",
    "estimate_qber",
    "export_records_csv",
    "DelayScanResult",
    "delay_scan",
    "scan_point_seed",
    "uniformity_chisq",
    "UniformPhase",
    "DiscreteUniformPhase",
    "FixedPhase",
    "FockDensityMatrix",
    "fock_density_matrix",
    "offdiag_norm",
    "export_csv",
    "export_density_csv",
    "__version__",
]
