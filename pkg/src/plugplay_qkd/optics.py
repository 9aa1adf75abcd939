"""Coherent-state polarization optics for a two-pulse interferometric link.

Field amplitudes are Jones vectors over the (H, V) linear polarization basis,
in units of sqrt(photons): ``|h|**2 + |v|**2`` is the pulse's mean photon
number. Timestamps are nanoseconds from the frame trigger, referenced to the
arrival at the far end (where the phase randomizer sits). All operations are
pure functions; the only stochastic one, :func:`detect`, takes an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
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
]


@dataclass(frozen=True)
class PolarizedAmplitude:
    """Complex field amplitude per linear polarization component."""

    h: complex
    v: complex

    def __post_init__(self) -> None:
        if not (cmath.isfinite(complex(self.h)) and cmath.isfinite(complex(self.v))):
            raise ValidationError("amplitude components must be finite")

    @property
    def photon_number(self) -> float:
        return abs(self.h) ** 2 + abs(self.v) ** 2

    def scaled(self, factor: complex) -> "PolarizedAmplitude":
        return PolarizedAmplitude(self.h * factor, self.v * factor)


@dataclass(frozen=True)
class Pulse:
    """A light pulse: amplitude plus its arrival time at the far end."""

    amplitude: PolarizedAmplitude
    t_ns: float

    @property
    def photon_number(self) -> float:
        return self.amplitude.photon_number


@dataclass(frozen=True)
class PulsePair:
    """Reference/signal pulse pair produced by the asymmetric interferometer.

    The reference leads; the signal trails it by the interferometer arm
    imbalance and carries the encoding.
    """

    reference: Pulse
    signal: Pulse
    bit_index: int = 0

    @property
    def photon_number(self) -> float:
        return self.reference.photon_number + self.signal.photon_number


@dataclass(frozen=True)
class DetectorConfig:
    """Threshold single-photon detector: quantum efficiency plus dark counts."""

    efficiency: float = 0.10
    dark_prob: float = 1e-5

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValidationError(f"detector efficiency must be in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValidationError(f"dark count probability must be in [0, 1), got {self.dark_prob}")


def _db_to_amplitude(loss_db: float) -> float:
    # Power loss in dB; amplitudes scale with the square root of power.
    return 10.0 ** (-loss_db / 20.0)


def mzi_split(
    pulse: Pulse,
    insertion_loss_db: float,
    tau_mzi_ns: float,
    bit_index: int = 0,
) -> PulsePair:
    """Split a pulse into a reference/signal pair on the asymmetric interferometer.

    The reference exits via the short arm unattenuated; the signal exits via
    the long arm ``tau_mzi_ns`` later, attenuated by that arm's insertion
    loss (the phase modulator sits there). Each output carries half the input
    power before the long-arm loss.
    """
    if insertion_loss_db < 0.0:
        raise ValidationError(f"insertion loss must be >= 0 dB, got {insertion_loss_db}")
    if tau_mzi_ns <= 0.0:
        raise ValidationError(f"arm delay must be positive, got {tau_mzi_ns} ns")
    half = 1.0 / math.sqrt(2.0)
    reference = Pulse(pulse.amplitude.scaled(half), pulse.t_ns)
    signal = Pulse(
        pulse.amplitude.scaled(half * _db_to_amplitude(insertion_loss_db)),
        pulse.t_ns + tau_mzi_ns,
    )
    return PulsePair(reference=reference, signal=signal, bit_index=bit_index)


def faraday_swap(amplitude: PolarizedAmplitude) -> PolarizedAmplitude:
    """Exchange the H and V components (ideal Faraday-mirror reflection)."""
    return PolarizedAmplitude(h=amplitude.v, v=amplitude.h)


def apply_phase(
    amplitude: PolarizedAmplitude,
    phi_h: float,
    phi_v: float,
) -> PolarizedAmplitude:
    """Phase each polarization component independently."""
    if not (math.isfinite(phi_h) and math.isfinite(phi_v)):
        raise ValidationError("phases must be finite")
    return PolarizedAmplitude(
        h=amplitude.h * cmath.exp(1j * phi_h),
        v=amplitude.v * cmath.exp(1j * phi_v),
    )


def attenuate_to_mean_photon(pair: PulsePair, mu_target: float) -> PulsePair:
    """Rescale both pulses by one real factor so the pair totals ``mu_target`` photons.

    Applying a common factor preserves the relative phase and the power split
    between the pulses. A vacuum pair cannot be amplified to a positive target.
    """
    if mu_target < 0.0:
        raise ValidationError(f"target mean photon number must be >= 0, got {mu_target}")
    current = pair.photon_number
    if current == 0.0:
        if mu_target > 0.0:
            raise ValidationError("cannot attenuate a vacuum pair to a positive photon number")
        return pair
    factor = math.sqrt(mu_target / current)
    return PulsePair(
        reference=Pulse(pair.reference.amplitude.scaled(factor), pair.reference.t_ns),
        signal=Pulse(pair.signal.amplitude.scaled(factor), pair.signal.t_ns),
        bit_index=pair.bit_index,
    )


def interfere(
    signal: PolarizedAmplitude,
    reference: PolarizedAmplitude,
) -> tuple[float, float]:
    """Mix signal and reference on a balanced coupler; return detector means.

    Returns ``(mu_d0, mu_d1)``: mean photon numbers at the constructive and
    destructive output ports. Polarization components interfere independently,
    so mismatched polarizations reduce visibility. Energy is conserved:
    ``mu_d0 + mu_d1`` equals the total input photon number.
    """
    mu_d0 = 0.5 * (abs(signal.h + reference.h) ** 2 + abs(signal.v + reference.v) ** 2)
    mu_d1 = 0.5 * (abs(signal.h - reference.h) ** 2 + abs(signal.v - reference.v) ** 2)
    return mu_d0, mu_d1


def click_probability(mu_d: float, detector: DetectorConfig) -> float:
    """Probability that a gated threshold detector fires on a mean of ``mu_d`` photons.

    Photon statistics are Poissonian, so the no-click probability is
    ``exp(-efficiency * mu_d)`` times the no-dark-count probability.
    """
    if mu_d < 0.0:
        raise ValidationError(f"mean photon number must be >= 0, got {mu_d}")
    return 1.0 - (1.0 - detector.dark_prob) * math.exp(-detector.efficiency * mu_d)


def detect(mu_d: float, detector: DetectorConfig, rng: np.random.Generator) -> bool:
    """Sample one gated detection: True when the detector clicks."""
    return bool(rng.random() < click_probability(mu_d, detector))


def propagate_fiber(pulse: Pulse, length_km: float, loss_db_per_km: float = 0.2) -> Pulse:
    """Apply distributed fiber loss to a pulse (one direction of travel)."""
    if length_km < 0.0:
        raise ValidationError(f"fiber length must be >= 0 km, got {length_km}")
    if loss_db_per_km < 0.0:
        raise ValidationError(f"fiber loss must be >= 0 dB/km, got {loss_db_per_km}")
    factor = _db_to_amplitude(loss_db_per_km * length_km)
    return Pulse(pulse.amplitude.scaled(factor), pulse.t_ns)
