"""Bidirectional phase-coding BB84 session simulation.

Per bit, on the 5 MHz pulse clock:

* Bob's source pulse splits on his asymmetric interferometer into a leading
  reference (short arm) and a trailing signal (long arm, which carries the
  insertion loss of his phase modulator).
* Both travel the fiber to Alice. Her encoder phases the signal with one of
  the four BB84 quarter-turn phases, the global-phase randomizer phases
  everything reflecting off her Faraday mirror (double pass, swapping H and
  V), and the pair is attenuated to the target mean photon number before
  heading back.
* On the return trip the roles swap: the reference now takes Bob's long arm
  (picking up the insertion loss and his basis phase) while the signal takes
  the short arm. Each interfering path therefore traverses long+short
  exactly once, so the two pulses arrive simultaneous and balanced in
  amplitude, which is what pushes the matched-basis error rate to the dark
  count floor.

The per-bit math is vectorized over numpy arrays. BB84 phases enter as exact
quarter-turn complex factors, so an ideal matched bit puts exactly zero mean
photon number on the wrong detector.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import IO, NamedTuple, Sequence, Union

import numpy as np

from .errors import ValidationError
from .optics import DetectorConfig
from .randomizer import (
    DEFAULT_FRAME_LEN,
    PHASE_PER_CODE,
    RandomizerTiming,
    generate_pattern,
)

__all__ = [
    "BASES",
    "BasisBit",
    "SessionConfig",
    "DetectionRecord",
    "DetectionRecords",
    "QberEstimate",
    "SessionResult",
    "run_session",
    "sift",
    "estimate_qber",
    "export_records_csv",
]

BASES = ("X", "Y")

# i**k for k = 0..3: the four BB84 coding phases as exact complex integers.
_QUARTER_TURNS = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])

_SUBSTREAM_ROLES = ("pattern", "alice", "bob", "polarization", "detection")


def _substreams(seed: int) -> dict:
    children = np.random.SeedSequence(seed).spawn(len(_SUBSTREAM_ROLES))
    return dict(zip(_SUBSTREAM_ROLES, children))


@dataclass(frozen=True)
class BasisBit:
    """One prepared symbol: measurement basis plus key bit."""

    basis: str
    bit: int

    def __post_init__(self) -> None:
        if self.basis not in BASES:
            raise ValidationError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.bit not in (0, 1):
            raise ValidationError(f"bit must be 0 or 1, got {self.bit!r}")

    @property
    def coding_phase(self) -> float:
        """Alice's encoder phase: 0/pi for X, pi/2 / 3*pi/2 for Y."""
        return (2 * self.bit + BASES.index(self.basis)) * (math.pi / 2.0)


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to reproduce one key exchange session."""

    n_bits: int = 843_000
    seed: int = 0
    mu_target: float = 0.1
    mu_convention: str = "pair"
    timing: RandomizerTiming = RandomizerTiming()
    frame_len: int = DEFAULT_FRAME_LEN
    tau_mzi_ns: float = 50.0
    insertion_loss_db: float = 3.0
    fiber_km: float = 5.0
    fiber_loss_db_per_km: float = 0.2
    detector: DetectorConfig = DetectorConfig()
    randomizer_enabled: bool = True
    double_click_policy: str = "discard"
    polarization: tuple[complex, complex] | None = None

    def validate(self) -> None:
        if self.n_bits < 1:
            raise ValidationError(f"n_bits must be >= 1, got {self.n_bits}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        if self.mu_target < 0.0:
            raise ValidationError(f"mean photon target must be >= 0, got {self.mu_target}")
        if self.mu_convention not in ("pair", "signal"):
            raise ValidationError(
                f"mu_convention must be 'pair' or 'signal', got {self.mu_convention!r}"
            )
        if self.frame_len < 1:
            raise ValidationError(f"frame length must be >= 1, got {self.frame_len}")
        if self.tau_mzi_ns <= 0.0:
            raise ValidationError(f"arm delay must be positive, got {self.tau_mzi_ns} ns")
        if self.insertion_loss_db < 0.0:
            raise ValidationError(
                f"insertion loss must be >= 0 dB, got {self.insertion_loss_db}"
            )
        if self.fiber_km < 0.0:
            raise ValidationError(f"fiber length must be >= 0, got {self.fiber_km} km")
        if self.fiber_loss_db_per_km < 0.0:
            raise ValidationError(
                f"fiber loss must be >= 0 dB/km, got {self.fiber_loss_db_per_km}"
            )
        # all four modulation passes of a bit must fit inside one pattern step
        span = self.tau_mzi_ns + self.timing.roundtrip_ns
        if span >= self.timing.period_ns:
            raise ValidationError(
                "arm delay plus mirror round trip must be shorter than the pulse period "
                f"({span} ns >= {self.timing.period_ns} ns)"
            )
        if self.double_click_policy not in ("discard", "random"):
            raise ValidationError(
                f"double_click_policy must be 'discard' or 'random', got {self.double_click_policy!r}"
            )
        if self.polarization is not None:
            if len(self.polarization) != 2:
                raise ValidationError("polarization must be a (h, v) pair")
            h, v = (complex(c) for c in self.polarization)
            norm = abs(h) ** 2 + abs(v) ** 2
            if not math.isfinite(norm) or norm <= 0.0:
                raise ValidationError("polarization must be finite with positive norm")

    def first_event_ns(self) -> float:
        """Arrival time of bit 0's reference pulse at the randomizer.

        Chosen so the four modulation passes of each bit sit centered inside
        one pattern step when the trigger delay is zero; 'aligned' then means
        pattern transitions fall halfway between consecutive bits.
        """
        return 0.5 * (self.timing.period_ns - self.tau_mzi_ns - self.timing.roundtrip_ns)


@dataclass(frozen=True)
class DetectionRecord:
    """Per-bit view assembled on demand from the column store."""

    bit_index: int
    alice: BasisBit
    bob_basis: str
    clicked_d0: bool
    clicked_d1: bool


class DetectionRecords:
    """Column-oriented store of per-bit outcomes for one session.

    Bases are stored as int8 indexes into :data:`BASES`. ``mu_d0``/``mu_d1``
    hold the pre-detection mean photon numbers at the two ports, which is
    what phase-randomization invariance is stated about.
    """

    __slots__ = ("alice_basis", "alice_bit", "bob_basis", "clicked_d0", "clicked_d1", "mu_d0", "mu_d1")

    def __init__(
        self,
        alice_basis: np.ndarray,
        alice_bit: np.ndarray,
        bob_basis: np.ndarray,
        clicked_d0: np.ndarray,
        clicked_d1: np.ndarray,
        mu_d0: np.ndarray,
        mu_d1: np.ndarray,
    ):
        cols = (alice_basis, alice_bit, bob_basis, clicked_d0, clicked_d1, mu_d0, mu_d1)
        n = len(alice_basis)
        if any(len(c) != n for c in cols):
            raise ValidationError("record columns must have equal length")
        self.alice_basis = np.asarray(alice_basis, dtype=np.int8)
        self.alice_bit = np.asarray(alice_bit, dtype=np.int8)
        self.bob_basis = np.asarray(bob_basis, dtype=np.int8)
        self.clicked_d0 = np.asarray(clicked_d0, dtype=bool)
        self.clicked_d1 = np.asarray(clicked_d1, dtype=bool)
        self.mu_d0 = np.asarray(mu_d0, dtype=np.float64)
        self.mu_d1 = np.asarray(mu_d1, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.alice_basis)

    def __getitem__(self, index: int) -> DetectionRecord:
        i = int(index)
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(index)
        return DetectionRecord(
            bit_index=i,
            alice=BasisBit(BASES[self.alice_basis[i]], int(self.alice_bit[i])),
            bob_basis=BASES[self.bob_basis[i]],
            clicked_d0=bool(self.clicked_d0[i]),
            clicked_d1=bool(self.clicked_d1[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True)
class QberEstimate:
    """Sifted-key error rate with its binomial standard error."""

    qber: float
    std_error: float
    n_sifted: int
    n_errors: int


class SessionResult(NamedTuple):
    """Output of :func:`run_session`.

    ``emitted_phases`` is the generator phase active when each bit's leading
    (reference) pulse made its forward pass; all zeros when the randomizer is
    disabled. It is what a phase audit of the outgoing light would sample.
    """

    records: DetectionRecords
    emitted_phases: np.ndarray


def _grid_phase(t_ns: np.ndarray, codes: np.ndarray, timing: RandomizerTiming) -> np.ndarray:
    """Generator phase at each time, over the whole session's stepped pattern.

    Frames retrigger back to back, so the concatenated per-frame codes form
    one continuous slot grid starting at ``delay_ns``. Outside the grid the
    generator idles at zero phase.
    """
    slots = np.floor((t_ns - timing.delay_ns) / timing.period_ns).astype(np.int64)
    valid = (slots >= 0) & (slots < codes.size)
    safe = np.where(valid, slots, 0)
    return np.where(valid, codes[safe] * PHASE_PER_CODE, 0.0)


def run_session(config: SessionConfig) -> SessionResult:
    """Simulate one session and return per-bit records plus emitted phases.

    Alice's and Bob's random choices, the pattern codes, the shared
    polarization drift and the detector noise each come from an independent
    substream of ``config.seed``, so toggling the randomizer leaves every
    other random draw untouched.
    """
    config.validate()
    n = config.n_bits
    timing = config.timing
    streams = _substreams(config.seed)
    rng_alice = np.random.default_rng(streams["alice"])
    rng_bob = np.random.default_rng(streams["bob"])
    rng_det = np.random.default_rng(streams["detection"])

    alice_basis = rng_alice.integers(0, 2, size=n, dtype=np.int8)
    alice_bit = rng_alice.integers(0, 2, size=n, dtype=np.int8)
    bob_basis = rng_bob.integers(0, 2, size=n, dtype=np.int8)

    # One polarization state for the whole session: the fiber drifts slowly
    # compared to a frame. With no override it is drawn uniformly (Haar).
    if config.polarization is None:
        rng_pol = np.random.default_rng(streams["polarization"])
        z = rng_pol.normal(size=4)
        h0 = complex(z[0], z[1])
        v0 = complex(z[2], z[3])
    else:
        h0, v0 = (complex(c) for c in config.polarization)
    norm = math.sqrt(abs(h0) ** 2 + abs(v0) ** 2)
    h0 /= norm
    v0 /= norm

    t_ref = config.first_event_ns() + timing.period_ns * np.arange(n, dtype=np.float64)

    if config.randomizer_enabled:
        rng_pattern = np.random.default_rng(streams["pattern"])
        n_frames = -(-n // config.frame_len)
        codes = np.concatenate(
            [generate_pattern(rng_pattern, config.frame_len).codes for _ in range(n_frames)]
        )
        phi_ref_fwd = _grid_phase(t_ref, codes, timing)
        phi_ref_ret = _grid_phase(t_ref + timing.roundtrip_ns, codes, timing)
        phi_sig_fwd = _grid_phase(t_ref + config.tau_mzi_ns, codes, timing)
        phi_sig_ret = _grid_phase(t_ref + config.tau_mzi_ns + timing.roundtrip_ns, codes, timing)
        emitted_phases = phi_ref_fwd.copy()
    else:
        emitted_phases = np.zeros(n)

    long_arm = 10.0 ** (-config.insertion_loss_db / 20.0)
    fiber = 10.0 ** (-config.fiber_loss_db_per_km * config.fiber_km / 20.0)
    half = 1.0 / math.sqrt(2.0)
    ref_out = half * fiber  # per unit source amplitude, arriving at Alice
    sig_out = half * long_arm * fiber

    if config.mu_convention == "pair":
        att = math.sqrt(config.mu_target / (ref_out**2 + sig_out**2))
    else:
        att = math.sqrt(config.mu_target) / sig_out

    # At Bob's coupler the reference has crossed short-then-long (insertion
    # loss and basis phase on the way back), the signal long-then-short. Both
    # paths see the long arm exactly once, so one shared amplitude keeps the
    # balance exact down to the last bit.
    path_amp = half * fiber * att * fiber * long_arm

    alice_factor = _QUARTER_TURNS[(2 * alice_bit + alice_basis).astype(np.intp)]
    bob_factor = _QUARTER_TURNS[bob_basis.astype(np.intp)]

    w_h = v0 * path_amp
    w_v = h0 * path_amp
    if config.randomizer_enabled:
        r_h = w_h * np.exp(1j * phi_ref_ret) * bob_factor
        r_v = w_v * np.exp(1j * phi_ref_fwd) * bob_factor
        s_h = w_h * np.exp(1j * phi_sig_ret) * alice_factor
        s_v = w_v * np.exp(1j * phi_sig_fwd) * alice_factor
    else:
        # Modulator idle: the mirror still swaps H and V, phases stay zero.
        r_h = w_h * bob_factor
        r_v = w_v * bob_factor
        s_h = w_h * alice_factor
        s_v = w_v * alice_factor

    mu_d0 = 0.5 * (np.abs(s_h + r_h) ** 2 + np.abs(s_v + r_v) ** 2)
    mu_d1 = 0.5 * (np.abs(s_h - r_h) ** 2 + np.abs(s_v - r_v) ** 2)

    eta = config.detector.efficiency
    dark = config.detector.dark_prob
    p0 = 1.0 - (1.0 - dark) * np.exp(-eta * mu_d0)
    p1 = 1.0 - (1.0 - dark) * np.exp(-eta * mu_d1)
    clicked_d0 = rng_det.random(n) < p0
    clicked_d1 = rng_det.random(n) < p1
    if config.double_click_policy == "random":
        both = clicked_d0 & clicked_d1
        keep0 = rng_det.random(n) < 0.5
        clicked_d0 = np.where(both, keep0, clicked_d0)
        clicked_d1 = np.where(both, ~keep0, clicked_d1)

    records = DetectionRecords(
        alice_basis=alice_basis,
        alice_bit=alice_bit,
        bob_basis=bob_basis,
        clicked_d0=clicked_d0,
        clicked_d1=clicked_d1,
        mu_d0=mu_d0,
        mu_d1=mu_d1,
    )
    return SessionResult(records=records, emitted_phases=emitted_phases)


def sift(records: DetectionRecords) -> np.ndarray:
    """Keep conclusive, basis-matched bits; return (alice_bit, bob_bit) pairs.

    Conclusive means exactly one detector clicked (a click on D1 decodes as
    bit 1). Double clicks survive only if the session already rewrote them
    under the 'random' policy; under 'discard' they are dropped here.
    """
    conclusive = records.clicked_d0 ^ records.clicked_d1
    keep = conclusive & (records.alice_basis == records.bob_basis)
    alice = records.alice_bit[keep]
    bob = records.clicked_d1[keep].astype(np.int8)
    return np.column_stack((alice, bob))


def estimate_qber(sifted: Union[np.ndarray, Sequence[Sequence[int]]]) -> QberEstimate:
    """Error rate of sifted pairs with binomial standard error sqrt(q*(1-q)/n)."""
    arr = np.asarray(sifted)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("sifted data must be an (n, 2) array of bit pairs")
    n = int(arr.shape[0])
    if n == 0:
        raise ValidationError("cannot estimate an error rate from zero sifted bits")
    n_errors = int(np.count_nonzero(arr[:, 0] != arr[:, 1]))
    qber = n_errors / n
    std_error = math.sqrt(qber * (1.0 - qber) / n)
    return QberEstimate(qber=qber, std_error=std_error, n_sifted=n, n_errors=n_errors)


def export_records_csv(records: DetectionRecords, destination: Union[str, os.PathLike, IO[str]]) -> None:
    """Write one CSV row per bit: index, bases as letters, clicks as 0/1."""
    lines = ["bit_index,alice_basis,alice_bit,bob_basis,click_d0,click_d1"]
    for i in range(len(records)):
        lines.append(
            f"{i},{BASES[records.alice_basis[i]]},{records.alice_bit[i]},"
            f"{BASES[records.bob_basis[i]]},{int(records.clicked_d0[i])},{int(records.clicked_d1[i])}"
        )
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii") as fh:
            fh.write(text)
