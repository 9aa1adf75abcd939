"""Verification experiments built on top of the session simulator.

Three independent ways of checking the randomizer does its job:

* :func:`delay_scan` reproduces the timing-alignment measurement: sifted
  error rate versus the generator trigger delay. Aligned timing leaves the
  key unaffected; misaligned timing scrambles it.
* :func:`uniformity_chisq` audits the emitted phase sample directly with a
  chi-square test against the uniform distribution on [0, 2*pi).
* :func:`fock_density_matrix` gives the analytic photon-number picture: what
  the attenuated pulses look like to an observer with no phase reference,
  for perfect, discrete or absent phase randomization.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Sequence, Union

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import ValidationError
from .protocol import QberEstimate, SessionConfig, estimate_qber, run_session, sift

__all__ = [
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
]

PathOrFile = Union[str, os.PathLike, IO[str]]


# ---------------------------------------------------------------------------
# Delay scan


@dataclass(frozen=True)
class DelayScanResult:
    """Error-rate estimates over a sweep of generator trigger delays."""

    delays_ns: tuple[float, ...]
    estimates: tuple[QberEstimate, ...]

    def __post_init__(self) -> None:
        if len(self.delays_ns) != len(self.estimates):
            raise ValidationError("delay and estimate counts differ")
        if len(self.delays_ns) > 1:
            deltas = np.diff(np.asarray(self.delays_ns))
            if not np.all(deltas > 0):
                raise ValidationError("scan delays must be strictly increasing")

    @property
    def qbers(self) -> np.ndarray:
        return np.array([e.qber for e in self.estimates])

    def __len__(self) -> int:
        return len(self.delays_ns)


def scan_point_seed(base_seed: int, point_index: int) -> int:
    """Session seed for one scan point.

    Mixing the base seed with the point index through a seed sequence keeps
    points statistically independent while leaving the whole scan a pure
    function of the base seed.
    """
    ss = np.random.SeedSequence([base_seed, point_index])
    return int(ss.generate_state(1, np.uint64)[0])


def delay_scan(
    config: SessionConfig,
    delays_ns: Sequence[float],
    max_workers: int = 1,
) -> DelayScanResult:
    """Run one session per trigger delay and collect sifted error rates.

    ``config`` supplies everything but the trigger delay and per-point seed.
    Results are deterministic in ``config.seed`` and the delay list, and do
    not depend on ``max_workers``.
    """
    delays = [float(d) for d in delays_ns]
    if not delays:
        raise ValidationError("scan needs at least one delay")
    if any(not math.isfinite(d) for d in delays):
        raise ValidationError("scan delays must be finite")
    if any(b <= a for a, b in zip(delays, delays[1:])):
        raise ValidationError("scan delays must be strictly increasing")
    if max_workers < 1:
        raise ValidationError(f"max_workers must be >= 1, got {max_workers}")
    config.validate()

    def one_point(index: int) -> QberEstimate:
        delay = delays[index]
        point_config = replace(
            config,
            seed=scan_point_seed(config.seed, index),
            timing=replace(config.timing, delay_ns=delay),
        )
        try:
            records, _ = run_session(point_config)
            return estimate_qber(sift(records))
        except ValidationError as exc:
            raise ValidationError(f"scan point at {delay} ns: {exc}") from exc

    indexes = range(len(delays))
    if max_workers == 1:
        estimates = [one_point(i) for i in indexes]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            estimates = list(pool.map(one_point, indexes))
    return DelayScanResult(delays_ns=tuple(delays), estimates=tuple(estimates))


# ---------------------------------------------------------------------------
# Phase uniformity audit


def uniformity_chisq(phases: np.ndarray, n_bins: int = 256) -> tuple[float, float]:
    """Chi-square statistic of a phase sample against uniformity on [0, 2*pi).

    Returns ``(statistic, threshold)`` where ``threshold`` is the 99th
    percentile of chi-square with ``n_bins - 1`` degrees of freedom; a
    statistic above it rejects uniformity at the 1% level. The sample must
    average at least ten counts per bin or the test is meaningless.
    """
    arr = np.asarray(phases, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("phase sample must be one-dimensional")
    if n_bins < 2:
        raise ValidationError(f"need at least 2 bins, got {n_bins}")
    if arr.size < 10 * n_bins:
        raise ValidationError(
            f"need at least {10 * n_bins} samples for {n_bins} bins, got {arr.size}"
        )
    two_pi = 2.0 * math.pi
    wrapped = np.mod(arr, two_pi)
    # multiply before dividing: exact for the 4096-step DAC grid, so grid
    # phases never land in a neighbouring bin through rounding
    idx = np.floor(wrapped * (n_bins / two_pi)).astype(np.int64)
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins)
    expected = arr.size / n_bins
    statistic = float(((counts - expected) ** 2 / expected).sum())
    threshold = float(stats.chi2.ppf(0.99, n_bins - 1))
    return statistic, threshold


# ---------------------------------------------------------------------------
# Photon-number (Fock) picture


class UniformPhase:
    """Perfect continuous phase randomization on [0, 2*pi)."""

    def circular_moment(self, k):
        k_arr = np.asarray(k)
        out = np.where(k_arr == 0, 1.0 + 0.0j, 0.0 + 0.0j)
        return complex(out) if k_arr.ndim == 0 else out

    def __repr__(self) -> str:
        return "UniformPhase()"


@dataclass(frozen=True)
class DiscreteUniformPhase:
    """Phase drawn uniformly from N equidistant values 2*pi*j/N."""

    n_values: int

    def __post_init__(self) -> None:
        if self.n_values < 1:
            raise ValidationError(f"need at least 1 phase value, got {self.n_values}")

    def circular_moment(self, k):
        k_arr = np.asarray(k)
        out = np.where(k_arr % self.n_values == 0, 1.0 + 0.0j, 0.0 + 0.0j)
        return complex(out) if k_arr.ndim == 0 else out


@dataclass(frozen=True)
class FixedPhase:
    """No randomization: every pulse carries the same global phase."""

    phi: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise ValidationError("phase must be finite")

    def circular_moment(self, k):
        k_arr = np.asarray(k, dtype=np.float64)
        out = np.exp(1j * k_arr * self.phi)
        return complex(out) if np.asarray(k).ndim == 0 else out


@dataclass(frozen=True)
class FockDensityMatrix:
    """Photon-number-basis density matrix truncated at ``n_max`` photons."""

    entries: np.ndarray
    mu: float
    n_max: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


def fock_density_matrix(mu: float, phase_dist, n_max: int = 20) -> FockDensityMatrix:
    """Density matrix of a coherent pulse whose global phase is randomized.

    Entry (n, m) of a coherent state with mean photon number ``mu`` and phase
    phi is ``exp(-mu) * mu**((n+m)/2) / sqrt(n! m!) * exp(i (n-m) phi)``;
    averaging over the phase distribution replaces the last factor with its
    circular moment of order n-m. Continuous randomization therefore leaves a
    diagonal (Poissonian) mixture, N discrete phases keep every n = m (mod N)
    coherence, and a fixed phase keeps the pure coherent state.
    """
    if mu < 0.0:
        raise ValidationError(f"mean photon number must be >= 0, got {mu}")
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    dim = n_max + 1
    ns = np.arange(dim)
    if mu == 0.0:
        amps = np.zeros(dim)
        amps[0] = 1.0
    else:
        # log-space keeps large n stable: amp_n = e^{-mu/2} mu^{n/2} / sqrt(n!)
        amps = np.exp(-mu / 2.0 + 0.5 * (ns * math.log(mu) - gammaln(ns + 1.0)))
    order = ns[:, None] - ns[None, :]
    entries = np.outer(amps, amps) * phase_dist.circular_moment(order)
    return FockDensityMatrix(entries=entries, mu=float(mu), n_max=int(n_max))


def offdiag_norm(rho: FockDensityMatrix) -> float:
    """Largest magnitude among off-diagonal entries; zero iff fully dephased."""
    mat = np.asarray(rho.entries)
    off = mat - np.diag(np.diag(mat))
    return float(np.abs(off).max())


# ---------------------------------------------------------------------------
# CSV export


def _write_text(text: str, destination: PathOrFile) -> None:
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="ascii") as fh:
            fh.write(text)


def export_csv(result: DelayScanResult, destination: PathOrFile) -> None:
    """Write a scan as CSV: delay_ns,qber,std_error,n_sifted,n_errors."""
    lines = ["delay_ns,qber,std_error,n_sifted,n_errors"]
    for delay, est in zip(result.delays_ns, result.estimates):
        lines.append(
            f"{delay:.9g},{est.qber:.9g},{est.std_error:.9g},{est.n_sifted},{est.n_errors}"
        )
    _write_text("\n".join(lines) + "\n", destination)


def export_density_csv(rho: FockDensityMatrix, destination: PathOrFile) -> None:
    """Write a density matrix as CSV rows n,m,real,imag."""
    lines = ["n,m,real,imag"]
    dim = rho.n_max + 1
    for n in range(dim):
        for m in range(dim):
            z = rho.entries[n, m]
            lines.append(f"{n},{m},{z.real:.12g},{z.imag:.12g}")
    _write_text("\n".join(lines) + "\n", destination)
