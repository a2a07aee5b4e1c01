"""Static-bath Overhauser dephasing: phase variances, T2*, echo bounds, electron Z error.

All phase variances assume static spin-1/2 bath polarisations and Gaussian
Overhauser phase statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .dot import DotShape, hyperfine_freq
from .isotopes import IsotopeSpec
from .lattice import SupportRegion, sample_occupancy
from .parallel import keyed_rng, parallel_map

HBAR = CONSTANTS.hbar


@dataclass(frozen=True)
class PulseSequence:
    m: int  # refocusing pulses; 0 = free induction
    tau: float  # s

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    @property
    def total_time(self) -> float:
        return 2 * self.m * self.tau if self.m >= 1 else self.tau


@dataclass(frozen=True)
class OverhauserStats:
    sum_A_sq: float  # J^2
    sum_dA_sq: float  # J^2
    t2_star: float  # s


def phase_variance(a_energies, sequence: PulseSequence) -> float:
    """<phi^2> in rad^2.

    For m >= 1 ``a_energies`` are the per-segment fluctuations Delta A_n, RMS
    over noise realisations (J); for m = 0 they are the static A_n (J).
    """
    a = np.asarray(a_energies, dtype=float)
    if sequence.m == 0:
        t = sequence.tau
        return float(np.sum(a**2) * t * t / (4 * HBAR**2))
    return float((2 * sequence.m - 1) / 2 * np.sum((a * sequence.tau / HBAR) ** 2))


def t2_star(a_energies) -> float:
    """Free-induction T2* (s); ``math.inf`` for an empty or decoupled bath."""
    s = float(np.sum(np.asarray(a_energies, dtype=float) ** 2))
    if s == 0.0:
        return math.inf
    return math.sqrt(8.0) * HBAR / math.sqrt(s)


def t2_bound(delta_a_energies, m: int) -> float:
    """Upper bound on the CPMG-m echo time from per-segment HFI fluctuations."""
    if m < 1:
        raise ValueError("echo bound needs m >= 1")
    s = float(np.sum(np.asarray(delta_a_energies, dtype=float) ** 2))
    if s == 0.0:
        return math.inf
    return math.sqrt(16 * m * m * HBAR**2 / ((2 * m - 1) * s))


def overhauser_stats(a_energies, delta_a_energies=()) -> OverhauserStats:
    a = np.asarray(a_energies, dtype=float)
    da = np.asarray(delta_a_energies, dtype=float)
    return OverhauserStats(float(np.sum(a**2)), float(np.sum(da**2)), t2_star(a))


def overhauser_z_error(gate_time: float, t2: float) -> float:
    """Electron Z-flip probability over a gate of duration ``gate_time``."""
    if gate_time < 0 or not t2 > 0:
        raise ValueError("gate_time must be >= 0 and T2* positive")
    return 0.5 * -math.expm1(-((gate_time / t2) ** 2))


TABLE2_A_FREQS = (100e3, 200e3, 400e3)
TABLE2_T2_STARS = (1e-6, 10e-6, 100e-6)


def z_error_table(a_freqs=TABLE2_A_FREQS, t2_stars=TABLE2_T2_STARS) -> np.ndarray:
    """Rows: T2*; columns: hyperfine strengths (gate time 1/(2A))."""
    return np.array([[overhauser_z_error(0.5 / a, t2) for a in a_freqs] for t2 in t2_stars])


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class T2StarCDF:
    """Sorted finite T2* samples with empirical CDF; empty baths counted apart."""

    values: np.ndarray  # s, ascending, finite only
    cumulative: np.ndarray
    n_samples: int
    n_infinite: int
    raw: np.ndarray  # per-sample T2* in realisation order (inf for empty)

    def median(self) -> float:
        return float(np.median(self.raw))


def _t2star_sample(args) -> float:
    shape, isotope, ppm, seed, index, cutoff_radii, random_valley = args
    region = SupportRegion.for_dot(shape.r0, shape.z0, cutoff_radii)
    bath = sample_occupancy(region, isotope, ppm, seed, stream=index)
    if random_valley:
        theta = keyed_rng(seed, index, "valley").uniform(0.0, 2.0 * math.pi)
        shape = DotShape(shape.r0, shape.z0, shape.center, theta)
    a = CONSTANTS.planck_h * hyperfine_freq(shape, bath.positions, isotope)
    return t2_star(a)


def t2star_samples(
    shape: DotShape,
    isotope: IsotopeSpec,
    ppm: float,
    n_samples: int,
    seed: int,
    cutoff_radii: float = 5.0,
    random_valley: bool = True,
    workers: int = 1,
) -> np.ndarray:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tasks = [(shape, isotope, ppm, seed, i, cutoff_radii, random_valley) for i in range(n_samples)]
    return np.array(parallel_map(_t2star_sample, tasks, workers))


def t2star_cdf(
    shape: DotShape,
    isotope: IsotopeSpec,
    ppm: float,
    n_samples: int,
    seed: int,
    cutoff_radii: float = 5.0,
    random_valley: bool = True,
    workers: int = 1,
) -> T2StarCDF:
    raw = t2star_samples(shape, isotope, ppm, n_samples, seed, cutoff_radii, random_valley, workers)
    finite = np.sort(raw[np.isfinite(raw)])
    cum = np.arange(1, len(finite) + 1) / n_samples
    return T2StarCDF(finite, cum, n_samples, int(np.sum(~np.isfinite(raw))), raw)
