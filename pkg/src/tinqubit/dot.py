"""Quantum-dot envelope model, per-site hyperfine strengths and the site survey.

The envelope is a lateral Gaussian of radius r0 times the ground state of an
infinite well of width z0, times the valley interference factor
cos^2(k0 z - theta_v / 2).  With the valley factor averaged to 1/2 the
normalisation is 4 / (pi r0^2 z0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS
from .isotopes import IsotopeSpec, hyperfine_prefactor
from .lattice import LatticeSite, SupportRegion, iter_site_chunks


@dataclass(frozen=True)
class DotShape:
    r0: float
    z0: float
    center: tuple[float, float] = (0.0, 0.0)
    theta_v: float = 0.0

    def __post_init__(self):
        if self.r0 <= 0 or self.z0 <= 0:
            raise ValueError("r0 and z0 must be positive")
        object.__setattr__(self, "theta_v", float(self.theta_v) % (2.0 * math.pi))

    @property
    def norm(self) -> float:
        return 4.0 / (math.pi * self.r0**2 * self.z0)

    def support(self, cutoff_radii: float = 5.0) -> SupportRegion:
        return SupportRegion.for_dot(self.r0, self.z0, cutoff_radii)

    def label(self) -> str:
        return f"r0={self.r0 * 1e9:g}nm,z0={self.z0 * 1e9:g}nm"


@dataclass(frozen=True)
class SiteHyperfine:
    site: LatticeSite
    a_energy: float
    a_freq: float


def envelope_density(shape: DotShape, position, k0: float = CONSTANTS.valley_wavenumber_k0):
    """Envelope probability density (1/m^3) at one or many positions (..., 3)."""
    p = np.asarray(position, dtype=float)
    x = p[..., 0] - shape.center[0]
    y = p[..., 1] - shape.center[1]
    z = p[..., 2]
    inside = np.abs(z) < shape.z0 / 2.0
    dens = (
        shape.norm
        * np.exp(-(x * x + y * y) / shape.r0**2)
        * np.cos(np.pi * z / shape.z0) ** 2
        * np.cos(k0 * z - shape.theta_v / 2.0) ** 2
    )
    dens = np.where(inside, dens, 0.0)
    return float(dens) if dens.ndim == 0 else dens


def hyperfine_freq(shape: DotShape, positions, isotope: IsotopeSpec):
    """Vectorised A/h (Hz) for ``isotope`` sitting at each position."""
    scale = isotope.require_eta() * hyperfine_prefactor(isotope) / CONSTANTS.planck_h
    return scale * envelope_density(shape, positions)


def site_hyperfine(shape: DotShape, site: LatticeSite, isotope: IsotopeSpec) -> SiteHyperfine:
    eta = isotope.require_eta()
    energy = hyperfine_prefactor(isotope) * eta * envelope_density(shape, site.position)
    return SiteHyperfine(site, energy, energy / CONSTANTS.planck_h)


def min_gate_time(a_freq: float) -> float:
    """Shortest e-n-CPhase duration for a hyperfine strength A/h, instantaneous switching."""
    if not a_freq > 0:
        raise ValueError("hyperfine frequency must be positive")
    return 0.5 / a_freq


@dataclass(frozen=True)
class SurveyResult:
    shape: DotShape
    thresholds: np.ndarray
    counts: np.ndarray
    peak_freq: float = field(default=0.0)


def hf_survey(
    shape: DotShape,
    isotope: IsotopeSpec,
    thresholds,
    cutoff_radii: float = 5.0,
) -> SurveyResult:
    """Count lattice sites where ``isotope`` would couple with A/h >= each threshold."""
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(thresholds <= 0) or np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be positive and sorted ascending")
    counts = np.zeros(len(thresholds), dtype=np.int64)
    peak = 0.0
    for _, _, pos in iter_site_chunks(shape.support(cutoff_radii)):
        a = np.sort(hyperfine_freq(shape, pos, isotope))
        counts += len(a) - np.searchsorted(a, thresholds, side="left")
        if len(a):
            peak = max(peak, float(a[-1]))
    return SurveyResult(shape, thresholds, counts, peak)
