"""Physical constants (SI, CODATA 2018) used throughout the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_PLANCK_H = 6.62607015e-34
_A0 = 0.543e-9


@dataclass(frozen=True)
class PhysicalConstants:
    mu0: float = 1.25663706212e-6  # N/A^2
    bohr_magneton: float = 9.2740100783e-24  # J/T
    nuclear_magneton: float = 5.0507837461e-27  # J/T
    # free-electron |gamma_e| / 2pi
    electron_gyro: float = 28.0249514242e9  # Hz/T
    planck_h: float = _PLANCK_H
    hbar: float = _PLANCK_H / (2.0 * math.pi)
    fine_structure_alpha: float = 7.2973525693e-3
    si_lattice_const_a0: float = _A0
    valley_wavenumber_k0: float = 0.85 * 2.0 * math.pi / _A0
    # |gamma| / 2pi of 29Si (mu = -0.55529 mu_N, I = 1/2)
    si_29_gyro: float = 8.465499e6  # Hz/T
    free_electron_g: float = field(default=2.00231930436256)


CONSTANTS = PhysicalConstants()
