"""Electron-nucleus two-spin dynamics under a switched contact hyperfine coupling.

Basis order is (|up_e up_n>, |up_e dn_n>, |dn_e up_n>, |dn_e dn_n>).  Sign
convention, stated once: with gamma_e and gamma_n both positive magnitudes,

    H = s A (I . S) + h B (gamma_e S_z - gamma_n I_z),

so the electron and nuclear Zeeman terms enter with opposite signs and the
flip-flop pair |up dn>, |dn up> is detuned by h B (gamma_e + gamma_n).  The
diagonal hyperfine shift -A/4 is common to both flip-flop states and drops out
of the detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .constants import CONSTANTS
from .isotopes import IsotopeSpec

UU, UD, DU, DD = range(4)

_sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_id2 = np.eye(2, dtype=complex)

S_OPS = [np.kron(s, _id2) for s in (_sx, _sy, _sz)]
I_OPS = [np.kron(_id2, s) for s in (_sx, _sy, _sz)]
I_DOT_S = sum(i @ s for i, s in zip(I_OPS, S_OPS))


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class SpinPairParams:
    a_freq: float  # peak A/h, Hz
    b_field: float  # T
    nuclear_gyro: float  # Hz/T, magnitude
    electron_gyro: float = CONSTANTS.electron_gyro

    def __post_init__(self):
        if self.a_freq < 0 or self.b_field < 0:
            raise ValueError("a_freq and b_field must be non-negative")

    @classmethod
    def for_isotope(cls, a_freq: float, b_field: float, isotope: IsotopeSpec, **kw):
        return cls(a_freq, b_field, isotope.gyro_hz_per_t(), **kw)

    @property
    def detuning(self) -> float:
        """Flip-flop detuning in Hz."""
        return self.b_field * (self.electron_gyro + self.nuclear_gyro)

    @property
    def rabi(self) -> float:
        return math.hypot(self.a_freq, self.detuning)

    @property
    def larmor(self) -> float:
        return self.electron_gyro * self.b_field


@dataclass(frozen=True)
class RampProfile:
    ramp_time: float
    hold_time: float
    shape: Literal["instantaneous", "sinusoid"] = "instantaneous"

    def __post_init__(self):
        if self.ramp_time < 0 or self.hold_time < 0:
            raise ValueError("ramp and hold times must be non-negative")
        if self.shape not in ("instantaneous", "sinusoid"):
            raise ValueError(f"unknown ramp shape {self.shape!r}")

    @property
    def ramp(self) -> float:
        return 0.0 if self.shape == "instantaneous" else self.ramp_time

    @property
    def total_time(self) -> float:
        return 2 * self.ramp + self.hold_time

    def scale(self, t):
        """Hyperfine switch fraction s(t) in [0, 1]; half-cosine ramps."""
        t = np.asarray(t, dtype=float)
        r, hold = self.ramp, self.hold_time
        if r == 0:
            return np.where((t >= 0) & (t <= hold), 1.0, 0.0)
        up = 0.5 * (1 - np.cos(np.pi * t / r))
        down = 0.5 * (1 - np.cos(np.pi * (self.total_time - t) / r))
        return np.where(t < r, up, np.where(t <= r + hold, 1.0, down)).clip(0.0, 1.0)


@dataclass(frozen=True)
class DiagonalGate:
    """U = diag(e^{i g}, e^{i(g+zn)}, e^{i(g+ze)}, e^{i(g+ze+zn+zz)}).

    Equivalently U = e^{i g} Rz_e Rz_n CPhase(zz) with the global phase
    referenced to |up up>; every angle is wrapped into (-pi, pi], which makes
    the quadruple unique.  zz is the conditional phase of the gate.
    """

    global_phase: float
    z_electron: float
    z_nuclear: float
    zz_angle: float

    def matrix(self) -> np.ndarray:
        g, ze, zn, zz = self.global_phase, self.z_electron, self.z_nuclear, self.zz_angle
        return np.diag(np.exp(1j * np.array([g, g + zn, g + ze, g + ze + zn + zz])))


def _wrap(angle: float) -> float:
    """Wrap into (-pi, pi]."""
    w = -((-angle + math.pi) % (2 * math.pi) - math.pi)
    return math.pi if w == -math.pi else w


def hamiltonian(params: SpinPairParams, a_scale: float = 1.0) -> np.ndarray:
    """4x4 Hamiltonian in joules."""
    h = CONSTANTS.planck_h
    zeeman = params.electron_gyro * S_OPS[2] - params.nuclear_gyro * I_OPS[2]
    return h * (a_scale * params.a_freq * I_DOT_S + params.b_field * zeeman)


def sudden_flipflop_probability(params: SpinPairParams, hold_time: float | None = None) -> float:
    """Flip-flop probability for instantaneous switching; ``None`` -> worst case over hold."""
    a, omega = params.a_freq, params.rabi
    if a == 0:
        return 0.0
    p_max = a * a / (omega * omega)
    if hold_time is None:
        return p_max
    return p_max * math.sin(math.pi * omega * hold_time) ** 2


# S_z + I_z sectors; the Hamiltonian never couples them
_SECTORS = ((UU,), (UD, DU), (DD,))


def _expm_herm_batch(hams: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt / hbar) for a stack of Hamiltonians, one S_z + I_z sector at a time."""
    out = np.zeros(hams.shape, dtype=complex)
    for idx in _SECTORS:
        rows, cols = np.ix_(idx, idx)
        w, v = np.linalg.eigh(hams[:, rows, cols])
        phase = np.exp(-1j * w * (dt / CONSTANTS.hbar))
        out[:, rows, cols] = (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return out


def _project_unitary(u: np.ndarray) -> np.ndarray:
    """Nearest unitary (polar factor) of each sector block.

    Each step exponential is unitary only to a rounding bias of about 1e-16,
    which a product of n steps accumulates linearly; the polar factor removes
    that drift without touching the propagator beyond rounding level.
    """
    out = np.zeros_like(u)
    for idx in _SECTORS:
        rows, cols = np.ix_(idx, idx)
        w, _, vh = np.linalg.svd(u[rows, cols])
        out[rows, cols] = w @ vh
    return out


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """us[k-1] @ ... @ us[1] @ us[0] via pairwise reduction."""
    while len(us) > 1:
        if len(us) % 2:
            tail = us[-1:]
            us = np.concatenate([us[1:-1:2] @ us[0:-1:2], tail])
        else:
            us = us[1::2] @ us[0::2]
    return us[0]


def _segment(params, scale_fn, t0, t1, n, reverse, chunk=1 << 15):
    if n == 0 or t1 <= t0:
        return np.eye(4, dtype=complex)
    dt = (t1 - t0) / n
    sign = -1.0 if reverse else 1.0
    h0 = hamiltonian(params, 0.0)
    h1 = hamiltonian(params, 1.0) - h0
    total = np.eye(4, dtype=complex)
    for start in range(0, n, chunk):
        k = np.arange(start, min(n, start + chunk))
        s = scale_fn(t0 + (k + 0.5) * dt)
        hams = h0 + s[:, None, None] * h1
        us = _expm_herm_batch(hams, sign * dt)
        if reverse:
            # latest step is applied first
            total = total @ _ordered_product(us[::-1])
        else:
            total = _ordered_product(us) @ total
    return _project_unitary(total)


def _check_resolution(params, ramp, step_count):
    dt = ramp.total_time / step_count
    fastest = max(params.rabi, params.larmor)
    if fastest > 0 and dt > 1.0 / (50.0 * fastest):
        need = math.ceil(ramp.total_time * 50.0 * fastest)
        raise ResolutionError(
            f"step of {dt:.3g} s under-resolves {fastest:.3g} Hz dynamics; use step_count >= {need}"
        )


def evolve(
    params: SpinPairParams, ramp: RampProfile, step_count: int, time_reversed: bool = False
) -> np.ndarray:
    """Propagator over the full ramp-on / hold / ramp-off profile.

    Each of ``step_count`` equal steps applies the exact exponential of the
    Hamiltonian sampled at the step midpoint.  Constant stretches (the hold,
    and the whole profile for instantaneous switching) use one exponential
    over the whole stretch, which equals the product of its steps.  ``time_reversed``
    runs the steps backwards with the opposite sign of time, giving U^dagger.
    """
    if step_count < 1:
        raise ValueError("step_count must be >= 1")
    T = ramp.total_time
    if T == 0:
        return np.eye(4, dtype=complex)
    _check_resolution(params, ramp, step_count)
    dt = T / step_count
    r = ramp.ramp
    # split steps between phases in proportion to duration; every step has length dt
    n_ramp = int(round(r / dt)) if r > 0 else 0
    n_hold = step_count - 2 * n_ramp
    if r > 0 and (n_ramp < 1 or n_hold < 0 or not math.isclose(n_ramp * dt, r, rel_tol=1e-9)):
        # fall back to uniform midpoint stepping across the whole profile
        return _segment(params, ramp.scale, 0.0, T, step_count, time_reversed)
    on = _segment(params, ramp.scale, 0.0, r, n_ramp, time_reversed)
    off = _segment(params, ramp.scale, r + ramp.hold_time, T, n_ramp, time_reversed)
    sign = -1.0 if time_reversed else 1.0
    # n_hold identical steps multiply to a single exponential over n_hold * dt
    hold = _expm_herm_batch(hamiltonian(params, 1.0)[None], sign * n_hold * dt)[0]
    if time_reversed:
        return _project_unitary(on @ hold @ off)
    return _project_unitary(off @ hold @ on)


def flipflop_probability(u: np.ndarray) -> float:
    return float(abs(u[DU, UD]) ** 2)


def worst_case_flipflop(params: SpinPairParams, ramp_time: float, step_count: int) -> float:
    """Flip-flop probability maximised over the hold duration, sinusoid ramps.

    With U = U_off exp(-i H t) U_on the flip-flop amplitude is a sum over the
    eigenstates k of H of c_k e^{-i E_k t}; its modulus peaks at sum_k |c_k|.
    """
    if ramp_time == 0:
        return sudden_flipflop_probability(params)
    ramp = RampProfile(ramp_time, 0.0, "sinusoid")
    _check_resolution(params, ramp, step_count)
    n = step_count // 2
    u_on = _segment(params, ramp.scale, 0.0, ramp_time, n, False)
    u_off = _segment(params, ramp.scale, ramp_time, 2 * ramp_time, n, False)
    _, vecs = np.linalg.eigh(hamiltonian(params, 1.0))
    c = (u_off @ vecs)[DU, :] * (np.conj(vecs).T @ u_on)[:, UD]
    return float(np.sum(np.abs(c)) ** 2)


def decompose_diagonal(u: np.ndarray, tol: float = 1e-6) -> DiagonalGate:
    u = np.asarray(u)
    off = u - np.diag(np.diag(u))
    if np.max(np.abs(off)) > tol:
        raise ValueError("matrix is not diagonal within tolerance")
    ph = np.angle(np.diag(u))
    g = _wrap(ph[UU])
    zn = _wrap(ph[UD] - ph[UU])
    ze = _wrap(ph[DU] - ph[UU])
    zz = _wrap(ph[DD] - ph[UD] - ph[DU] + ph[UU])
    return DiagonalGate(g, ze, zn, zz)


def cphase_hold_time(a_freq: float) -> float:
    if not a_freq > 0:
        raise ValueError("hyperfine frequency must be positive")
    return 0.5 / a_freq
