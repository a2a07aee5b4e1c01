"""Relativistic contact-density corrections and Z-scaling across group IV (C..Pb)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .isotopes import ETA_GE, ETA_SI_WILSON, ETA_SN


@dataclass(frozen=True)
class Element:
    symbol: str
    Z: int
    atomic_mass: float
    valence_n: int


GROUP_IV = (
    Element("C", 6, 12.011, 2),
    Element("Si", 14, 28.09, 3),
    Element("Ge", 32, 72.63, 4),
    Element("Sn", 50, 118.71, 5),
    Element("Pb", 82, 207.2, 6),
)

PB_IU_RATIO = 15.3


def iu_correction(n: int, Z: int, alpha: float = CONSTANTS.fine_structure_alpha) -> float:
    """Leading-order relativistic enhancement B(n, Z) of an ns contact density."""
    if n < 1 or Z < 1:
        raise ValueError("n and Z must be positive integers")
    az = alpha * Z
    if az >= 1:
        raise ValueError(f"alpha*Z = {az:.3f} >= 1: series expansion invalid")
    return 1.0 + (n * n + 9 * n - 11) / (6.0 * n * n) * az * az


def otten_ratio(Z1: float, A1: float, Z2: float, A2: float) -> float:
    """Contact density ratio from Z^2 / A^(1/3) scaling."""
    if min(Z1, A1, Z2, A2) <= 0:
        raise ValueError("Z and A must be positive")
    return (Z1**2 / A1 ** (1 / 3)) / (Z2**2 / A2 ** (1 / 3))


@dataclass(frozen=True)
class ContactRatioRow:
    symbol: str
    Z: int
    eta_dft: float
    eta_iu: float
    otten_ratio: float
    authoritative: bool = True


def _quadratic_through(zs, ys):
    return np.polyfit(np.asarray(zs, float), np.asarray(ys, float), 2)


def default_eta_ratios() -> tuple[dict[str, float], set[str]]:
    """Raw DFT eta_X / eta_Si and the set of symbols that are extrapolated.

    Si, Ge, Sn come from the registry; Pb is backed out of its IU-corrected
    ratio; C is extrapolated along the quadratic through Si, Ge, Sn.
    """
    by = {e.symbol: e for e in GROUP_IV}
    ratios = {"Si": 1.0, "Ge": ETA_GE / ETA_SI_WILSON, "Sn": ETA_SN / ETA_SI_WILSON}
    b_si = iu_correction(by["Si"].valence_n, by["Si"].Z)
    ratios["Pb"] = PB_IU_RATIO * b_si / iu_correction(by["Pb"].valence_n, by["Pb"].Z)
    coef = _quadratic_through([by[s].Z for s in ("Si", "Ge", "Sn")], [ratios[s] for s in ("Si", "Ge", "Sn")])
    ratios["C"] = float(np.polyval(coef, by["C"].Z))
    return ratios, {"C"}


def ratio_table(eta_ratios: dict[str, float] | None = None, elements=GROUP_IV) -> list[ContactRatioRow]:
    extrapolated: set[str] = set()
    if eta_ratios is None:
        eta_ratios, extrapolated = default_eta_ratios()
    si = next(e for e in elements if e.symbol == "Si")
    b_si = iu_correction(si.valence_n, si.Z)
    rows = []
    for e in elements:
        raw = eta_ratios[e.symbol] / eta_ratios["Si"]
        if raw <= 0:
            raise ValueError(f"{e.symbol}: eta ratio must be positive")
        rows.append(
            ContactRatioRow(
                e.symbol,
                e.Z,
                raw,
                raw * iu_correction(e.valence_n, e.Z) / b_si,
                otten_ratio(e.Z, e.atomic_mass, si.Z, si.atomic_mass),
                e.symbol not in extrapolated,
            )
        )
    return rows


def quad_fit_r2(x, y) -> float:
    """R^2 of a least-squares quadratic fit; NaN when the ordinates are all equal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("quadratic fit needs at least 3 points")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return math.nan
    coef = np.polyfit(x, y, 2)
    ss_res = float(np.sum((y - np.polyval(coef, x)) ** 2))
    return 1.0 - ss_res / ss_tot


def table_r2(rows: list[ContactRatioRow], column: str) -> float:
    return quad_fit_r2([r.Z for r in rows], [getattr(r, column) for r in rows])
