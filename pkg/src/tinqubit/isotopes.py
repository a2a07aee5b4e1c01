"""Group-IV nuclide registry and the Fermi-contact density -> energy conversion.

The built-in table can be extended or overridden with a TOML file, one table
per nuclide::

    # override.toml
    ["119Sn"]
    nuclear_spin = "1/2"        # rational, as a string
    abundance_pct = 8.59        # percent
    gyro_ratio_rel_si = 1.89    # |gamma_X / gamma_Si|, dimensionless
    atomic_radius_rel_si = 1.32 # r(X) / r(Si), dimensionless
    solubility_k = 0.016        # melting-point distribution coefficient; omit if negligible
    atomic_number_Z = 50
    mass_number_A = 119
    valence_n = 5               # principal quantum number of the valence s shell
    eta = 996.4                 # bunching factor; omit if unknown
    eta_rel_quoted = 2400.0     # optional: relativistically corrected value quoted in the literature

Fields missing from an override section are inherited from the built-in row of
the same symbol; new symbols must supply every required field.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import tomli
import tomli_w

from .constants import CONSTANTS, PhysicalConstants

ETA_SI_WILSON = 178.0
ETA_SI_ASSALI = 159.4
ETA_GE = 570.0
ETA_SN = 996.4


class UnknownIsotopeError(KeyError):
    pass


class MissingEtaError(ValueError):
    pass


@dataclass(frozen=True)
class IsotopeSpec:
    symbol: str
    nuclear_spin: Fraction
    abundance_pct: float
    gyro_ratio_rel_si: float
    atomic_radius_rel_si: float
    solubility_k: float | None
    atomic_number_Z: int
    mass_number_A: int
    valence_n: int
    eta: float | None = None
    eta_rel_quoted: float | None = None

    def __post_init__(self):
        if self.nuclear_spin <= 0:
            raise ValueError(f"{self.symbol}: nuclear_spin must be positive")
        if not 0.0 < self.abundance_pct <= 100.0:
            raise ValueError(f"{self.symbol}: abundance_pct must lie in (0, 100]")
        if self.gyro_ratio_rel_si <= 0:
            raise ValueError(f"{self.symbol}: gyro_ratio_rel_si must be positive")

    def gyro_hz_per_t(self, constants: PhysicalConstants = CONSTANTS) -> float:
        """|gamma| / 2pi of this nuclide in Hz/T."""
        return self.gyro_ratio_rel_si * constants.si_29_gyro

    def require_eta(self) -> float:
        if self.eta is None:
            raise MissingEtaError(f"no bunching factor eta registered for {self.symbol}")
        return self.eta


def _row(symbol, spin, abundance, gyro, radius, solubility, Z, A, n, eta=None, eta_rel=None):
    return IsotopeSpec(
        symbol=symbol,
        nuclear_spin=Fraction(spin),
        abundance_pct=abundance,
        gyro_ratio_rel_si=gyro,
        atomic_radius_rel_si=radius,
        solubility_k=solubility,
        atomic_number_Z=Z,
        mass_number_A=A,
        valence_n=n,
        eta=eta,
        eta_rel_quoted=eta_rel,
    )


_BUILTIN = (
    _row("13C", "1/2", 1.07, 1.26, 0.64, 5.7, 6, 13, 2),
    _row("29Si", "1/2", 4.69, 1.00, 1.00, 1.0, 14, 29, 3, ETA_SI_WILSON),
    _row("73Ge", "9/2", 7.75, 1.49, 1.14, 0.33, 32, 73, 4, ETA_GE),
    _row("115Sn", "1/2", 0.34, 1.65, 1.32, 0.016, 50, 115, 5, ETA_SN, 2400.0),
    _row("117Sn", "1/2", 7.68, 1.81, 1.32, 0.016, 50, 117, 5, ETA_SN, 2400.0),
    _row("119Sn", "1/2", 8.59, 1.89, 1.32, 0.016, 50, 119, 5, ETA_SN, 2400.0),
    _row("207Pb", "1/2", 22.1, 1.07, 1.64, None, 82, 207, 6, None, 2920.0),
)

_FIELDS = {f.name for f in dataclasses.fields(IsotopeSpec)} - {"symbol"}
_OPTIONAL = {"solubility_k", "eta", "eta_rel_quoted"}


class IsotopeRegistry(Mapping[str, IsotopeSpec]):
    """Immutable symbol -> IsotopeSpec mapping."""

    def __init__(self, rows):
        self._rows = MappingProxyType({r.symbol: r for r in rows})

    def __getitem__(self, symbol: str) -> IsotopeSpec:
        try:
            return self._rows[symbol]
        except KeyError:
            raise UnknownIsotopeError(
                f"unknown isotope {symbol!r}; available: {', '.join(self._rows)}"
            ) from None

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)

    def with_overrides(self, table: Mapping[str, Mapping]) -> "IsotopeRegistry":
        rows = dict(self._rows)
        for symbol, values in table.items():
            unknown = set(values) - _FIELDS
            if unknown:
                raise ValueError(f"{symbol}: unknown isotope field(s) {sorted(unknown)}")
            parsed = {k: Fraction(v) if k == "nuclear_spin" else v for k, v in values.items()}
            if symbol in rows:
                rows[symbol] = dataclasses.replace(rows[symbol], **parsed)
            else:
                missing = _FIELDS - _OPTIONAL - set(parsed)
                if missing:
                    raise ValueError(f"{symbol}: new nuclide is missing {sorted(missing)}")
                rows[symbol] = IsotopeSpec(symbol=symbol, **{**dict.fromkeys(_OPTIONAL), **parsed})
        return IsotopeRegistry(rows.values())

    def to_toml(self) -> str:
        doc = {}
        for symbol, row in self._rows.items():
            entry = {}
            for f in dataclasses.fields(IsotopeSpec):
                if f.name == "symbol":
                    continue
                value = getattr(row, f.name)
                if value is None:
                    continue
                entry[f.name] = str(value) if f.name == "nuclear_spin" else value
            doc[symbol] = entry
        return tomli_w.dumps(doc)

    @classmethod
    def from_toml(cls, text: str, base: "IsotopeRegistry | None" = None) -> "IsotopeRegistry":
        table = tomli.loads(text)
        if base is None:
            return cls(()).with_overrides(table)
        return base.with_overrides(table)


DEFAULT_REGISTRY = IsotopeRegistry(_BUILTIN)


def load_registry(path: str | Path | None = None) -> IsotopeRegistry:
    if path is None:
        return DEFAULT_REGISTRY
    return IsotopeRegistry.from_toml(Path(path).read_text(), base=DEFAULT_REGISTRY)


def lookup_isotope(symbol: str, registry: IsotopeRegistry = DEFAULT_REGISTRY) -> IsotopeSpec:
    return registry[symbol]


def hyperfine_prefactor(isotope: IsotopeSpec, constants: PhysicalConstants = CONSTANTS) -> float:
    """Energy per unit contact density, J m^3.

    A = (2 mu0 / 3) (g_e mu_B) (g_I mu_N) |psi(0)|^2 with g mu = h * gamma/2pi.
    Magnitudes only; the sign of gamma_I does not enter any error budget here.
    """
    h = constants.planck_h
    return (2.0 * constants.mu0 / 3.0) * (h * constants.electron_gyro) * (
        h * isotope.gyro_hz_per_t(constants)
    )


def contact_density_to_hyperfine(
    density: float, isotope: IsotopeSpec, constants: PhysicalConstants = CONSTANTS
) -> tuple[float, float]:
    """Contact density (1/m^3) -> (A in J, A/h in Hz)."""
    if density < 0:
        raise ValueError("contact density must be non-negative")
    energy = hyperfine_prefactor(isotope, constants) * density
    return energy, energy / constants.planck_h
