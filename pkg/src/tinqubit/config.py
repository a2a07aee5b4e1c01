"""Run configuration: per-subcommand parameter blocks with strict TOML/JSON loading.

A config file holds optional top-level ``seed``, ``workers`` and
``isotope_file`` keys plus one table per subcommand, e.g.::

    seed = 7

    [fig6]
    shapes_nm = [[10, 5], [20, 10]]   # (r0, z0) pairs, nm
    ppm = [46900, 500, 50]
    samples = 500

A run manifest (JSON, written next to every output) is itself a valid config
for the subcommand that produced it.  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import tomli

DEFAULT_SHAPES_NM = ((10.0, 5.0), (10.0, 10.0), (20.0, 5.0), (20.0, 10.0))


class ConfigError(ValueError):
    pass


def _logspace(lo, hi, n):
    return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n))


@dataclass
class Table1Params:
    pass


@dataclass
class Table2Params:
    a_khz: tuple[float, ...] = (100.0, 200.0, 400.0)
    t2star_us: tuple[float, ...] = (1.0, 10.0, 100.0)


@dataclass
class Fig3Params:
    shapes_nm: tuple[tuple[float, float], ...] = DEFAULT_SHAPES_NM
    theta_v: tuple[float, ...] = (0.0, math.pi)
    thresholds_khz: tuple[float, ...] = field(default_factory=lambda: _logspace(1.0, 1000.0, 31))
    isotope: str = "119Sn"
    cutoff_radii: float = 5.0


@dataclass
class Fig4Params:
    mode: str = "both"  # instantaneous | sinusoid | both
    a_khz: tuple[float, ...] = (100.0, 200.0, 400.0)
    b_mt: tuple[float, ...] = field(default_factory=lambda: _logspace(0.1, 100.0, 61))
    b0_mt: float = 1.1
    ramp_ns: tuple[float, ...] = field(default_factory=lambda: _logspace(1.0, 3000.0, 24))
    isotope: str = "119Sn"
    # None: twice the minimum count allowed by the propagator's resolution rule
    step_count: int | None = None


@dataclass
class Fig5Params:
    s_values: tuple[float, ...] = field(default_factory=lambda: _logspace(1e-7, 1e-3, 41))
    m: int = 1
    a: float = 0.34
    gradient_scale: float = 10.0  # <(d theta_v/d xi)^2> r0^2 for the optimistic curve
    first_order_c_r0: tuple[float, ...] = (0.01, 0.1, 1.0)
    split: str = "single-axis"
    headline_ratio: float = 1e-5


@dataclass
class Fig6Params:
    shapes_nm: tuple[tuple[float, float], ...] = DEFAULT_SHAPES_NM
    ppm: tuple[float, ...] = (46900.0, 500.0, 50.0)
    samples: int = 500
    isotope: str = "29Si"
    cutoff_radii: float = 5.0
    random_valley: bool = True


@dataclass
class AppendixParams:
    # raw DFT eta_X/eta_Si overrides by element symbol; missing ones use defaults
    eta_ratios: dict[str, float] = field(default_factory=dict)


@dataclass
class ACoeffParams:
    shapes_nm: tuple[tuple[float, float], ...] = DEFAULT_SHAPES_NM
    ppm: tuple[float, ...] = (500.0, 1000.0)
    samples: int = 1000
    isotope: str = "29Si"
    cutoff_radii: float = 5.0


@dataclass
class SweetspotDemoParams:
    r0_nm: float = 20.0
    z0_nm: float = 10.0
    site_nm: tuple[float, float, float] = (3.0, -2.0, 0.0)
    gradient_rms_per_nm: float = 0.1  # G r0^2 = 4: valley terms dominate 1/r0^2
    valley_wavelength_nm: float = 200.0
    valley_offset: float = 0.6
    sigma_nm: float = 0.02
    samples: int = 200_000


PARAMS = {
    "table1": Table1Params,
    "table2": Table2Params,
    "fig3": Fig3Params,
    "fig4": Fig4Params,
    "fig5": Fig5Params,
    "fig6": Fig6Params,
    "appendix": AppendixParams,
    "a-coeff": ACoeffParams,
    "sweetspot-demo": SweetspotDemoParams,
}

TOP_LEVEL = {"seed", "workers", "isotope_file"}


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 20220101
    out: Path = Path("out")
    workers: int = 1
    isotope_file: str | None = None
    params: Any = None

    def resolved(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "workers": self.workers,
            "isotope_file": self.isotope_file,
            "params": params_to_dict(self.params),
        }


def params_to_dict(params) -> dict:
    def conv(v):
        if isinstance(v, (tuple, list)):
            return [conv(x) for x in v]
        return v

    return {k: conv(v) for k, v in dataclasses.asdict(params).items()}


def _coerce(cls, values: dict, where: str):
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(values) - set(names)
    if unknown:
        raise ConfigError(f"[{where}] unknown key(s): {', '.join(sorted(unknown))}")
    out = {}
    for k, v in values.items():
        if isinstance(v, list):
            v = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        out[k] = v
    return cls(**out)


def validate(params) -> None:
    for name in ("samples",):
        if hasattr(params, name) and getattr(params, name) < 1:
            raise ConfigError(f"{name} must be >= 1")
    if isinstance(params, Fig4Params) and params.mode not in ("instantaneous", "sinusoid", "both"):
        raise ConfigError(f"fig4 mode must be instantaneous, sinusoid or both, not {params.mode!r}")
    if isinstance(params, Fig4Params) and params.step_count is not None and params.step_count < 1:
        raise ConfigError("step_count must be >= 1")
    if isinstance(params, Fig5Params):
        if params.m < 1:
            raise ConfigError("m must be >= 1")
        if params.split not in ("single-axis", "equal"):
            raise ConfigError("split must be 'single-axis' or 'equal'")
    for name in ("ppm",):
        for v in getattr(params, name, ()):
            if not 0 <= v <= 1e6:
                raise ConfigError(f"ppm value {v} outside [0, 1e6]")


def load_config_file(path: str | Path, subcommand: str) -> dict:
    """Flat dict of top-level keys plus ``params`` for ``subcommand``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        if doc.get("subcommand") != subcommand:
            raise ConfigError(f"manifest was written by {doc.get('subcommand')!r}, not {subcommand!r}")
        extra = set(doc) - TOP_LEVEL - {"subcommand", "params", "tool", "version", "outputs", "metadata", "environment"}
        if extra:
            raise ConfigError(f"unknown manifest key(s): {', '.join(sorted(extra))}")
        top = {k: doc[k] for k in TOP_LEVEL if k in doc}
        return {**top, "params": doc.get("params", {})}
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = set(doc) - TOP_LEVEL - set(PARAMS)
    if unknown:
        raise ConfigError(f"unknown config key(s)/section(s): {', '.join(sorted(unknown))}")
    for name, cls in PARAMS.items():
        if name in doc:
            validate(_coerce(cls, doc[name], name))  # check every section, not only the one in use
    top = {k: doc[k] for k in TOP_LEVEL if k in doc}
    return {**top, "params": doc.get(subcommand, {})}


def build_config(subcommand: str, file_values: dict | None, overrides: dict, out: Path) -> RunConfig:
    file_values = file_values or {}
    param_values = dict(file_values.get("params", {}))
    top = {k: v for k, v in file_values.items() if k != "params"}
    for k, v in overrides.items():
        if v is None:
            continue
        if k in TOP_LEVEL:
            top[k] = v
        else:
            param_values[k] = v
    params = _coerce(PARAMS[subcommand], param_values, subcommand)
    validate(params)
    seed = int(top.get("seed", RunConfig.seed))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    workers = int(top.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return RunConfig(subcommand, seed, out, workers, top.get("isotope_file"), params)
