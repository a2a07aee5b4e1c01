"""Command-line front end: one subcommand per reproduced table or figure.

Every run writes its CSV files plus ``manifest.json`` into the output
directory (``--out``, else $TINQUBIT_OUT, else ./out).  Passing a manifest
back through ``--config`` replays the run with byte-identical CSV output.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PARAMS, ConfigError, build_config, load_config_file
from .dephasing import overhauser_z_error, t2star_samples
from .dot import DotShape, hf_survey, min_gate_time
from .dynamics import (
    ResolutionError,
    SpinPairParams,
    sudden_flipflop_probability,
    worst_case_flipflop,
)
from .isotopes import MissingEtaError, UnknownIsotopeError, load_registry
from .lattice import LatticeSizeError
from .relativistic import default_eta_ratios, ratio_table, table_r2
from .zz import (
    DegenerateSiteError,
    SweetSpotError,
    ValleyField,
    compute_a,
    fig5_curves,
    find_sweet_spot,
    headline_bound,
    relative_shift,
    zz_bound_sweetspot,
    zz_error_exact,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NM = 1e-9


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


class Outputs:
    """Collects CSV/text artefacts, then writes them and the manifest."""

    def __init__(self):
        self.files: dict[str, str] = {}
        self.metadata: dict = {}

    def csv(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        self.files[name] = buf.getvalue()

    def text(self, name: str, content: str) -> None:
        self.files[name] = content

    def write(self, cfg) -> Path:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        digests = {}
        for name, content in self.files.items():
            (out / name).write_text(content)
            digests[name] = hashlib.sha256(content.encode()).hexdigest()
        manifest = {
            "tool": "tinqubit",
            "version": __version__,
            **cfg.resolved(),
            "metadata": self.metadata,
            "outputs": digests,
            "environment": {"python": platform.python_version(), "numpy": np.__version__},
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return out


def _shapes(pairs, theta_v=0.0):
    return [DotShape(r0 * NM, z0 * NM, theta_v=theta_v) for r0, z0 in pairs]


# ---------------------------------------------------------------- subcommands


def run_table1(cfg, registry, out: Outputs):
    header = [
        "symbol", "nuclear_spin", "abundance_pct", "gyro_ratio_rel_si", "atomic_radius_rel_si",
        "solubility_k", "atomic_number_Z", "mass_number_A", "valence_n", "eta", "eta_rel_quoted",
    ]
    rows = []
    for row in registry.values():
        rows.append([
            row.symbol, str(row.nuclear_spin), row.abundance_pct, row.gyro_ratio_rel_si,
            row.atomic_radius_rel_si, "" if row.solubility_k is None else row.solubility_k,
            row.atomic_number_Z, row.mass_number_A, row.valence_n,
            "" if row.eta is None else row.eta, "" if row.eta_rel_quoted is None else row.eta_rel_quoted,
        ])
    out.csv("table1.csv", header, rows)


def run_table2(cfg, registry, out: Outputs):
    p = cfg.params
    rows = []
    grid = []
    for t2 in p.t2star_us:
        line = []
        for a in p.a_khz:
            gate = min_gate_time(a * 1e3)
            prob = overhauser_z_error(gate, t2 * 1e-6)
            rows.append([t2 * 1e-6, a * 1e3, gate, prob])
            line.append(prob)
        grid.append(line)
    out.csv("table2.csv", ["t2star_s", "a_hz", "gate_time_s", "probability"], rows)
    width = 12
    lines = ["A/h".ljust(8) + "".join(f"{a:g} kHz".rjust(width) for a in p.a_khz)]
    lines.append("T".ljust(8) + "".join(f"{min_gate_time(a * 1e3) * 1e6:g} us".rjust(width) for a in p.a_khz))
    for t2, line in zip(p.t2star_us, grid):
        lines.append(f"{t2:g} us".ljust(8) + "".join(f"{v:.2g}".rjust(width) for v in line))
    out.text("table2.txt", "\n".join(lines) + "\n")


def run_fig3(cfg, registry, out: Outputs):
    p = cfg.params
    iso = registry[p.isotope]
    thresholds = np.asarray(p.thresholds_khz) * 1e3
    rows = []
    for r0, z0 in p.shapes_nm:
        for theta in p.theta_v:
            shape = DotShape(r0 * NM, z0 * NM, theta_v=theta)
            res = hf_survey(shape, iso, thresholds, p.cutoff_radii)
            for th, count in zip(thresholds, res.counts):
                rows.append([r0, z0, theta, th, int(count), min_gate_time(th)])
    out.csv("fig3.csv", ["r0_nm", "z0_nm", "theta_v", "threshold_hz", "count", "min_gate_time_s"], rows)


def _auto_steps(params: SpinPairParams, total_time: float) -> int:
    return max(2, 2 * math.ceil(total_time * 50.0 * max(params.rabi, params.larmor)) + 2)


def run_fig4(cfg, registry, out: Outputs):
    p = cfg.params
    iso = registry[p.isotope]
    out.metadata["fig4_probability"] = "worst case over hold duration"
    out.metadata["fig4_a_values"] = "representative hyperfine strengths chosen by config, not read from a figure"
    if p.mode in ("instantaneous", "both"):
        rows = []
        for a in p.a_khz:
            for b in p.b_mt:
                prm = SpinPairParams.for_isotope(a * 1e3, b * 1e-3, iso)
                rows.append([a * 1e3, b * 1e-3, sudden_flipflop_probability(prm)])
        out.csv("fig4_instantaneous.csv", ["a_hz", "b_t", "probability"], rows)
    if p.mode in ("sinusoid", "both"):
        rows = []
        for a in p.a_khz:
            prm = SpinPairParams.for_isotope(a * 1e3, p.b0_mt * 1e-3, iso)
            for ramp_ns in p.ramp_ns:
                ramp = ramp_ns * 1e-9
                n = p.step_count or _auto_steps(prm, 2 * ramp)
                rows.append([a * 1e3, p.b0_mt * 1e-3, ramp, worst_case_flipflop(prm, ramp, n)])
        out.csv("fig4_sinusoid.csv", ["a_hz", "b_t", "ramp_s", "probability"], rows)


def run_fig5(cfg, registry, out: Outputs):
    p = cfg.params
    rows = fig5_curves(p.s_values, p.m, p.a, p.gradient_scale, p.first_order_c_r0, p.split)
    out.csv("fig5.csv", ["curve_id", "ratio_bound", "p_bound"], rows)
    out.metadata["fig5"] = {
        "split_convention": p.split,
        "optimistic_x_axis": "valley terms kept in the echo-ratio axis, dropped from the ZZ bound",
        "headline": {
            "ratio": p.headline_ratio,
            "m": p.m,
            "single_axis_with_a": headline_bound(p.headline_ratio, p.m, p.a, "single-axis"),
            "equal_split_with_a": headline_bound(p.headline_ratio, p.m, p.a, "equal"),
            "single_axis_a_dropped": headline_bound(p.headline_ratio, p.m, 1.0, "single-axis"),
            "equal_split_a_dropped": headline_bound(p.headline_ratio, p.m, 1.0, "equal"),
        },
    }


def run_fig6(cfg, registry, out: Outputs):
    p = cfg.params
    iso = registry[p.isotope]
    rows, summary = [], []
    for shape in _shapes(p.shapes_nm):
        sid = shape.label()
        for ppm in p.ppm:
            t2 = t2star_samples(shape, iso, ppm, p.samples, cfg.seed, p.cutoff_radii, p.random_valley, cfg.workers)
            rows.extend([sid, ppm, i, v] for i, v in enumerate(t2))
            summary.append([sid, ppm, float(np.median(t2)), int(np.sum(~np.isfinite(t2)))])
    out.csv("fig6.csv", ["shape_id", "ppm", "sample_index", "t2_star_s"], rows)
    out.csv("fig6_summary.csv", ["shape_id", "ppm", "median_t2_star_s", "n_infinite"], summary)
    out.metadata["fig6_valley_phase"] = "uniform in [0, 2pi) per realisation" if p.random_valley else "fixed 0"


def run_appendix(cfg, registry, out: Outputs):
    p = cfg.params
    ratios, extrapolated = default_eta_ratios()
    for k, v in p.eta_ratios.items():
        ratios[k] = float(v)
        extrapolated.discard(k)
    rows = [
        dataclasses.replace(r, authoritative=r.symbol not in extrapolated) for r in ratio_table(ratios)
    ]
    out.csv(
        "appendix.csv",
        ["element", "Z", "eta_dft_ratio", "eta_iu_ratio", "otten_ratio", "authoritative"],
        [[r.symbol, r.Z, r.eta_dft, r.eta_iu, r.otten_ratio, r.authoritative] for r in rows],
    )
    out.csv(
        "appendix_fits.csv",
        ["column", "quadratic_r2"],
        [[c, table_r2(rows, c)] for c in ("eta_dft", "eta_iu", "otten_ratio")],
    )


def run_a_coeff(cfg, registry, out: Outputs):
    p = cfg.params
    res = compute_a(_shapes(p.shapes_nm), p.ppm, registry[p.isotope], p.samples, cfg.seed, p.cutoff_radii, cfg.workers)
    rows = [[label, ppm, m, se, n] for (label, ppm), (m, se, n) in res.per_config.items()]
    rows.append(["pooled", "", res.a, res.stderr, res.n_realizations - res.n_empty])
    out.csv("a_coeff.csv", ["config", "ppm", "a", "stderr", "n_used"], rows)
    out.metadata["a_coeff_empty_realisations"] = res.n_empty


def run_sweetspot_demo(cfg, registry, out: Outputs):
    p = cfg.params
    shape = DotShape(p.r0_nm * NM, p.z0_nm * NM)
    valley = ValleyField.two_component(p.gradient_rms_per_nm / NM, p.valley_wavelength_nm * NM, p.valley_offset)
    site = tuple(v * NM for v in p.site_nm)
    spot = find_sweet_spot(site, valley, shape)
    out.csv(
        "sweetspot.csv",
        ["x0_m", "y0_m", "c0_per_m", "c1_per_m", "c00_per_m2", "c11_per_m2", "iterations", "residual_per_m"],
        [[*spot.center, spot.c0, spot.c1, spot.c00, spot.c11, spot.iterations, spot.residual]],
    )
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 0])))
    sigma = p.sigma_nm * NM
    d0 = rng.normal(0.0, sigma, p.samples)
    d1 = rng.normal(0.0, sigma, p.samples)
    moved = DotShape(shape.r0, shape.z0, spot.center)
    shifts = relative_shift(moved, site, valley, d0, d1)
    exact, lowest = zz_error_exact(shifts)
    err = float(np.std(np.sin(np.pi * shifts / 2) ** 2, ddof=1) / math.sqrt(p.samples))
    g = valley.mean_sq_gradient()
    bound = zz_bound_sweetspot([g[0] * sigma**2, g[1] * sigma**2])
    out.csv(
        "sweetspot_zz.csv",
        ["sigma_m", "zz_exact", "zz_exact_stderr", "zz_lowest_order", "zz_bound"],
        [[sigma, exact, err, lowest, bound]],
    )


RUNNERS = {
    "table1": run_table1,
    "table2": run_table2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
    "appendix": run_appendix,
    "a-coeff": run_a_coeff,
    "sweetspot-demo": run_sweetspot_demo,
}


# ---------------------------------------------------------------- argument parsing


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _shapes_arg(text: str):
    # "10x5,20x10" -> ((10, 5), (20, 10))
    return tuple(tuple(float(v) for v in item.split("x")) for item in text.split(","))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


SUBCOMMAND_FLAGS = {
    "table2": [("--a-khz", "a_khz", _floats), ("--t2star-us", "t2star_us", _floats)],
    "fig3": [
        ("--shapes", "shapes_nm", _shapes_arg),
        ("--thresholds-khz", "thresholds_khz", _floats),
        ("--isotope", "isotope", str),
        ("--cutoff-radii", "cutoff_radii", float),
    ],
    "fig4": [
        ("--mode", "mode", str),
        ("--a-khz", "a_khz", _floats),
        ("--b-mt", "b_mt", _floats),
        ("--b0-mt", "b0_mt", float),
        ("--ramp-ns", "ramp_ns", _floats),
        ("--isotope", "isotope", str),
        ("--step-count", "step_count", _positive_int),
    ],
    "fig5": [
        ("--s-values", "s_values", _floats),
        ("--m", "m", int),
        ("--a", "a", float),
        ("--gradient-scale", "gradient_scale", float),
        ("--split", "split", str),
    ],
    "fig6": [
        ("--shapes", "shapes_nm", _shapes_arg),
        ("--ppm", "ppm", _floats),
        ("--samples", "samples", _positive_int),
        ("--isotope", "isotope", str),
        ("--cutoff-radii", "cutoff_radii", float),
    ],
    "a-coeff": [
        ("--shapes", "shapes_nm", _shapes_arg),
        ("--ppm", "ppm", _floats),
        ("--samples", "samples", _positive_int),
        ("--cutoff-radii", "cutoff_radii", float),
    ],
    "sweetspot-demo": [
        ("--sigma-nm", "sigma_nm", float),
        ("--samples", "samples", _positive_int),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tinqubit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tinqubit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in PARAMS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="TOML config or a previous run's manifest.json")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--workers", type=_positive_int)
        sp.add_argument("--isotope-file", dest="isotope_file", help="TOML isotope override file")
        for flag, dest, typ in SUBCOMMAND_FLAGS.get(name, []):
            sp.add_argument(flag, dest=dest, type=typ)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config", "out")}
    out = args.out or Path(os.environ.get("TINQUBIT_OUT", "out"))
    try:
        file_values = load_config_file(args.config, args.subcommand) if args.config else None
        cfg = build_config(args.subcommand, file_values, overrides, out)
        registry = load_registry(cfg.isotope_file)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"tinqubit {args.subcommand}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outputs = Outputs()
    try:
        RUNNERS[args.subcommand](cfg, registry, outputs)
    except (UnknownIsotopeError, MissingEtaError) as exc:
        print(f"tinqubit {args.subcommand}: isotope registry: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LatticeSizeError as exc:
        print(f"tinqubit {args.subcommand}: lattice: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ResolutionError as exc:
        print(f"tinqubit {args.subcommand}: propagator: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SweetSpotError, DegenerateSiteError) as exc:
        print(f"tinqubit {args.subcommand}: sweet spot: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    path = outputs.write(cfg)
    print(f"wrote {', '.join(sorted(outputs.files))} and manifest.json to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
