"""Acceptance criteria, one ``criterion(n, title)`` group each.

The terminal summary (see conftest.py) prints one PASS/FAIL line per
criterion.  Known unattainable checks are strict xfails, so they show up as
FAIL in that summary while leaving the suite green.

Runtime is dominated by criterion 7 (about 4 minutes of bath sampling) and
criterion 2 (about 1 minute).
"""

import json
import math
import time

import numpy as np
import pytest

from tinqubit.cli import main
from tinqubit.dephasing import t2star_samples, z_error_table
from tinqubit.dot import DotShape, min_gate_time, site_hyperfine
from tinqubit.dynamics import (
    RampProfile,
    SpinPairParams,
    evolve,
    flipflop_probability,
    sudden_flipflop_probability,
)
from tinqubit.isotopes import DEFAULT_REGISTRY
from tinqubit.lattice import LatticeSite
from tinqubit.relativistic import GROUP_IV, iu_correction, otten_ratio, ratio_table, table_r2
from tinqubit.zz import (
    ValleyField,
    compute_a,
    fig5_curves,
    find_sweet_spot,
    headline_bound,
    perturbation_coeffs,
    relative_shift,
    zz_bound_sweetspot,
)

NM = 1e-9
SN = DEFAULT_REGISTRY["119Sn"]
SI = DEFAULT_REGISTRY["29Si"]
SEED = 20220101
SHAPES_NM = ((10, 5), (10, 10), (20, 5), (20, 10))
NATURAL_PPM = 46900.0


def criterion(n, title):
    return pytest.mark.criterion(n, title)


# ---------------------------------------------------------------- 1

C1 = criterion(1, "table2 Z-error values to printed significant figures, < 1 s")

# (row T2*, column A) -> value as printed, with its significant-figure count
TABLE2_PRINTED = {
    (0, 0): ("0.5", 1), (0, 1): ("0.5", 1), (0, 2): ("0.4", 1),
    (1, 0): ("0.1", 1), (1, 1): ("0.03", 1), (1, 2): ("7.8e-3", 2),
    (2, 0): ("1.3e-3", 2), (2, 1): ("3.1e-4", 2), (2, 2): ("7.8e-5", 2),
}


def _sig(x, n):
    return f"{x:.{n - 1}e}"


@C1
def test_table2_runtime():
    t = time.perf_counter()
    z_error_table()
    assert time.perf_counter() - t < 1.0


@C1
@pytest.mark.parametrize(
    "cell",
    [
        pytest.param(
            c,
            marks=pytest.mark.xfail(strict=True, reason="1.248e-3 rounds to 1.2e-3; printed 1.3e-3")
            if c == (2, 0)
            else (),
            id=f"T2star={(1, 10, 100)[c[0]]}us-T={(5, 2.5, 1.25)[c[1]]}us",
        )
        for c in sorted(TABLE2_PRINTED)
    ],
)
def test_table2_cell(cell):
    text, n = TABLE2_PRINTED[cell]
    value = z_error_table()[cell]
    assert _sig(value, n) == _sig(float(text), n)


# ---------------------------------------------------------------- 2

C2 = criterion(2, "a = 0.34 +- 0.02 on the shape/enrichment grid; approaches 1/3; < 5 min")


@C2
def test_a_coefficient_on_grid():
    t = time.perf_counter()
    res = compute_a([DotShape(r * NM, z * NM) for r, z in SHAPES_NM], [500.0, 1000.0], SI, 1000, SEED)
    elapsed = time.perf_counter() - t
    print(f"a = {res.a:.5f} +- {res.stderr:.5f} ({elapsed:.0f} s)")
    assert abs(res.a - 0.34) <= 0.02
    assert elapsed < 300


@C2
def test_a_coefficient_approaches_one_third():
    # many nuclei per realisation: the ratio-of-sums bias disappears
    res = compute_a([DotShape(10 * NM, 5 * NM)], [NATURAL_PPM], SI, 500, SEED)
    print(f"natural abundance: a = {res.a:.5f} +- {res.stderr:.5f}")
    assert abs(res.a - 1 / 3) <= 3 * res.stderr


# ---------------------------------------------------------------- 3

C3 = criterion(3, "sudden flip-flop < 1e-6 above 15 mT; propagator vs Rabi oracle to 1e-9; < 1 min")


@C3
@pytest.mark.parametrize("a_khz", [100, 200, 400])
def test_sudden_flipflop_below_threshold(a_khz):
    for b in np.logspace(math.log10(0.015), 0, 200):
        assert sudden_flipflop_probability(SpinPairParams.for_isotope(a_khz * 1e3, b, SN)) < 1e-6


@C3
def test_propagator_matches_rabi_oracle_on_grid():
    t = time.perf_counter()
    worst = 0.0
    for a in (100e3, 200e3, 300e3, 400e3):
        for b in (1e-4, 1.1e-3, 5e-3, 0.015, 0.05):
            prm = SpinPairParams.for_isotope(a, b, SN)
            for hold in (0.25 / prm.rabi, 0.5 / prm.rabi):
                n = math.ceil(hold * 50 * max(prm.rabi, prm.larmor)) + 1
                p = flipflop_probability(evolve(prm, RampProfile(0, hold), n))
                worst = max(worst, abs(p - sudden_flipflop_probability(prm, hold)))
    assert worst <= 1e-9
    assert time.perf_counter() - t < 60


# ---------------------------------------------------------------- 4

C4 = criterion(4, "min_gate_time reproduces the table2 header pairs exactly")


@C4
@pytest.mark.parametrize("a_hz, t_s", [(100e3, 5e-6), (200e3, 2.5e-6), (400e3, 1.25e-6)])
def test_gate_time_header(a_hz, t_s):
    assert min_gate_time(a_hz) == t_s


# ---------------------------------------------------------------- 5

C5 = criterion(5, "headline bound in [1e-8, 1e-7] with split in metadata; slopes 2 and 1")


@C5
def test_headline_bound_and_metadata(tmp_path):
    assert 1e-8 <= headline_bound(1e-5, 1, 0.34) <= 1e-7
    assert main(["fig5", "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "manifest.json").read_text())["metadata"]["fig5"]
    assert meta["split_convention"] == "single-axis"
    assert 1e-8 <= meta["headline"]["single_axis_with_a"] <= 1e-7


@C5
def test_fig5_slopes():
    rows = fig5_curves(np.logspace(-7, -3, 41))

    def slopes(curve):
        pts = np.array([(x, y) for cid, x, y in rows if cid == curve])
        return np.diff(np.log(pts[:, 1])) / np.diff(np.log(pts[:, 0]))

    assert np.all(np.abs(slopes("sweetspot_pessimistic") - 2) <= 1e-3)
    for kappa in ("0.01", "0.1", "1"):
        assert np.all(np.abs(slopes(f"off_sweetspot_c_r0={kappa}") - 1) <= 1e-3)


# ---------------------------------------------------------------- 6

C6 = criterion(6, "119Sn / 29Si hyperfine ratio = (996.4/178) x 1.89 to 1e-6")


@C6
def test_sn_si_enhancement():
    for theta_v in (0.0, 0.9):
        shape = DotShape(20 * NM, 10 * NM, theta_v=theta_v)
        for site in (LatticeSite.from_indices((0, 0, 0), 0), LatticeSite.from_indices((3, -2, 1), 5)):
            ratio = site_hyperfine(shape, site, SN).a_freq / site_hyperfine(shape, site, SI).a_freq
            assert ratio == pytest.approx(996.4 / 178 * 1.89, rel=1e-6)
            assert ratio > 10


# ---------------------------------------------------------------- 7

C7 = criterion(7, "T2* medians scale as 1/sqrt(ppm) within 15% at 500 samples; lower ppm dominates")

FIG6_PPM = (NATURAL_PPM, 500.0, 50.0)


@pytest.fixture(scope="module")
def fig6_samples():
    return {
        (r, z, ppm): t2star_samples(DotShape(r * NM, z * NM), SI, ppm, 500, SEED)
        for r, z in SHAPES_NM
        for ppm in FIG6_PPM
    }


def _pairs():
    for r, z in SHAPES_NM:
        for hi, lo in ((NATURAL_PPM, 500.0), (500.0, 50.0)):
            marks = ()
            if (r, z, lo) == (10, 5, 50.0):
                marks = pytest.mark.xfail(strict=True, reason="about 2 nuclei at 50 ppm; median ratio ~1.24 sqrt(10)")
            yield pytest.param(r, z, hi, lo, marks=marks, id=f"r0={r}nm-z0={z}nm-{hi:g}/{lo:g}ppm")


@C7
@pytest.mark.parametrize("r, z, hi, lo", list(_pairs()))
def test_t2star_median_scaling(fig6_samples, r, z, hi, lo):
    ratio = np.median(fig6_samples[(r, z, lo)]) / np.median(fig6_samples[(r, z, hi)])
    expected = math.sqrt(hi / lo)
    print(f"median ratio / sqrt(ppm ratio) = {ratio / expected:.4f}")
    assert abs(ratio / expected - 1) <= 0.15


@C7
@pytest.mark.parametrize("r, z", SHAPES_NM)
def test_lower_ppm_cdf_dominates(fig6_samples, r, z):
    for hi, lo in ((NATURAL_PPM, 500.0), (500.0, 50.0)):
        # empirical first-order dominance: every order statistic sits to the right
        assert np.all(np.sort(fig6_samples[(r, z, lo)]) >= np.sort(fig6_samples[(r, z, hi)]))


# ---------------------------------------------------------------- 8

C8 = criterion(8, "property suites: unitarity, conservation, finite differences, MC vs bound, fit R^2")


@C8
def test_unitarity_and_conservation():
    rng = np.random.default_rng(8)
    for _ in range(20):
        prm = SpinPairParams.for_isotope(rng.uniform(0, 1e6), rng.uniform(0, 0.05), SN)
        profile = RampProfile(rng.uniform(1e-9, 1e-7), rng.uniform(0, 1e-7), "sinusoid")
        n = math.ceil(profile.total_time * 50 * max(prm.rabi, prm.larmor)) + 1
        u = evolve(prm, profile, n)
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-10
        # populations of the Sz + Iz = +-1 states cannot leak
        assert abs(abs(u[0, 0]) ** 2 - 1) <= 1e-12
        assert abs(abs(u[3, 3]) ** 2 - 1) <= 1e-12
        assert abs(abs(u[1, 1]) ** 2 + abs(u[2, 1]) ** 2 - 1) <= 1e-12


@C8
def test_perturbation_coefficients_vs_finite_differences():
    from tinqubit.dot import hyperfine_freq

    shape = DotShape(20 * NM, 10 * NM)
    valley = ValleyField.two_component(0.05 / NM, 80 * NM, 0.3)
    site = (4 * NM, -3 * NM, 0.0)
    centre = np.array([1 * NM, 2 * NM])

    def hf(c):
        moved = DotShape(shape.r0, shape.z0, tuple(c), valley.value(*c))
        return hyperfine_freq(moved, site, SI)

    coeffs = perturbation_coeffs(DotShape(shape.r0, shape.z0, tuple(centre)), site, valley)
    base, d = hf(centre), 2e-3 * NM
    for i in range(2):
        step = np.zeros(2)
        step[i] = d
        plus, minus = hf(centre + step) / base - 1, hf(centre - step) / base - 1
        assert (plus - minus) / (2 * d) == pytest.approx(coeffs[i], rel=1e-4)
        assert (plus + minus) / (2 * d * d) == pytest.approx(coeffs[2 + i], rel=1e-3)


@C8
@pytest.mark.parametrize("sigma_nm", [0.01, 0.05])
def test_mc_exact_zz_within_bound(sigma_nm):
    shape = DotShape(20 * NM, 10 * NM)
    valley = ValleyField.two_component(0.1 / NM, 200 * NM, 0.6)
    site = (3 * NM, -2 * NM, 0.0)
    spot = find_sweet_spot(site, valley, shape)
    sigma = sigma_nm * NM
    d = np.random.default_rng(88).normal(0, sigma, (2, 100_000))
    shifts = relative_shift(DotShape(shape.r0, shape.z0, spot.center), site, valley, d[0], d[1])
    p = np.sin(np.pi * shifts / 2) ** 2
    err = p.std(ddof=1) / math.sqrt(p.size)
    g = valley.mean_sq_gradient()
    assert p.mean() <= zz_bound_sweetspot([g[0] * sigma**2, g[1] * sigma**2]) + 3 * err


@C8
def test_appendix_quadratic_fits():
    rows = ratio_table()
    for column in ("eta_dft", "eta_iu", "otten_ratio"):
        assert table_r2(rows, column) >= 0.99


# ---------------------------------------------------------------- 9

C9 = criterion(9, "B(3,14), B(5,50) to 1e-5; Otten Ge/Si = 3.80 within 1%")


@C9
def test_iu_values():
    assert iu_correction(3, 14) == pytest.approx(1.00483, abs=1e-5)
    assert iu_correction(5, 50) == pytest.approx(1.05236, abs=1e-5)


@C9
def test_otten_ge_si():
    by = {e.symbol: e for e in GROUP_IV}
    ge, si = by["Ge"], by["Si"]
    assert otten_ratio(ge.Z, ge.atomic_mass, si.Z, si.atomic_mass) == pytest.approx(3.80, rel=0.01)
