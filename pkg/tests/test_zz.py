import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from tinqubit.constants import CONSTANTS
from tinqubit.dot import DotShape, hyperfine_freq
from tinqubit.isotopes import DEFAULT_REGISTRY
from tinqubit.zz import (
    DegenerateSiteError,
    NoiseStats,
    SweetSpotError,
    ValleyField,
    compute_a,
    fig5_curves,
    find_sweet_spot,
    gaussian_quartic,
    headline_bound,
    noise_s_values,
    perturbation_coeffs,
    relative_shift,
    t2ratio_bound,
    zz_bound_sweetspot,
    zz_error_exact,
)

NM = 1e-9
A0 = CONSTANTS.si_lattice_const_a0
K0 = CONSTANTS.valley_wavenumber_k0
SI = DEFAULT_REGISTRY["29Si"]


def hf_at_center(shape, valley, site, cx, cy):
    moved = DotShape(shape.r0, shape.z0, (cx, cy), valley.value(cx, cy))
    return hyperfine_freq(moved, site, SI)


valleys = st.builds(
    ValleyField.two_component,
    gradient_rms=st.floats(0.005 / NM, 0.2 / NM),
    wavelength=st.floats(40 * NM, 400 * NM),
    offset=st.floats(-3, 3),
    phases=st.tuples(st.floats(0, 6.28), st.floats(0, 6.28)),
)


@given(valley=valleys, x=st.floats(-50 * NM, 50 * NM), y=st.floats(-50 * NM, 50 * NM))
def test_valley_derivatives_match_finite_differences(valley, x, y):
    h = 1e-4 * NM
    gx, gy = valley.gradient(x, y)
    fx = (valley.value(x + h, y) - valley.value(x - h, y)) / (2 * h)
    fy = (valley.value(x, y + h) - valley.value(x, y - h)) / (2 * h)
    scale = math.hypot(*valley.mean_sq_gradient())
    assert abs(fx - gx) <= 1e-6 * scale
    assert abs(fy - gy) <= 1e-6 * scale
    hx, hy = valley.hessian_diag(x, y)
    h2 = 0.05 * NM
    fxx = (valley.value(x + h2, y) - 2 * valley.value(x, y) + valley.value(x - h2, y)) / h2**2
    kscale = scale * 2 * math.pi / (40 * NM)
    assert abs(fxx - hx) <= 1e-5 * kscale


def test_mean_sq_gradient_of_two_component():
    v = ValleyField.two_component(0.1 / NM, 100 * NM)
    assert v.mean_sq_gradient() == pytest.approx(((0.1 / NM) ** 2, (0.1 / NM) ** 2))


def test_first_order_without_gradient():
    shape = DotShape(20 * NM, 10 * NM)
    c0, c1, _, _ = perturbation_coeffs(shape, (3 * NM, -1 * NM, 0.0), ValleyField(0.4))
    assert c0 == pytest.approx(2 * 3 * NM / (20 * NM) ** 2)
    assert c1 == pytest.approx(2 * -1 * NM / (20 * NM) ** 2)


@given(
    valley=valleys,
    r0=st.floats(8 * NM, 25 * NM),
    site=st.tuples(st.floats(-8 * NM, 8 * NM), st.floats(-8 * NM, 8 * NM), st.integers(-6, 6)),
    center=st.tuples(st.floats(-5 * NM, 5 * NM), st.floats(-5 * NM, 5 * NM)),
)
def test_coefficients_match_finite_differences(valley, r0, site, center):
    shape = DotShape(r0, 10 * NM, center)
    pos = (site[0], site[1], site[2] * A0 / 4)
    theta = K0 * pos[2] - valley.value(*center) / 2
    assume(abs(math.cos(theta)) > 0.2)
    c0, c1, c00, c11 = perturbation_coeffs(shape, pos, valley)
    base = hf_at_center(shape, valley, pos, *center)
    d = 2e-3 * NM
    for i, (c, cc) in enumerate(((c0, c00), (c1, c11))):
        step = np.array([d, 0.0]) if i == 0 else np.array([0.0, d])
        plus = hf_at_center(shape, valley, pos, *(np.array(center) + step)) / base - 1
        minus = hf_at_center(shape, valley, pos, *(np.array(center) - step)) / base - 1
        scale = abs(c) + abs(cc) * d + 2 / r0
        assert (plus - minus) / (2 * d) == pytest.approx(c, abs=1e-4 * scale)
        sscale = abs(cc) + 4 / r0**2 + valley.mean_sq_gradient()[i]
        assert (plus + minus) / (2 * d * d) == pytest.approx(cc, abs=1e-3 * sscale)


def test_degenerate_site_rejected():
    # theta(z) = k0 z - theta_v/2 = pi/2 at z = 0 when theta_v = -pi
    with pytest.raises(DegenerateSiteError):
        perturbation_coeffs(DotShape(10 * NM, 5 * NM), (0.0, 0.0, 0.0), ValleyField(-math.pi))
    with pytest.raises(DegenerateSiteError):
        perturbation_coeffs(DotShape(10 * NM, 5 * NM), (0.0, 0.0, 3 * NM), ValleyField(0.0))


def test_constant_valley_sweet_spot_above_site():
    spot = find_sweet_spot((2 * NM, -3 * NM, 0.0), ValleyField(0.5), DotShape(20 * NM, 10 * NM))
    assert spot.center == pytest.approx((2 * NM, -3 * NM), abs=1e-20)


def test_linear_valley_closed_form():
    slope = 0.02 / NM
    k = 1.0  # 1/m: sin(k x) is linear to 1e-16 over nanometres
    valley = ValleyField(0.3, (slope / k,), ((k, 0.0),), (0.0,))
    shape = DotShape(20 * NM, 10 * NM)
    site = (1 * NM, 0.5 * NM, 0.0)
    spot = find_sweet_spot(site, valley, shape)
    theta = -valley.value(*spot.center) / 2
    expected = shape.r0**2 * math.tan(theta) * slope / 2
    # offset of the dot centre from the site, x_site - x_centre = -expected
    assert spot.center[0] - site[0] == pytest.approx(expected, rel=1e-9)
    assert spot.center[1] == pytest.approx(site[1], abs=1e-20)


gentle_valleys = st.builds(
    ValleyField.two_component,
    gradient_rms=st.floats(0.002 / NM, 0.02 / NM),
    wavelength=st.floats(40 * NM, 400 * NM),
    offset=st.floats(-1.5, 1.5),
    phases=st.tuples(st.floats(0, 6.28), st.floats(0, 6.28)),
)


# The 1e-8 1/m tolerance is close to the float64 rounding floor of c_i once
# |tan(theta) d theta_v/d x0| exceeds ~1e7 1/m, so the gradient range stays below that.
@given(valley=gentle_valleys, site=st.tuples(st.floats(-5 * NM, 5 * NM), st.floats(-5 * NM, 5 * NM), st.integers(-4, 4)))
def test_sweet_spot_zeroes_first_order(valley, site):
    shape = DotShape(20 * NM, 10 * NM)
    pos = (site[0], site[1], site[2] * A0 / 4)
    try:
        spot = find_sweet_spot(pos, valley, shape)
    except (SweetSpotError, DegenerateSiteError):
        assume(False)
    c = perturbation_coeffs(DotShape(shape.r0, shape.z0, spot.center), pos, valley)
    assert abs(c[0]) < 1e-8 and abs(c[1]) < 1e-8
    assert spot.residual < 1e-8


def test_selectivity_filter():
    # theta = -theta_v/2 = -1.2 at z = 0: tan^2 > 1
    with pytest.raises(SweetSpotError):
        find_sweet_spot((0.0, 0.0, 0.0), ValleyField(2.4), DotShape(20 * NM, 10 * NM))


def test_zz_error_exact_examples():
    assert zz_error_exact([0.0, 0.0]) == (0.0, 0.0)
    assert zz_error_exact([1.0])[0] == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    s = rng.normal(0, 1e-3, 10_000)
    exact, low = zz_error_exact(s)
    assert exact == pytest.approx(low, rel=0.01)


@given(sigma=st.floats(1e-5, 1e-2))
def test_exact_not_below_taylor_and_vanishes(sigma):
    s = np.random.default_rng(1).normal(0, sigma, 2000)
    exact, low = zz_error_exact(s)
    assert exact >= low * (1 - 1e-4 - sigma**2 * 5)
    e2, l2 = zz_error_exact(s / 2)
    assert e2 == pytest.approx(exact / 4, rel=1e-3 + 10 * sigma**2)


def test_gaussian_quartic():
    assert gaussian_quartic(1.0) == 3.0
    assert gaussian_quartic(0.0) == 0.0
    x = np.random.default_rng(7).normal(0, 1.7, 1_000_000)
    est = np.mean(x**4)
    err = np.std(x**4) / math.sqrt(len(x))
    assert abs(est - gaussian_quartic(1.7**2)) < 3 * err
    with pytest.raises(ValueError):
        gaussian_quartic(-1.0)


def test_bound_examples():
    assert zz_bound_sweetspot([0, 0]) == 0.0
    assert t2ratio_bound([0, 0], 1, 0.34) == 0.0
    assert t2ratio_bound([1.0, 0.0], 1, 1.0) == 0.5
    assert noise_s_values(NoiseStats(1e-20, 4e-20), (1e18, 1e18)) == pytest.approx((0.01, 0.04))
    with pytest.raises(ValueError):
        NoiseStats(-1, 0)


@pytest.mark.parametrize("split", ["single-axis", "equal"])
def test_headline_interval(split):
    assert 1e-8 <= headline_bound(1e-5, 1, 0.34, split) <= 1e-7


def _slopes(rows, curve):
    pts = np.array([(x, y) for cid, x, y in rows if cid == curve])
    return np.diff(np.log(pts[:, 1])) / np.diff(np.log(pts[:, 0]))


def test_fig5_slopes_and_ordering():
    rows = fig5_curves(np.logspace(-7, -3, 41))
    assert np.allclose(_slopes(rows, "sweetspot_pessimistic"), 2.0, atol=1e-3)
    assert np.allclose(_slopes(rows, "sweetspot_optimistic"), 2.0, atol=1e-3)
    for kappa in ("0.01", "0.1", "1"):
        assert np.allclose(_slopes(rows, f"off_sweetspot_c_r0={kappa}"), 1.0, atol=1e-3)
    pes = [y for cid, _, y in rows if cid == "sweetspot_pessimistic"]
    opt = [y for cid, _, y in rows if cid == "sweetspot_optimistic"]
    assert all(o <= p for o, p in zip(opt, pes))


def sweetspot_mc(gradient, wavelength, offset, sigma, n, seed):
    shape = DotShape(20 * NM, 10 * NM)
    valley = ValleyField.two_component(gradient, wavelength, offset)
    site = (3 * NM, -2 * NM, 0.0)
    spot = find_sweet_spot(site, valley, shape)
    rng = np.random.default_rng(seed)
    d = rng.normal(0, sigma, (2, n))
    shifts = relative_shift(DotShape(shape.r0, shape.z0, spot.center), site, valley, d[0], d[1])
    p = np.sin(np.pi * shifts / 2) ** 2
    g = valley.mean_sq_gradient()
    return p.mean(), p.std(ddof=1) / math.sqrt(n), zz_bound_sweetspot([g[0] * sigma**2, g[1] * sigma**2])


@pytest.mark.parametrize("offset", [0.0, 0.6])
@pytest.mark.parametrize("sigma", [0.01 * NM, 0.05 * NM])
def test_mc_exact_within_bound_when_saturated(offset, sigma):
    # G r0^2 = 4: valley derivatives dominate the 1/r0^2 envelope curvature
    exact, err, bound = sweetspot_mc(0.1 / NM, 200 * NM, offset, sigma, 50_000, 3)
    assert exact <= bound + 3 * err


def test_a_coefficient_limits():
    # uniform valley phase: E[sin^2 cos^2] / E[cos^4] = (1/8) / (3/8)
    theta = np.linspace(0, 2 * np.pi, 200_001)[:-1]
    assert np.mean(np.sin(theta) ** 2 * np.cos(theta) ** 2) / np.mean(np.cos(theta) ** 4) == pytest.approx(1 / 3)


def test_compute_a_small_run():
    res = compute_a([DotShape(10 * NM, 5 * NM)], [1000.0], SI, 40, seed=5)
    assert 0.2 < res.a < 0.5
    assert res.stderr > 0
    again = compute_a([DotShape(10 * NM, 5 * NM)], [1000.0], SI, 40, seed=5)
    assert again.a == res.a
    with pytest.raises(ValueError):
        compute_a([DotShape(10 * NM, 5 * NM)], [1000.0], SI, 0, seed=5)
