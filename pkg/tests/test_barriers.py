import math

import numpy as np
import pytest

from anisofast import ModelParams, compute_exponents
from anisofast import barriers as B


@pytest.fixture(scope="module")
def e_anis():
    return compute_exponents(ModelParams(2, (0.6, 0.8)))


@pytest.fixture(scope="module")
def e_iso():
    return compute_exponents(ModelParams(2, (0.75, 0.75)))


# --- windows and parameter selection ---------------------------------------


def test_upper_window_values(e_anis):
    w = B.upper_window(e_anis, 1.0)
    np.testing.assert_allclose(w[0], (1.0 / 0.55, 5.0), rtol=1e-14)
    np.testing.assert_allclose(w[1], (1.0 / 0.45, 10.0), rtol=1e-14)


def test_upper_window_example_choice(e_anis):
    # theta = (3, 4) with delta = 1 sits inside both windows
    r, f_star = B.upper_radius(e_anis, 1.0, (3.0, 4.0))
    assert r > 0 and f_star == pytest.approx(1.0 / r, rel=1e-14)


def test_upper_radius_rejects_out_of_window(e_anis):
    with pytest.raises(ValueError):
        B.upper_radius(e_anis, 1.0, (1.5, 4.0))
    with pytest.raises(ValueError):
        B.upper_radius(e_anis, 1.0, (3.0, 11.0))


def test_select_upper_default_is_near_sharp(e_anis):
    spec = B.select_upper_params(e_anis)
    np.testing.assert_allclose(
        spec.theta, (4.681818181818182, 9.222222222222223), rtol=1e-14
    )
    assert spec.delta == 1.0


def test_select_upper_midwindow_frozen_values(e_anis):
    # the residual suites run at slack 0.8, where the activation radius
    # stays at machine-resolvable coordinates
    spec = B.select_upper_params(e_anis, slack=0.8)
    np.testing.assert_allclose(
        spec.theta, (2.454545454545454, 3.777777777777778), rtol=1e-14
    )
    assert spec.r == pytest.approx(650241.9939633919, rel=1e-12)
    assert spec.f_star == pytest.approx(1.537888984845078e-06, rel=1e-12)


def test_select_lower_frozen_values(e_anis):
    spec = B.select_lower_params(e_anis)
    assert spec.gamma == pytest.approx(11.0, rel=1e-12)
    np.testing.assert_allclose(spec.vartheta, (0.5, 1.0), rtol=1e-12)
    assert spec.A0 == pytest.approx(0.024012026204553644, rel=1e-12)
    # default offset doubles the threshold
    assert spec.A == pytest.approx(2.0 * spec.A0, rel=1e-14)


def test_lower_window_example(e_anis):
    # gamma*vartheta = (7.2, 12) clears the strict bounds (5, 10)
    a0 = B.lower_offset_min(e_anis, 12.0, (0.6, 1.0))
    assert a0 > 0


def test_lower_requires_all_fast(e_iso):
    e_lin = compute_exponents(ModelParams(2, (1.0, 0.8), allow_linear=True))
    with pytest.raises(ValueError):
        B.select_lower_params(e_lin)


# --- barrier evaluation ------------------------------------------------------


def test_eval_upper_capped(e_anis):
    spec = B.select_upper_params(e_anis, slack=0.8)
    pts = np.array([[0.1, 0.1], [1e4, 0.0]])
    capped = B.eval_upper_capped(spec, pts)
    assert capped[0] == spec.f_star  # inside the activation radius
    assert capped[1] < spec.f_star


def test_eval_lower_positive_and_decreasing(e_anis):
    spec = B.select_lower_params(e_anis)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    v = B.eval_lower(spec, pts)
    assert np.all(v > 0)
    assert v[0] > v[1] > v[2]
    assert v[0] == pytest.approx(spec.A ** (-spec.gamma), rel=1e-13)


def test_eval_lower_spacetime_matches_profile_at_t1(e_anis):
    spec = B.select_lower_params(e_anis)
    pts = np.array([[0.5, 0.5], [1.0, -0.25]])
    np.testing.assert_allclose(
        B.eval_lower_spacetime(spec, e_anis, pts, 1.0),
        B.eval_lower(spec, pts),
        rtol=1e-14,
    )
    # self-similar identity at t=4: value = t^-alpha * profile(t^-a_i x_i)
    t = 4.0
    scaled = pts * t ** (-np.asarray(e_anis.a))
    np.testing.assert_allclose(
        B.eval_lower_spacetime(spec, e_anis, pts, t),
        t ** (-e_anis.alpha) * B.eval_lower(spec, scaled),
        rtol=1e-14,
    )
    # the peak at x = 0 decays strictly in time
    origin = np.zeros((1, 2))
    assert B.eval_lower_spacetime(spec, e_anis, origin, t) < B.eval_lower_spacetime(
        spec, e_anis, origin, 1.0
    )
    with pytest.raises(ValueError):
        B.eval_lower_spacetime(spec, e_anis, pts, 0.0)


# --- stationary residual signs ----------------------------------------------


def test_upper_barrier_is_supersolution(e_anis):
    spec = B.select_upper_params(e_anis, slack=0.8)
    rng = np.random.default_rng(0)
    pts = B.sample_outer_points(spec, 2, 300, rng)
    res, scale = B.stationary_residual(lambda p: B.eval_upper(spec, p), e_anis, pts, 1e-5)
    tol = B.residual_tolerance(1e-5, scale)
    assert np.all(res <= tol)
    # the sign is resolved, not drowned by the tolerance
    assert np.median(np.abs(res)) > 10.0 * np.median(tol)


def test_lower_barrier_is_subsolution(e_anis):
    spec = B.select_lower_params(e_anis)
    rng = np.random.default_rng(1)
    pts = B.sample_box_points(2, 300, rng, box=2.0)
    res, scale = B.stationary_residual(lambda p: B.eval_lower(spec, p), e_anis, pts, 1e-5)
    tol = B.residual_tolerance(1e-5, scale)
    assert np.all(res >= -tol)


def test_sign_checks_reject_swapped_barriers(e_anis):
    # negative control: each barrier violates the other one's inequality,
    # so the sign tests cannot pass vacuously
    up = B.select_upper_params(e_anis, slack=0.8)
    lo = B.select_lower_params(e_anis)
    rng = np.random.default_rng(2)

    pts = B.sample_outer_points(up, 2, 300, rng)
    res, scale = B.stationary_residual(lambda p: B.eval_upper(up, p), e_anis, pts, 1e-5)
    tol = B.residual_tolerance(1e-5, scale)
    assert np.all(res < -tol)  # strict supersolution fails the >= -tol check

    pts2 = B.sample_box_points(2, 300, rng, box=2.0)
    res2, scale2 = B.stationary_residual(lambda p: B.eval_lower(lo, p), e_anis, pts2, 1e-5)
    tol2 = B.residual_tolerance(1e-5, scale2)
    assert np.all(res2 > tol2)  # strict subsolution fails the <= +tol check


def test_lower_spec_type_rejects_small_offset(e_anis):
    spec = B.select_lower_params(e_anis)
    with pytest.raises(ValueError):
        B.LowerBarrierSpec(
            gamma=spec.gamma, vartheta=spec.vartheta, A=spec.A0 / 2.0, A0=spec.A0
        )


def test_residual_richardson_ratio(e_anis):
    spec = B.select_upper_params(e_anis, slack=0.8)
    rng = np.random.default_rng(3)
    pts = B.sample_outer_points(spec, 2, 50, rng)
    f = lambda p: B.eval_upper(spec, p)
    r1 = B.stationary_residual(f, e_anis, pts, 0.5)[0]
    r2 = B.stationary_residual(f, e_anis, pts, 0.25)[0]
    r3 = B.stationary_residual(f, e_anis, pts, 0.125)[0]
    ratio = np.abs(r1 - r2) / np.maximum(np.abs(r2 - r3), 1e-300)
    assert np.median(ratio) == pytest.approx(4.0, abs=0.3)


def test_stationary_rescale_preserves_residual_sign(e_anis):
    # T_k of a supersolution is a supersolution; check the residual sign
    spec = B.select_upper_params(e_anis, slack=0.8)
    g = B.stationary_rescale(lambda p: B.eval_upper(spec, p), 2.0, e_anis)
    rng = np.random.default_rng(4)
    pts = B.sample_outer_points(spec, 2, 100, rng)
    # pull the sample back so the rescaled argument stays in Omega
    scaled_pts = pts / np.power(2.0, e_anis.gamma_stat)
    res, scale = B.stationary_residual(g, e_anis, scaled_pts, 1e-5)
    tol = B.residual_tolerance(1e-5, scale)
    assert np.all(res <= tol)


# --- isotropic explicit profile ---------------------------------------------


def test_mass_constant_against_closed_form():
    # N=2, m=3/4: mass = 3*pi/C^3, so C = (3 pi)^(1/3) at unit mass
    C = B.barenblatt_mass_constant(0.75, 2, 1.0)
    assert C == pytest.approx((3.0 * math.pi) ** (1.0 / 3.0), rel=1e-6)
    # N=2, m=1/2: mass = 2*pi/C
    C2 = B.barenblatt_mass_constant(0.5, 2, 1.0)
    assert C2 == pytest.approx(2.0 * math.pi, rel=1e-6)


def test_mass_constant_scales_with_mass():
    C1 = B.barenblatt_mass_constant(0.75, 2, 1.0)
    C4 = B.barenblatt_mass_constant(0.75, 2, 4.0)
    # mass = 3*pi/C^3 means C(4M) = C(M)/4^(1/3)
    assert C4 == pytest.approx(C1 / 4.0 ** (1.0 / 3.0), rel=1e-6)


def test_profile_mass_roundtrip():
    C = B.barenblatt_mass_constant(0.75, 2, 2.5)
    assert B.profile_mass(0.75, 2, C) == pytest.approx(2.5, rel=1e-8)


def test_barenblatt_is_stationary(e_iso):
    C = B.barenblatt_mass_constant(0.75, 2, 1.0)
    prof = lambda p: B.barenblatt_profile(p, 0.75, 2, C)
    rng = np.random.default_rng(5)
    pts = B.sample_box_points(2, 200, rng, box=3.0)
    r1 = np.abs(B.stationary_residual(prof, e_iso, pts, 0.05)[0])
    r2 = np.abs(B.stationary_residual(prof, e_iso, pts, 0.025)[0])
    # true residual vanishes: what remains is pure h^2 discretization error
    assert np.all(r2 <= 4.4e-6)
    assert np.median(r1 / np.maximum(r2, 1e-300)) == pytest.approx(4.0, abs=0.3)


def test_printed_variant_is_not_stationary(e_iso):
    # the alternative printed form misses the curvature factor; keep it only
    # as a documented negative control
    C = B.barenblatt_mass_constant(0.75, 2, 1.0, variant="printed")
    prof = lambda p: B.barenblatt_profile(p, 0.75, 2, C, variant="printed")
    rng = np.random.default_rng(6)
    pts = B.sample_box_points(2, 100, rng, box=2.0)
    res, _ = B.stationary_residual(prof, e_iso, pts, 0.01)
    assert np.abs(res).max() > 1e-3


def test_barenblatt_spacetime_normalization():
    C = B.barenblatt_mass_constant(0.75, 2, 1.0)
    pts = np.array([[0.0, 0.0]])
    # at t=1 the snapshot equals the profile
    v1 = B.barenblatt_spacetime(pts, 1.0, 0.75, 2, C)
    v0 = B.barenblatt_profile(pts, 0.75, 2, C)
    assert v1[0] == pytest.approx(v0[0], rel=1e-14)
    # peak decays like t^(-alpha)
    v2 = B.barenblatt_spacetime(pts, 2.0, 0.75, 2, C)
    assert v2[0] == pytest.approx(v0[0] * 2.0 ** (-4.0 / 3.0), rel=1e-13)


# --- samplers ----------------------------------------------------------------


def test_sample_outer_points_lands_in_shell(e_anis):
    spec = B.select_upper_params(e_anis, slack=0.8)
    rng = np.random.default_rng(7)
    pts = B.sample_outer_points(spec, 2, 400, rng)
    s = np.abs(pts[:, 0]) ** spec.theta[0] + np.abs(pts[:, 1]) ** spec.theta[1]
    assert np.all(s >= spec.r * (1.0 - 1e-12))
    assert np.all(s <= spec.r * 16.0 * (1.0 + 1e-12))
    assert np.abs(pts).min() >= 1e-3


def test_sample_box_points_bounds():
    rng = np.random.default_rng(8)
    pts = B.sample_box_points(3, 200, rng, box=1.5)
    assert pts.shape == (200, 3)
    assert np.abs(pts).max() <= 1.5
    assert np.abs(pts).min() >= 1e-3


def test_residual_tolerance_floor():
    tol = B.residual_tolerance(1e-3, np.array([0.0, 1.0]))
    np.testing.assert_allclose(tol, [1e-5, 1e-5])
    tol2 = B.residual_tolerance(1e-6, np.array([10.0]))
    assert tol2[0] == pytest.approx(1e-7, rel=1e-12)
