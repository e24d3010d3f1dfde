"""Confined-frame transforms, relaxation, and trajectory-level checks."""

import math

import numpy as np
import pytest

import anisofast.rescaled as R
import anisofast.solver as S
from anisofast.barriers import barenblatt_mass_constant, barenblatt_profile
from anisofast.exponents import ModelParams, compute_exponents
from anisofast.grids import Field, Grid


@pytest.fixture(scope="module")
def e_anis():
    return compute_exponents(ModelParams(2, (0.6, 0.8)))


@pytest.fixture(scope="module")
def e_iso():
    return compute_exponents(ModelParams(2, (0.75, 0.75)))


# --- frame transforms ---------------------------------------------------------


def test_transform_roundtrip_is_exact(e_anis):
    g = Grid.make(4.0, 33, ndim=2)
    u = S.init_data("bump", g, radius=1.5, time=3.0)
    v = R.to_selfsimilar(u, e_anis)
    back = R.from_selfsimilar(v, e_anis)
    assert v.time == pytest.approx(math.log(3.0), rel=1e-15)
    assert back.time == pytest.approx(3.0, rel=1e-12)
    np.testing.assert_allclose(back.values, u.values, rtol=1e-15)
    np.testing.assert_allclose(back.grid.extent, g.extent, rtol=1e-12)


def test_transform_is_identity_at_unit_time(e_anis):
    g = Grid.make(4.0, 33, ndim=2)
    u = S.init_data("bump", g, radius=1.5, time=0.0)
    v = R.to_selfsimilar(u, e_anis, t0=1.0)
    assert v.time == 0.0
    assert v.grid == g
    np.testing.assert_array_equal(v.values, u.values)


def test_transform_preserves_mass(e_anis):
    # sum_i a_i = alpha makes the Jacobian cancel the amplitude factor
    g = Grid.make(4.0, 33, ndim=2)
    u = S.init_data("bump", g, mass=2.0, radius=1.5, time=5.0)
    v = R.to_selfsimilar(u, e_anis)
    assert v.mass() == pytest.approx(2.0, rel=1e-13)


def test_transform_onto_target_grid(e_anis):
    g = Grid.make(4.0, 33, ndim=2)
    u = S.init_data("bump", g, radius=1.5, time=2.0)
    target = Grid.make(3.0, 49, ndim=2)
    v = R.to_selfsimilar(u, e_anis, target=target)
    assert v.grid == target
    natural = R.to_selfsimilar(u, e_anis)
    np.testing.assert_allclose(
        v.values.ravel(), natural.sample(target.points()), rtol=1e-14
    )


def test_transform_rejects_nonpositive_time(e_anis):
    g = Grid.make(4.0, 33, ndim=2)
    u = S.init_data("bump", g, radius=1.5, time=0.0)
    with pytest.raises(ValueError):
        R.to_selfsimilar(u, e_anis, t0=0.0)


# --- confined flow ------------------------------------------------------------


def test_selfsimilar_profile_is_near_stationary(e_iso):
    # the closed-form profile moves only by scheme error under the flow,
    # and the motion shrinks with the mesh (first order: upwind drift)
    C = barenblatt_mass_constant(0.75, 2, 1.0)
    moved = {}
    for n in (65, 129):
        g = Grid.make(16.0, n, ndim=2)
        vals = barenblatt_profile(g.points(), 0.75, 2, C).reshape(g.npts)
        v0 = Field(g, vals, time=0.0)
        cfg = S.SolverConfig(t_end=0.5, eps=1e-6)
        traj = R.run_rescaled(v0, cfg, e_iso)
        moved[n] = np.abs(traj.final.values - v0.values).sum() * g.cell_volume
        assert abs(traj.diag.mass[-1] - traj.diag.mass[0]) < 2e-3
    assert moved[65] < 0.08
    assert moved[129] < 0.65 * moved[65]


def test_confined_flow_concentrates_spread_data(e_anis):
    g = Grid.make(6.0, 49, ndim=2)
    v0 = S.init_data("bump", g, radius=(5.0, 5.0))
    cfg = S.SolverConfig(t_end=1.0, eps=1e-6)
    traj = R.run_rescaled(v0, cfg, e_anis)
    assert traj.final.norm_inf() > v0.norm_inf()


# --- tail fits ------------------------------------------------------------


def test_tail_fit_recovers_synthetic_power(e_anis):
    g = Grid.make(10.0, 81, ndim=2)
    pts = g.points()
    p = 3.5
    r = np.abs(pts[:, 0])
    vals = np.ones(len(r))
    vals[r > 0] = r[r > 0] ** -p
    vals = vals.reshape(g.npts)
    f = Field(g, vals)
    fit = R.tail_exponent_fit(f, axis=0, window=(0.4, 1.0), skip_cells=2)
    assert fit.slope == pytest.approx(-p, abs=1e-10)
    assert fit.stderr < 1e-10
    assert fit.npts >= 10


def test_tail_fit_validates_inputs(e_anis):
    g = Grid.make(4.0, 17, ndim=2)
    f = Field(g, np.ones(g.npts))
    with pytest.raises(ValueError):
        R.tail_exponent_fit(f, axis=2)
    with pytest.raises(ValueError):
        R.tail_exponent_fit(f, axis=0, window=(0.9, 0.2))
    with pytest.raises(ValueError):
        # window plus skip leaves fewer than 4 nodes
        R.tail_exponent_fit(f, axis=0, window=(0.9, 1.0), skip_cells=4)


def test_stationary_residual_field_small_on_profile(e_iso):
    g = Grid.make(8.0, 129, ndim=2)
    C = barenblatt_mass_constant(0.75, 2, 1.0)
    vals = barenblatt_profile(g.points(), 0.75, 2, C).reshape(g.npts)
    res = R.stationary_residual_field(Field(g, vals), e_iso)
    # second-order interior operator on the exact profile
    assert np.abs(res).max() < 5e-3
    assert float(np.abs(res).sum()) * g.cell_volume < 2e-3


# --- relaxation ----------------------------------------------------------------


def test_relax_from_profile_converges_fast(e_iso):
    # starting at the sampled profile, only the O(h) discrete offset and
    # the small boundary drain have to settle
    g = Grid.make(16.0, 65, ndim=2)
    C = barenblatt_mass_constant(0.75, 2, 1.0)
    vals = barenblatt_profile(g.points(), 0.75, 2, C).reshape(g.npts)
    v0 = Field(g, vals, time=0.0)
    cfg = S.SolverConfig(t_end=0.0, eps=1e-6)
    est = R.relax_to_profile(v0, e_iso, tol_rel=3e-3, tau_max=8.0, cfg=cfg)
    assert est.converged
    assert est.tau_final < 6.0
    assert est.mass > 0.98
    # iso decay rate 2/(1-m) = 8 on both axes, loosely
    for fit in est.tail:
        assert -10.0 < fit.slope < -6.0
    # the symmetric problem relaxes to an axis-symmetric state
    assert est.tail[0].slope == pytest.approx(est.tail[1].slope, abs=1e-6)


def test_relax_rejects_zero_mass(e_iso):
    g = Grid.make(4.0, 17, ndim=2)
    with pytest.raises(ValueError):
        R.relax_to_profile(Field(g, np.zeros(g.npts)), e_iso)


def test_staged_relax_validates_stages(e_iso):
    g = Grid.make(4.0, 33, ndim=2)
    with pytest.raises(ValueError):
        R.staged_relax(e_iso, g, stages=(4, 2))
    with pytest.raises(ValueError):
        # 33 - 1 = 32 is not divisible by 5
        R.staged_relax(e_iso, g, stages=(5, 1), tau_max=0.5)


# --- scaling consistency ----------------------------------------------------


def test_time_shift_check_reports_small_gap(e_iso):
    g = Grid.make(8.0, 49, ndim=2)
    rep = R.time_shift_check(e_iso, g, k=1.5, t_start=0.25, radius=1.5)
    assert rep.k == 1.5
    assert rep.t_end == pytest.approx(0.5625)
    # the two runs discretize one solution differently, so the gap is
    # genuinely nonzero scheme error, not roundoff
    assert 1e-4 < rep.discrepancy_l1 < 0.05


def test_time_shift_check_rejects_bad_k(e_iso):
    g = Grid.make(4.0, 17, ndim=2)
    with pytest.raises(ValueError):
        R.time_shift_check(e_iso, g, k=1.0)


def test_time_shift_check_rejects_unscalable_kind(e_iso):
    g = Grid.make(4.0, 17, ndim=2)
    with pytest.raises(ValueError, match="radius-parametrized"):
        R.time_shift_check(e_iso, g, kind="barenblatt")


def test_scheme_error_positive_and_small(e_iso):
    g = Grid.make(10.0, 65, ndim=2)
    err = R.selfsimilar_scheme_error(e_iso, g, t_start=1.0, t_end=2.0)
    assert 0.0 < err < 0.05


def test_scheme_error_requires_equal_exponents(e_anis):
    g = Grid.make(4.0, 17, ndim=2)
    with pytest.raises(ValueError):
        R.selfsimilar_scheme_error(e_anis, g)


# --- attraction metric ----------------------------------------------------


def test_attraction_check_identities(e_iso):
    g = Grid.make(6.0, 33, ndim=2)
    u0 = S.init_data("bump", g, radius=1.5, time=1.0)
    cfg = S.SolverConfig(t_end=1.5, eps=1e-5, record_every=0.25)
    traj = S.run(u0, cfg, e_iso)

    # against V = 0 the metric collapses to known norms of u itself
    rep = R.attraction_check(traj, e_iso, lambda pts: np.zeros(len(pts)))
    assert rep.times == tuple(traj.diag.t)
    for t, sup, l1, linf, mass in zip(
        rep.times, rep.sup_scaled, rep.l1, traj.diag.linf, traj.diag.mass
    ):
        assert sup == pytest.approx(t**e_iso.alpha * linf, rel=1e-12)
        assert l1 == pytest.approx(mass, rel=1e-12)

    with pytest.raises(TypeError):
        R.attraction_check(traj, e_iso, profile=3)


def test_attraction_check_skips_nonpositive_times(e_iso):
    g = Grid.make(6.0, 33, ndim=2)
    u0 = S.init_data("bump", g, radius=1.5, time=0.0)
    cfg = S.SolverConfig(t_end=0.5, eps=1e-5)
    traj = S.run(u0, cfg, e_iso)
    rep = R.attraction_check(traj, e_iso, lambda pts: np.zeros(len(pts)))
    assert rep.times == (0.5,)


def test_relax_tail_fit_can_be_skipped(e_anis):
    g = Grid.make(8.0, 33, ndim=2)
    v0 = S.init_data("bump", g, radius=1.5)
    cfg = S.SolverConfig(t_end=0.0, eps=1e-3)
    est = R.relax_to_profile(
        v0, e_anis, tol_rel=1e-9, check_every=0.25, tau_max=0.25,
        cfg=cfg, fit_tails=False,
    )
    assert est.tail == ()
    assert not est.converged
