"""Solver behavior: conservation accounting, monotonicity, stability guards."""

import subprocess
import sys

import numpy as np
import pytest

import anisofast.solver as S
from anisofast.exponents import ModelParams, compute_exponents
from anisofast.grids import Field, Grid, symmetry_error


@pytest.fixture(scope="module")
def e_anis():
    return compute_exponents(ModelParams(2, (0.6, 0.8)))


@pytest.fixture(scope="module")
def grid33():
    return Grid.make(4.0, 33, ndim=2)


def bump(grid, mass=1.0, center=0.0, radius=1.5):
    return S.init_data("bump", grid, mass=mass, center=center, radius=radius)


# --- configuration and data validation ---------------------------------------


def test_config_rejects_bad_inputs():
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, dt_policy="rk4")
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, dt_policy="fixed")
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, dt_policy="fixed", dt=-1e-3)
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, safety=0.0)
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, safety=1.5)
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, boundary="periodic")
    with pytest.raises(ValueError):
        S.SolverConfig(t_end=1.0, eps=0.0)


def test_init_data_normalizes_mass(grid33):
    for kind, kw in [
        ("bump", {}),
        ("box", {"radius": 1.0}),
        ("barenblatt", {"m": 0.75, "t_snap": 1.0}),
    ]:
        f = S.init_data(kind, grid33, mass=2.5, **kw)
        assert f.mass() == pytest.approx(2.5, rel=1e-13)
        assert np.all(f.values >= 0)


def test_init_data_rejects_bad_requests(grid33):
    with pytest.raises(ValueError):
        S.init_data("bump", grid33, mass=0.0)
    with pytest.raises(ValueError):
        S.init_data("bump", grid33, center=3.5, radius=1.0)  # support leaves the box
    with pytest.raises(ValueError):
        S.init_data("barenblatt", grid33)  # missing exponent
    with pytest.raises(ValueError):
        S.init_data("gaussian", grid33)


def test_bump_is_compactly_supported(grid33):
    f = bump(grid33, center=(0.5, -0.5), radius=1.0)
    pts = grid33.points()
    far = np.max(np.abs(pts - np.array([0.5, -0.5])), axis=1) > 1.0
    assert np.all(f.values.ravel()[far] == 0.0)


def test_normalize_mass_rejects_zero_field(grid33):
    zero = Field(grid33, np.zeros(grid33.npts))
    with pytest.raises(ValueError):
        S.normalize_mass(zero, 1.0)


# --- step size ----------------------------------------------------------------


def test_cfl_dt_linear_case(grid33):
    # m = 1: phi' = 1 on both axes, so dt = safety * h^2 / 4
    vals = np.full(grid33.npts, 0.3)
    h = grid33.spacing[0]
    dt = S.cfl_dt(vals, grid33, (1.0, 1.0), eps=0.0, safety=0.4)
    assert dt == pytest.approx(0.4 * h * h / 4.0, rel=1e-12)


def test_cfl_dt_shrinks_with_floor(grid33):
    # fast diffusion with vacuum in range: lowering the floor steepens
    # the tangent slope phi'(eps) and shrinks the stable step
    vals = bump(grid33).values
    dt_hi = S.cfl_dt(vals, grid33, (0.6, 0.8), eps=1e-2, safety=0.4)
    dt_lo = S.cfl_dt(vals, grid33, (0.6, 0.8), eps=1e-6, safety=0.4)
    assert dt_lo < dt_hi
    # without vacuum the floor is inactive and eps is irrelevant
    ones = np.full(grid33.npts, 1.0)
    assert S.cfl_dt(ones, grid33, (0.6, 0.8), eps=1e-2, safety=0.4) == S.cfl_dt(
        ones, grid33, (0.6, 0.8), eps=1e-6, safety=0.4
    )


def test_cfl_dt_drift_term_reduces_step(grid33):
    vals = np.full(grid33.npts, 1.0)
    dt0 = S.cfl_dt(vals, grid33, (0.6, 0.8), eps=1e-3, safety=0.4)
    dt1 = S.cfl_dt(vals, grid33, (0.6, 0.8), eps=1e-3, safety=0.4, drift=(0.55, 0.45))
    assert dt1 < dt0


# --- running ------------------------------------------------------------------


def test_run_accounts_mass_against_boundary_flux(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.5, eps=1e-6, record_every=0.1)
    traj = S.run(bump(grid33), cfg, e_anis)
    lost = traj.diag.mass[-1] - traj.diag.mass[0]
    assert lost == pytest.approx(traj.diag.boundary_flux_cum[-1], abs=1e-10)


def test_run_fields_stay_nonnegative_and_norms_decay(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.5, eps=1e-6, record_every=0.05)
    traj = S.run(bump(grid33), cfg, e_anis)
    for f in traj.fields:
        assert np.all(f.values >= 0)
    linf = np.array(traj.diag.linf)
    assert np.all(np.diff(linf) <= 1e-14)
    for p, series in traj.diag.lp.items():
        assert np.all(np.diff(np.array(series)) <= 1e-12), f"L{p} grew"


def test_run_preserves_mirror_symmetry(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.3, eps=1e-6)
    traj = S.run(bump(grid33), cfg, e_anis)
    assert symmetry_error(traj.final.values) == 0.0


def test_run_preserves_pointwise_order(grid33, e_anis):
    # same fixed dt sequence for both: a monotone update keeps u <= v
    lo = bump(grid33, mass=0.8)
    hi = Field(grid33, lo.values * 1.3 + 1e-4)
    S._apply_boundary(hi.values, 2, 0.0)
    dt = 0.25 * min(
        S.cfl_dt(lo.values, grid33, e_anis.m, 1e-6, 1.0),
        S.cfl_dt(hi.values, grid33, e_anis.m, 1e-6, 1.0),
    )
    cfg = S.SolverConfig(t_end=0.2, eps=1e-6, dt_policy="fixed", dt=dt)
    ta = S.run(lo, cfg, e_anis)
    tb = S.run(hi, cfg, e_anis)
    for fa, fb in zip(ta.fields, tb.fields):
        assert np.all(fa.values <= fb.values + 1e-15)


def test_requested_record_times_land_exactly(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.4, eps=1e-5, record_times=(0.1, 0.25))
    traj = S.run(bump(grid33), cfg, e_anis)
    assert 0.1 in traj.diag.t and 0.25 in traj.diag.t
    assert traj.diag.t[0] == 0.0 and traj.diag.t[-1] == 0.4
    f = traj.field_at(0.25)
    assert f.time == 0.25
    with pytest.raises(KeyError):
        traj.field_at(0.17)


def test_unstable_fixed_dt_raises(grid33, e_anis):
    h = grid33.spacing[0]
    cfg = S.SolverConfig(t_end=0.5, eps=1e-6, dt_policy="fixed", dt=50.0 * h * h)
    with pytest.raises(S.SolverError):
        S.run(bump(grid33), cfg, e_anis)


def test_run_rejects_mismatched_setup(grid33, e_anis):
    with pytest.raises(ValueError):
        S.run(bump(grid33), S.SolverConfig(t_end=0.0), e_anis)
    g1 = Grid.make(4.0, 33, ndim=1)
    f1 = S.init_data("bump", g1)
    with pytest.raises(ValueError):
        S.run(f1, S.SolverConfig(t_end=0.1, eps=1e-6), e_anis)


def test_negative_initial_data_raises(grid33, e_anis):
    vals = np.full(grid33.npts, 0.1)
    vals[16, 16] = -0.01
    with pytest.raises(S.SolverError):
        S.run(Field(grid33, vals), S.SolverConfig(t_end=0.1, eps=1e-6), e_anis)


def test_eps_boundary_holds_floor(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.2, eps=1e-4, boundary="eps")
    traj = S.run(bump(grid33), cfg, e_anis)
    v = traj.final.values
    assert np.all(v >= 1e-4 - 1e-18)
    assert np.all(v[0, :] == 1e-4) and np.all(v[:, -1] == 1e-4)


def test_step_wrapper_advances_time(grid33, e_anis):
    u = bump(grid33)
    u1 = S.step(u, S.SolverConfig(t_end=1.0, eps=1e-5), e_anis)
    assert u1.time > 0.0
    assert not np.array_equal(u1.values, u.values)


def test_energy_inequality_on_short_run(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.5, eps=1e-6, record_every=0.01)
    traj = S.run(bump(grid33), cfg, e_anis)
    for rep in S.energy_check(traj):
        assert rep["rel_violation"] <= 1e-3
        assert rep["rhs"] > 0  # genuinely dissipating, not a 0 <= 0 pass


def test_energy_check_needs_fields(grid33, e_anis):
    cfg = S.SolverConfig(t_end=0.1, eps=1e-5, record_fields=False)
    traj = S.run(bump(grid33), cfg, e_anis)
    traj.fields.clear()
    with pytest.raises(ValueError):
        S.energy_check(traj)


_RUN_SNIPPET = """
import hashlib
import numpy as np
import anisofast.solver as S
from anisofast.exponents import ModelParams, compute_exponents
from anisofast.grids import Grid

e = compute_exponents(ModelParams(2, (0.6, 0.8)))
g = Grid.make(4.0, 33, ndim=2)
u0 = S.init_data("bump", g, radius=1.5)
traj = S.run(u0, S.SolverConfig(t_end=0.3, eps=1e-6), e)
print(hashlib.sha256(traj.final.values.tobytes()).hexdigest())
"""


def test_run_bitwise_identical_across_backends():
    digests = []
    for flag in ("0", "1"):
        proc = subprocess.run(
            [sys.executable, "-c", _RUN_SNIPPET],
            capture_output=True,
            text=True,
            env={"ANISOFAST_NO_NUMBA": flag, "PATH": "/usr/bin:/bin"},
        )
        assert proc.returncode == 0, proc.stderr
        digests.append(proc.stdout.strip())
    assert digests[0] == digests[1]
