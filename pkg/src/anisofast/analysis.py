"""Executable property checks on recorded trajectories.

Each check mirrors a provable statement about the flow: L^1 ordering and
contraction, the L^1 -> L^infty smoothing bound, preservation of separate
symmetry and monotonicity (SSNI), a quantitative positivity floor around
the origin, domination by the capped upper barrier, and the heat-equation
marginal when one axis is linear. Checks are read-only and deterministic;
each returns a small report dataclass instead of asserting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as _beta

from .barriers import UpperBarrierSpec, eval_upper, eval_upper_capped
from .exponents import ExponentSet
from .grids import Field, Grid, symmetry_error
from .solver import SolverConfig, Trajectory, _run_core

__all__ = [
    "AdmissibilityConditions",
    "AdmissibilityReport",
    "check_admissibility",
    "ContractionReport",
    "positive_part_l1",
    "l1_contraction_check",
    "SmoothingFit",
    "smoothing_fit",
    "SsniReport",
    "ssni_check",
    "PositivityCertificate",
    "positivity_floor",
    "upper_barrier_outer_mass",
    "make_positivity_certificate",
    "PositivityReport",
    "positivity_check",
    "DominationReport",
    "barrier_domination_check",
    "MarginalHeatReport",
    "marginal_heat_check",
    "MarginalGaussianReport",
    "marginal_gaussian_check",
    "lp_monotonicity",
    "interior_min",
]


# ---------------------------------------------------------------------------
# admissibility of barrier comparison runs

@dataclass(frozen=True)
class AdmissibilityConditions:
    """Inputs to the barrier comparison: mass and sup bounds plus anchors.

    M bounds the initial mass, L1 the initial sup, tau0 is the anchor
    time after which the smoothing bound takes over, C1 the (empirical)
    smoothing constant, F_star the barrier cap.
    """

    M: float
    L1: float
    tau0: float
    C1: float
    F_star: float

    def __post_init__(self):
        for name in ("M", "L1", "tau0", "C1", "F_star"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class AdmissibilityReport:
    cond1: bool
    cond3: bool
    cond2: bool
    margin1: float
    margin3: float
    margin2: float

    @property
    def ok(self) -> bool:
        return self.cond1 and self.cond3


def check_admissibility(conds: AdmissibilityConditions, e: ExponentSet) -> AdmissibilityReport:
    """Evaluate the two required conditions (and the optional third).

    cond1: C1 M^{2 alpha/N} <= F_star (1 - e^{-tau0})^alpha
    cond3: L1 e^{alpha tau0} <= F_star
    cond2 (optional): C1 M^{2 alpha/N} <= L1 (1 - e^{-tau0})^alpha
    Margins are rhs/lhs, so >= 1 means satisfied.
    """
    a = e.alpha
    smooth = conds.C1 * conds.M ** (2.0 * a / e.ndim)
    window = (1.0 - math.exp(-conds.tau0)) ** a
    m1 = conds.F_star * window / smooth
    m3 = conds.F_star / (conds.L1 * math.exp(a * conds.tau0))
    m2 = conds.L1 * window / smooth
    return AdmissibilityReport(
        cond1=m1 >= 1.0,
        cond3=m3 >= 1.0,
        cond2=m2 >= 1.0,
        margin1=m1,
        margin3=m3,
        margin2=m2,
    )


# ---------------------------------------------------------------------------
# L^1 ordering and contraction

def positive_part_l1(f1: Field, f2: Field) -> float:
    """Lattice integral of (f1 - f2)_+ on the shared grid."""
    if f1.grid != f2.grid:
        raise ValueError("fields live on different grids")
    diff = f1.values - f2.values
    return float(np.where(diff > 0.0, diff, 0.0).sum()) * f1.grid.cell_volume


@dataclass(frozen=True)
class ContractionReport:
    times: tuple[float, ...]
    values: tuple[float, ...]
    nonincreasing: bool
    max_increase: float
    initially_ordered: bool
    stayed_ordered: bool


def l1_contraction_check(
    t1: Trajectory, t2: Trajectory, rel_tol: float = 1e-3
) -> ContractionReport:
    """Track int (u1 - u2)_+ along two runs on the same grid and times.

    The functional must be nonincreasing up to rel_tol of its initial
    value; data ordered at the start must stay ordered (functional stays
    at the rounding floor).
    """
    if t1.grid != t2.grid:
        raise ValueError("trajectories live on different grids")
    times1 = t1.times
    times2 = t2.times
    if len(times1) != len(times2) or not np.allclose(times1, times2, rtol=1e-12):
        raise ValueError("trajectories were recorded at different times")
    if not t1.fields or len(t1.fields) != len(t2.fields):
        raise ValueError("contraction check needs fields at every record")
    vals = [positive_part_l1(a, b) for a, b in zip(t1.fields, t2.fields)]
    j0 = vals[0]
    scale = max(t1.fields[0].mass(), t2.fields[0].mass())
    tol = rel_tol * j0 + 1e-13 * scale
    increases = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    max_inc = max(increases) if increases else 0.0
    ordered0 = j0 <= 1e-13 * scale
    stayed = all(v <= 1e-12 * scale for v in vals) if ordered0 else True
    return ContractionReport(
        times=tuple(float(t) for t in times1),
        values=tuple(vals),
        nonincreasing=max_inc <= tol,
        max_increase=max_inc,
        initially_ordered=ordered0,
        stayed_ordered=stayed,
    )


# ---------------------------------------------------------------------------
# smoothing fit

@dataclass(frozen=True)
class SmoothingFit:
    slope: float
    intercept: float
    C1_est: float
    n_samples: int
    decades: float


def smoothing_fit(traj: Trajectory, e: ExponentSet, t_min: float | None = None) -> SmoothingFit:
    """Fit log ||u||_inf vs log t and estimate the smoothing constant.

    C1_est = max over samples of ||u(t)||_inf t^alpha M^{-2 alpha/N};
    the fit window must span at least 1.5 decades.
    """
    t = np.array(traj.diag.t)
    sup = np.array(traj.diag.linf)
    mass = traj.diag.mass[0]
    keep = t > 0
    if t_min is not None:
        keep &= t >= t_min
    t, sup = t[keep], sup[keep]
    if len(t) < 3:
        raise ValueError("smoothing fit needs at least 3 positive-time records")
    decades = math.log10(t[-1] / t[0])
    if decades < 1.5:
        raise ValueError(f"fit window spans only {decades:.2f} decades, need 1.5")
    coef = np.polyfit(np.log(t), np.log(sup), 1)
    c1 = float((sup * t**e.alpha).max() * mass ** (-2.0 * e.alpha / e.ndim))
    return SmoothingFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        C1_est=c1,
        n_samples=len(t),
        decades=decades,
    )


# ---------------------------------------------------------------------------
# separate symmetry and monotonicity

@dataclass(frozen=True)
class SsniReport:
    symmetry_error: float
    violations: int
    worst_violation: float
    threshold: float


def ssni_check(f: Field, threshold: float = 1e-12) -> SsniReport:
    """Reflection symmetry per axis plus outward monotonicity counting.

    Along every axis-parallel ray (through every perpendicular index)
    values must not increase away from the center; each node pair that
    does by more than the threshold counts as one violation.
    """
    sym = symmetry_error(f.values)
    violations = 0
    worst = 0.0
    for ax in range(f.grid.ndim):
        vals = np.moveaxis(f.values, ax, 0)
        n = vals.shape[0]
        d = np.diff(vals, axis=0)
        # positive half: nodes n//2 .. n-1; growth outward is d > 0
        pos = d[n // 2 :]
        # negative half: nodes 0 .. (n-1)//2; growth outward is -d > 0
        neg = -d[: (n - 1) // 2]
        for block in (pos, neg):
            bad = block > threshold
            violations += int(bad.sum())
            if bad.any():
                worst = max(worst, float(block[bad].max()))
    return SsniReport(
        symmetry_error=sym,
        violations=violations,
        worst_violation=worst,
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# quantitative positivity

@dataclass(frozen=True)
class PositivityCertificate:
    """Constructive floor near the origin for barrier-dominated SSNI data.

    Outer mass beyond the box of half-width R_eps stays below M/4, each
    slab |y_i| <= r0 holds below M/(4N), so the positive-orthant corner
    value is at least c1 = M 2^{-(N+1)} (R_eps - r0)^{-N}.
    """

    mass: float
    ndim: int
    r0: float
    R_eps: float
    eps_mass: float
    slab_bound: float
    c1: float

    def __post_init__(self):
        if not 0 < self.r0 < self.R_eps:
            raise ValueError(f"need 0 < r0 < R_eps, got {self.r0}, {self.R_eps}")
        if not self.eps_mass < self.mass / 4.0:
            raise ValueError("outer mass bound must stay below M/4")
        if not self.slab_bound < self.mass / (4.0 * self.ndim):
            raise ValueError("slab mass bound must stay below M/(4N)")
        if not self.c1 > 0:
            raise ValueError("floor must be positive")


def positivity_floor(mass: float, ndim: int, R_eps: float, r0: float) -> float:
    """The corner floor c1 = M 2^{-(N+1)} (R_eps - r0)^{-N}."""
    if not 0 < r0 < R_eps:
        raise ValueError(f"need 0 < r0 < R_eps, got {r0}, {R_eps}")
    return mass * 2.0 ** -(ndim + 1) * (R_eps - r0) ** -ndim


def upper_barrier_outer_mass(spec: UpperBarrierSpec, R: float, ndim: int) -> float:
    """Closed-form union bound for the barrier mass outside the R-box.

    sum_i int_{|y_i| >= R} (sum_j |y_j|^{theta_j})^{-delta} dy; each term
    reduces axis by axis through the Beta function. Requires
    delta > sum_j 1/theta_j (true inside the admissible window).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    theta = spec.theta[:ndim]
    if spec.delta <= sum(1.0 / t for t in theta):
        raise ValueError("barrier is not integrable: delta <= sum 1/theta_j")
    total = 0.0
    for i in range(ndim):
        factor = 1.0
        d_cur = spec.delta
        for j in range(ndim):
            if j == i:
                continue
            factor *= (2.0 / theta[j]) * _beta(1.0 / theta[j], d_cur - 1.0 / theta[j])
            d_cur -= 1.0 / theta[j]
        p = theta[i] * d_cur - 1.0
        total += 2.0 * factor * R**-p / p
    return total


def make_positivity_certificate(
    e: ExponentSet,
    spec: UpperBarrierSpec,
    mass: float,
    outer_margin: float = 0.8,
    slab_margin: float = 0.8,
) -> PositivityCertificate:
    """Pick R_eps and r0 for a given mass and barrier, then form the floor.

    R_eps solves outer_mass(R) = outer_margin * M/4 (bisection on the
    monotone closed form); r0 fills slab_margin of the M/(4N) budget with
    the cap F_star standing in for sup G.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    if not 0 < outer_margin < 1 or not 0 < slab_margin < 1:
        raise ValueError("margins must lie in (0, 1)")
    target = outer_margin * mass / 4.0
    lo, hi = 1.0, 1.0
    while upper_barrier_outer_mass(spec, hi, e.ndim) > target:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("failed to bracket the outer-mass radius")
    while upper_barrier_outer_mass(spec, lo, e.ndim) < target:
        lo /= 2.0
        if lo < 1e-300:
            raise RuntimeError("failed to bracket the outer-mass radius")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if upper_barrier_outer_mass(spec, mid, e.ndim) > target:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    R = hi
    eps_mass = upper_barrier_outer_mass(spec, R, e.ndim)
    r0 = slab_margin * mass / (4.0 * e.ndim * spec.f_star * R ** (e.ndim - 1))
    r0 = min(r0, 0.5 * R)
    slab = spec.f_star * R ** (e.ndim - 1) * r0
    return PositivityCertificate(
        mass=mass,
        ndim=e.ndim,
        r0=r0,
        R_eps=R,
        eps_mass=eps_mass,
        slab_bound=slab,
        c1=positivity_floor(mass, e.ndim, R, r0),
    )


@dataclass(frozen=True)
class PositivityReport:
    required: float
    observed: float
    ok: bool
    n_nodes: int
    times: tuple[float, ...]


def positivity_check(
    traj: Trajectory, cert: PositivityCertificate, slack: float = 0.2
) -> PositivityReport:
    """Check the floor c1 (1 - slack) on the |y_i| <= r0 box at all records.

    When r0 falls inside the first cell the box degenerates to the center
    node, which is the honest remaining claim at that resolution.
    """
    if not traj.fields:
        raise ValueError("positivity check needs recorded fields")
    g = traj.grid
    mask = np.ones(g.npts, dtype=bool)
    for ax in range(g.ndim):
        y = g.axis_coords(ax)
        # boundary nodes are Dirichlet-pinned, not approximations of v
        box = (np.abs(y) <= cert.r0)
        box[0] = box[-1] = False
        shape = [1] * g.ndim
        shape[ax] = -1
        mask &= box.reshape(shape)
    if not mask.any():
        mask = np.zeros(g.npts, dtype=bool)
        mask[g.center_index()] = True
    required = cert.c1 * (1.0 - slack)
    observed = min(float(f.values[mask].min()) for f in traj.fields)
    return PositivityReport(
        required=required,
        observed=observed,
        ok=observed >= required,
        n_nodes=int(mask.sum()),
        times=tuple(float(t) for t in traj.diag.t),
    )


# ---------------------------------------------------------------------------
# barrier domination

@dataclass(frozen=True)
class DominationReport:
    applicable: bool
    reason: str
    ok: bool
    max_ratio: float
    slack: float


def barrier_domination_check(
    traj: Trajectory,
    spec: UpperBarrierSpec,
    conds: AdmissibilityConditions,
    e: ExponentSet,
    slack: float = 5e-2,
) -> DominationReport:
    """Assert v <= (1 + slack) min(Fbar, F_star) at every node and record.

    Preconditions mirror the comparison theorem: the admissibility
    conditions must hold for (C1, M, L1, tau0, F_star), and the initial
    data must obey v0 <= L1, mass <= M, and v0 <= Fbar outside the inner
    region. Failing preconditions yield an inapplicable report.
    """
    if not traj.fields:
        raise ValueError("domination check needs recorded fields")
    adm = check_admissibility(conds, e)
    if not adm.ok:
        return DominationReport(
            applicable=False,
            reason=f"admissibility margins {adm.margin1:.3g}, {adm.margin3:.3g} below 1",
            ok=False,
            max_ratio=math.nan,
            slack=slack,
        )
    v0 = traj.fields[0]
    pts = traj.grid.points()
    tiny = 1.0 + 1e-12
    if float(v0.values.max()) > conds.L1 * tiny:
        return DominationReport(
            applicable=False,
            reason="initial data exceed the sup bound L1",
            ok=False,
            max_ratio=math.nan,
            slack=slack,
        )
    if v0.mass() > conds.M * tiny:
        return DominationReport(
            applicable=False,
            reason="initial mass exceeds M",
            ok=False,
            max_ratio=math.nan,
            slack=slack,
        )
    fbar = eval_upper(spec, pts).reshape(traj.grid.npts)
    outer = ~np.isinf(fbar) & (fbar <= spec.f_star)
    if np.any(v0.values[outer] > fbar[outer] * tiny):
        return DominationReport(
            applicable=False,
            reason="initial data exceed the barrier in the outer region",
            ok=False,
            max_ratio=math.nan,
            slack=slack,
        )
    cap = eval_upper_capped(spec, pts).reshape(traj.grid.npts)
    ratio = 0.0
    for f in traj.fields:
        ratio = max(ratio, float((f.values / cap).max()))
    return DominationReport(
        applicable=True,
        reason="",
        ok=ratio <= 1.0 + slack,
        max_ratio=ratio,
        slack=slack,
    )


# ---------------------------------------------------------------------------
# heat marginal

def _marginal(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    other = tuple(ax for ax in range(grid.ndim) if ax != axis)
    vol = 1.0
    for ax in other:
        vol *= grid.spacing[ax]
    return values.sum(axis=other) * vol


@dataclass(frozen=True)
class MarginalHeatReport:
    axis: int
    l1_rel: float
    t_start: float
    t_end: float
    marginal_mass: float


def _linear_axis(m: tuple[float, ...], axis: int | None) -> int:
    linear = [i for i, mi in enumerate(m) if mi == 1.0]
    if not linear:
        raise ValueError("no linear axis: the heat marginal does not apply")
    if axis is None:
        return linear[0]
    if m[axis] != 1.0:
        raise ValueError(f"axis {axis} has exponent {m[axis]}, not 1")
    return axis


def marginal_heat_check(traj: Trajectory, axis: int | None = None) -> MarginalHeatReport:
    """Compare the marginal on a linear axis with its own 1D heat flow.

    The marginal w = int u dx' of the first recorded field is evolved by
    the m=1 scheme on the 1D grid of that axis; the report carries the
    relative L^1 gap against the last recorded marginal.
    """
    ax = _linear_axis(traj.m, axis)
    if len(traj.fields) < 2:
        raise ValueError("heat marginal needs fields at both ends")
    first, last = traj.fields[0], traj.fields[-1]
    g1 = Grid((traj.grid.extent[ax],), (traj.grid.npts[ax],))
    w0 = Field(g1, _marginal(first.values, traj.grid, ax), time=first.time)
    cfg = SolverConfig(
        t_end=last.time,
        eps=traj.eps,
        safety=traj.cfg.safety,
        record_fields=True,
        check_conservation=False,
    )
    heat = _run_core(w0, cfg, (1.0,), None).final
    w_end = _marginal(last.values, traj.grid, ax)
    h = g1.spacing[0]
    mass = float(w0.values.sum()) * h
    err = float(np.abs(w_end - heat.values).sum()) * h
    return MarginalHeatReport(
        axis=ax,
        l1_rel=err / mass,
        t_start=first.time,
        t_end=last.time,
        marginal_mass=mass,
    )


@dataclass(frozen=True)
class MarginalGaussianReport:
    axis: int
    l1_rel: float
    mass: float


def marginal_gaussian_check(v: Field, m: tuple[float, ...], axis: int | None = None) -> MarginalGaussianReport:
    """Compare a profile's marginal on a linear axis with the Gaussian.

    For the self-similar profile the marginal must be
    M (4 pi)^{-1/2} exp(-y^2/4); the report carries the relative L^1 gap.
    """
    ax = _linear_axis(m, axis)
    marg = _marginal(v.values, v.grid, ax)
    y = v.grid.axis_coords(ax)
    mass = v.mass()
    target = mass * (4.0 * math.pi) ** -0.5 * np.exp(-y * y / 4.0)
    err = float(np.abs(marg - target).sum()) * v.grid.spacing[ax]
    return MarginalGaussianReport(axis=ax, l1_rel=err / mass, mass=mass)


# ---------------------------------------------------------------------------
# small helpers used by the verify suites

def lp_monotonicity(traj: Trajectory, rel_tol: float = 1e-10) -> dict[str, bool]:
    """Nonincrease of recorded norms (L^1 via mass, L^p, sup) along time."""
    out: dict[str, bool] = {}

    def mono(series) -> bool:
        arr = np.asarray(series, dtype=float)
        if len(arr) < 2:
            return True
        scale = max(abs(arr[0]), 1e-300)
        return bool(np.all(np.diff(arr) <= rel_tol * scale))

    out["mass"] = mono(traj.diag.mass)
    out["linf"] = mono(traj.diag.linf)
    for p, series in traj.diag.lp.items():
        out[f"l{p:g}"] = mono(series)
    return out


def interior_min(f: Field, margin_cells: int = 4) -> float:
    """Minimum over nodes at least margin_cells away from every face."""
    k = margin_cells
    sel = tuple(slice(k, -k) for _ in range(f.grid.ndim))
    core = f.values[sel]
    if core.size == 0:
        raise ValueError("margin leaves no interior nodes")
    return float(core.min())
