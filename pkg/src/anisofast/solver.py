"""Explicit conservative solver for u_t = sum_i (u^{m_i})_{x_i x_i}.

Cauchy problems are truncated to a centered box with Dirichlet data (zero
by default, the regularization floor eps behind a flag). The update is the
monotone explicit scheme u += dt * sum_i D2_i phi_i(u) with the flux
potential phi_i regularized below eps by its tangent line; the stable step
follows dt <= safety * min_i h_i^2 / (2 * sum_j max phi_j'), with the max
taken over values attained in the interior. Interior mass change is
accounted against the discrete boundary flux every step and the run aborts
on any negative or non-finite node, so a stability violation cannot pass
silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import kernels
from .exponents import ExponentSet, ModelParams
from .grids import Field, Grid, as_tuple

__all__ = [
    "SolverConfig",
    "SolverError",
    "RunDiagnostics",
    "Trajectory",
    "init_data",
    "normalize_mass",
    "cfl_dt",
    "step",
    "run",
    "energy_check",
    "gradient_energy",
]

_MASS_CHECK_ATOL = 1e-10


class SolverError(RuntimeError):
    """Raised when the scheme violates positivity, finiteness or conservation."""


@dataclass
class SolverConfig:
    """Run controls for the explicit scheme.

    eps: absolute regularization floor; if None it is eps_factor * max(u0).
    dt_policy: "cfl" (adaptive, recomputed every step) or "fixed".
    boundary: "zero" for the plain truncated problem, "eps" to hold the
        floor value on the box faces (and floor the data).
    record_every: spacing of recorded diagnostics/fields; None records
        only the start and the end. record_times adds explicit instants.
    """

    t_end: float
    eps: float | None = None
    eps_factor: float = 1e-8
    dt_policy: str = "cfl"
    dt: float | None = None
    safety: float = 0.4
    boundary: str = "zero"
    record_every: float | None = None
    record_times: tuple[float, ...] = ()
    record_fields: bool = True
    p_norms: tuple[float, ...] = (1.0, 2.0)
    check_conservation: bool = True
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.dt_policy not in ("cfl", "fixed"):
            raise ValueError(f"unknown dt policy {self.dt_policy!r}")
        if self.dt_policy == "fixed" and (self.dt is None or self.dt <= 0):
            raise ValueError("fixed dt policy needs a positive dt")
        if not 0.0 < self.safety <= 1.0:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if self.boundary not in ("zero", "eps"):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("eps must be positive when given")


@dataclass
class RunDiagnostics:
    """Per-record scalar diagnostics; timestamps are strictly increasing."""

    t: list[float] = dataclass_field(default_factory=list)
    mass: list[float] = dataclass_field(default_factory=list)
    linf: list[float] = dataclass_field(default_factory=list)
    min_interior: list[float] = dataclass_field(default_factory=list)
    lp: dict[float, list[float]] = dataclass_field(default_factory=dict)
    energy_rate: list[list[float]] = dataclass_field(default_factory=list)
    energy_cum: list[list[float]] = dataclass_field(default_factory=list)
    boundary_flux_cum: list[float] = dataclass_field(default_factory=list)
    dt: list[float] = dataclass_field(default_factory=list)
    steps: list[int] = dataclass_field(default_factory=list)

    def append(self, t, mass, linf, min_interior, lp, energy_rate, energy_cum,
               flux_cum, dt, steps):
        if self.t and t <= self.t[-1]:
            raise SolverError(f"record times must increase: {t} after {self.t[-1]}")
        self.t.append(t)
        self.mass.append(mass)
        self.linf.append(linf)
        self.min_interior.append(min_interior)
        for p, v in lp.items():
            self.lp.setdefault(p, []).append(v)
        self.energy_rate.append(energy_rate)
        self.energy_cum.append(energy_cum)
        self.boundary_flux_cum.append(flux_cum)
        self.dt.append(dt)
        self.steps.append(steps)


@dataclass
class Trajectory:
    """Recorded run: fields (optional) plus diagnostics and the setup echo."""

    grid: Grid
    m: tuple[float, ...]
    cfg: SolverConfig
    eps: float
    fields: list[Field]
    diag: RunDiagnostics

    @property
    def times(self) -> np.ndarray:
        return np.array(self.diag.t)

    def field_at(self, t: float) -> Field:
        for f in self.fields:
            if abs(f.time - t) <= 1e-9 * max(1.0, abs(t)):
                return f
        raise KeyError(f"no recorded field at t = {t}")

    @property
    def final(self) -> Field:
        if not self.fields:
            raise ValueError("run did not record fields")
        return self.fields[-1]


# ---------------------------------------------------------------------------
# initial data

def _bump_shape(grid: Grid, center, radius) -> np.ndarray:
    c = as_tuple(center, grid.ndim, "center")
    R = as_tuple(radius, grid.ndim, "radius")
    rho2 = np.zeros(grid.npts)
    for ax, (ci, Ri) in enumerate(zip(c, R)):
        x = grid.axis_coords(ax)
        shape = [1] * grid.ndim
        shape[ax] = -1
        rho2 = rho2 + (((x - ci) / Ri) ** 2).reshape(shape)
    vals = np.zeros(grid.npts)
    inside = rho2 < 1.0
    # classic mollifier, flat to all orders at the support edge
    vals[inside] = np.exp(-1.0 / (1.0 - rho2[inside]))
    return vals


def _smoothstep(z: np.ndarray) -> np.ndarray:
    z = np.clip(z, 0.0, 1.0)
    return z * z * (3.0 - 2.0 * z)


def _box_shape(grid: Grid, center, radius, width) -> np.ndarray:
    c = as_tuple(center, grid.ndim, "center")
    R = as_tuple(radius, grid.ndim, "radius")
    w = as_tuple(width, grid.ndim, "width")
    vals = np.ones(grid.npts)
    for ax, (ci, Ri, wi) in enumerate(zip(c, R, w)):
        x = grid.axis_coords(ax)
        shape = [1] * grid.ndim
        shape[ax] = -1
        vals = vals * _smoothstep((Ri - np.abs(x - ci)) / wi).reshape(shape)
    return vals


def _support_check(grid: Grid, center, radius, name: str) -> None:
    c = as_tuple(center, grid.ndim, "center")
    R = as_tuple(radius, grid.ndim, "radius")
    for ax, (ci, Ri, Li) in enumerate(zip(c, R, grid.extent)):
        if abs(ci) + Ri > Li:
            raise ValueError(
                f"{name} support exceeds the box on axis {ax}: |{ci}| + {Ri} > {Li}"
            )


def normalize_mass(f: Field, mass: float) -> Field:
    current = f.mass()
    if current <= 0:
        raise ValueError("cannot normalize a field with nonpositive mass")
    return Field(f.grid, f.values * (mass / current), f.time)


def init_data(
    kind: str,
    grid: Grid,
    mass: float = 1.0,
    center=0.0,
    radius=1.0,
    width=None,
    m: float | None = None,
    t_snap: float = 1.0,
    time: float = 0.0,
) -> Field:
    """Build normalized initial data.

    Kinds: "bump" (compact mollifier), "box" (mollified indicator, width
    defaults to radius/4), "barenblatt" (isotropic self-similar snapshot
    at t_snap; needs the common exponent m). Mass is normalized exactly
    in the lattice-sum quadrature. Compact kinds must fit inside the box.
    """
    if mass <= 0:
        raise ValueError(f"mass must be positive, got {mass}")
    if kind == "bump":
        _support_check(grid, center, radius, "bump")
        vals = _bump_shape(grid, center, radius)
    elif kind == "box":
        if width is None:
            width = tuple(Ri / 4.0 for Ri in as_tuple(radius, grid.ndim, "radius"))
        outer = tuple(
            Ri + wi
            for Ri, wi in zip(
                as_tuple(radius, grid.ndim, "radius"), as_tuple(width, grid.ndim, "width")
            )
        )
        _support_check(grid, center, outer, "box")
        vals = _box_shape(grid, center, radius, width)
    elif kind == "barenblatt":
        if m is None:
            raise ValueError("barenblatt data needs the common exponent m")
        from .barriers import barenblatt_mass_constant, barenblatt_spacetime

        C = barenblatt_mass_constant(m, grid.ndim, mass)
        c = as_tuple(center, grid.ndim, "center")
        pts = grid.points() - np.array(c)[None, :]
        vals = barenblatt_spacetime(pts, t_snap, m, grid.ndim, C).reshape(grid.npts)
    else:
        raise ValueError(f"unknown initial data kind {kind!r}")
    out = Field(grid, vals, time=time)
    if out.mass() <= 0:
        raise ValueError(f"{kind} data vanished on this grid; refine or enlarge")
    return normalize_mass(out, mass)


# ---------------------------------------------------------------------------
# stepping internals

def _resolve_m(e) -> tuple[float, ...]:
    if isinstance(e, ExponentSet):
        return e.m
    if isinstance(e, ModelParams):
        return e.m
    raise TypeError(f"expected ExponentSet or ModelParams, got {type(e)!r}")


def _resolve_eps(cfg: SolverConfig, u0: np.ndarray, m: tuple[float, ...]) -> float:
    if all(mi == 1.0 for mi in m):
        return cfg.eps if cfg.eps is not None else 0.0
    if cfg.eps is not None:
        return cfg.eps
    peak = float(np.abs(u0).max())
    if peak <= 0:
        raise ValueError("cannot scale eps from all-zero data")
    return cfg.eps_factor * peak


def cfl_dt(
    values: np.ndarray,
    grid: Grid,
    m: tuple[float, ...],
    eps: float,
    safety: float,
    drift: tuple[float, ...] | None = None,
) -> float:
    """Stable explicit step from the attained interior range.

    Diffusion bound: safety * min_i h_i^2 / (2 sum_j max phi_j').
    With drift coefficients b_j (confined stepping) the additional
    first-order bound sum_j b_j (Y_j/h_j + 1) enters the denominator.
    """
    core = tuple(slice(1, -1) for _ in range(grid.ndim))
    umin = float(values[core].min())
    slopes = sum(kernels.phi_slope_max(mi, eps, umin) for mi in m)
    h = grid.spacing
    denom = 2.0 * slopes / min(hi * hi for hi in h)
    if drift is not None:
        for ax, b in enumerate(drift):
            ymax = float(np.abs(grid.face_coords(ax)).max())
            denom += b * (ymax / h[ax] + 1.0)
    return safety / denom


class _Stepper:
    """Reusable buffers and per-step bookkeeping for one run."""

    def __init__(self, grid: Grid, m: tuple[float, ...], eps: float,
                 check_conservation: bool, drift: tuple[float, ...] | None = None):
        self.grid = grid
        self.m = m
        self.eps = eps
        self.check = check_conservation
        self.drift = drift
        self.core = tuple(slice(1, -1) for _ in range(grid.ndim))
        self.h = grid.spacing
        self.cellvol = grid.cell_volume
        shape = grid.npts
        unique = []
        for mi in m:
            if mi not in unique:
                unique.append(mi)
        self._unique_m = unique
        self._bufs = {mi: np.empty(shape) for mi in unique}
        self.out = np.empty(shape)
        self.flux_cum = 0.0
        self.energy_cum = [0.0] * grid.ndim
        if drift is not None:
            self.wfs = tuple(
                b * grid.face_coords(ax) for ax, b in enumerate(drift)
            )

    def phis(self, values: np.ndarray, use_numba=None) -> list[np.ndarray]:
        for mi in self._unique_m:
            kernels.phi_values(values, mi, self.eps, self._bufs[mi], use_numba)
        return [self._bufs[mi] for mi in self.m]

    def advance(self, values: np.ndarray, dt: float, use_numba=None) -> np.ndarray:
        phis = self.phis(values, use_numba)
        # exact per-step dissipation ledger; sampling the rate only at
        # record times cannot bound the time integral
        for ax in range(self.grid.ndim):
            d = np.diff(phis[ax], axis=ax) / self.h[ax]
            self.energy_cum[ax] += dt * float((d * d).sum()) * self.cellvol
        rs = tuple(dt / (hi * hi) for hi in self.h)
        if self.drift is None:
            kernels.cauchy_step(values, phis, rs, self.out, use_numba)
        else:
            qs = tuple(dt / hi for hi in self.h)
            kernels.rescaled_step_arrays(values, phis, rs, self.wfs, qs, self.out, use_numba)
        if self.check:
            self._check_conservation(values, phis, dt)
        mn = float(self.out[self.core].min())
        if not mn >= 0.0:
            # near-total cancellation against the phi floor can leave
            # -O(ulp(eps)) values after many steps; anything larger is a
            # genuine stability failure
            if not mn >= -1e-12 * self.eps:
                raise SolverError(
                    f"scheme produced a negative or non-finite value (min {mn}); "
                    f"reduce the step safety factor"
                )
            np.maximum(self.out, 0.0, out=self.out)
        return self.out

    def _boundary_flux(self, values, phis, dt) -> float:
        """Discrete flux through the box faces for this step (signed)."""
        flux = 0.0
        for ax in range(self.grid.ndim):
            P = phis[ax]
            r = dt / (self.h[ax] * self.h[ax])
            idx = [slice(1, -1)] * self.grid.ndim
            take = []
            for j in (0, 1, -1, -2):
                sel = list(idx)
                sel[ax] = j
                take.append(float(P[tuple(sel)].sum()))
            flux += r * ((take[0] - take[1]) + (take[2] - take[3]))
            if self.drift is not None:
                # donor-cell values at the outermost faces, matching the kernel
                wf = self.wfs[ax]
                q = dt / self.h[ax]
                donor_lo = list(idx)
                donor_lo[ax] = 1 if wf[0] > 0 else 0
                donor_hi = list(idx)
                donor_hi[ax] = -1 if wf[-1] > 0 else -2
                g_lo = wf[0] * float(values[tuple(donor_lo)].sum())
                g_hi = wf[-1] * float(values[tuple(donor_hi)].sum())
                flux += q * (g_hi - g_lo)
        return flux * self.cellvol

    def _check_conservation(self, values, phis, dt) -> None:
        before = float(values.sum()) * self.cellvol
        flux = self._boundary_flux(values, phis, dt)
        after = float(self.out.sum()) * self.cellvol
        self.flux_cum += flux
        tol = _MASS_CHECK_ATOL * max(1.0, abs(before))
        if abs((after - before) - flux) > tol:
            raise SolverError(
                f"mass accounting failed: d(mass) = {after - before}, "
                f"boundary flux = {flux}"
            )


def gradient_energy(values: np.ndarray, grid: Grid, m: tuple[float, ...]) -> list[float]:
    """Per-axis integral of |D_i u^{m_i}|^2 (forward differences)."""
    out = []
    for ax, mi in enumerate(m):
        g = values if mi == 1.0 else np.power(values, mi)
        d = np.diff(g, axis=ax) / grid.spacing[ax]
        out.append(float((d * d).sum() * grid.cell_volume))
    return out


def _record_times(cfg: SolverConfig, t0: float) -> list[float]:
    times = {t0, cfg.t_end}
    if cfg.record_every is not None:
        if cfg.record_every <= 0:
            raise ValueError("record_every must be positive")
        k = 1
        while True:
            t = t0 + k * cfg.record_every
            if t >= cfg.t_end - 1e-12 * max(1.0, abs(cfg.t_end)):
                break
            times.add(t)
            k += 1
    for t in cfg.record_times:
        if t0 < t < cfg.t_end:
            times.add(float(t))
    return sorted(times)


def _apply_boundary(values: np.ndarray, ndim: int, value: float) -> None:
    for ax in range(ndim):
        sel = [slice(None)] * ndim
        sel[ax] = 0
        values[tuple(sel)] = value
        sel[ax] = -1
        values[tuple(sel)] = value


def run(u0: Field, cfg: SolverConfig, e: ExponentSet | ModelParams) -> Trajectory:
    """Evolve initial data to cfg.t_end, recording along the way.

    Returns the trajectory with diagnostics at every record time
    (monotone timestamps, lattice-sum mass, sup/p-norms, interior
    minimum, per-axis gradient energies, accumulated boundary flux).
    """
    return _run_core(u0, cfg, _resolve_m(e), drift=None)


def _run_core(
    u0: Field,
    cfg: SolverConfig,
    m: tuple[float, ...],
    drift: tuple[float, ...] | None,
) -> Trajectory:
    if len(m) != u0.grid.ndim:
        raise ValueError("exponent count does not match the grid dimension")
    if cfg.t_end <= u0.time:
        raise ValueError(f"t_end = {cfg.t_end} must exceed the data time {u0.time}")
    values = u0.values.copy()
    eps = _resolve_eps(cfg, values, m)
    if cfg.boundary == "eps":
        if eps <= 0:
            raise ValueError("boundary='eps' needs a positive floor")
        np.maximum(values, eps, out=values)
        _apply_boundary(values, u0.grid.ndim, eps)
    else:
        _apply_boundary(values, u0.grid.ndim, 0.0)
    if not float(values.min()) >= 0.0:
        raise SolverError("initial data must be nonnegative and finite")

    stepper = _Stepper(u0.grid, m, eps, cfg.check_conservation, drift)
    diag = RunDiagnostics()
    fields: list[Field] = []
    traj = Trajectory(u0.grid, m, cfg, eps, fields, diag)

    records = _record_times(cfg, u0.time)
    t = u0.time
    steps = 0
    last_dt = 0.0

    def record(t_now: float) -> None:
        f = Field(u0.grid, values, t_now)
        lp = {p: f.norm_p(p) for p in cfg.p_norms}
        core = stepper.core
        diag.append(
            t=t_now,
            mass=f.mass(),
            linf=f.norm_inf(),
            min_interior=float(values[core].min()),
            lp=lp,
            energy_rate=gradient_energy(values, u0.grid, m),
            energy_cum=list(stepper.energy_cum),
            flux_cum=stepper.flux_cum,
            dt=last_dt,
            steps=steps,
        )
        if cfg.record_fields:
            fields.append(Field(u0.grid, values.copy(), t_now))

    record(t)
    for t_target in records[1:]:
        while t < t_target:
            if cfg.dt_policy == "fixed":
                dt = cfg.dt
            else:
                dt = cfl_dt(values, u0.grid, m, eps, cfg.safety, drift)
            hit = t + dt >= t_target
            if hit:
                dt = t_target - t
            new = stepper.advance(values, dt)
            values, stepper.out = new, values
            t = t_target if hit else t + dt
            steps += 1
            last_dt = dt
            if steps > cfg.max_steps:
                raise SolverError(f"exceeded max_steps = {cfg.max_steps} at t = {t}")
        record(t)
    return traj


def step(u: Field, cfg: SolverConfig, e: ExponentSet | ModelParams) -> Field:
    """One explicit update of a field (convenience wrapper over the loop)."""
    m = _resolve_m(e)
    values = u.values.copy()
    eps = _resolve_eps(cfg, values, m)
    stepper = _Stepper(u.grid, m, eps, cfg.check_conservation)
    if cfg.dt_policy == "fixed":
        dt = cfg.dt
    else:
        dt = cfl_dt(values, u.grid, m, eps, cfg.safety)
    out = stepper.advance(values, dt)
    return Field(u.grid, out.copy(), u.time + dt)


def energy_check(traj: Trajectory) -> list[dict]:
    """Per-axis dissipation inequality over the recorded window.

    The time integral of |D_i u^{m_i}|^2 must not exceed
    (1/(m_i+1)) [ int u(0)^{m_i+1} - int u(T)^{m_i+1} ]; the report
    carries the two sides and the relative violation (0 when satisfied).
    The integral is the stepwise ledger the scheme actually dissipated,
    so record spacing does not bias it.
    """
    if len(traj.fields) < 2:
        raise ValueError("energy check needs recorded fields at both ends")
    first, last = traj.fields[0], traj.fields[-1]
    vol = traj.grid.cell_volume
    out = []
    for ax, mi in enumerate(traj.m):
        lhs = traj.diag.energy_cum[-1][ax] - traj.diag.energy_cum[0][ax]
        pw = mi + 1.0
        rhs = (
            float((first.values**pw).sum() - (last.values**pw).sum()) * vol / pw
        )
        violation = max(0.0, lhs - rhs)
        out.append(
            {
                "axis": ax,
                "lhs": lhs,
                "rhs": rhs,
                "violation": violation,
                "rel_violation": violation / max(abs(rhs), 1e-300),
            }
        )
    return out
