"""Self-similar exponents for anisotropic fast diffusion.

The equation u_t = sum_i (u^{m_i})_{x_i x_i} with 0 < m_i <= 1 spreads at a
different rate along every axis. With mbar the mean of the m_i and
mc = 1 - 2/N the critical mean, the admissible regime mbar > mc carries a
one-parameter family of scalings; the mass-preserving member fixes the
time decay rate alpha and the per-axis spreading rates a_i = alpha*sigma_i
used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Field

__all__ = [
    "ModelParams",
    "ValidationReport",
    "ExponentSet",
    "ScalingFamily",
    "validate_params",
    "compute_exponents",
    "scaling_family",
    "transform_scaling",
]

# identities are exact in the algebra; allow only rounding noise
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Dimension and per-axis diffusion exponents.

    allow_linear admits m_i == 1 on individual axes (still rejecting the
    all-linear case, which is plain heat flow).
    """

    ndim: int
    m: tuple[float, ...]
    allow_linear: bool = False

    def __post_init__(self):
        if self.ndim != len(self.m):
            raise ValueError(
                f"ndim = {self.ndim} but {len(self.m)} exponents were given"
            )
        if any(mi <= 0 for mi in self.m):
            raise ValueError(f"exponents must be positive, got {self.m}")
        object.__setattr__(self, "m", tuple(float(mi) for mi in self.m))

    @property
    def mbar(self) -> float:
        return sum(self.m) / self.ndim

    @property
    def mc(self) -> float:
        return 1.0 - 2.0 / self.ndim


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failed: str | None = None
    detail: str = ""


def validate_params(p: ModelParams) -> ValidationReport:
    """Check the admissibility hypotheses, reporting the first failure.

    Conditions, in order: every m_i in (0, 1] (m_i == 1 only with
    allow_linear), mean exponent above critical, and not every axis linear.
    """
    if p.ndim < 2:
        return ValidationReport(False, "dimension", f"need ndim >= 2, got {p.ndim}")
    for i, mi in enumerate(p.m):
        if mi > 1.0:
            return ValidationReport(
                False, "range", f"m[{i}] = {mi} exceeds 1"
            )
        if mi == 1.0 and not p.allow_linear:
            return ValidationReport(
                False, "range", f"m[{i}] = 1 requires allow_linear"
            )
    if p.mbar <= p.mc:
        return ValidationReport(
            False,
            "supercritical-mean",
            f"mean exponent {p.mbar} must exceed 1 - 2/N = {p.mc}",
        )
    if all(mi == 1.0 for mi in p.m):
        return ValidationReport(
            False, "not-all-linear", "all axes linear is plain heat flow"
        )
    return ValidationReport(True)


@dataclass(frozen=True)
class ExponentSet:
    """Mass-preserving self-similar rates for a validated model.

    alpha: sup-norm decay rate, alpha = N / (N*(mbar-1) + 2)
    sigma: shape weights, sigma_i = 1/N + (mbar - m_i)/2, summing to 1
    a: spreading rates a_i = alpha * sigma_i
    gamma_stat: per-axis rates (1 - m_i)/2 of the stationary scaling
    beta: mass exponent of the stationary scaling, 1 - sum(gamma_stat)
    """

    params: ModelParams
    alpha: float
    sigma: tuple[float, ...]
    a: tuple[float, ...]
    mbar: float
    mc: float
    gamma_stat: tuple[float, ...]
    beta: float

    def __post_init__(self):
        if abs(sum(self.sigma) - 1.0) > IDENTITY_TOL:
            raise AssertionError(f"sigma must sum to 1, got {sum(self.sigma)}")
        for mi, ai in zip(self.params.m, self.a):
            if abs(self.alpha * (mi - 1.0) + 2.0 * ai - 1.0) > IDENTITY_TOL:
                raise AssertionError("compatibility alpha*(m_i-1) + 2 a_i = 1 failed")
        if self.alpha <= 0 or any(s <= 0 for s in self.sigma):
            raise AssertionError("rates must be positive in the admissible regime")
        if not 0.0 < self.beta < 1.0:
            raise AssertionError(f"mass exponent beta must lie in (0,1), got {self.beta}")

    @property
    def ndim(self) -> int:
        return self.params.ndim

    @property
    def m(self) -> tuple[float, ...]:
        return self.params.m


def _alpha_of(mbar: float, ndim: int, c: float) -> float:
    # single formula path shared by the family and its c=1 member
    den = mbar - 1.0 + 2.0 * c / ndim
    if den <= 0:
        raise ValueError(
            f"scaling not defined: mbar - 1 + 2c/N = {den} must be positive"
        )
    return 1.0 / den


def _sigma_of(p: ModelParams, c: float) -> tuple[float, ...]:
    return tuple(c / p.ndim + (p.mbar - mi) / 2.0 for mi in p.m)


def compute_exponents(p: ModelParams) -> ExponentSet:
    """Build the full exponent set; raises on inadmissible parameters."""
    report = validate_params(p)
    if not report.ok:
        raise ValueError(f"inadmissible parameters ({report.failed}): {report.detail}")
    alpha = _alpha_of(p.mbar, p.ndim, 1.0)
    sigma = _sigma_of(p, 1.0)
    a = tuple(alpha * s for s in sigma)
    gamma_stat = tuple((1.0 - mi) / 2.0 for mi in p.m)
    beta = 1.0 - sum(gamma_stat)
    return ExponentSet(
        params=p,
        alpha=alpha,
        sigma=sigma,
        a=a,
        mbar=p.mbar,
        mc=p.mc,
        gamma_stat=gamma_stat,
        beta=beta,
    )


@dataclass(frozen=True)
class ScalingFamily:
    """One member of the c-indexed scaling family.

    The transform k^{alpha(c)} u(k^{alpha(c) sigma_i(c)} x, k t) maps
    solutions to solutions and multiplies mass by k to the power
    mass_factor_exponent = alpha(c) * (1 - c). c = 1 preserves mass.
    """

    c: float
    alpha_c: float
    sigma_c: tuple[float, ...]
    mass_factor_exponent: float


def scaling_family(e: ExponentSet, c: float) -> ScalingFamily:
    if c <= 0:
        raise ValueError(f"family parameter c must be positive, got {c}")
    alpha_c = _alpha_of(e.mbar, e.ndim, c)
    sigma_c = _sigma_of(e.params, c)
    return ScalingFamily(
        c=c,
        alpha_c=alpha_c,
        sigma_c=sigma_c,
        mass_factor_exponent=alpha_c * (1.0 - c),
    )


def transform_scaling(u: Field, k: float, e: ExponentSet) -> Field:
    """Apply the mass-preserving rescaling to a snapshot.

    Given u at time t, returns the field x -> k^alpha * u(k^{a_i} x_i)
    at time t / k, resampled on the same grid by multilinear interpolation
    with zero fill outside the box.

    Args:
        u: snapshot field (time attribute is the solution time).
        k: scaling parameter, k > 0.
        e: exponent set of the model.

    Returns:
        Transformed snapshot on the same grid at time u.time / k.
    """
    if k <= 0:
        raise ValueError(f"scaling parameter k must be positive, got {k}")
    if u.grid.ndim != e.ndim:
        raise ValueError("field dimension does not match exponents")
    pts = u.grid.points()
    stretched = pts * np.array([k**ai for ai in e.a])[None, :]
    vals = (k**e.alpha) * u.sample(stretched)
    return Field(u.grid, vals.reshape(u.grid.npts), time=u.time / k)
