"""Explicit super/sub-solution profiles and the stationary residual.

The rescaled flow relaxes toward a stationary profile F solving

    sum_i [ (F^{m_i})_{y_i y_i} + alpha sigma_i (y_i F)_{y_i} ] = 0.

Closed-form barriers bracket its tails: an upper profile
(sum_i |y_i|^{theta_i})^{-delta} is a super-solution outside a computable
radius r, and a lower profile (A + sum_i |y_i|^{vartheta_i})^{-gamma} is a
sub-solution once the offset A is large enough. Both windows and constants
are computed here, together with a finite-difference residual that checks
the signs numerically. The isotropic case has the classical explicit
profile, exposed in two variants (see ``barenblatt_profile``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exponents import ExponentSet

__all__ = [
    "Profile",
    "UpperBarrierSpec",
    "LowerBarrierSpec",
    "select_upper_params",
    "upper_radius",
    "eval_upper",
    "eval_upper_capped",
    "select_lower_params",
    "lower_offset_min",
    "eval_lower",
    "eval_lower_spacetime",
    "stationary_residual",
    "residual_tolerance",
    "stationary_rescale",
    "barenblatt_profile",
    "barenblatt_spacetime",
    "profile_mass",
    "barenblatt_mass_constant",
    "sample_outer_points",
    "sample_box_points",
    "upper_window",
]

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


@dataclass(frozen=True)
class Profile:
    """A profile candidate: vectorized evaluator plus a short label."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)


# ---------------------------------------------------------------------------
# upper barrier

@dataclass(frozen=True)
class UpperBarrierSpec:
    """Super-solution (sum_i |y_i|^{theta_i})^{-delta} outside radius r.

    r is the activation threshold for sum_i |y_i|^{theta_i}; f_star is the
    barrier value there, and min(barrier, f_star) extends it globally.
    """

    delta: float
    theta: tuple[float, ...]
    r: float
    f_star: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if any(t < 1.0 for t in self.theta):
            raise ValueError(f"theta components must be >= 1, got {self.theta}")


def upper_window(e: ExponentSet, delta: float) -> list[tuple[float, float]]:
    """Admissible (open) interval for delta*theta_i on each axis."""
    out = []
    for mi, si in zip(e.m, e.sigma):
        lo = 1.0 / si
        hi = 2.0 / (1.0 - mi) if mi < 1.0 else math.inf
        out.append((lo / delta, hi / delta))
    return out


def upper_radius(e: ExponentSet, delta: float, theta) -> tuple[float, float]:
    """Activation radius r and barrier level f_star = r^(-delta).

    Requires delta*theta_i inside the admissible window on every axis;
    the dominating axis is the one with the largest candidate.
    """
    theta = tuple(float(t) for t in theta)
    window = upper_window(e, delta)
    for i, (t, (lo, hi)) in enumerate(zip(theta, window)):
        if not lo < t < hi:
            raise ValueError(
                f"theta[{i}] = {t} outside admissible window ({lo}, {hi})"
            )
    s_min = min(si * ti for si, ti in zip(e.sigma, theta))
    gap = delta * s_min - 1.0
    if gap <= 0:
        raise ValueError("integrability margin delta*min(sigma_i theta_i) - 1 must be positive")
    r = 0.0
    for mi, ti in zip(e.m, theta):
        base = e.ndim * delta * mi * (delta * mi + 1.0) * ti**2 / (gap * e.alpha)
        expo = 1.0 / (2.0 / ti - delta * (1.0 - mi))
        r = max(r, base**expo)
    return r, r ** (-delta)


def select_upper_params(e: ExponentSet, slack: float = 0.1) -> UpperBarrierSpec:
    """Pick barrier exponents near the sharp-decay end of the window.

    With delta = 1, theta_i interpolates between the sharp rate 2/(1-m_i)
    and the integrability edge 1/sigma_i; slack = 0 is the sharp end.
    Linear axes (m_i = 1) have no sharp rate and use 1/sigma_i + 1.
    """
    if not 0.0 < slack < 1.0:
        raise ValueError(f"slack must lie in (0, 1), got {slack}")
    delta = 1.0
    theta = []
    for mi, si in zip(e.m, e.sigma):
        if mi < 1.0:
            t = (1.0 - slack) * 2.0 / (1.0 - mi) + slack / si
        else:
            t = 1.0 / si + 1.0
        theta.append(max(t, 1.0))
    r, f_star = upper_radius(e, delta, theta)
    return UpperBarrierSpec(delta=delta, theta=tuple(theta), r=r, f_star=f_star)


def _power_sum(points: np.ndarray, powers) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    acc = np.zeros(pts.shape[:-1])
    for i, p in enumerate(powers):
        acc += np.abs(pts[..., i]) ** p
    return acc


def eval_upper(spec: UpperBarrierSpec, points: np.ndarray) -> np.ndarray:
    """Barrier values; +inf at the origin where the profile blows up."""
    s = _power_sum(points, spec.theta)
    with np.errstate(divide="ignore"):
        return s ** (-spec.delta)


def eval_upper_capped(spec: UpperBarrierSpec, points: np.ndarray) -> np.ndarray:
    """Globally bounded extension min(barrier, f_star)."""
    return np.minimum(eval_upper(spec, points), spec.f_star)


# ---------------------------------------------------------------------------
# lower barrier

@dataclass(frozen=True)
class LowerBarrierSpec:
    """Sub-solution (A + sum_i |y_i|^{vartheta_i})^{-gamma}, valid for A >= A0."""

    gamma: float
    vartheta: tuple[float, ...]
    A: float
    A0: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if any(not 0.0 < v <= 1.0 for v in self.vartheta):
            raise ValueError(f"vartheta components must lie in (0, 1], got {self.vartheta}")
        if self.A < self.A0:
            raise ValueError(f"offset A = {self.A} below the admissible minimum {self.A0}")


def lower_offset_min(e: ExponentSet, gamma: float, vartheta) -> float:
    """Smallest admissible offset A0 for the sub-solution sign.

    Derived from the pointwise inequality the proof needs:
    gamma m_i (gamma m_i + 1) vartheta_i^2 X^{-gamma m_i - 2/vartheta_i}
    must dominate (alpha/N) (gamma max_j sigma_j vartheta_j - 1) X^{-gamma}
    for all X >= A; the decay window makes the comparison exponent
    positive, so the binding value is at X = A.
    """
    vartheta = tuple(float(v) for v in vartheta)
    for i, (mi, vi) in enumerate(zip(e.m, vartheta)):
        if mi >= 1.0:
            raise ValueError("lower barrier needs m_i < 1 on every axis")
        if not 1.0 / (gamma * vi) < (1.0 - mi) / 2.0:
            raise ValueError(
                f"window violated on axis {i}: need gamma*vartheta_i > 2/(1-m_i)"
            )
    s_max = max(si * vi for si, vi in zip(e.sigma, vartheta))
    a0 = 0.0
    for mi, vi in zip(e.m, vartheta):
        num = e.alpha * (gamma * s_max - 1.0)
        den = e.ndim * gamma * mi * (gamma * mi + 1.0) * vi**2
        expo = gamma - gamma * mi - 2.0 / vi
        a0 = max(a0, (num / den) ** (1.0 / expo))
    return a0


def select_lower_params(
    e: ExponentSet, slack: float = 0.1, offset_factor: float = 2.0
) -> LowerBarrierSpec:
    """Pick decay rates just above the sharp ones and a safe offset.

    gamma*vartheta_i = (1 + slack) * 2/(1 - m_i) with vartheta_i <= 1,
    attained by putting vartheta = 1 on the fastest-decaying axis.
    """
    if slack <= 0:
        raise ValueError(f"slack must be positive, got {slack}")
    if any(mi >= 1.0 for mi in e.m):
        raise ValueError("lower barrier needs m_i < 1 on every axis")
    sharp = [2.0 / (1.0 - mi) for mi in e.m]
    gamma = (1.0 + slack) * max(sharp)
    vartheta = tuple(q / max(sharp) for q in sharp)
    a0 = lower_offset_min(e, gamma, vartheta)
    return LowerBarrierSpec(gamma=gamma, vartheta=vartheta, A=offset_factor * a0, A0=a0)


def eval_lower(spec: LowerBarrierSpec, points: np.ndarray) -> np.ndarray:
    return (spec.A + _power_sum(points, spec.vartheta)) ** (-spec.gamma)


def eval_lower_spacetime(
    spec: LowerBarrierSpec, e: ExponentSet, points: np.ndarray, t: float
) -> np.ndarray:
    """Space-time sub-solution t^{-alpha} (A + sum t^{-alpha sigma_i vartheta_i} |x_i|^{vartheta_i})^{-gamma}."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    acc = np.full(pts.shape[:-1], spec.A)
    for i, (vi, si) in enumerate(zip(spec.vartheta, e.sigma)):
        acc += t ** (-e.alpha * si * vi) * np.abs(pts[..., i]) ** vi
    return t ** (-e.alpha) * acc ** (-spec.gamma)


# ---------------------------------------------------------------------------
# stationary residual (central differences)

def stationary_residual(
    f: Callable[[np.ndarray], np.ndarray],
    e: ExponentSet,
    points: np.ndarray,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference residual of the profile equation at sample points.

    Returns (residual, scale) where scale is the largest individual term
    magnitude per point; a sign test should compare the residual against
    residual_tolerance(h, scale). Second order in h for smooth profiles.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    f0 = np.asarray(f(pts), dtype=np.float64)
    res = np.zeros(pts.shape[0])
    scale = np.zeros(pts.shape[0])
    for i in range(e.ndim):
        shift = np.zeros(pts.shape[1])
        shift[i] = h
        fp = np.asarray(f(pts + shift), dtype=np.float64)
        fm = np.asarray(f(pts - shift), dtype=np.float64)
        mi = e.m[i]
        diff = (fp**mi - 2.0 * f0**mi + fm**mi) / (h * h)
        yi = pts[:, i]
        drift = e.alpha * e.sigma[i] * ((yi + h) * fp - (yi - h) * fm) / (2.0 * h)
        res += diff + drift
        scale = np.maximum(scale, np.maximum(np.abs(diff), np.abs(drift)))
    return res, scale


def residual_tolerance(h: float, scale: np.ndarray) -> np.ndarray:
    """Sign-test tolerance: max of the truncation bound and a relative floor."""
    return np.maximum(10.0 * h * h, 1e-8 * scale)


def stationary_rescale(
    f: Callable[[np.ndarray], np.ndarray], k: float, e: ExponentSet
) -> Callable[[np.ndarray], np.ndarray]:
    """Stationary-equation symmetry: y -> k f(k^{gamma_i} y_i).

    Maps profiles to profiles and multiplies mass by k^beta.
    """
    factors = np.array([k**g for g in e.gamma_stat])

    def rescaled(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return k * np.asarray(f(pts * factors))

    return rescaled


# ---------------------------------------------------------------------------
# isotropic explicit profile

def _iso_rates(m: float, ndim: int) -> tuple[float, float]:
    if not 0.0 < m < 1.0:
        raise ValueError(f"isotropic profile needs 0 < m < 1, got {m}")
    den = ndim * (m - 1.0) + 2.0
    if den <= 0:
        raise ValueError(f"m = {m} is at or below the critical exponent for N = {ndim}")
    alpha = ndim / den
    k = alpha * (1.0 - m) / (2.0 * m * ndim)
    return alpha, k


def barenblatt_profile(
    points: np.ndarray, m: float, ndim: int, C: float, variant: str = "quadratic"
) -> np.ndarray:
    """Isotropic stationary profile, in two printed forms.

    variant="quadratic": (C + k |y|^2)^(-1/(1-m)), the classical profile,
    which satisfies the flux identity grad F^m = -(alpha/N) y F exactly.
    variant="printed": (C + k |y|)^(-2/(1-m)), same far-field decay but
    not a solution near the origin. k = alpha (1-m) / (2 m N) in both.
    The residual test in the suite is what discriminates them.
    """
    _, k = _iso_rates(m, ndim)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r2 = (pts**2).sum(axis=-1)
    if variant == "quadratic":
        return (C + k * r2) ** (-1.0 / (1.0 - m))
    if variant == "printed":
        return (C + k * np.sqrt(r2)) ** (-2.0 / (1.0 - m))
    raise ValueError(f"unknown variant {variant!r}")


def barenblatt_spacetime(
    points: np.ndarray,
    t: float,
    m: float,
    ndim: int,
    C: float,
    t0: float = 0.0,
    variant: str = "quadratic",
) -> np.ndarray:
    """Self-similar space-time form (t+t0)^{-alpha} F(x (t+t0)^{-alpha/N})."""
    alpha, _ = _iso_rates(m, ndim)
    tt = t + t0
    if tt <= 0:
        raise ValueError(f"t + t0 must be positive, got {tt}")
    y = np.asarray(points, dtype=np.float64) * tt ** (-alpha / ndim)
    return tt ** (-alpha) * barenblatt_profile(y, m, ndim, C, variant)


def profile_mass(m: float, ndim: int, C: float, variant: str = "quadratic") -> float:
    """Total mass of the isotropic profile by radial quadrature."""
    _, k = _iso_rates(m, ndim)
    p = 1.0 / (1.0 - m)
    area = _SPHERE_AREA[ndim]
    s = np.linspace(0.0, 80.0, 200_001)
    if variant == "quadratic":
        # r = sqrt(C/k) s
        integrand = s ** (ndim - 1) * (1.0 + s**2) ** (-p)
        tail_expo = 2.0 * p
        pref = C ** (ndim / 2.0 - p) * k ** (-ndim / 2.0)
    elif variant == "printed":
        # r = (C/k) s
        integrand = s ** (ndim - 1) * (1.0 + s) ** (-2.0 * p)
        tail_expo = 2.0 * p
        pref = C ** (ndim - 2.0 * p) * k ** (-float(ndim))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if tail_expo <= ndim:
        raise ValueError("profile is not integrable for these parameters")
    J = float(np.trapezoid(integrand, s))
    J += 80.0 ** (ndim - tail_expo) / (tail_expo - ndim)
    return pref * area * J


def barenblatt_mass_constant(
    m: float, ndim: int, mass: float, variant: str = "quadratic", rel_tol: float = 1e-10
) -> float:
    """Invert mass -> C by monotone bisection (mass decreases in C)."""
    if mass <= 0:
        raise ValueError(f"mass must be positive, got {mass}")
    lo, hi = 1.0, 1.0
    while profile_mass(m, ndim, lo, variant) < mass:
        lo /= 16.0
        if lo < 1e-300:
            raise ValueError("failed to bracket the mass constant from below")
    while profile_mass(m, ndim, hi, variant) > mass:
        hi *= 16.0
        if hi > 1e300:
            raise ValueError("failed to bracket the mass constant from above")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if profile_mass(m, ndim, mid, variant) > mass:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

# ---------------------------------------------------------------------------
# deterministic point samples for the residual sign suites

def sample_outer_points(
    spec: UpperBarrierSpec,
    ndim: int,
    count: int,
    rng: np.random.Generator,
    s_span: tuple[float, float] = (1.0, 16.0),
    min_coord: float = 1e-3,
) -> np.ndarray:
    """Points in the outer region, log-uniform in sum_i |y_i|^{theta_i}.

    Directions come from the unit box; each draw is scaled per axis by
    lambda^{1/theta_i} so the power sum lands on the requested multiple
    of r. Coordinates below min_coord are redrawn (finite differences
    must not straddle an |y_i| kink).
    """
    lo, hi = s_span
    if not 1.0 <= lo < hi:
        raise ValueError(f"s_span must satisfy 1 <= lo < hi, got {s_span}")
    theta = np.array(spec.theta[:ndim])
    out = np.empty((count, ndim))
    filled = 0
    while filled < count:
        draw = rng.uniform(-1.0, 1.0, size=(2 * (count - filled) + 8, ndim))
        s0 = np.abs(draw) ** theta[None, :]
        s0 = s0.sum(axis=1)
        keep = s0 > 1e-12
        draw, s0 = draw[keep], s0[keep]
        target = spec.r * np.exp(
            rng.uniform(math.log(lo), math.log(hi), size=len(draw))
        )
        lam = target / s0
        pts = draw * lam[:, None] ** (1.0 / theta[None, :])
        good = np.abs(pts).min(axis=1) >= min_coord
        pts = pts[good]
        take = min(len(pts), count - filled)
        out[filled : filled + take] = pts[:take]
        filled += take
    return out


def sample_box_points(
    ndim: int,
    count: int,
    rng: np.random.Generator,
    box: float = 2.0,
    min_coord: float = 1e-3,
) -> np.ndarray:
    """Uniform points in the centered box, axes kept off the |y_i| kinks."""
    out = np.empty((count, ndim))
    filled = 0
    while filled < count:
        draw = rng.uniform(-box, box, size=(2 * (count - filled) + 8, ndim))
        good = np.abs(draw).min(axis=1) >= min_coord
        draw = draw[good]
        take = min(len(draw), count - filled)
        out[filled : filled + take] = draw[:take]
        filled += take
    return out
