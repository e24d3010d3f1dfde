"""Anisotropic fast diffusion: simulation and verification suite.

Evolves u_t = sum_i (u^{m_i})_{x_i x_i} (all 0 < m_i <= 1, supercritical
mean) on truncated boxes, computes the self-similar exponents and the
closed-form barrier profiles, relaxes the confined rescaling to the
fundamental profile, and exposes every provable property of the flow as
an executable check.
"""

from ._accel import USING_NUMBA
from .exponents import (
    ExponentSet,
    ModelParams,
    ScalingFamily,
    compute_exponents,
    scaling_family,
    transform_scaling,
    validate_params,
)
from .grids import Field, Grid
from .solver import (
    RunDiagnostics,
    SolverConfig,
    SolverError,
    Trajectory,
    energy_check,
    init_data,
    normalize_mass,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "USING_NUMBA",
    "ModelParams",
    "ExponentSet",
    "ScalingFamily",
    "compute_exponents",
    "scaling_family",
    "transform_scaling",
    "validate_params",
    "Grid",
    "Field",
    "SolverConfig",
    "SolverError",
    "RunDiagnostics",
    "Trajectory",
    "init_data",
    "normalize_mass",
    "run",
    "step",
    "energy_check",
]
