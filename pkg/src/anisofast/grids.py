"""Uniform tensor grids and scalar fields on them.

Grids are centered boxes [-L_1, L_1] x ... x [-L_d, L_d] with per-axis
node counts. Node coordinates are built as (j - (n-1)/2) * h so that the
coordinate of node j is the exact negation of node n-1-j; several
symmetry checks rely on that being bitwise true.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

__all__ = ["Grid", "Field", "as_tuple"]


def as_tuple(value, ndim: int, name: str = "value") -> tuple[float, ...]:
    """Broadcast a scalar or length-ndim sequence to a float tuple."""
    if np.isscalar(value):
        return (float(value),) * ndim
    out = tuple(float(v) for v in value)
    if len(out) != ndim:
        raise ValueError(f"{name} must be scalar or length {ndim}, got {len(out)}")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform centered grid with spacing h_i = 2 L_i / (n_i - 1)."""

    extent: tuple[float, ...]
    npts: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.extent) <= 3:
            raise ValueError(f"supported dimensions are 1..3, got {len(self.extent)}")
        if len(self.npts) != len(self.extent):
            raise ValueError("extent and npts must have the same length")
        if any(n < 3 for n in self.npts):
            raise ValueError(f"need at least 3 points per axis, got {self.npts}")
        if any(L <= 0 for L in self.extent):
            raise ValueError(f"extents must be positive, got {self.extent}")

    @classmethod
    def make(cls, extent, npts, ndim: int | None = None) -> "Grid":
        if ndim is None:
            ndim = len(extent) if not np.isscalar(extent) else len(npts) if not np.isscalar(npts) else 1
        ext = as_tuple(extent, ndim, "extent")
        if np.isscalar(npts):
            pts = (int(npts),) * ndim
        else:
            pts = tuple(int(n) for n in npts)
        return cls(ext, pts)

    @property
    def ndim(self) -> int:
        return len(self.extent)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / (n - 1) for L, n in zip(self.extent, self.npts))

    @property
    def cell_volume(self) -> float:
        out = 1.0
        for h in self.spacing:
            out *= h
        return out

    def axis_coords(self, axis: int) -> np.ndarray:
        n = self.npts[axis]
        h = self.spacing[axis]
        center = (n - 1) / 2.0
        return (np.arange(n, dtype=np.float64) - center) * h

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis_coords(ax) for ax in range(self.ndim))

    def face_coords(self, axis: int) -> np.ndarray:
        """Midpoints between adjacent nodes; antisymmetric by construction."""
        x = self.axis_coords(axis)
        return 0.5 * (x[:-1] + x[1:])

    def meshgrid(self) -> list[np.ndarray]:
        return np.meshgrid(*self.coords(), indexing="ij")

    def points(self) -> np.ndarray:
        """All node coordinates, shape (prod(npts), ndim)."""
        mesh = self.meshgrid()
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def center_index(self) -> tuple[int, ...]:
        return tuple(n // 2 for n in self.npts)

    def scaled(self, factors) -> "Grid":
        f = as_tuple(factors, self.ndim, "factors")
        return Grid(tuple(L * s for L, s in zip(self.extent, f)), self.npts)


@dataclass
class Field:
    """Scalar field sampled on a grid, tagged with a time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.npts:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.npts}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.time)

    def mass(self) -> float:
        # lattice sum; telescopes exactly against the conservative update
        return float(self.values.sum() * self.grid.cell_volume)

    def norm_inf(self) -> float:
        return float(np.abs(self.values).max())

    def norm_p(self, p: float) -> float:
        if p == np.inf:
            return self.norm_inf()
        if p <= 0:
            raise ValueError(f"p must be positive, got {p}")
        return float((np.abs(self.values) ** p).sum() * self.grid.cell_volume) ** (1.0 / p)

    def interpolator(self, fill_value: float = 0.0):
        """Multilinear interpolator with constant fill outside the box."""
        return RegularGridInterpolator(
            self.grid.coords(),
            self.values,
            method="linear",
            bounds_error=False,
            fill_value=fill_value,
        )

    def sample(self, points: np.ndarray) -> np.ndarray:
        return self.interpolator()(points)


# reflection and monotonicity helpers used by symmetry checks


def reflect(values: np.ndarray, axis: int) -> np.ndarray:
    return np.flip(values, axis=axis)


def symmetry_error(values: np.ndarray) -> float:
    """Max absolute deviation from reflection symmetry over all axes."""
    err = 0.0
    for ax in range(values.ndim):
        err = max(err, float(np.abs(values - reflect(values, ax)).max()))
    return err
