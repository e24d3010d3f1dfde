"""CSV writers/readers for fields, diagnostics, and contour polylines.

All numbers are written with repr-faithful %.17g formatting and fixed
column orders, so identical inputs reproduce byte-identical files. Field
files carry their grid in '#'-prefixed header lines and round-trip
exactly through read_field_csv.
"""

from __future__ import annotations

import os

import numpy as np

from .contours import ContourLine
from .grids import Field, Grid
from .solver import RunDiagnostics

__all__ = [
    "write_field_csv",
    "read_field_csv",
    "write_diagnostics_csv",
    "write_contours_csv",
]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(path: str | os.PathLike, f: Field) -> None:
    """Flat node listing (C order) with the grid described in the header."""
    g = f.grid
    lines = [
        f"# ndim = {g.ndim}",
        "# npts = " + ",".join(str(n) for n in g.npts),
        "# extent = " + ",".join(_fmt(L) for L in g.extent),
        "# spacing = " + ",".join(_fmt(h) for h in g.spacing),
        f"# time = {_fmt(f.time)}",
        ",".join(f"x{ax}" for ax in range(g.ndim)) + ",value",
    ]
    pts = g.points()
    flat = f.values.reshape(-1)
    for row, v in zip(pts, flat):
        lines.append(",".join(_fmt(c) for c in row) + "," + _fmt(v))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path: str | os.PathLike) -> Field:
    header: dict[str, str] = {}
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                header[key.strip()] = val.strip()
                continue
            if line[0].isalpha() or line.startswith("x0"):
                continue  # column header
            values.append(float(line.rsplit(",", 1)[1]))
    try:
        ndim = int(header["ndim"])
        npts = tuple(int(s) for s in header["npts"].split(","))
        extent = tuple(float(s) for s in header["extent"].split(","))
        time = float(header["time"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from exc
    if len(npts) != ndim or len(extent) != ndim:
        raise ValueError(f"{path}: inconsistent grid header")
    grid = Grid(extent, npts)
    arr = np.array(values)
    if arr.size != int(np.prod(npts)):
        raise ValueError(
            f"{path}: expected {int(np.prod(npts))} values, found {arr.size}"
        )
    return Field(grid, arr.reshape(npts), time=time)


def write_diagnostics_csv(path: str | os.PathLike, diag: RunDiagnostics) -> None:
    """One row per record; per-axis and per-p columns are expanded."""
    ndim = len(diag.energy_rate[0]) if diag.energy_rate else 0
    ps = sorted(diag.lp)
    cols = ["t", "mass", "linf", "min_interior"]
    cols += [f"l{p:g}" for p in ps]
    cols += [f"energy_rate{ax}" for ax in range(ndim)]
    cols += [f"energy_cum{ax}" for ax in range(ndim)]
    cols += ["boundary_flux_cum", "dt", "steps"]
    lines = [",".join(cols)]
    for k in range(len(diag.t)):
        row = [
            _fmt(diag.t[k]),
            _fmt(diag.mass[k]),
            _fmt(diag.linf[k]),
            _fmt(diag.min_interior[k]),
        ]
        row += [_fmt(diag.lp[p][k]) for p in ps]
        row += [_fmt(diag.energy_rate[k][ax]) for ax in range(ndim)]
        row += [_fmt(diag.energy_cum[k][ax]) for ax in range(ndim)]
        row += [_fmt(diag.boundary_flux_cum[k]), _fmt(diag.dt[k]), str(diag.steps[k])]
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_contours_csv(path: str | os.PathLike, lines_in: list[ContourLine]) -> None:
    """Long format: level, polyline id, vertex id, both coordinates, closed."""
    lines = ["level,polyline,vertex,x0,x1,closed"]
    for pid, cl in enumerate(lines_in):
        flag = "1" if cl.closed else "0"
        for vid, (a, b) in enumerate(cl.points):
            lines.append(
                ",".join((_fmt(cl.level), str(pid), str(vid), _fmt(a), _fmt(b), flag))
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
