"""Level-line extraction for 2D fields (marching squares).

Cells are scanned in row-major order and each crossing point is keyed by
the unique grid edge it lies on, so shared endpoints match exactly and
stitching segments into polylines needs no floating-point tolerance.
Saddle cells are disambiguated by the cell-center average. Output order
is deterministic: open chains first, then closed loops, both in first-
appearance order of their starting edge.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grids import Field

__all__ = ["ContourLine", "contour_lines", "export_levels"]


@dataclass(frozen=True)
class ContourLine:
    level: float
    points: np.ndarray  # (k, 2) coordinates along (axis 0, axis 1)
    closed: bool

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must have shape (k, 2)")


# segment endpoints per case index (b00 | b10<<1 | b11<<2 | b01<<3),
# values are pairs of cell-edge names; saddles handled separately
_CASES: dict[int, tuple[tuple[str, str], ...]] = {
    0: (),
    1: (("left", "bottom"),),
    2: (("bottom", "right"),),
    3: (("left", "right"),),
    4: (("right", "top"),),
    6: (("bottom", "top"),),
    7: (("left", "top"),),
    8: (("left", "top"),),
    9: (("bottom", "top"),),
    11: (("right", "top"),),
    12: (("left", "right"),),
    13: (("bottom", "right"),),
    14: (("left", "bottom"),),
    15: (),
}


def _cell_segments(case: int, center_inside: bool) -> tuple[tuple[str, str], ...]:
    if case == 5:  # c00 and c11 inside
        if center_inside:
            return (("left", "top"), ("bottom", "right"))
        return (("left", "bottom"), ("right", "top"))
    if case == 10:  # c10 and c01 inside
        if center_inside:
            return (("left", "bottom"), ("right", "top"))
        return (("left", "top"), ("bottom", "right"))
    return _CASES[case]


def contour_lines(f: Field, level: float) -> list[ContourLine]:
    """All polylines of one level set; empty (with a warning) off-range."""
    g = f.grid
    if g.ndim != 2:
        raise ValueError(f"contours need a 2D field, got ndim = {g.ndim}")
    vals = f.values
    vmin, vmax = float(vals.min()), float(vals.max())
    if not vmin <= level <= vmax:
        warnings.warn(
            f"level {level} outside the field range [{vmin}, {vmax}]",
            stacklevel=2,
        )
        return []
    x0 = g.axis_coords(0)
    x1 = g.axis_coords(1)
    n0, n1 = g.npts
    inside = vals >= level

    # crossing point cache, keyed by the grid edge
    points: dict[tuple, tuple[float, float]] = {}

    def edge_point(key: tuple) -> tuple:
        if key not in points:
            orient, i, j = key
            if orient == 0:  # between (i, j) and (i+1, j)
                va, vb = vals[i, j], vals[i + 1, j]
                t = (level - va) / (vb - va)
                points[key] = (x0[i] + t * (x0[i + 1] - x0[i]), x1[j])
            else:  # between (i, j) and (i, j+1)
                va, vb = vals[i, j], vals[i, j + 1]
                t = (level - va) / (vb - va)
                points[key] = (x0[i], x1[j] + t * (x1[j + 1] - x1[j]))
        return key

    # adjacency between crossed edges, in cell-scan order
    nbrs: dict[tuple, list[tuple]] = {}
    seg_seen: set[frozenset] = set()

    def add_segment(a: tuple, b: tuple) -> None:
        edge_point(a)
        edge_point(b)
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)

    for i in range(n0 - 1):
        for j in range(n1 - 1):
            case = (
                int(inside[i, j])
                | int(inside[i + 1, j]) << 1
                | int(inside[i + 1, j + 1]) << 2
                | int(inside[i, j + 1]) << 3
            )
            if case in (0, 15):
                continue
            if case in (5, 10):
                center = 0.25 * (
                    vals[i, j] + vals[i + 1, j] + vals[i, j + 1] + vals[i + 1, j + 1]
                )
                segs = _cell_segments(case, center >= level)
            else:
                segs = _cell_segments(case, False)
            names = {
                "bottom": (0, i, j),
                "top": (0, i, j + 1),
                "left": (1, i, j),
                "right": (1, i + 1, j),
            }
            for a, b in segs:
                add_segment(names[a], names[b])

    def walk(start: tuple) -> tuple[list[tuple], bool]:
        path = [start]
        cur = start
        while True:
            step = None
            for nxt in nbrs[cur]:
                if frozenset((cur, nxt)) not in seg_seen:
                    step = nxt
                    break
            if step is None:
                return path, False
            seg_seen.add(frozenset((cur, step)))
            path.append(step)
            cur = step
            if cur == start:
                return path, True

    lines: list[ContourLine] = []
    # open chains start at odd-degree edges
    for key in nbrs:
        if len(nbrs[key]) % 2 == 1 and any(
            frozenset((key, o)) not in seg_seen for o in nbrs[key]
        ):
            path, closed = walk(key)
            pts = np.array([points[k] for k in path])
            lines.append(ContourLine(level=level, points=pts, closed=closed))
    # what remains are closed loops
    for key in nbrs:
        if any(frozenset((key, o)) not in seg_seen for o in nbrs[key]):
            path, closed = walk(key)
            pts = np.array([points[k] for k in path])
            lines.append(ContourLine(level=level, points=pts, closed=closed))
    return lines


def export_levels(f: Field, levels) -> list[ContourLine]:
    """Contours for several levels, flattened in the given level order."""
    out: list[ContourLine] = []
    for level in levels:
        out.extend(contour_lines(f, float(level)))
    return out
