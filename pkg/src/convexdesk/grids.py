"""Uniform grids and extended-real-valued grid functions.

A GridFn holding values of f on a grid box represents the truncated
function f + indicator(box): every transform in the toolkit operates on
that finite object, and +inf marks points outside the effective domain.
All types are immutable after construction; operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyDomainError, GridMismatchError, ImproperFunctionError, ParameterError

__all__ = [
    "Grid",
    "GridFn",
    "ConvexityReport",
    "discrete_convexity_check",
    "interp_gridfn",
    "require_proper",
    "MAX_NODES",
]

MAX_NODES = 4_000_000  # desk-scale cap on total node count


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D or 2-D grid; each axis is (lo, hi, count)."""

    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self) -> None:
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in self.axes)
        object.__setattr__(self, "axes", axes)
        if len(axes) not in (1, 2):
            raise ParameterError(f"grid dimension must be 1 or 2, got {len(axes)}")
        total = 1
        for lo, hi, n in axes:
            if n < 2:
                raise ParameterError(f"axis needs at least 2 points, got {n}")
            if not hi > lo:
                raise ParameterError(f"axis needs hi > lo, got [{lo}, {hi}]")
            total *= n
        if total > MAX_NODES:
            raise ParameterError(f"grid has {total} nodes, cap is {MAX_NODES}")

    @classmethod
    def line(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(((lo, hi, n),))

    @classmethod
    def box(cls, ax0: tuple[float, float, int], ax1: tuple[float, float, int]) -> "Grid":
        return cls((tuple(ax0), tuple(ax1)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n for _, _, n in self.axes)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for lo, hi, n in self.axes)

    def coords(self, axis: int = 0) -> np.ndarray:
        lo, hi, n = self.axes[axis]
        return np.linspace(lo, hi, n)

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (node_count, dim), row-major order."""
        if self.dim == 1:
            return self.coords(0)[:, None]
        x0, x1 = np.meshgrid(self.coords(0), self.coords(1), indexing="ij")
        return np.column_stack([x0.ravel(), x1.ravel()])

    def contains(self, point: Sequence[float]) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.size != self.dim:
            raise GridMismatchError(f"point has dim {p.size}, grid has dim {self.dim}")
        return all(lo <= v <= hi for v, (lo, hi, _) in zip(p, self.axes))

    def nearest_index(self, point: Sequence[float]) -> tuple[int, ...]:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        idx = []
        for v, (lo, hi, n) in zip(p, self.axes):
            h = (hi - lo) / (n - 1)
            idx.append(int(np.clip(round((v - lo) / h), 0, n - 1)))
        return tuple(idx)

    def zero_index(self, axis: int = 0) -> int:
        """Index of the node at 0 on an axis; the grid must contain one."""
        lo, hi, n = self.axes[axis]
        h = (hi - lo) / (n - 1)
        i = int(round(-lo / h))
        if not (0 <= i < n) or abs(lo + i * h) > 1e-9 * max(1.0, abs(lo), h):
            raise GridMismatchError("grid axis does not contain 0 as a node")
        return i


@dataclass(frozen=True)
class GridFn:
    """Extended-real values sampled on a grid, +inf outside its box."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if np.any(np.isnan(v)):
            raise ValueError("GridFn values cannot contain NaN")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def is_proper(self) -> bool:
        v = self.values
        return bool(np.any(np.isfinite(v)) and not np.any(v == -np.inf))

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


def require_proper(f: GridFn, what: str = "input") -> None:
    if not f.is_proper:
        raise ImproperFunctionError(f"{what} must be proper (some finite value, no -inf)")


@dataclass(frozen=True)
class ConvexityReport:
    is_convex: bool
    violation_index: Optional[tuple[int, ...]] = None
    violation_kind: Optional[str] = None  # "second-difference" | "domain-gap"
    direction: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.is_convex


def _line_violation(vals: np.ndarray, tol: float, step: int = 1):
    """First convexity violation on one grid line, or None.

    Checks that finite entries form a contiguous block and that second
    differences v[i-s] - 2 v[i] + v[i+s] are >= -tol.
    """
    finite = np.isfinite(vals)
    if finite.any():
        idx = np.flatnonzero(finite)
        lo, hi = idx[0], idx[-1]
        if hi - lo + 1 != idx.size:
            gap = lo + int(np.flatnonzero(~finite[lo : hi + 1])[0])
            return gap, "domain-gap"
    n = vals.size
    if n < 2 * step + 1:
        return None
    a, b, c = vals[: n - 2 * step], vals[step : n - step], vals[2 * step :]
    trip = np.isfinite(a) & np.isfinite(b) & np.isfinite(c)
    with np.errstate(invalid="ignore", over="ignore"):
        second = np.where(trip, a - 2.0 * b + c, 0.0)
    bad = np.flatnonzero(trip & (second < -tol))
    if bad.size:
        return int(bad[0]) + step, "second-difference"
    # A finite midpoint with an infinite endpoint on each side can only
    # happen at the block edges and is fine; but an infinite midpoint with
    # finite endpoints is a domain gap already caught above.
    return None


def discrete_convexity_check(f: GridFn, tol: float = 1e-9) -> ConvexityReport:
    """Second-difference convexity test on the grid.

    In 2-D, lines in the axis and diagonal directions are checked, plus
    midpoint checks along the (1,2)-type directions.  The tolerance is
    relative to max(1, |finite values|).
    """
    v = f.values
    finite = np.isfinite(v)
    if not finite.any():
        raise EmptyDomainError("all values are infinite")
    scale = max(1.0, float(np.max(np.abs(v[finite]))))
    t = tol * scale

    if f.grid.dim == 1:
        hit = _line_violation(v, t)
        if hit is not None:
            return ConvexityReport(False, (hit[0],), hit[1], (1,))
        return ConvexityReport(True)

    n0, n1 = v.shape
    # axis directions
    for i in range(n0):
        hit = _line_violation(v[i], t)
        if hit is not None:
            return ConvexityReport(False, (i, hit[0]), hit[1], (0, 1))
    for j in range(n1):
        hit = _line_violation(v[:, j], t)
        if hit is not None:
            return ConvexityReport(False, (hit[0], j), hit[1], (1, 0))
    # diagonal directions
    for off in range(-(n0 - 1), n1):
        d = np.diagonal(v, offset=off)
        hit = _line_violation(np.ascontiguousarray(d), t)
        if hit is not None:
            k = hit[0]
            ij = (k - min(off, 0), k + max(off, 0))
            return ConvexityReport(False, ij, hit[1], (1, 1))
        a = np.ascontiguousarray(np.fliplr(v).diagonal(offset=off))
        hit = _line_violation(a, t)
        if hit is not None:
            k = hit[0]
            ij = (k - min(off, 0), n1 - 1 - (k + max(off, 0)))
            return ConvexityReport(False, ij, hit[1], (1, -1))
    # midpoint checks along knight-like directions (pairs 2*d apart)
    for d0, d1 in ((1, 2), (2, 1), (1, -2), (2, -1)):
        for i in range(n0 - 2 * d0):
            j_lo = max(0, -2 * d1)
            j_hi = n1 - max(0, 2 * d1)
            if j_hi <= j_lo:
                continue
            js = np.arange(j_lo, j_hi)
            va = v[i, js]
            vb = v[i + 2 * d0, js + 2 * d1]
            vm = v[i + d0, js + d1]
            trip = np.isfinite(va) & np.isfinite(vb) & np.isfinite(vm)
            with np.errstate(invalid="ignore", over="ignore"):
                gap = np.where(trip, va + vb - 2.0 * vm, 0.0)
            bad = np.flatnonzero(trip & (gap < -t))
            if bad.size:
                j = int(js[bad[0]])
                return ConvexityReport(False, (i + d0, j + d1), "second-difference", (d0, d1))
    return ConvexityReport(True)


def interp_gridfn(f: GridFn, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation; +inf outside the box or next to +inf nodes.

    Chords of convex data lie above the graph, so interpolation never
    underestimates a convex GridFn.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != f.grid.dim:
        raise GridMismatchError("points dimension does not match grid")
    out = np.full(pts.shape[0], np.inf)
    v = f.values
    idx = []
    frac = []
    inside = np.ones(pts.shape[0], dtype=bool)
    for ax, (lo, hi, n) in enumerate(f.grid.axes):
        h = (hi - lo) / (n - 1)
        x = pts[:, ax]
        inside &= (x >= lo - 1e-12 * max(1.0, abs(lo))) & (x <= hi + 1e-12 * max(1.0, abs(hi)))
        t = np.clip((x - lo) / h, 0.0, n - 1)
        i = np.minimum(t.astype(int), n - 2)
        idx.append(i)
        frac.append(t - i)
    with np.errstate(invalid="ignore", over="ignore"):
        if f.grid.dim == 1:
            i = idx[0]
            w = frac[0]
            vals = (1 - w) * v[i] + w * v[i + 1]
            corner_inf = np.isinf(v[i]) | np.isinf(v[i + 1])
            # exact node hits next to an infinite neighbour are still finite
            on_node = w == 0.0
            vals = np.where(corner_inf & on_node, v[i], vals)
            vals = np.where(corner_inf & ~on_node, np.inf, vals)
        else:
            i0, i1 = idx
            w0, w1 = frac
            c00, c01 = v[i0, i1], v[i0, i1 + 1]
            c10, c11 = v[i0 + 1, i1], v[i0 + 1, i1 + 1]
            vals = (
                (1 - w0) * (1 - w1) * c00
                + (1 - w0) * w1 * c01
                + w0 * (1 - w1) * c10
                + w0 * w1 * c11
            )
            corner_inf = np.isinf(c00) | np.isinf(c01) | np.isinf(c10) | np.isinf(c11)
            on_node = (w0 == 0.0) & (w1 == 0.0)
            vals = np.where(corner_inf & on_node, v[i0, i1], vals)
            vals = np.where(corner_inf & ~on_node, np.inf, vals)
        vals = np.where(np.isnan(vals), np.inf, vals)
    out[inside] = vals[inside]
    return out
