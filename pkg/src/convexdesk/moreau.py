"""Proximal mappings, Moreau envelopes, Moreau decomposition, projections.

Prox points come from a discrete argmin plus one guarded quadratic
refinement: the parabola through the three bracketing samples proposes a
vertex, the objective is re-evaluated there through interpolation, and
the better of node and vertex wins.  Interpolation over-estimates convex
data, so the refinement can only improve on the node value and never
drops below the true envelope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridMismatchError, NonconvexError, ParameterError, WidenGridError
from .fenchel import conjugate, default_dual_grid, inf_convolution
from .grids import Grid, GridFn, discrete_convexity_check, interp_gridfn, require_proper

__all__ = [
    "ProxResult",
    "prox",
    "moreau_envelope",
    "moreau_decomposition_residual",
    "project",
    "distance_via_infconv_check",
]


@dataclass(frozen=True)
class ProxResult:
    point: tuple[float, ...]
    envelope: float
    lam: float


def _quad_penalty(grid: Grid, x: np.ndarray, lam: float) -> np.ndarray:
    nodes = grid.nodes()
    return ((nodes - x[None, :]) ** 2).sum(axis=1).reshape(grid.shape) / (2.0 * lam)


def _check_prox_inputs(
    f: GridFn, lam: float, x, check_convexity: bool, convexity_tol: float
) -> np.ndarray:
    require_proper(f, "prox input")
    if lam <= 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.size != f.grid.dim:
        raise GridMismatchError("query dimension does not match the grid")
    if not f.grid.contains(xv):
        raise GridMismatchError(f"query {tuple(xv)} is outside the grid box")
    if check_convexity:
        rep = discrete_convexity_check(f, tol=convexity_tol)
        if not rep:
            raise NonconvexError(
                f"prox requires convex f; violation at {rep.violation_index}"
            )
    return xv


def _refine_1d(
    coords: np.ndarray, obj: np.ndarray, f: GridFn, fixed: Optional[tuple], axis: int,
    i: int, x: np.ndarray, lam: float, best_val: float,
):
    """Guarded quadratic refinement along one axis around node i.

    `obj` holds the sampled objective (same shape as f); `fixed` is the
    full argmin index in 2-D, None in 1-D.  Returns (point, value) only
    when the re-evaluated vertex beats best_val.
    """
    n = coords.size
    if not 0 < i < n - 1:
        return None
    if fixed is None:
        pm, p0, pp = obj[i - 1], obj[i], obj[i + 1]
    elif axis == 0:
        pm, p0, pp = obj[i - 1, fixed[1]], obj[i, fixed[1]], obj[i + 1, fixed[1]]
    else:
        pm, p0, pp = obj[fixed[0], i - 1], obj[fixed[0], i], obj[fixed[0], i + 1]
    if not (np.isfinite(pm) and np.isfinite(p0) and np.isfinite(pp)):
        return None
    denom = pm - 2.0 * p0 + pp
    if denom <= 0:
        return None
    h = coords[1] - coords[0]
    delta = float(np.clip(0.5 * (pm - pp) / denom * h, -h, h))
    if fixed is None:
        cand = np.array([coords[i] + delta])
    else:
        cand = np.asarray(
            [coords[i] + delta if ax == axis else f.grid.coords(ax)[fixed[ax]]
             for ax in range(2)]
        )
    fc = float(interp_gridfn(f, cand[None, :])[0])
    if not np.isfinite(fc):
        return None
    val = fc + float(((x - cand) ** 2).sum()) / (2.0 * lam)
    if val < best_val:
        return cand, val
    return None


def prox(
    f: GridFn, lam: float, x, check_convexity: bool = True, convexity_tol: float = 1e-9
) -> ProxResult:
    """argmin of f(y) + ||x - y||^2 / (2 lam) over the grid, refined.

    Ties in the discrete argmin break to the smallest index; convexity
    makes them adjacent.
    """
    xv = _check_prox_inputs(f, lam, x, check_convexity, convexity_tol)
    obj = f.values + _quad_penalty(f.grid, xv, lam)
    flat = int(np.argmin(obj))
    idx = np.unravel_index(flat, obj.shape)
    best_val = float(obj[idx])
    best_pt = np.asarray([f.grid.coords(ax)[i] for ax, i in enumerate(idx)])

    if f.grid.dim == 1:
        hit = _refine_1d(f.grid.coords(0), obj, f, None, 0, idx[0], xv, lam, best_val)
        if hit is not None:
            best_pt, best_val = hit
    else:
        for ax in range(2):
            hit = _refine_1d(
                f.grid.coords(ax), obj, f, idx, ax, idx[ax], xv, lam, best_val
            )
            if hit is not None:
                best_pt, best_val = hit
    return ProxResult(tuple(float(v) for v in best_pt), best_val, float(lam))


def moreau_envelope(
    f: GridFn, lam: float, check_convexity: bool = True, convexity_tol: float = 1e-9
) -> GridFn:
    """Envelope values at every node; finite everywhere and <= f.

    1-D refines each node's argmin like prox; 2-D uses the exact two-pass
    separable minimization of the quadratic kernel.
    """
    require_proper(f, "envelope input")
    if lam <= 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    if check_convexity:
        rep = discrete_convexity_check(f, tol=convexity_tol)
        if not rep:
            raise NonconvexError(
                f"moreau_envelope requires convex f; violation at {rep.violation_index}"
            )
    if f.grid.dim == 1:
        xs = f.grid.coords(0)
        n = xs.size
        obj = f.values[None, :] + (xs[:, None] - xs[None, :]) ** 2 / (2.0 * lam)
        args = np.argmin(obj, axis=1)
        vals = obj[np.arange(n), args]
        for k in range(n):
            hit = _refine_1d(xs, obj[k], f, None, 0, int(args[k]), xs[k : k + 1], lam, vals[k])
            if hit is not None:
                vals[k] = hit[1]
        return GridFn(f.grid, vals)
    # two passes: the quadratic kernel separates over the axes
    xs0, xs1 = f.grid.coords(0), f.grid.coords(1)
    pen1 = (xs1[:, None] - xs1[None, :]) ** 2 / (2.0 * lam)
    inner = np.empty_like(f.values)
    for i in range(xs0.size):
        inner[i] = np.min(f.values[i][None, :] + pen1, axis=1)
    pen0 = (xs0[:, None] - xs0[None, :]) ** 2 / (2.0 * lam)
    out = np.empty_like(inner)
    for j in range(xs1.size):
        out[:, j] = np.min(inner[:, j][None, :] + pen0, axis=1)
    return GridFn(f.grid, out)


def moreau_decomposition_residual(
    f: GridFn, x, dual_grid: Optional[Grid] = None, check_convexity: bool = True
) -> float:
    """|| x - prox_f(x) - prox_{f*}(x) || at lambda = 1."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if dual_grid is None:
        dual_grid = default_dual_grid(f, pad=1.0 + float(np.abs(xv).max()))
    if not dual_grid.contains(xv):
        raise WidenGridError("dual grid does not contain the query point; widen it")
    a = np.asarray(prox(f, 1.0, xv, check_convexity=check_convexity).point)
    fstar = conjugate(f, dual_grid).dual
    b = np.asarray(prox(fstar, 1.0, xv, check_convexity=False).point)
    for ax, (lo, hi, n) in enumerate(dual_grid.axes):
        h = (hi - lo) / (n - 1)
        if b[ax] <= lo + 0.5 * h or b[ax] >= hi - 0.5 * h:
            raise WidenGridError(
                f"prox of f* landed on the dual grid boundary at axis {ax}; widen the dual grid"
            )
    return float(np.linalg.norm(xv - a - b))


def project(box, x) -> np.ndarray:
    """Componentwise clamp onto a nonempty interval or box.

    `box` is (a, b) in 1-D or a sequence of per-axis (a, b) pairs.
    """
    b = np.atleast_2d(np.asarray(box, dtype=float))
    if b.shape[1] != 2:
        raise ParameterError("box must be (a, b) pairs")
    if np.any(b[:, 0] > b[:, 1]):
        raise ParameterError("empty box: needs a <= b per axis")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.size != b.shape[0]:
        raise GridMismatchError("point dimension does not match the box")
    return np.clip(xv, b[:, 0], b[:, 1])


def distance_via_infconv_check(C: tuple[float, float], grid: Grid) -> float:
    """Max |(|.| box i_C) - d_C| over grid nodes: the distance function is
    the inf-convolution of the norm with the indicator."""
    from .atoms import FnAtom, sample

    a, b = float(C[0]), float(C[1])
    lo, hi, _ = grid.axes[0]
    if not (lo <= a <= b <= hi):
        raise ParameterError("C must sit inside the grid box")
    conv = inf_convolution(sample(FnAtom("abs"), grid), sample(FnAtom("indicator", (a, b)), grid))
    direct = sample(FnAtom("distance", (a, b)), grid)
    return float(np.max(np.abs(conv.out.values - direct.values)))
