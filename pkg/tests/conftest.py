"""Shared brute-force oracles and generators.

The oracles here are deliberately plain loops, independent of the library
code paths they check.
"""

import numpy as np
import pytest

from convexdesk.grids import Grid, GridFn


def brute_conjugate_1d(f: GridFn, ys: np.ndarray) -> np.ndarray:
    """sup_x <y,x> - f(x) by an explicit python loop."""
    xs = f.grid.coords(0)
    out = np.empty(ys.size)
    for k, y in enumerate(ys):
        best = -np.inf
        for j in range(xs.size):
            v = y * xs[j] - f.values[j]
            if v > best:
                best = v
        out[k] = best
    return out


def brute_infconv_1d(f: GridFn, g: GridFn) -> np.ndarray:
    """min_y f(y) + g(x - y) over displacement nodes, python loop."""
    n = f.grid.shape[0]
    i0 = f.grid.zero_index(0)
    out = np.empty(n)
    for k in range(n):
        best = np.inf
        for j in range(n):
            i = k - j + i0
            if 0 <= i < n:
                v = f.values[j] + g.values[i]
                if v < best:
                    best = v
        out[k] = best
    return out


def brute_envelope_1d(f: GridFn, lam: float) -> np.ndarray:
    """Per-node brute-force inf of f(y) + (x-y)^2/(2 lam) over nodes."""
    xs = f.grid.coords(0)
    out = np.empty(xs.size)
    for k in range(xs.size):
        out[k] = np.min(f.values + (xs[k] - xs) ** 2 / (2.0 * lam))
    return out


def random_convex_values(rng: np.random.Generator, n: int, slope_scale: float = 1.0) -> np.ndarray:
    """A random convex sequence: cumulative sums of sorted increments."""
    slopes = np.sort(rng.normal(scale=slope_scale, size=n - 1))
    return rng.normal() + np.concatenate([[0.0], np.cumsum(slopes)])


def random_convex_gridfn(
    rng: np.random.Generator, grid: Grid, slope_scale: float = 1.0
) -> GridFn:
    vals = random_convex_values(rng, grid.shape[0], slope_scale)
    return GridFn(grid, vals)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240809)
