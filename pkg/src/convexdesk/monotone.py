"""Sampled monotone operators: Fitzpatrick functions, resolvents, Yosida
approximations, and the Minty surjectivity probe.

Operators enter either as finite sampled graphs (monotonicity and
Fitzpatrick work) or as subdifferentials of convex GridFns realized
through prox (resolvent work).  Maximality is undecidable from finite
samples; the surjectivity probe is the operational surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .extreal import ExtReal
from .fenchel import conjugate_value_at
from .grids import GridFn, interp_gridfn
from .moreau import prox

__all__ = [
    "OperatorGraph",
    "FitzpatrickEval",
    "MonotonicityReport",
    "is_monotone",
    "monotonically_related",
    "fitzpatrick",
    "ResolventResult",
    "resolvent",
    "yosida",
    "surjectivity_probe",
    "SurjectivityReport",
]


@dataclass(frozen=True)
class OperatorGraph:
    """Finite sampled graph {(x, x*)} of an operator on R^d, d in {1, 2}."""

    xs: np.ndarray  # (k, d)
    xstars: np.ndarray  # (k, d)

    def __post_init__(self) -> None:
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        xst = np.atleast_2d(np.asarray(self.xstars, dtype=float))
        if xs.ndim != 2 or xs.shape != xst.shape:
            raise ParameterError("xs and xstars must be (k, d) arrays of equal shape")
        if xs.shape[0] == 0:
            raise ParameterError("operator graph must be nonempty")
        if xs.shape[1] not in (1, 2):
            raise ParameterError("operator graphs live in R^1 or R^2")
        xs = xs.copy()
        xst = xst.copy()
        xs.setflags(write=False)
        xst.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "xstars", xst)

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def size(self) -> int:
        return self.xs.shape[0]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple]) -> "OperatorGraph":
        xs = [np.atleast_1d(p[0]) for p in pairs]
        xst = [np.atleast_1d(p[1]) for p in pairs]
        return cls(np.asarray(xs, dtype=float), np.asarray(xst, dtype=float))


def _default_tol(G: OperatorGraph) -> float:
    scale = float(np.abs(G.xs).max() * np.abs(G.xstars).max()) if G.size else 0.0
    return 1e-8 * (1.0 + scale)


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    violating_pair: Optional[tuple[int, int]] = None
    min_product: float = 0.0

    def __bool__(self) -> bool:
        return self.monotone


def is_monotone(G: OperatorGraph, tol: Optional[float] = None) -> MonotonicityReport:
    """Exhaustive O(k^2) check of <x - y, x* - y*> >= -tol over stored pairs."""
    if tol is None:
        tol = _default_tol(G)
    P = G.xs @ G.xstars.T
    d = np.diag(P)
    M = d[:, None] + d[None, :] - P - P.T
    mn = float(M.min())
    if mn >= -tol:
        return MonotonicityReport(True, None, mn)
    bad = np.argwhere(M < -tol)
    i, j = min((int(a), int(b)) for a, b in bad if a != b)
    return MonotonicityReport(False, (i, j), mn)


def monotonically_related(G: OperatorGraph, candidate: tuple, tol: Optional[float] = None) -> bool:
    """True iff the candidate pair has nonnegative product against every
    stored pair (within -tol)."""
    if tol is None:
        tol = _default_tol(G)
    cx = np.atleast_1d(np.asarray(candidate[0], dtype=float))
    cs = np.atleast_1d(np.asarray(candidate[1], dtype=float))
    prods = ((G.xs - cx[None, :]) * (G.xstars - cs[None, :])).sum(axis=1)
    return bool(prods.min() >= -tol)


@dataclass(frozen=True)
class FitzpatrickEval:
    query: tuple[tuple[float, ...], tuple[float, ...]]
    value: ExtReal
    attaining_index: int


def fitzpatrick(G: OperatorGraph, query: tuple) -> FitzpatrickEval:
    """Exact sup over the stored graph of <x, a*> + <a, x*> - <a, a*>."""
    qx = np.atleast_1d(np.asarray(query[0], dtype=float))
    qs = np.atleast_1d(np.asarray(query[1], dtype=float))
    vals = G.xstars @ qx + G.xs @ qs - (G.xs * G.xstars).sum(axis=1)
    idx = int(np.argmax(vals))
    return FitzpatrickEval(
        (tuple(qx), tuple(qs)), ExtReal(float(vals[idx])), idx
    )


@dataclass(frozen=True)
class ResolventResult:
    x: tuple[float, ...]
    y: tuple[float, ...]
    certificate_eps: float  # Fenchel-Young residual of y in d_eps f(x)


def _fy_residual(f: GridFn, x: np.ndarray, y: np.ndarray) -> float:
    """f(x) + f*(y) - <x, y> with f interpolated and f* evaluated exactly
    over the nodes (the conjugate of the piecewise-linear extension)."""
    fx = float(interp_gridfn(f, x[None, :])[0])
    fy, _ = conjugate_value_at(f, y)
    return fx + fy - float(x @ y)


def resolvent(
    f: GridFn,
    lam: float,
    z,
    check_convexity: bool = True,
) -> ResolventResult:
    """J_{lam A} for A = the subdifferential of f, realized via prox.

    Returns x = prox(f, lam, z) and y = (z - x) / lam, so z = x + lam y by
    construction; the certificate is the Fenchel-Young residual of
    y in d_eps f(x).
    """
    zv = np.atleast_1d(np.asarray(z, dtype=float))
    pr = prox(f, lam, zv, check_convexity=check_convexity)
    x = np.asarray(pr.point)
    y = (zv - x) / lam
    eps = _fy_residual(f, x, y)
    return ResolventResult(tuple(x), tuple(y), float(eps))


def yosida(
    f: GridFn, lam: float, z, check_convexity: bool = True
) -> np.ndarray:
    """(z - prox(f, lam, z)) / lam; the gradient of the Moreau envelope."""
    zv = np.atleast_1d(np.asarray(z, dtype=float))
    pr = prox(f, lam, zv, check_convexity=check_convexity)
    return (zv - np.asarray(pr.point)) / lam


@dataclass(frozen=True)
class SurjectivityReport:
    targets: tuple[tuple[float, ...], ...]
    residuals: tuple[float, ...]  # certificate eps per target
    boundary_flags: tuple[bool, ...]  # solution hit the grid boundary: widen
    all_certified: bool


def surjectivity_probe(
    f: GridFn, targets: Sequence, eps_tol: float = 1e-6
) -> SurjectivityReport:
    """Solve z in x + subdiff f(x) through the resolvent for each target z
    and certify via Fenchel-Young; Minty's criterion probed on a target set."""
    tg = [np.atleast_1d(np.asarray(t, dtype=float)) for t in targets]
    residuals = []
    flags = []
    for z in tg:
        res = resolvent(f, 1.0, z, check_convexity=False)
        residuals.append(res.certificate_eps)
        x = np.asarray(res.x)
        on_edge = False
        for ax, (lo, hi, n) in enumerate(f.grid.axes):
            h = (hi - lo) / (n - 1)
            if x[ax] <= lo + 0.5 * h or x[ax] >= hi - 0.5 * h:
                on_edge = True
        flags.append(on_edge)
    ok = all(r <= eps_tol and not fl for r, fl in zip(residuals, flags))
    return SurjectivityReport(
        tuple(tuple(t) for t in tg),
        tuple(float(r) for r in residuals),
        tuple(flags),
        ok,
    )
