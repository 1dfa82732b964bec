"""Special-function identities: Gamma limits, ball volumes, and the
coupon-collector objective in its three equivalent forms.

Exact rational arithmetic (fractions.Fraction) is supported by the
permutation and inclusion-exclusion forms so the identity between them
can be tested exactly; the integral form uses adaptive quadrature after
the substitution t = exp(-s), which removes the t -> 0 endpoint from the
picture (the integrand extends continuously by 0 there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import AccuracyError, ParameterError

__all__ = [
    "lambert_w",
    "gamma_limit",
    "ball_volume",
    "beta_direct",
    "log_concavity_check",
    "LogConcavityResult",
    "coupon_pn_perm",
    "coupon_pn_ie",
    "coupon_pn_integral",
    "coupon_convexity_probe",
    "ConvexityProbeReport",
    "MAX_PERM_N",
    "MAX_IE_N",
]

MAX_PERM_N = 8  # N! growth
MAX_IE_N = 24  # 2^N subsets


def lambert_w(y: float, tol: float = 1e-12, max_iter: int = 100) -> float:
    """Principal branch of w e^w = y for y > 0, by Newton iteration.

    Iterates until |w e^w - y| <= tol * max(1, y).
    """
    y = float(y)
    if y <= 0.0:
        raise ParameterError("lambert_w requires y > 0")
    w = math.log1p(y) if y < math.e else math.log(y) - math.log(math.log(y))
    target = tol * max(1.0, y)
    for _ in range(max_iter):
        ew = math.exp(w)
        resid = w * ew - y
        if abs(resid) <= target:
            return w
        w -= resid / (ew * (w + 1.0))
    raise AccuracyError(f"lambert_w did not converge for y={y}")


def gamma_limit(x: float, n: int) -> float:
    """n-th partial product of the Gamma limit n! n^x / (x (x+1) ... (x+n)).

    Computed in log space; increases monotonically to Gamma(x) as n grows.
    """
    x = float(x)
    if x <= 0.0:
        raise ParameterError("gamma_limit requires x > 0")
    n = int(n)
    if n < 1:
        raise ParameterError("gamma_limit requires n >= 1")
    ks = np.arange(0, n + 1, dtype=float)
    log_val = math.lgamma(n + 1) + x * math.log(n) - float(np.log(x + ks).sum())
    return math.exp(log_val)


def ball_volume(n: int, p: float) -> float:
    """Volume of the unit p-norm ball in R^n: 2^n Gamma(1+1/p)^n / Gamma(1+n/p)."""
    n = int(n)
    if n < 1:
        raise ParameterError("ball_volume requires n >= 1")
    if p == math.inf:
        return 2.0 ** n
    p = float(p)
    if p < 1.0:
        raise ParameterError("ball_volume requires p >= 1 (or inf)")
    return math.exp(n * math.log(2.0) + n * math.lgamma(1.0 + 1.0 / p) - math.lgamma(1.0 + n / p))


def _v_alpha(alpha: float, p: float) -> float:
    return math.exp(
        alpha * math.log(2.0) + alpha * math.lgamma(1.0 + 1.0 / p) - math.lgamma(1.0 + alpha / p)
    )


def beta_direct(x: float, y: float) -> float:
    """Beta function by direct quadrature of its defining integral."""
    if x <= 0 or y <= 0:
        raise ParameterError("beta requires x, y > 0")
    val, err = quad(lambda t: t ** (x - 1.0) * (1.0 - t) ** (y - 1.0), 0.0, 1.0, limit=200)
    if err > 1e-9 * max(1.0, abs(val)):
        raise AccuracyError(f"beta quadrature error {err} too large")
    return val


@dataclass(frozen=True)
class LogConcavityResult:
    lhs: float
    rhs: float
    holds: bool
    degenerate: bool  # p == q, equality case


def log_concavity_check(alpha: float, p: float, q: float, lam: float) -> LogConcavityResult:
    """Harmonic-arithmetic log-concavity of the p-ball volume in 1/p.

    Compares V(p)^lam V(q)^(1-lam) against V evaluated at the harmonic
    interpolation of p and q; strict inequality for p != q.
    """
    if alpha <= 1.0:
        raise ParameterError("requires alpha > 1")
    if p <= 1.0 or q <= 1.0:
        raise ParameterError("requires p, q > 1")
    if not 0.0 < lam < 1.0:
        raise ParameterError("requires lambda in (0, 1)")
    r = 1.0 / (lam / p + (1.0 - lam) / q)
    lhs = _v_alpha(alpha, p) ** lam * _v_alpha(alpha, q) ** (1.0 - lam)
    rhs = _v_alpha(alpha, r)
    if p == q:
        return LogConcavityResult(lhs, rhs, holds=False, degenerate=True)
    return LogConcavityResult(lhs, rhs, holds=bool(lhs < rhs), degenerate=False)


def _check_coupon_input(x: Sequence, max_n: int) -> tuple:
    xs = tuple(x)
    if not 1 <= len(xs) <= max_n:
        raise ParameterError(f"need 1 <= N <= {max_n}, got N={len(xs)}")
    for v in xs:
        if v <= 0:
            raise ParameterError("all components must be strictly positive")
    return xs


def coupon_pn_perm(x: Sequence):
    """Permutation form of p_N: for each ordering, the product of tail
    ratios times the sum of tail reciprocals, summed over all N! orderings.

    Exact when given Fractions; N <= 8.
    """
    xs = _check_coupon_input(x, MAX_PERM_N)
    zero = xs[0] - xs[0]  # additive identity of the input type
    total = zero
    for sigma in permutations(xs):
        tails = []
        acc = zero
        for v in reversed(sigma):
            acc = acc + v
            tails.append(acc)
        tails.reverse()
        prod = None
        recip = zero
        for v, t in zip(sigma, tails):
            term = v / t
            prod = term if prod is None else prod * term
            recip = recip + 1 / t if isinstance(t, Fraction) else recip + 1.0 / t
        total = total + prod * recip
    return total


def coupon_pn_ie(x: Sequence):
    """Inclusion-exclusion form: sum over nonempty subsets S of
    (-1)^(|S|+1) / sum(x_i, i in S).  Exact for Fractions; N <= 24."""
    xs = _check_coupon_input(x, MAX_IE_N)
    n = len(xs)
    total = xs[0] - xs[0]
    for k in range(1, n + 1):
        sign = 1 if k % 2 == 1 else -1
        for subset in combinations(xs, k):
            s = sum(subset)
            total = total + (sign / s if isinstance(s, Fraction) else sign / float(s))
    return total


def coupon_pn_integral(x: Sequence[float]) -> float:
    """Integral form of p_N, evaluated after substituting t = exp(-s):
    integral over s in (0, inf) of 1 - prod(1 - exp(-s x_i))."""
    xs = _check_coupon_input(x, MAX_IE_N)
    arr = np.asarray(xs, dtype=float)
    s_max = 50.0 / float(arr.min())

    def integrand(s: float) -> float:
        return 1.0 - np.prod(-np.expm1(-s * arr))

    val, err = quad(integrand, 0.0, s_max, limit=400, epsabs=1e-12, epsrel=1e-12)
    if err > 1e-9 * max(1.0, abs(val)):
        raise AccuracyError(f"coupon integral quadrature error {err} too large")
    return float(val)


def _fd_hessian(fn, x: np.ndarray) -> np.ndarray:
    """Central-difference Hessian with per-coordinate step 1e-4 (1 + |x_i|)."""
    n = x.size
    h = 1e-4 * (1.0 + np.abs(x))
    H = np.empty((n, n))
    f0 = fn(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (fn(x + ei) - 2.0 * f0 + fn(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


@dataclass(frozen=True)
class ConvexityProbeReport:
    n: int
    trials: int
    seed: int
    min_hessian_eig: float
    min_eig_point: tuple[float, ...]
    max_inv_hessian_eig: float
    max_inv_eig_point: tuple[float, ...]
    # optional log-convexity probe (no acceptance threshold attached)
    min_log_hessian_eig: float = field(default=float("nan"))


def coupon_convexity_probe(n: int, trials: int, seed: int) -> ConvexityProbeReport:
    """Sample finite-difference Hessians of p_N (convexity), 1/p_N
    (concavity) and log p_N (log-convexity, informational) at log-uniform
    random points of [0.1, 10]^N."""
    if not 2 <= n <= 10:
        raise ParameterError("probe supports 2 <= N <= 10")
    rng = np.random.default_rng(seed)

    def pn(v: np.ndarray) -> float:
        return coupon_pn_ie(tuple(v))

    def inv_pn(v: np.ndarray) -> float:
        return 1.0 / pn(v)

    def log_pn(v: np.ndarray) -> float:
        return math.log(pn(v))

    min_eig = math.inf
    min_pt = None
    max_inv = -math.inf
    max_pt = None
    min_log = math.inf
    for _ in range(trials):
        x = 10.0 ** rng.uniform(-1.0, 1.0, size=n)
        eig = float(np.linalg.eigvalsh(_fd_hessian(pn, x)).min())
        if eig < min_eig:
            min_eig, min_pt = eig, tuple(x)
        inv_eig = float(np.linalg.eigvalsh(_fd_hessian(inv_pn, x)).max())
        if inv_eig > max_inv:
            max_inv, max_pt = inv_eig, tuple(x)
        log_eig = float(np.linalg.eigvalsh(_fd_hessian(log_pn, x)).min())
        min_log = min(min_log, log_eig)
    return ConvexityProbeReport(
        n=n,
        trials=trials,
        seed=seed,
        min_hessian_eig=min_eig,
        min_eig_point=min_pt,
        max_inv_hessian_eig=max_inv,
        max_inv_eig_point=max_pt,
        min_log_hessian_eig=min_log,
    )
