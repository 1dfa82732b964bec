import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_conjugate_1d, brute_infconv_1d, random_convex_gridfn
from convexdesk.atoms import FnAtom, sample
from convexdesk.errors import GridMismatchError, ImproperFunctionError
from convexdesk.fenchel import (
    biconjugate,
    coercivity_check,
    conjugate,
    conjugate_oracle,
    conjugate_value_at,
    default_dual_grid,
    fenchel_duality_gap,
    inf_convolution,
    infconv_dual_check,
    max_formula_check,
    minkowski_infconv_convex,
    subdifferential,
)
from convexdesk.grids import Grid, GridFn, discrete_convexity_check


# ---- conjugate -------------------------------------------------------------


def test_conjugate_power2_golden():
    f = sample(FnAtom("power", (2.0,)), Grid.line(-5, 5, 1001))
    res = conjugate(f, Grid.line(-3, 3, 601))
    ys = res.dual.grid.coords(0)
    i = np.argmin(np.abs(ys - 1.0))
    assert abs(res.dual.values[i] - 0.5) <= 1e-4


def test_conjugate_exp_golden():
    f = sample(FnAtom("exp"), Grid.line(-10, 3, 2001))
    res = conjugate(f, Grid.line(0.5, 1.5, 201))
    ys = res.dual.grid.coords(0)
    i = np.argmin(np.abs(ys - 1.0))
    assert abs(res.dual.values[i] - (-1.0)) <= 1e-3  # y log y - y at 1


def test_conjugate_indicator_is_support():
    g = Grid.line(-2, 2, 401)
    f = sample(FnAtom("indicator", (-1.0, 1.0)), g)
    res = conjugate(f, g)
    assert np.array_equal(res.dual.values, np.abs(g.coords(0)))


def test_conjugate_rejects_improper_and_mismatch():
    g = Grid.line(-1, 1, 5)
    with pytest.raises(ImproperFunctionError):
        conjugate(GridFn(g, [np.inf] * 5), g)
    with pytest.raises(GridMismatchError):
        conjugate(sample(FnAtom("abs"), g), Grid.box((-1, 1, 3), (-1, 1, 3)))


def test_oracle_examples_from_brute_force():
    g = Grid.line(-2, 2, 5)
    f = sample(FnAtom("abs"), g)
    res = conjugate_oracle(f, Grid.line(-1, 1, 3))
    assert res.dual.values.tolist() == [0.0, 0.0, 0.0]  # conjugate of |x| inside the ball
    r2 = conjugate_oracle(f, Grid.line(2, 2.5, 2))
    assert r2.dual.values[0] == 2.0  # sup attained at the boundary x = 2
    fpoint = sample(FnAtom("point", (0.0,)), g)
    r3 = conjugate_oracle(fpoint, Grid.line(-7, 9, 5))
    assert np.array_equal(r3.dual.values, np.zeros(5))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 64), m=st.integers(2, 64),
       kind=st.integers(0, 2))
def test_fast_equals_oracle_bit_for_bit(seed, n, m, kind):
    rng = np.random.default_rng(seed)
    g = Grid.line(-3.0, 2.0, n)
    if kind == 0:
        vals = rng.normal(size=n) * 5
    elif kind == 1:
        vals = rng.integers(-5, 6, size=n).astype(float)  # exact ties
    else:
        vals = rng.normal(size=n)
        vals[rng.random(n) < 0.3] = np.inf
        if not np.isfinite(vals).any():
            vals[0] = 0.0
    f = GridFn(g, vals)
    dg = Grid.line(-4.0, 4.0, m)
    a = conjugate(f, dg)
    b = conjugate_oracle(f, dg)
    assert np.array_equal(a.dual.values, b.dual.values)
    assert np.array_equal(a.argmax, b.argmax)


def test_fast_equals_oracle_2d():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n1, n2 = rng.integers(2, 14, 2)
        g = Grid.box((-2, 2, int(n1)), (-1, 3, int(n2)))
        vals = rng.normal(size=(n1, n2)) * 4
        vals[rng.random((n1, n2)) < 0.25] = np.inf
        if not np.isfinite(vals).any():
            vals[0, 0] = 0.0
        f = GridFn(g, vals)
        dg = Grid.box((-3, 3, int(rng.integers(2, 10))), (-3, 3, int(rng.integers(2, 10))))
        a = conjugate(f, dg)
        b = conjugate_oracle(f, dg)
        assert np.array_equal(a.dual.values, b.dual.values)
        assert np.array_equal(a.argmax, b.argmax)


def test_oracle_matches_independent_loop(rng):
    g = Grid.line(-2, 2, 33)
    f = GridFn(g, rng.normal(size=33))
    ys = np.linspace(-3, 3, 17)
    ref = brute_conjugate_1d(f, ys)
    res = conjugate_oracle(f, Grid.line(-3, 3, 17))
    assert np.array_equal(res.dual.values, ref)


def test_conjugate_order_reversing(rng):
    g = Grid.line(-2, 2, 65)
    f = random_convex_gridfn(rng, g)
    gfn = GridFn(g, f.values + rng.uniform(0.0, 1.0, 65))  # g >= f
    dg = Grid.line(-2, 2, 41)
    cf = conjugate(f, dg).dual.values
    cg = conjugate(gfn, dg).dual.values
    assert np.all(cg <= cf + 1e-12)


def test_fenchel_young_grid_inequality(rng):
    g = Grid.line(-2, 2, 101)
    f = random_convex_gridfn(rng, g)
    dg = Grid.line(-3, 3, 101)
    fstar = conjugate(f, dg).dual
    xs, ys = g.coords(0), dg.coords(0)
    resid = f.values[:, None] + fstar.values[None, :] - xs[:, None] * ys[None, :]
    assert resid.min() >= -1e-12


def test_conjugate_always_convex(rng):
    g = Grid.line(-2, 2, 51)
    f = GridFn(g, rng.normal(size=51) * 3)  # arbitrary, not convex
    res = conjugate(f, Grid.line(-4, 4, 101))
    assert discrete_convexity_check(res.dual, tol=1e-12)


def test_conjugate_value_at_matches_node_transform():
    f = sample(FnAtom("power", (2.0,)), Grid.line(-4, 4, 801))
    v, j = conjugate_value_at(f, 1.0)
    res = conjugate(f, Grid.line(1.0, 2.0, 2))
    assert v == res.dual.values[0] and j == res.argmax[0]


def test_young_inequality_power_pairs():
    for p in (1.5, 2.0, 3.0):
        q = p / (p - 1.0)
        g = Grid.line(-3, 3, 151)
        xs = g.coords(0)
        fx = np.abs(xs) ** p / p
        gy = np.abs(xs) ** q / q
        resid = fx[:, None] + gy[None, :] - xs[:, None] * xs[None, :]
        assert resid.min() >= -1e-12


# ---- biconjugate -----------------------------------------------------------


def test_biconjugate_fixpoint_abs():
    g = Grid.line(-2, 2, 401)
    f = sample(FnAtom("abs"), g)
    bc = biconjugate(f, default_dual_grid(f))
    assert np.max(np.abs(bc.values - f.values)) <= 1e-9


def test_biconjugate_convexifies_double_well():
    g = Grid.line(-3, 3, 601)
    xs = g.coords(0)
    f = GridFn(g, np.minimum(np.abs(xs - 1), np.abs(xs + 1)))
    bc = biconjugate(f, Grid.line(-2, 2, 801))
    i0 = g.zero_index(0)
    assert f.values[i0] == 1.0
    assert abs(bc.values[i0]) <= 1e-9  # convex hull flattens the well
    assert np.all(bc.values <= f.values + 1e-12)


def test_biconjugate_cubic_on_unit_interval():
    g = Grid.line(0, 1, 101)
    f = GridFn(g, g.coords(0) ** 3)  # convex on [0, 1]
    bc = biconjugate(f, default_dual_grid(f, n=4001))
    assert np.max(np.abs(bc.values - f.values)) <= 1e-9


def test_biconjugate_dominance_random(rng):
    g = Grid.line(-2, 2, 101)
    f = GridFn(g, rng.normal(size=101))
    bc = biconjugate(f, Grid.line(-30, 30, 2001))
    assert np.all(bc.values <= f.values + 1e-10)


# ---- infimal convolution ---------------------------------------------------


def test_infconv_figure_values():
    g = Grid.line(-2, 2, 4001)
    res = inf_convolution(sample(FnAtom("negsqrt_circle"), g), sample(FnAtom("abs"), g))
    xs = g.coords(0)

    def at(x):
        return res.out.values[np.argmin(np.abs(xs - x))]

    assert abs(at(1.0) - (1 - math.sqrt(2))) <= 2e-3
    # oracle-confirmed circular-branch values (see notes on the example typo)
    assert abs(at(0.5) - (-math.sqrt(0.75))) <= 2e-3
    assert abs(at(0.25) - (-math.sqrt(1 - 0.0625))) <= 2e-3


def test_infconv_identity_element():
    g = Grid.line(-2, 2, 401)
    f = sample(FnAtom("power", (2.0,)), g)
    res = inf_convolution(f, sample(FnAtom("point", (0.0,)), g))
    assert np.array_equal(res.out.values, f.values)


def test_infconv_matches_brute_force(rng):
    g = Grid.line(-2, 2, 41)
    f = GridFn(g, rng.normal(size=41))
    h = GridFn(g, rng.normal(size=41))
    res = inf_convolution(f, h)
    assert np.array_equal(res.out.values, brute_infconv_1d(f, h))


def test_infconv_of_convex_is_convex(rng):
    g = Grid.line(-4, 4, 201)
    f = random_convex_gridfn(rng, g)
    h = random_convex_gridfn(rng, g)
    out = inf_convolution(f, h).out
    assert discrete_convexity_check(out, tol=1e-10)


def test_infconv_requires_same_geometry():
    f = sample(FnAtom("abs"), Grid.line(-2, 2, 41))
    h = sample(FnAtom("abs"), Grid.line(-2, 2, 43))
    with pytest.raises(GridMismatchError):
        inf_convolution(f, h)


def test_infconv_2d_matches_direct(rng):
    g = Grid.box((-1, 1, 9), (-1, 1, 9))
    f = sample(FnAtom("sqnorm2"), g)
    h = sample(FnAtom("l1norm"), g)
    res = inf_convolution(f, h)
    # independent dense check at a few nodes
    nodes = g.nodes()
    fv, hv = f.values.ravel(), h.values.ravel()
    for k in (0, 12, 40, 80):
        x = nodes[k]
        best = np.inf
        for j in range(nodes.shape[0]):
            d = x - nodes[j]
            i = g.nearest_index(d)
            di = np.array([g.coords(0)[i[0]], g.coords(1)[i[1]]])
            if np.max(np.abs(di - d)) < 1e-9:
                best = min(best, fv[j] + h.values[i])
        assert res.out.values.ravel()[k] == pytest.approx(best, abs=1e-12)


def test_minkowski_fast_path_matches_brute(rng):
    for _ in range(5):
        n, m = int(rng.integers(4, 30)), int(rng.integers(4, 30))
        from conftest import random_convex_values

        v = random_convex_values(rng, n)
        w = random_convex_values(rng, m)
        H = minkowski_infconv_convex(v, w)
        ref = np.full(n + m - 1, np.inf)
        for i in range(n):
            for j in range(m):
                ref[i + j] = min(ref[i + j], v[i] + w[j])
        assert np.max(np.abs(H - ref)) <= 1e-12


def test_infconv_dual_identity_examples():
    g = Grid.line(-6, 6, 1201)
    f = sample(FnAtom("power", (2.0,)), g)
    assert infconv_dual_check(f, f, Grid.line(-2, 2, 401)) <= 1e-3
    a = sample(FnAtom("abs"), g)
    c = sample(FnAtom("indicator", (-1.0, 1.0)), g)
    assert infconv_dual_check(a, c, Grid.line(-0.9, 0.9, 181)) <= 1e-3
    p = sample(FnAtom("point", (0.0,)), g)
    assert infconv_dual_check(f, p, Grid.line(-2, 2, 401)) <= 1e-9


# ---- subdifferential and max formula ----------------------------------------


def test_subdifferential_abs_at_zero():
    g = Grid.line(-2, 2, 401)
    f = sample(FnAtom("abs"), g)
    s = subdifferential(f, g.zero_index(0), epsilon=1e-9, dual_grid=Grid.line(-2, 2, 401))
    slopes = s.slopes.ravel()
    assert slopes.min() == -1.0 and slopes.max() == 1.0
    assert np.all(np.abs(slopes) <= 1.0 + 1e-12)
    assert slopes.size == 201  # every dual node in [-1, 1]


def test_subdifferential_smooth_width():
    g = Grid.line(-2, 2, 401)
    h = g.spacing[0]
    f = sample(FnAtom("power", (2.0,)), g)
    i1 = int(np.argmin(np.abs(g.coords(0) - 1.0)))
    eps = h * h / 4
    s = subdifferential(f, i1, epsilon=eps, dual_grid=Grid.line(-2, 2, 801))
    slopes = s.slopes.ravel()
    # eps-subdifferential of a quadratic is the gradient +- sqrt(2 eps)
    assert np.all(np.abs(slopes - 1.0) <= math.sqrt(2 * eps) + 1e-9)
    assert slopes.size >= 1


def test_subdifferential_empty_for_negsqrt_at_zero():
    # the truncated function's one-sided slopes at 0 sit below -1/sqrt(h),
    # which escapes any fixed dual window as the grid refines: the set
    # read through a fixed window is empty, matching the continuum -sqrt(x)
    g = Grid.line(0, 4, 4001)
    f = sample(FnAtom("negsqrt"), g)
    s = subdifferential(f, 0, epsilon=1e-9, dual_grid=Grid.line(-5, 5, 201))
    assert s.slopes.size == 0


def test_subdifferential_requires_finite_value():
    g = Grid.line(-2, 2, 5)
    f = sample(FnAtom("indicator", (-1.0, 1.0)), g)
    with pytest.raises(ImproperFunctionError):
        subdifferential(f, 0)  # f(-2) = +inf


def test_max_formula_abs_both_directions():
    g = Grid.line(-2, 2, 401)
    f = sample(FnAtom("abs"), g)
    i0 = g.zero_index(0)
    dg = Grid.line(-2, 2, 401)
    q, m = max_formula_check(f, i0, +1.0, epsilon=1e-9, dual_grid=dg)
    assert q == pytest.approx(1.0, abs=1e-12) and m == 1.0
    q2, m2 = max_formula_check(f, i0, -1.0, epsilon=1e-9, dual_grid=dg)
    assert q2 == pytest.approx(1.0, abs=1e-12) and m2 == 1.0


def test_max_formula_smooth_case():
    g = Grid.line(-2, 2, 401)
    h = g.spacing[0]
    f = sample(FnAtom("power", (2.0,)), g)
    i1 = int(np.argmin(np.abs(g.coords(0) - 1.0)))
    q, m = max_formula_check(f, i1, 1.0, epsilon=h * h / 4, dual_grid=Grid.line(-2, 2, 801))
    assert abs(q - 1.0) <= 2 * h
    assert abs(m - 1.0) <= 2 * h


def test_max_formula_boundary_error():
    g = Grid.line(-2, 2, 41)
    f = sample(FnAtom("abs"), g)
    with pytest.raises(GridMismatchError):
        max_formula_check(f, 0, 1.0)


# ---- coercivity -------------------------------------------------------------


def test_coercivity_power2():
    rep = coercivity_check(sample(FnAtom("power", (2.0,)), Grid.line(-5, 5, 501)))
    assert rep.growth_slope > 0 and rep.coercive
    assert all(bounded for c, bounded in rep.level_sets_bounded if c < 12.5)


def test_coercivity_constant():
    rep = coercivity_check(sample(FnAtom("const", (0.0,)), Grid.line(-5, 5, 501)))
    assert rep.growth_slope == 0.0 and not rep.coercive
    assert not any(bounded for _, bounded in rep.level_sets_bounded)


def test_coercivity_exp_flat_left_tail():
    rep = coercivity_check(sample(FnAtom("exp"), Grid.line(-10, 10, 2001)))
    assert not rep.coercive  # exp(-t)/t -> 0: the left tail never climbs


# ---- duality ----------------------------------------------------------------


def test_duality_quadratic_pair():
    g = Grid.line(-6, 6, 1201)
    f = sample(FnAtom("power", (2.0,)), g)
    res = fenchel_duality_gap(f, f, [[1.0]], Grid.line(-4, 4, 801), Grid.line(-4, 4, 801))
    assert abs(float(res.primal)) <= 1e-6
    assert abs(float(res.gap)) <= 1e-6


def test_duality_interval_vs_abs():
    g = Grid.line(-6, 6, 1201)
    f = sample(FnAtom("indicator", (1.0, 2.0)), g)
    a = sample(FnAtom("abs"), g)
    res = fenchel_duality_gap(f, a, [[1.0]], Grid.line(-4, 4, 801), Grid.line(-2, 2, 401))
    assert float(res.primal) == pytest.approx(1.0, abs=1e-9)
    assert float(res.dual) == pytest.approx(1.0, abs=1e-3)


def test_duality_point_pair():
    g = Grid.line(-6, 6, 1201)
    f = sample(FnAtom("point", (0.0,)), g)
    res = fenchel_duality_gap(f, f, [[1.0]], Grid.line(-4, 4, 801), Grid.line(-4, 4, 801))
    assert float(res.primal) == 0.0 and float(res.dual) == pytest.approx(0.0, abs=1e-12)


def test_duality_infeasible_is_inf():
    g = Grid.line(-6, 6, 1201)
    f = sample(FnAtom("point", (0.0,)), g)
    h = sample(FnAtom("indicator", (2.0, 3.0)), g)
    res = fenchel_duality_gap(f, h, [[1.0]], Grid.line(-4, 4, 801), Grid.line(-4, 4, 801))
    assert float(res.primal) == math.inf
    assert float(res.gap) == math.inf  # extended-real convention


def test_coercivity_continuity_duality_shadow():
    """Coercive f has a conjugate finite on a neighbourhood of 0; the
    non-coercive exp does not (its conjugate is +inf for y < 0)."""
    g = Grid.line(-6, 6, 1201)
    dual = Grid.line(-0.5, 0.5, 101)
    fq = sample(FnAtom("power", (2.0,)), g)
    assert coercivity_check(fq).coercive
    assert np.all(np.isfinite(conjugate(fq, dual).dual.values))
    fe = sample(FnAtom("exp"), Grid.line(-10, 3, 1201))
    assert not coercivity_check(fe).coercive
    xstar = sample(FnAtom("xlogx"), dual)  # the true conjugate: +inf left of 0
    assert np.any(np.isinf(xstar.values))


def test_conjugate_2d_is_convex(rng):
    g = Grid.box((-2, 2, 15), (-2, 2, 15))
    f = GridFn(g, rng.normal(size=(15, 15)) * 2)
    res = conjugate(f, Grid.box((-3, 3, 21), (-3, 3, 21)))
    assert discrete_convexity_check(res.dual, tol=1e-10)


def test_conjugate_2d_separable_matches_1d_products():
    # f(x1, x2) = x1^2/2 + x2^2/2 has conjugate y1^2/2 + y2^2/2
    g = Grid.box((-4, 4, 161), (-4, 4, 161))
    f = sample(FnAtom("sqnorm2"), g)
    dual = Grid.box((-2, 2, 81), (-2, 2, 81))
    res = conjugate(f, dual)
    y1, y2 = np.meshgrid(dual.coords(0), dual.coords(1), indexing="ij")
    assert np.max(np.abs(res.dual.values - (y1 ** 2 + y2 ** 2) / 2)) <= 1e-3


def test_duality_2d_identity_map():
    g = Grid.box((-4, 4, 161), (-4, 4, 161))
    f = sample(FnAtom("sqnorm2"), g)
    dual = Grid.box((-3, 3, 121), (-3, 3, 121))
    res = fenchel_duality_gap(f, f, [[1.0, 0.0], [0.0, 1.0]], dual, dual)
    assert abs(float(res.primal)) <= 1e-6
    assert -1e-9 <= float(res.gap) <= 1e-3


def test_duality_2d_to_1d_map():
    g2 = Grid.box((-4, 4, 161), (-4, 4, 161))
    g1 = Grid.line(-10, 10, 801)
    f = sample(FnAtom("sqnorm2"), g2)
    g = sample(FnAtom("power", (2.0,)), g1)
    res = fenchel_duality_gap(
        f, g, [[1.0, 1.0]], Grid.box((-3, 3, 121), (-3, 3, 121)), Grid.line(-6, 6, 481)
    )
    assert abs(float(res.primal)) <= 1e-6
    assert float(res.gap) >= -1e-9
