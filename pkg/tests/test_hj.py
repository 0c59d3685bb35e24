import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from frachj.core import SampledPath, TimeGrid
from frachj.fode import FodeProblem, solve_fode
from frachj.hj import audit
from frachj.hj.ergodic import aubry_set, solve_ergodic
from frachj.hj.evolve import (CFLError, SpaceTimeSolution, cfl_number, evolve,
                              godunov_norm, unit_response)
from frachj.hj.torus import (EikonalProblem, TorusGrid, catalog, discrete_lipschitz,
                             periodic_distance, segment_distance)


def sin2_problem(n=64, alpha=0.5, g="const:0", **kw):
    return EikonalProblem.from_catalog(1, n, alpha, f="sin2", g=g, **kw)


@pytest.fixture(scope="module")
def short_run():
    p = sin2_problem(64, g="abs_sin:0.5")
    tg = TimeGrid.graded(20.0, 200, alpha=0.5)
    return p, tg, evolve(p, tg), solve_ergodic(p)


# -- grid and problem -------------------------------------------------------------


def test_torus_grid_validation():
    with pytest.raises(ValueError):
        TorusGrid(1, 4)
    with pytest.raises(ValueError):
        TorusGrid(3, 16)
    g = TorusGrid(2, 8)
    assert g.h == 0.125 and g.shape == (8, 8) and g.size == 64
    assert g.index_of([1.0, 0.125]) == 1


def test_periodic_distance_wraps():
    g = TorusGrid(1, 10)
    d = periodic_distance(g, [0.0])
    assert d[9] == pytest.approx(0.1) and d[5] == pytest.approx(0.5)


def test_segment_distance_degenerates_to_point():
    g = TorusGrid(2, 16)
    np.testing.assert_allclose(segment_distance(g, [0.25, 0.5], [0.25, 0.5]),
                               periodic_distance(g, [0.25, 0.5]), atol=1e-15)


def test_catalog_rejects_unknown():
    g = TorusGrid(1, 8)
    with pytest.raises(ValueError):
        catalog("cosh", g)
    with pytest.raises(ValueError):
        catalog("const:x", g)


def test_problem_normalizes_f_and_records_shift():
    g = TorusGrid(1, 32)
    f = catalog("sin2", g) + 3.0
    p = EikonalProblem(g, 1.0, f, 0.0)
    assert p.f.min() == 0.0 and p.c == -3.0


def test_problem_rejects_bad_coefficients():
    g = TorusGrid(1, 16)
    with pytest.raises(ValueError):
        EikonalProblem(g, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        EikonalProblem(g, 1.0, 0.0, 0.0, m=0.5)
    with pytest.raises(ValueError):
        EikonalProblem(g, np.ones(8), 0.0, 0.0)


def test_lipschitz_of_tent():
    g = TorusGrid(1, 64)
    assert discrete_lipschitz(g, catalog("tent:0.5:2", g)) == pytest.approx(2.0, rel=1e-12)


# -- zero set and ergodic problem --------------------------------------------------------


def test_aubry_set_examples():
    g = TorusGrid(1, 64)
    assert aubry_set(np.zeros(64), g.h ** 2).all()
    z = aubry_set(catalog("sin2", g), g.h ** 2)
    assert np.flatnonzero(z).tolist() == [0]
    assert aubry_set(catalog("sin2", g), math.inf).all()


@pytest.mark.parametrize("method", ["godunov", "dijkstra"])
def test_ergodic_closed_form(method):
    p = sin2_problem(128)
    erg = solve_ergodic(p, method=method)
    x = p.grid.axes()
    F = lambda s: s / 2 - np.sin(2 * np.pi * s) / (4 * np.pi)
    exact = np.minimum(F(x), F(1.0) - F(x))
    assert erg.c == 0.0
    assert np.max(np.abs(erg.v - exact)) <= 2 * p.grid.h


def test_ergodic_zero_source():
    g = TorusGrid(2, 16)
    p = EikonalProblem(g, 1.0, 0.0, catalog("tent:0.3:1", g))
    erg = solve_ergodic(p)
    assert np.all(erg.v == p.g.min())


def test_ergodic_shift_invariance():
    g = TorusGrid(1, 64)
    f = catalog("sin2", g)
    p0, p3 = EikonalProblem(g, 1.0, f, 0.0), EikonalProblem(g, 1.0, f + 3.0, 0.0)
    assert p3.c == -3.0
    # (f + 3) - 3 differs from f in the last bit
    np.testing.assert_allclose(solve_ergodic(p0).v, solve_ergodic(p3).v, rtol=0, atol=1e-14)


def test_ergodic_residual_off_kinks():
    p = sin2_problem(128)
    v = solve_ergodic(p).v
    r = p.a * godunov_norm(v, p.grid.h) - p.f
    # kinks of v: the zero set and the ridge at x = 1/2
    x = p.grid.axes()
    mask = (np.abs(x - 0.5) > 2 * p.grid.h) & ~solve_ergodic(p).Z
    assert np.max(np.abs(r[mask])) <= 1e-12


def test_ergodic_2d_methods_agree():
    p = EikonalProblem.from_catalog(2, 32, 0.5, f="sin2")
    a = solve_ergodic(p).v
    b = solve_ergodic(p, method="dijkstra").v
    assert np.max(np.abs(a - b)) <= 0.05 * np.max(a)


# -- evolution ------------------------------------------------------------------


@pytest.mark.parametrize("dim", [1, 2])
def test_constants_are_exact(dim):
    grid = TorusGrid(dim, 16)
    p = EikonalProblem(grid, 1.0, 0.0, 2.5)
    sol = evolve(p, TimeGrid.graded(5.0, 20, alpha=0.4))
    assert np.all(sol.states == 2.5)


def test_states_start_at_g(short_run):
    p, _, sol, _ = short_run
    np.testing.assert_array_equal(sol.states[0], p.g)


def test_stationary_solution_is_fixed_point():
    p = sin2_problem(64)
    v = solve_ergodic(p).v
    sol = evolve(p.with_g(v), TimeGrid.graded(10.0, 60, alpha=0.5))
    assert np.max(np.abs(sol.states - v)) <= 1e-9


def test_shift_equivariance():
    p = sin2_problem(32, g="abs_sin:0.7")
    tg = TimeGrid.graded(5.0, 40, alpha=0.5)
    base = evolve(p, tg).states
    shifted = evolve(p.with_g(p.g + 1.75), tg).states
    np.testing.assert_allclose(shifted, base + 1.75, rtol=0, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), alpha=st.floats(0.2, 0.8))
def test_comparison_principle(seed, alpha):
    rng = np.random.default_rng(seed)
    g = TorusGrid(1, 16)
    g1 = rng.uniform(-1, 1, 16)
    g2 = g1 + rng.uniform(0, 0.5, 16)
    p1 = EikonalProblem(g, 1.0 + rng.uniform(0, 1, 16), catalog("sin2", g), g1, m=1.5, order=alpha)
    p2 = p1.with_g(g2)
    tg = TimeGrid.graded(3.0, 25, alpha=alpha)
    u1, u2 = evolve(p1, tg).states, evolve(p2, tg).states
    assert np.all(u1 <= u2 + 1e-9)


def test_barrier_bounds(short_run):
    _, _, sol, _ = short_run
    lo, hi = audit.barrier_margins(sol)
    assert lo >= -1e-12 and hi >= -1e-12


def test_lower_bound_on_zero_set(short_run):
    p, _, sol, erg = short_run
    assert np.all(sol.states[:, erg.Z] >= p.g.min() - 1e-10)


def test_explicit_method_checks_cfl():
    p = sin2_problem(64)
    coarse = TimeGrid.uniform(1.0, 10)
    assert cfl_number(p, coarse) > 1
    with pytest.raises(CFLError):
        evolve(p, coarse, method="explicit")


def test_explicit_and_implicit_agree_under_cfl():
    p = sin2_problem(16, g="abs_sin:0.5")
    tg = TimeGrid.uniform(0.05, 40)
    assert cfl_number(p, tg) <= 1
    ex = evolve(p, tg, method="explicit").states
    im = evolve(p, tg).states
    assert np.max(np.abs(ex - im)) <= 0.02


def test_two_dimensional_run_is_monotone_in_time_for_zero_data():
    p = EikonalProblem.from_catalog(2, 16, 0.5, f="sin2")
    sol = evolve(p, TimeGrid.graded(10.0, 60, alpha=0.5))
    assert np.all(np.diff(sol.states, axis=0) >= -1e-12)
    assert np.all(sol.states <= solve_ergodic(p).v + 1e-9)


def test_original_states_add_unit_response():
    g = TorusGrid(1, 16)
    f = catalog("sin2", g) + 2.0
    p = EikonalProblem(g, 1.0, f, 0.0)
    tg = TimeGrid.graded(4.0, 30, alpha=0.5)
    sol = evolve(p, tg)
    w = unit_response(tg, 0.5)
    # w approximates t^a / Gamma(1 + a)
    assert w[-1] == pytest.approx(4.0 ** 0.5 / math.gamma(1.5), rel=1e-2)
    np.testing.assert_allclose(sol.original_states()[:, 3], sol.states[:, 3] + 2.0 * w)


def test_at_requires_node(short_run):
    _, tg, sol, _ = short_run
    with pytest.raises(ValueError):
        sol.at(0.123456)
    np.testing.assert_array_equal(sol.at(tg.T), sol.states[-1])


# -- Hölder seminorm ---------------------------------------------------------------


def test_holder_examples():
    p = sin2_problem(16)
    tg = TimeGrid.graded(5.0, 30, alpha=0.5)
    const = SpaceTimeSolution(p, tg, np.ones((31, 16)), np.zeros(31, dtype=int))
    assert audit.holder_seminorm_time(const) == 0.0
    kappa = 1.7
    states = kappa * np.repeat(tg.nodes[:, None] ** 0.5, 16, axis=1)
    path = SpaceTimeSolution(p, tg, states, np.zeros(31, dtype=int))
    assert audit.holder_seminorm_time(path) == pytest.approx(kappa, rel=1e-12)
    with pytest.raises(ValueError):
        audit.holder_seminorm_time(path, horizon=1e-9)


def test_holder_horizon_monotone(short_run):
    _, _, sol, _ = short_run
    assert audit.holder_seminorm_time(sol, 10.0) <= audit.holder_seminorm_time(sol)


# -- decay on the zero set ---------------------------------------------------


def test_aubry_decay_point_zero_set(short_run):
    p, tg, sol, erg = short_run
    E = solve_fode(FodeProblem(0.5, audit.ladder_A(p, p.lip_g, 0.0), p.m), tg)
    rep = audit.aubry_decay_check(sol, erg, E, 0.0)
    assert rep.ok and rep.violations == 0


def test_aubry_decay_interval_zero_set():
    p = EikonalProblem.from_catalog(1, 64, 0.5, f="plateau:0.5:0.25", g="tent:0.5:1")
    tg = TimeGrid.graded(20.0, 200, alpha=0.5)
    sol, erg = evolve(p, tg), solve_ergodic(p)
    ell = 0.25
    E = solve_fode(FodeProblem(0.5, audit.ladder_A(p, p.lip_g, ell), p.m), tg)
    rep = audit.aubry_decay_check(sol, erg, E, ell)
    assert rep.ok


def test_aubry_trivial_for_flat_datum():
    p = EikonalProblem.from_catalog(1, 32, 0.5, f="sin2", g="const:0.3")
    tg = TimeGrid.graded(5.0, 30, alpha=0.5)
    sol, erg = evolve(p, tg), solve_ergodic(p)
    E = SampledPath(tg, np.ones(31))
    rep = audit.aubry_decay_check(sol, erg, E, 0.0)
    assert rep.ok and rep.upper_margin == pytest.approx(0.0, abs=1e-12)


def test_aubry_reports_assumption_violation():
    p = EikonalProblem.from_catalog(1, 32, 0.5, f="sin2", g="tent:0.5:1")
    tg = TimeGrid.graded(5.0, 30, alpha=0.5)
    sol, erg = evolve(p, tg), solve_ergodic(p)
    rep = audit.aubry_decay_check(sol, erg, SampledPath(tg, np.ones(31)), 0.0)
    assert not rep.assumption_ok and not rep.ok


def test_aubry_grid_mismatch(short_run):
    p, _, sol, erg = short_run
    E = solve_fode(FodeProblem(0.5, 1.0), TimeGrid.uniform(20.0, 10))
    with pytest.raises(ValueError):
        audit.aubry_decay_check(sol, erg, E, 0.0)


# -- supersolution ladder ------------------------------------------------------


@pytest.fixture(scope="module")
def plateau():
    p = EikonalProblem.from_catalog(1, 128, 0.5, f="plateau:0.5:0.25", g="tent:0.5:1")
    return p, solve_ergodic(p)


def test_ladder_residual_nonnegative(plateau):
    p, erg = plateau
    anchors = [0.375, 0.625]
    tg = TimeGrid.graded(50.0, 400, alpha=0.5)
    A = audit.ladder_A(p, p.lip_g, audit.path_length(anchors))
    E = solve_fode(FodeProblem(0.5, A, p.m), tg)
    rep = audit.supersolution_residual(p, erg, anchors, E)
    assert rep.min_residual >= -10 * p.grid.h
    assert rep.residual_at_anchor >= 0.0


def test_ladder_frozen_E_lower_bound():
    g = TorusGrid(1, 128)
    p = EikonalProblem(g, 1.0, 0.0, catalog("tent:0.5:1", g))
    erg = solve_ergodic(p)
    tg = TimeGrid.uniform(1.0, 4)
    E = SampledPath(tg, np.ones(5))
    anchors = [0.375, 0.625]
    L = 1.0
    rep = audit.supersolution_residual(p, erg, anchors, E, L=L)
    CH = audit.growth_constant(p)
    c1, c2 = audit.ladder_profile(g, anchors, 0, L, rep.M)
    U = c1 + c2
    r = p.a * godunov_norm(U, g.h) - p.f
    away = segment_distance(g, anchors[0], anchors[1]) > 2 * g.h
    ridge = np.abs(g.axes() - (0.5 + 0.375 + 0.125)) % 1.0 < 2 * g.h
    keep = away & ~ridge & (np.abs(((g.axes() - 0.875 + 0.5) % 1.0) - 0.5) > 2 * g.h)
    assert np.all(r[keep] >= rep.M / CH - L / CH - CH)


def test_ladder_rejects_anchor_outside_zero_set(plateau):
    p, erg = plateau
    E = SampledPath(TimeGrid.uniform(1.0, 2), np.ones(3))
    with pytest.raises(audit.AssumptionError):
        audit.supersolution_residual(p, erg, [0.0, 0.5], E)


def test_ladder_constants():
    p = EikonalProblem.from_catalog(1, 32, 0.5, a="const:0.25", f="sin2", g="tent:0.5:1")
    assert audit.growth_constant(p) == 4.0
    assert audit.ladder_M(p, 1.0, 0.5) == pytest.approx(1 + 16 + 4 * 1.0 + 4 * 1.5)
    assert audit.ladder_A(p, 1.0, 0.5) == pytest.approx(0.25 / 1.5)
    assert audit.ladder_A(EikonalProblem.from_catalog(1, 32, 0.5, a="const:9"), 1.0, 0.0) == 1.0


# -- rate formula -----------------------------------------------------------------


def test_rate_rectifiable():
    r = audit.eikonal_rate(1.0, 0.5, 100.0)
    assert r.exponent == -0.5 and r.eps_opt == 0.0
    assert r.bound == pytest.approx(100.0 ** -0.5)
    assert r.decaying


@pytest.mark.parametrize("D", [1.1, 1.25, 1.4])
def test_rate_matches_numerical_minimisation(D):
    a, t = 0.5, 50.0
    r = audit.eikonal_rate(D, a, t)
    phi = lambda e: e * t ** a + e ** (-2 * (D - 1)) * t ** (-a)
    opt = optimize.minimize_scalar(phi, bounds=(1e-8, 10.0), method="bounded",
                                   options={"xatol": 1e-12})
    assert r.eps_opt == pytest.approx(opt.x, rel=1e-5)
    assert r.bound == pytest.approx(opt.fun, rel=1e-9)
    assert r.measured_exponent == pytest.approx(r.exponent, abs=1e-12)


def test_rate_examples():
    assert audit.eikonal_rate(1.25, 0.5, 10.0).exponent == pytest.approx(-1.0 / 6.0, abs=1e-15)
    flat = audit.eikonal_rate(1.5, 0.5, 10.0)
    assert flat.exponent == 0.0 and not flat.decaying
    with pytest.raises(ValueError):
        audit.eikonal_rate(0.9, 0.5, 10.0)
