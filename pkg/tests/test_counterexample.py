import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from frachj import counterexample as ce
from frachj.special import pi_csc, reg_incomplete_beta


@pytest.fixture(scope="module")
def half():
    return ce.build_spec(0.5, 12)


def test_half_constants(half):
    assert half.b_alpha == 0.5
    np.testing.assert_array_equal(half.a, 2.0 ** np.arange(13))
    eta = 2 * math.asin(math.sqrt(0.25)) - 2 * math.asin(math.sqrt(0.125))
    assert half.eta_alpha == pytest.approx(eta, abs=1e-13)
    assert half.eps_k(0) == pytest.approx(3.0 / 16.0 * eta, rel=1e-14)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_eta_against_quadrature(alpha):
    s = ce.build_spec(alpha, 4)
    b = s.b_alpha
    direct, _ = integrate.quad(lambda y: y ** -alpha * (1 - y) ** (alpha - 1), b ** 3, b ** 2,
                               epsabs=1e-14, epsrel=1e-13)
    assert s.eta_alpha == pytest.approx(direct, abs=1e-10)
    assert 0.0 < s.eta_alpha < 1.0


def test_sequences(half):
    assert np.all(np.diff(half.a) > 0)
    assert np.all(np.diff(half.eps) < 0)
    k = np.arange(200)
    total = np.sum((1 - half.b_alpha ** 2) / 4 * half.eta_alpha * half.b_alpha ** (2 * k))
    assert total == pytest.approx(half.eta_alpha / 4, rel=1e-14)


def test_build_spec_rejects_small_kmax():
    with pytest.raises(ValueError):
        ce.build_spec(0.5, 1)


def test_f_piecewise_values(half):
    k = 1
    lo, hi, e = half.a_k(2 * k), half.a_k(2 * k + 1), half.eps_k(k)
    mid = 0.5 * (lo + hi)
    assert ce.eval_f(half, mid) == pytest.approx(mid ** -0.5, rel=1e-15)
    assert ce.eval_f(half, lo) == 0.0
    assert ce.eval_f(half, lo + e) == pytest.approx((lo + e) ** -0.5, rel=1e-12)
    gap = 0.5 * (half.a_k(2 * k - 1) + half.a_k(2 * k))
    assert ce.eval_f(half, gap) == 0.0
    assert ce.eval_f(half, 0.5) == 0.0
    with pytest.raises(ce.RangeError):
        ce.eval_f(half, half.t_max * 2)
    with pytest.raises(ValueError):
        ce.eval_f(half, -1.0)


@settings(max_examples=50, deadline=None)
@given(t=st.floats(0.0, 4096.0))
def test_f_bounded(t):
    spec = ce.build_spec(0.5, 12)
    v = ce.eval_f(spec, t)
    assert 0.0 <= v <= 1.0
    assert v <= max(t, 1.0) ** -0.5 + 1e-15


def test_grid_contains_breakpoints(half):
    t_end = half.a_k(7)
    g = ce.evaluation_grid(half, t_end, 8, 2)
    for p in ce.breakpoints(half, t_end):
        assert np.min(np.abs(g.nodes - p)) == 0.0


def test_u_zero_on_unit_interval(half):
    for t in (0.0, 0.3, 1.0):
        assert ce.eval_u(half, t) == 0.0


@pytest.mark.parametrize("t", [1.5, 2.0, 5.0, 32.0])
def test_u_against_quadrature(half, t):
    bp = [p for p in ce.breakpoints(half, t) if p < t] + [t]
    a = half.alpha
    total = 0.0
    for lo, hi in zip(bp[:-1], bp[1:]):
        val, _ = integrate.quad(lambda z: ce.eval_f(half, z), lo, hi, weight="alg",
                                wvar=(0.0, a - 1.0), epsabs=1e-13, epsrel=1e-12) \
            if hi == t else integrate.quad(lambda z: ce.eval_f(half, z) * (t - z) ** (a - 1.0),
                                           lo, hi, epsabs=1e-13, epsrel=1e-12)
        total += val
    assert ce.eval_u(half, t) == pytest.approx(total, abs=1e-5)
    assert ce.eval_u(half, t) > 0.0


@settings(max_examples=20, deadline=None)
@given(t=st.floats(1.0, 1024.0))
def test_u_bounded(t):
    spec = ce.build_spec(0.5, 12)
    assert 0.0 <= ce.eval_u(spec, t, 64, 8) <= pi_csc(0.5) + 1e-6


def test_admissible_N_half(half):
    N = ce.find_admissible_N(half)
    tail, growth, ok = ce.admissibility(half, N)
    assert ok and growth >= 2.0 and tail < half.eta_alpha / 4
    # independent evaluation of the tail integral
    delta = half.eps_k(N) / half.a_k(2 * N + 1)
    assert tail == pytest.approx(math.pi * reg_incomplete_beta(0.5, 1 - delta, 1.0), rel=1e-8)
    for M in range(N):
        assert not ce.admissibility(half, M)[2]


def test_admissible_N_needs_range():
    with pytest.raises(ce.RangeError):
        ce.find_admissible_N(ce.build_spec(0.5, 2))


def test_extreme_alpha_gated():
    spec = ce.build_spec(0.1, 6)
    with pytest.raises(ValueError):
        ce.admissible_Ns(spec)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_gap_below_certificate(alpha):
    spec = ce.build_spec(alpha, 40)
    Ns = ce.admissible_Ns(spec)[:2]
    for N in Ns:
        if 2 * N + 2 > spec.K_max:
            continue
        gap = ce.oscillation_gap(spec, N, n_plateau=64, n_ramp=8)
        assert gap <= ce.gap_certificate(spec) + 1e-3
        assert gap < 0


def test_gap_range_error(half):
    with pytest.raises(ce.RangeError):
        ce.oscillation_gap(half, 6)
