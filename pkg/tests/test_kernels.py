import numpy as np
import pytest

from frachj import _kernels_py as ref
from frachj import kernels

ext = pytest.importorskip("frachj._kernels", reason="compiled extension not built")


@pytest.fixture
def nodes():
    return np.ascontiguousarray(5.0 * np.linspace(0, 1, 41) ** 2)


def test_backend_selected():
    assert kernels.BACKEND in ("python", "cython")


def test_weights_row(nodes):
    for j in (1, 2, 17, 40):
        np.testing.assert_allclose(ext.l1_weights_row(nodes, j, 0.37),
                                   ref.l1_weights_row(nodes, j, 0.37), rtol=1e-13)


def test_ordered_dot_bitwise():
    rng = np.random.default_rng(1)
    w, x = rng.standard_normal(300), rng.standard_normal(300)
    assert ext.ordered_dot(w, x) == ref.ordered_dot(w, x)


def test_apply_all(nodes):
    vals = np.sin(nodes)
    np.testing.assert_allclose(ext.l1_apply_all(nodes, vals, 0.6),
                               ref.l1_apply_all(nodes, vals, 0.6), rtol=1e-12, atol=1e-14)


def test_history(nodes):
    rng = np.random.default_rng(2)
    inc = np.ascontiguousarray(rng.standard_normal((40, 130)))
    for j in (1, 2, 25, 40):
        np.testing.assert_allclose(ext.l1_history(nodes, j, 0.45, inc),
                                   ref.l1_history(nodes, j, 0.45, inc), rtol=1e-12, atol=1e-13)


def test_abel(nodes):
    fv = np.cos(nodes)
    np.testing.assert_allclose(ext.abel_all(nodes, fv, 0.3), ref.abel_all(nodes, fv, 0.3),
                               rtol=1e-12, atol=1e-14)
    assert ext.abel_at_end(nodes, fv, 0.3) == pytest.approx(ref.abel_at_end(nodes, fv, 0.3), rel=1e-12)


@pytest.mark.parametrize("m", [1.0, 2.0])
def test_sweep_1d(m):
    rng = np.random.default_rng(3)
    n = 32
    rhs = rng.uniform(0, 2, n)
    a = rng.uniform(0.5, 2, n)
    u1, u2 = np.zeros(n), np.zeros(n)
    k1 = ext.sweep_1d(rhs, 3.0, a, m, 1 / n, u1, 1e-12, 500)
    k2 = ref.sweep_1d(rhs, 3.0, a, m, 1 / n, u2, 1e-12, 500)
    assert k1 > 0 and k2 > 0
    np.testing.assert_allclose(u1, u2, atol=1e-11)


def test_sweep_2d():
    rng = np.random.default_rng(4)
    n = 12
    rhs = rng.uniform(0, 2, (n, n))
    a = np.ones((n, n))
    u1, u2 = np.zeros((n, n)), np.zeros((n, n))
    assert ext.sweep_2d(rhs, 2.0, a, 1.0, 1 / n, u1, 1e-12, 500) > 0
    assert ref.sweep_2d(rhs, 2.0, a, 1.0, 1 / n, u2, 1e-12, 500) > 0
    np.testing.assert_allclose(u1, u2, atol=1e-11)


def test_holder(nodes):
    rng = np.random.default_rng(5)
    states = np.ascontiguousarray(rng.standard_normal((41, 9)))
    assert ext.holder_max(states, nodes, 0.5) == pytest.approx(ref.holder_max(states, nodes, 0.5), rel=1e-13)
