"""A bounded function with nonnegative Caputo derivative and no limit.

The construction: ``b = B_alpha^{-1}[1/2]``, breakpoints ``a_k = b**-k``,
ramp widths ``eps_k = (1 - b**2)/4 * eta / a_{2k}``, and

    f(t) = f1(t) * f2(t),   f1 = 1 on [0, 1], t**-alpha beyond,

with ``f2`` a trapezoid of height 1 on every ``[a_{2k}, a_{2k+1}]`` and zero
elsewhere. ``u(t) = int_0^t f(z) (t - z)**(alpha - 1) dz`` then satisfies
``d^alpha u = Gamma(alpha) f >= 0`` yet drops by at least ``eta/4`` between
``a_{2N+1}`` and ``a_{2N+2}`` for every admissible ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from frachj.core import (FractionalOrder, OrderLike, SampledPath, TimeGrid,
                         as_order, caputo_apply_all, caputo_weights,
                         fractional_integral_all)
from frachj import kernels
from frachj.special import _ibeta, inverse_beta_half, pi_csc, reg_incomplete_beta

# largest breakpoint the admissibility search will touch
A_CAP = 1e12
DEFAULT_ALPHAS = (0.3, 0.5, 0.7)


class RangeError(ValueError):
    """Requested time or index lies beyond the materialised sequences."""


@dataclass(frozen=True)
class CounterexampleSpec:
    order: FractionalOrder
    b_alpha: float
    eta_alpha: float
    K_max: int

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @property
    def a(self) -> np.ndarray:
        """``a_0, ..., a_{K_max}``."""
        return (1.0 / self.b_alpha) ** np.arange(self.K_max + 1, dtype=np.float64)

    @property
    def eps(self) -> np.ndarray:
        """``eps_k`` for every ``k`` with ``2k + 1 <= K_max``."""
        k = np.arange((self.K_max + 1) // 2, dtype=np.float64)
        b = self.b_alpha
        return (1.0 - b * b) / 4.0 * self.eta_alpha * b ** (2.0 * k)

    def a_k(self, k: int) -> float:
        if not 0 <= k <= self.K_max:
            raise RangeError(f"a_{k} not materialised (K_max={self.K_max})")
        return (1.0 / self.b_alpha) ** k

    def eps_k(self, k: int) -> float:
        b = self.b_alpha
        return (1.0 - b * b) / 4.0 * self.eta_alpha * b ** (2 * k)

    @property
    def t_max(self) -> float:
        return self.a_k(self.K_max)


def build_spec(alpha: OrderLike, K_max: int) -> CounterexampleSpec:
    order = as_order(alpha)
    if K_max < 2:
        raise ValueError(f"K_max must be >= 2, got {K_max}")
    b = inverse_beta_half(order)
    eta = pi_csc(order) * reg_incomplete_beta(order, b ** 3, b ** 2)
    spec = CounterexampleSpec(order, b, eta, int(K_max))
    _verify(spec)
    return spec


def _verify(spec: CounterexampleSpec) -> None:
    b, eta = spec.b_alpha, spec.eta_alpha
    if abs(reg_incomplete_beta(spec.order, 0.0, b) - 0.5) > 1e-10:
        raise ArithmeticError("b_alpha does not split the beta mass in half")
    if not 0.0 < eta < 1.0:
        raise ArithmeticError(f"eta_alpha={eta} outside (0, 1)")
    if not np.all(np.diff(spec.a) > 0):
        raise ArithmeticError("a_k not increasing")
    if spec.eps.size > 1 and not np.all(np.diff(spec.eps) < 0):
        raise ArithmeticError("eps_k not decreasing")
    # sum_k eps_k is geometric with ratio b^2 and equals eta/4
    total = (1.0 - b * b) / 4.0 * eta / (1.0 - b * b)
    if abs(total - eta / 4.0) > 1e-15:
        raise ArithmeticError("eps_k do not sum to eta/4")


def eval_f(spec: CounterexampleSpec, t):
    """``f1(t) * f2(t)``; accepts scalars or arrays."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("f is defined for t >= 0 only")
    if np.any(t_arr > spec.t_max):
        raise RangeError(f"t beyond a_K_max = {spec.t_max}")
    a = spec.a
    i = np.searchsorted(a, t_arr, side="right") - 1
    k = np.maximum(i, 0) // 2
    eps = spec.eps_k(k)
    out = np.zeros_like(t_arr)
    plateau = (i >= 0) & (i % 2 == 0) & (i < spec.K_max)
    a_lo = a[np.clip(i, 0, spec.K_max)]
    a_hi = a[np.clip(i + 1, 0, spec.K_max)]
    up = plateau & (t_arr < a_lo + eps)
    down = plateau & (t_arr >= a_hi - eps)
    flat = plateau & ~up & ~down
    out = np.where(up, (t_arr - a_lo) / eps, out)
    out = np.where(down, (a_hi - t_arr) / eps, out)
    out = np.where(flat, 1.0, out)
    f1 = np.where(t_arr <= 1.0, 1.0, np.maximum(t_arr, 1.0) ** -spec.alpha)
    res = f1 * out
    return float(res) if np.ndim(t) == 0 else res


def breakpoints(spec: CounterexampleSpec, t_end: float) -> np.ndarray:
    """``0`` and every ``a_k``, ``a_{2k} + eps_k``, ``a_{2k+1} - eps_k`` up to ``t_end``."""
    pts = [0.0]
    for k in range(spec.K_max + 1):
        ak = spec.a_k(k)
        if ak > t_end:
            break
        pts.append(ak)
        if k % 2 == 0 and k + 1 <= spec.K_max:
            e = spec.eps_k(k // 2)
            pts.append(ak + e)
            pts.append(spec.a_k(k + 1) - e)
    pts = np.array(sorted(p for p in pts if p <= t_end))
    return pts


def evaluation_grid(spec: CounterexampleSpec, t_end: float, n_plateau: int = 256,
                    n_ramp: int = 16, n_gap: int = 0) -> TimeGrid:
    """Breakpoint-aligned nodes on ``[0, t_end]``.

    Plateaus get ``n_plateau`` cells, ramps ``n_ramp`` and the zero gaps
    ``n_gap`` (a single cell when ``n_gap = 0``, which is exact for the
    integral since f = 0 there). Inside each piece the cells are graded
    towards both ends with exponent ``(2 - alpha)/alpha``. ``t_end`` is
    always a node.
    """
    if t_end > spec.t_max * (1 + 1e-15):
        raise RangeError(f"t={t_end} beyond a_K_max = {spec.t_max}")
    bp = breakpoints(spec, t_end)
    if bp[-1] < t_end:
        bp = np.append(bp, t_end)
    gamma = (2.0 - spec.alpha) / spec.alpha
    pieces = [np.array([0.0])]
    for lo, hi in zip(bp[:-1], bp[1:]):
        if hi <= 1.0:
            n = max(n_gap, 1)
        else:
            kind = _piece_kind(spec, 0.5 * (lo + hi))
            n = {"gap": max(n_gap, 1), "ramp": n_ramp, "plateau": n_plateau}[kind]
        seg = lo + (hi - lo) * _two_sided_grading(n, gamma if n > 1 else 1.0)[1:]
        seg[-1] = hi
        pieces.append(seg)
    return TimeGrid.from_nodes(np.concatenate(pieces))


def _two_sided_grading(n: int, gamma: float) -> np.ndarray:
    # u has (t - a)^alpha type layers on both sides of every kink of f
    s = np.linspace(0.0, 1.0, n + 1)
    left = 0.5 * (2.0 * s) ** gamma
    right = 1.0 - 0.5 * (2.0 * (1.0 - s)) ** gamma
    return np.where(s <= 0.5, left, right)


def _piece_kind(spec: CounterexampleSpec, t: float) -> str:
    i = int(np.searchsorted(spec.a, t, side="right")) - 1
    if i < 0 or i % 2 == 1 or i >= spec.K_max:
        return "gap"
    e = spec.eps_k(i // 2)
    if t < spec.a_k(i) + e or t > spec.a_k(i + 1) - e:
        return "ramp"
    return "plateau"


def eval_u(spec: CounterexampleSpec, t: float, n_plateau: int = 256,
           n_ramp: int = 16) -> float:
    """``u(t)`` on a breakpoint-aligned grid ending exactly at ``t``."""
    if t < 0:
        raise ValueError("u is defined for t >= 0 only")
    if t > spec.t_max:
        raise RangeError(f"t={t} beyond a_K_max = {spec.t_max}")
    if t <= 1.0:
        return 0.0  # f vanishes on [0, 1]
    grid = evaluation_grid(spec, t, n_plateau, n_ramp)
    fv = eval_f(spec, grid.nodes)
    return kernels.abel_at_end(grid.nodes, fv, spec.alpha)


def sample_u(spec: CounterexampleSpec, t_end: float, n_plateau: int = 64,
             n_ramp: int = 8, n_gap: int = 64) -> tuple[SampledPath, SampledPath]:
    """``(f, u)`` sampled on a refined grid over ``[0, t_end]``."""
    grid = evaluation_grid(spec, t_end, n_plateau, n_ramp, n_gap)
    f = SampledPath(grid, eval_f(spec, grid.nodes))
    u = SampledPath(grid, fractional_integral_all(f, spec.order))
    return f, u


def _upper_tail(alpha: float, delta: float) -> float:
    # int_{1-delta}^1 y^-a (1-y)^(a-1) dy, normalised; avoids forming 1 - delta
    return _ibeta(alpha, 1.0 - alpha, delta)


def admissibility(spec: CounterexampleSpec, N: int) -> tuple[float, float, bool]:
    """``(tail_integral, a_{2N}(a_1 - 1), admissible)`` for one ``N``."""
    if 2 * N + 1 > spec.K_max:
        raise RangeError(f"N={N} needs a_{2 * N + 1}, K_max={spec.K_max}")
    delta = spec.eps_k(N) / spec.a_k(2 * N + 1)
    tail = pi_csc(spec.order) * _upper_tail(spec.alpha, delta)
    growth = spec.a_k(2 * N) * (spec.a_k(1) - 1.0)
    return tail, growth, bool(tail < spec.eta_alpha / 4.0 and growth >= 2.0)


def _check_alpha(spec: CounterexampleSpec, allow_extreme: bool) -> None:
    if not allow_extreme and not 0.2 <= spec.alpha <= 0.8:
        raise ValueError(
            f"alpha={spec.alpha} outside [0.2, 0.8]; pass allow_extreme=True")


def admissible_Ns(spec: CounterexampleSpec, allow_extreme: bool = False) -> list[int]:
    """Every admissible ``N`` with ``2N + 2 <= K_max`` and ``a_{2N+2} <= 1e12``."""
    _check_alpha(spec, allow_extreme)
    out = []
    N = 0
    while 2 * N + 2 <= spec.K_max and spec.a_k(2 * N + 2) <= A_CAP:
        if admissibility(spec, N)[2]:
            out.append(N)
        N += 1
    return out


def find_admissible_N(spec: CounterexampleSpec, allow_extreme: bool = False) -> int:
    Ns = admissible_Ns(spec, allow_extreme)
    if not Ns:
        raise RangeError(
            f"no admissible N with a_(2N+2) materialised (K_max={spec.K_max})")
    return Ns[0]


def oscillation_gap(spec: CounterexampleSpec, N: int, n_plateau: int = 256,
                    n_ramp: int = 16) -> float:
    """``u(a_{2N+2}) - u(a_{2N+1})``."""
    if 2 * N + 2 > spec.K_max:
        raise RangeError(f"gap at N={N} needs a_{2 * N + 2}, K_max={spec.K_max}")
    hi = eval_u(spec, spec.a_k(2 * N + 2), n_plateau, n_ramp)
    lo = eval_u(spec, spec.a_k(2 * N + 1), n_plateau, n_ramp)
    return hi - lo


def gap_certificate(spec: CounterexampleSpec) -> float:
    """Upper bound ``-eta/4`` on ``liminf u - limsup u``."""
    return -spec.eta_alpha / 4.0


def caputo_residual(spec: CounterexampleSpec, t_end: float, n_plateau: int = 64,
                    n_ramp: int = 8, n_gap: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Caputo derivative of sampled ``u`` and ``Gamma(alpha) f`` on the same grid."""
    f, u = sample_u(spec, t_end, n_plateau, n_ramp, n_gap)
    w = caputo_weights(spec.order, u.grid)
    du = caputo_apply_all(w, u)
    return du, math.gamma(spec.alpha) * f.values
