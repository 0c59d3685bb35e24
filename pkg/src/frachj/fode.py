"""The fractional relaxation equation ``d^alpha E + A |E|^k = 0, E(0) = 1``.

For ``k = 1`` the solution is ``E_alpha(-A t^alpha)``; for ``k > 1`` it
decays like ``t^(-alpha/k)``. The solver is the implicit L1 scheme with the
nonlinearity treated implicitly, which keeps every step positive and
nonincreasing on any grid (the L1 kernel weights decrease with distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from frachj import kernels
from frachj.core import (FractionalOrder, OrderLike, SampledPath, TimeGrid,
                         as_order, caputo_apply_all, caputo_weights)
from frachj.special import MittagLefflerParams, mittag_leffler

NEWTON_MAX = 50


class BracketError(ArithmeticError):
    """The scalar step equation has no root in ``(0, E_{j-1}]``."""


class EnvelopeError(ArithmeticError):
    """Decay envelope cannot be fitted over the computed range."""


@dataclass(frozen=True)
class FodeProblem:
    order: FractionalOrder
    A: float
    k: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", as_order(self.order))
        if not self.A > 0:
            raise ValueError(f"A must be positive, got {self.A}")
        if not self.k >= 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def alpha(self) -> float:
        return self.order.alpha


@dataclass(frozen=True, eq=False)
class FodeSolution:
    path: SampledPath
    problem: FodeProblem
    newton_fallbacks: int = 0

    @property
    def t(self) -> np.ndarray:
        return self.path.grid.nodes

    @property
    def E(self) -> np.ndarray:
        return self.path.values


def _solve_step(d: float, A: float, k: float, rhs: float, upper: float) -> tuple[float, bool]:
    """Root of ``d x + A x^k = rhs`` in ``(0, upper]``; flag marks bisection use."""
    g_up = d * upper + A * upper ** k - rhs
    if g_up < -1e-13 * max(rhs, 1.0):
        raise BracketError("step equation not bracketed; refine the time grid")
    if g_up <= 0.0:
        return upper, False
    if k == 1.0:
        return rhs / (d + A), False
    # convex increasing residual: Newton from the right end converges monotonically
    x = upper
    for _ in range(NEWTON_MAX):
        g = d * x + A * x ** k - rhs
        if g <= 0.0:
            # rounding put the iterate at or just left of the root
            return x, False
        dg = d + A * k * x ** (k - 1.0)
        x_new = x - g / dg
        if not x_new > 0.0:
            break
        if x - x_new <= 4e-16 * x:
            return x_new, False
        x = x_new
    lo, hi = 0.0, upper
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if d * mid + A * mid ** k - rhs > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 4e-16 * hi:
            break
    return hi, True


def solve_fode(problem: FodeProblem, grid: TimeGrid) -> FodeSolution:
    """Implicit L1 time stepping on ``grid``."""
    a = problem.alpha
    nodes = grid.nodes
    M = grid.M
    E = np.empty(M + 1)
    E[0] = 1.0
    inc = np.zeros((M, 1))
    g2a = math.gamma(2.0 - a)
    fallbacks = 0
    for j in range(1, M + 1):
        d = (nodes[j] - nodes[j - 1]) ** (-a) / g2a
        hist = float(kernels.l1_history(nodes, j, a, inc)[0])
        rhs = d * E[j - 1] - hist
        E[j], used = _solve_step(d, problem.A, problem.k, rhs, E[j - 1])
        fallbacks += used
        if not E[j] > 0.0:
            raise BracketError(f"nonpositive value at node {j}")
        inc[j - 1, 0] = E[j] - E[j - 1]
    return FodeSolution(SampledPath(grid, E), problem, fallbacks)


def exact_k1(alpha: OrderLike, A: float, t: float) -> float:
    """``E_alpha(-A t^alpha)``, the exact solution for ``k = 1``."""
    if not A > 0:
        raise ValueError("A must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return mittag_leffler(MittagLefflerParams(as_order(alpha)), -A * t ** as_order(alpha).alpha)


def exact_k1_path(alpha: OrderLike, A: float, grid: TimeGrid) -> SampledPath:
    return SampledPath(grid, np.array([exact_k1(alpha, A, float(t)) for t in grid.nodes]))


def residual(solution: FodeSolution) -> np.ndarray:
    """``d^alpha E + A E^k`` at every node (entry 0 is 0)."""
    p = solution.problem
    w = caputo_weights(p.order, solution.path.grid)
    r = caputo_apply_all(w, solution.path) + p.A * solution.E ** p.k
    r[0] = 0.0
    return r


def envelope_grid(alpha: OrderLike, t_end: float = 1e3, M_initial: int = 256,
                  per_decade: int = 400) -> TimeGrid:
    """Graded nodes on ``[0, 1]`` followed by log-uniform nodes up to ``t_end``."""
    head = TimeGrid.graded(1.0, M_initial, alpha=alpha).nodes
    decades = math.log10(t_end)
    if decades <= 0:
        return TimeGrid.from_nodes(head * t_end)
    n_tail = max(int(math.ceil(decades * per_decade)), 1)
    tail = np.logspace(0.0, decades, n_tail + 1)[1:]
    tail[-1] = t_end
    return TimeGrid.from_nodes(np.concatenate((head, tail)))


def tail_slope(solution: FodeSolution, t_from: float) -> float:
    """Least-squares slope of ``log E`` against ``log t`` over ``t >= t_from``."""
    t, E = solution.t, solution.E
    sel = t >= t_from
    if sel.sum() < 3:
        raise EnvelopeError("fewer than three nodes in the tail window")
    slope, _ = np.polyfit(np.log(t[sel]), np.log(E[sel]), 1)
    return float(slope)


@dataclass(frozen=True)
class Envelope:
    C_low: float
    C_high: float
    t_star: float
    slope: float


def decay_envelope(solution: FodeSolution, eps: float, t_star: float | None = None,
                   slope_slack: float = 0.05) -> Envelope:
    """Fit ``C_low t^(-a/k) <= E(t) <= C_high t^(-a/k + eps)`` for nodes ``>= t_star``.

    ``t_star`` defaults to one hundredth of the horizon. The fit is rejected
    when the tail slope falls outside
    ``[-a/k - slope_slack, -a/k + eps + slope_slack]``, which means the
    computed range does not show the algebraic decay regime.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    t, E = solution.t, solution.E
    T = float(t[-1])
    if T < 1e2:
        raise EnvelopeError(f"horizon {T} too short; need t_M >= 100")
    if t_star is None:
        t_star = T / 100.0
    p = solution.problem
    rate = p.alpha / p.k
    sel = t >= t_star
    if np.any(E[sel] <= 0.0):
        raise EnvelopeError("solution not positive on the tail")
    slope = tail_slope(solution, t_star)
    if not (-rate - slope_slack <= slope <= -rate + eps + slope_slack):
        raise EnvelopeError(
            f"tail slope {slope:.4f} outside [{-rate - slope_slack:.4f}, "
            f"{-rate + eps + slope_slack:.4f}]")
    C_low = float(np.min(E[sel] * t[sel] ** rate))
    C_high = float(np.max(E[sel] * t[sel] ** (rate - eps)))
    return Envelope(C_low, C_high, float(t_star), slope)


def ml_bounds(alpha: OrderLike, x) -> tuple[np.ndarray, np.ndarray]:
    """``(1/(Gamma(1-a) x), Gamma(1+a)/x)``.

    The upper value bounds ``E_a(-x)`` for every ``x > 0``. The lower value
    is only the leading asymptotic term: for ``a <= 1/2`` it lies above
    ``E_a(-x)``. :func:`ml_bounds_sharp` gives a valid two-sided bracket.
    """
    a = as_order(alpha).alpha
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / (math.gamma(1.0 - a) * x), math.gamma(1.0 + a) / x


def ml_bounds_sharp(alpha: OrderLike, x) -> tuple[np.ndarray, np.ndarray]:
    """``1/(1 + Gamma(1-a) x) <= E_a(-x) <= 1/(1 + x/Gamma(1+a))``, valid for all ``x >= 0``."""
    a = as_order(alpha).alpha
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / (1.0 + math.gamma(1.0 - a) * x), 1.0 / (1.0 + x / math.gamma(1.0 + a))
