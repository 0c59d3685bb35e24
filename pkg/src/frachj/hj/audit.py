"""Numerical audits of the evolution: time regularity, barriers, decay on the zero set.

Also the explicit supersolution ladder built from the relaxation solution
``E(t)`` and the optimised decay rate for zero sets of box dimension ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from frachj import kernels
from frachj.core import (GridMismatchError, OrderLike, SampledPath, as_order,
                         caputo_apply_all, caputo_weights)
from frachj.fode import FodeSolution
from frachj.hj.ergodic import ErgodicSolution
from frachj.hj.evolve import SpaceTimeSolution, godunov_norm
from frachj.hj.torus import (EikonalProblem, TorusGrid, periodic_distance,
                             segment_distance, segment_ridge)


class AssumptionError(ValueError):
    """Input violates a hypothesis of the check (reported, never silently passed)."""


def holder_seminorm_time(solution: SpaceTimeSolution, horizon: float | None = None) -> float:
    """``max |u(x,s) - u(x,t)| / |s - t|^alpha`` over nodes ``<= horizon``."""
    nodes = solution.tgrid.nodes
    K = len(nodes) if horizon is None else int(np.searchsorted(nodes, horizon * (1 + 1e-12), "right"))
    if K < 3:
        raise ValueError("need at least three time nodes")
    states = np.ascontiguousarray(solution.states[:K].reshape(K, -1))
    return float(kernels.holder_max(states, np.ascontiguousarray(nodes[:K]), solution.problem.alpha))


def barrier_constant(problem: EikonalProblem) -> float:
    """``(sup f + max a Lip(g)^m) / Gamma(1 + alpha)`` for the shifted ``f``."""
    return (problem.f_sup + problem.a_max * problem.lip_g ** problem.m) / math.gamma(1.0 + problem.alpha)


def barrier_margins(solution: SpaceTimeSolution) -> tuple[float, float]:
    """Worst margins of ``g - C t^a <= u <= g + C t^a`` (negative means violated)."""
    p = solution.problem
    C = barrier_constant(p)
    ta = (C * solution.tgrid.nodes ** p.alpha).reshape((-1,) + (1,) * p.grid.dim)
    u, g = solution.states, p.g
    return float(np.min(u - (g - ta))), float(np.min((g + ta) - u))


def asymptotic_gap(solution: SpaceTimeSolution, erg: ErgodicSolution, t: float) -> float:
    """``sup_x |u(x,t) - v(x)|`` for the shifted problem (its ``c`` is 0)."""
    return float(np.max(np.abs(solution.at(t) - erg.v)))


# -- constants of the ladder construction ------------------------------------


def path_length(anchors) -> float:
    """Length of the polygonal path through ``anchors`` (rows are points)."""
    pts = np.asarray(anchors, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def coercivity(problem: EikonalProblem) -> tuple[float, float]:
    """``(nu, k)`` with ``a |p|^m >= nu |p|^k``."""
    return problem.a_min, float(problem.m)


def growth_constant(problem: EikonalProblem) -> float:
    """``C_H`` with ``|p|^m / C_H - C_H <= a |p|^m <= C_H (|p|^m + 1)``."""
    return max(2.0, 1.0 / problem.a_min, problem.a_max)


def ladder_M(problem: EikonalProblem, L: float, ell: float) -> float:
    CH = growth_constant(problem)
    N = problem.grid.dim
    return L + CH * CH + CH * problem.f_sup + L * CH * (math.sqrt(N) + ell)


def ladder_A(problem: EikonalProblem, L: float, ell: float) -> float:
    """Relaxation rate for ``E``: ``nu L^(k-1) / (sqrt(N) + ell)``, capped at 1."""
    if not L > 0:
        raise ValueError("L must be positive")
    nu, k = coercivity(problem)
    return min(1.0, nu * L ** (k - 1.0) / (math.sqrt(problem.grid.dim) + ell))


# -- decay on the zero set ----------------------------------------------------


@dataclass(frozen=True)
class AubryReport:
    lower_margin: float
    upper_margin: float
    violations: int
    assumption_ok: bool
    message: str

    @property
    def ok(self) -> bool:
        return self.assumption_ok and self.violations == 0


def _e_values(E, tgrid) -> np.ndarray:
    path = E.path if isinstance(E, FodeSolution) else E
    if not path.grid.same_as(tgrid):
        raise GridMismatchError("E must be sampled on the time grid of the solution")
    return path.values


def aubry_decay_check(solution: SpaceTimeSolution, erg: ErgodicSolution, E,
                      ell_gamma: float, tol: float = 1e-10) -> AubryReport:
    """``min g <= u(z,t) <= min g + Lip(g) ell E(t)`` for ``z`` in ``Z`` at every node."""
    if ell_gamma < 0:
        raise ValueError("ell_gamma must be nonnegative")
    p = solution.problem
    Ev = _e_values(E, solution.tgrid)
    g = p.g
    gmin = float(g.min())
    argmin = g <= gmin + 1e-12 * max(1.0, abs(gmin))
    assumption_ok = bool(np.any(argmin & erg.Z))
    uz = solution.states[:, erg.Z]
    lower = uz - gmin
    upper = (gmin + p.lip_g * ell_gamma * Ev)[:, None] - uz
    viol = int(np.sum(lower < -tol) + np.sum(upper < -tol))
    msg = "ok" if assumption_ok else "argmin g does not meet the zero set of f"
    if viol:
        msg = f"{viol} violations" + ("" if assumption_ok else "; " + msg)
    return AubryReport(float(lower.min()), float(upper.min()), viol, assumption_ok, msg)


# -- supersolution ladder ------------------------------------------------------


def _anchor_array(grid: TorusGrid, anchors) -> np.ndarray:
    pts = np.asarray(anchors, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None] if grid.dim == 1 else pts[None, :]
    if pts.shape[1] != grid.dim or pts.shape[0] < 2:
        raise ValueError(f"need at least two anchors with {grid.dim} coordinates each")
    return pts


def ladder_profile(grid: TorusGrid, anchors, i: int, L: float, M: float) -> tuple[np.ndarray, np.ndarray]:
    """``(c1, c2)`` with ``U_i(x, t) = c1(x) E(t) + c2(x)``."""
    pts = _anchor_array(grid, anchors)
    if not 0 <= i < pts.shape[0] - 1:
        raise ValueError(f"segment index i={i} out of range")
    walked = float(np.sum(np.linalg.norm(np.diff(pts[: i + 1], axis=0), axis=1)))
    c1 = L * (walked + periodic_distance(grid, pts[i]))
    c2 = M * segment_distance(grid, pts[i], pts[i + 1])
    return c1, c2


@dataclass(frozen=True)
class ResidualReport:
    min_residual: float
    residual_at_anchor: float
    excluded: int
    L: float
    M: float


def supersolution_residual(problem: EikonalProblem, erg: ErgodicSolution, anchors, E,
                           i: int = 0, L: float | None = None, M: float | None = None,
                           ell_gamma: float | None = None) -> ResidualReport:
    """Discrete ``d^a U_i + a |DU_i|^m - f`` over all positive time nodes.

    Points within ``h`` of the segment endpoints or of the ridge sets of the
    two distance functions are left out of the minimum; the value at the
    anchor ``x_i`` (a grid point) is reported separately.
    """
    grid = problem.grid
    pts = _anchor_array(grid, anchors)
    idx = [grid.index_of(x) for x in pts]
    for x, j in zip(pts, idx):
        on_grid = np.allclose(grid.point(j), np.mod(x, 1.0), atol=1e-12)
        if not (on_grid and erg.Z.ravel()[j]):
            raise AssumptionError(f"anchor {x.tolist()} is not a grid point of the zero set")
    ell = path_length(pts) if ell_gamma is None else float(ell_gamma)
    L = problem.lip_g if L is None else float(L)
    if not L > 0:
        raise ValueError("L must be positive")
    M = ladder_M(problem, L, ell) if M is None else float(M)
    path: SampledPath = E.path if isinstance(E, FodeSolution) else E
    Ev = path.values
    dE = caputo_apply_all(caputo_weights(problem.order, path.grid), path)
    c1, c2 = ladder_profile(grid, pts, i, L, M)

    h = grid.h
    excl = np.zeros(grid.shape, dtype=bool)
    for x in (pts[i], pts[i + 1]):
        excl |= periodic_distance(grid, x) <= h * (1.0 + 1e-9)
    excl |= segment_ridge(grid, pts[i], pts[i + 1])
    excl |= segment_ridge(grid, pts[i], pts[i])
    keep = ~excl
    anchor = np.unravel_index(idx[i], grid.shape)

    worst = math.inf
    at_anchor = math.inf
    for j in range(1, len(Ev)):
        U = c1 * Ev[j] + c2
        r = c1 * dE[j] + problem.a * godunov_norm(U, h) ** problem.m - problem.f
        if keep.any():
            worst = min(worst, float(r[keep].min()))
        at_anchor = min(at_anchor, float(r[anchor]))
    return ResidualReport(worst, at_anchor, int(excl.sum()), L, M)


# -- rate for fractal zero sets ----------------------------------------------


@dataclass(frozen=True)
class RateResult:
    eps_opt: float
    bound: float
    exponent: float
    measured_exponent: float
    decaying: bool


def _rate_min(D: float, alpha: float, t: float) -> tuple[float, float]:
    if D == 1.0:
        return 0.0, t ** (-alpha)
    q = 2.0 * (D - 1.0)
    eps = q ** (1.0 / (2.0 * D - 1.0)) * t ** (-2.0 * alpha / (2.0 * D - 1.0))
    return eps, eps * t ** alpha * (1.0 + 1.0 / q)


def eikonal_rate(D: float, alpha: OrderLike, t: float) -> RateResult:
    """Minimise ``eps t^a + eps^(-2(D-1)) t^(-a)`` over ``eps > 0``.

    The minimum scales like ``t^(a (2D-3)/(2D-1))``; the measured exponent
    compares the closed form at ``t`` and ``2t``.
    """
    if not D >= 1.0:
        raise ValueError(f"D must be >= 1, got {D}")
    if not t > 0:
        raise ValueError("t must be positive")
    a = as_order(alpha).alpha
    eps, bound = _rate_min(D, a, t)
    _, bound2 = _rate_min(D, a, 2.0 * t)
    exponent = a * (2.0 * D - 3.0) / (2.0 * D - 1.0)
    measured = math.log2(bound2 / bound)
    return RateResult(eps, bound, exponent, measured, exponent < 0.0)
