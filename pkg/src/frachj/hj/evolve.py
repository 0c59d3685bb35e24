"""Time stepping for the fractional eikonal equation.

Each step of the implicit L1 scheme is the stationary problem
``d u + a |Du|^m = f + d u_prev - hist`` with the Godunov upwind gradient;
it is solved to a fixed tolerance by alternating-direction Gauss-Seidel
sweeps. The local update is monotone, so the scheme needs no step
restriction. The explicit variant evaluates the gradient at the previous
step and is only monotone under a CFL condition, which is checked up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from frachj import kernels
from frachj.core import TimeGrid
from frachj.hj.torus import EikonalProblem

SWEEP_TOL = 1e-10
MAX_SWEEPS = 1000


class CFLError(ValueError):
    """The explicit step violates the monotonicity condition."""


class SweepError(ArithmeticError):
    """Gauss-Seidel sweeps did not reach the tolerance."""


@dataclass(frozen=True, eq=False)
class SpaceTimeSolution:
    """Grid values of the shifted problem (``min f = 0``); ``states[0]`` is ``g``."""

    problem: EikonalProblem
    tgrid: TimeGrid
    states: np.ndarray
    sweeps: np.ndarray

    def at(self, t: float) -> np.ndarray:
        j = int(np.searchsorted(self.tgrid.nodes, t))
        if j > self.tgrid.M or not math.isclose(self.tgrid.nodes[j], t, rel_tol=1e-12, abs_tol=0.0):
            if not (t == 0.0 and j == 0):
                raise ValueError(f"t={t} is not a node of the time grid")
        return self.states[j]

    def original_states(self) -> np.ndarray:
        """Values for the unshifted ``f``: add ``f_shift`` times the discrete unit response."""
        w = unit_response(self.tgrid, self.problem.alpha)
        extra = w.reshape((-1,) + (1,) * self.problem.grid.dim)
        return self.states + self.problem.f_shift * extra


def unit_response(tgrid: TimeGrid, alpha: float) -> np.ndarray:
    """Discrete solution of ``d^alpha w = 1``, ``w(0) = 0``, on the same scheme."""
    nodes = tgrid.nodes
    M = tgrid.M
    w = np.zeros(M + 1)
    inc = np.zeros((M, 1))
    g2a = math.gamma(2.0 - alpha)
    for j in range(1, M + 1):
        d = (nodes[j] - nodes[j - 1]) ** (-alpha) / g2a
        hist = float(kernels.l1_history(nodes, j, alpha, inc)[0])
        w[j] = w[j - 1] + (1.0 - hist) / d
        inc[j - 1, 0] = w[j] - w[j - 1]
    return w


def godunov_norm(u: np.ndarray, h: float) -> np.ndarray:
    """Upwind gradient magnitude ``|Du|`` on the periodic grid."""
    sq = np.zeros_like(u)
    for ax in range(u.ndim):
        nmin = np.minimum(np.roll(u, 1, axis=ax), np.roll(u, -1, axis=ax))
        p = np.maximum(u - nmin, 0.0) / h
        sq = sq + p * p
    return np.sqrt(sq)


def gradient_bound(problem: EikonalProblem) -> float:
    """A priori bound on ``|Du|`` used in the CFL test."""
    return problem.lip_g + (problem.f_sup / problem.a_min) ** (1.0 / problem.m)


def cfl_number(problem: EikonalProblem, tgrid: TimeGrid) -> float:
    """``max_j dt_j^a Gamma(2-a) m a_max G^(m-1) sqrt(dim) / h``; explicit steps need <= 1."""
    a = problem.alpha
    dt = float(np.max(np.diff(tgrid.nodes)))
    G = gradient_bound(problem)
    lip = problem.m * problem.a_max * (G ** (problem.m - 1.0) if problem.m > 1 else 1.0)
    return dt ** a * math.gamma(2.0 - a) * lip * math.sqrt(problem.grid.dim) / problem.grid.h


def evolve(problem: EikonalProblem, tgrid: TimeGrid, method: str = "sweep",
           tol: float = SWEEP_TOL, max_sweeps: int = MAX_SWEEPS) -> SpaceTimeSolution:
    """March the L1 scheme over ``tgrid``; ``method`` is ``"sweep"`` or ``"explicit"``."""
    if method not in ("sweep", "explicit"):
        raise ValueError(f"method must be 'sweep' or 'explicit', got {method!r}")
    if method == "explicit":
        cfl = cfl_number(problem, tgrid)
        if cfl > 1.0:
            raise CFLError(f"CFL number {cfl:.4g} exceeds 1; refine the time grid "
                           "or use method='sweep'")
    grid = problem.grid
    alpha = problem.alpha
    nodes = tgrid.nodes
    M = tgrid.M
    shape = grid.shape
    states = np.empty((M + 1,) + shape)
    states[0] = problem.g
    inc = np.zeros((M, grid.size))
    sweeps = np.zeros(M + 1, dtype=np.int64)
    g2a = math.gamma(2.0 - alpha)
    a = np.ascontiguousarray(problem.a)
    f = problem.f
    h, m = grid.h, float(problem.m)
    sweep = kernels.sweep_1d if grid.dim == 1 else kernels.sweep_2d
    for j in range(1, M + 1):
        d = (nodes[j] - nodes[j - 1]) ** (-alpha) / g2a
        hist = kernels.l1_history(nodes, j, alpha, inc).reshape(shape)
        prev = states[j - 1]
        rhs = f + d * prev - hist
        if method == "explicit":
            u = (rhs - a * godunov_norm(prev, h) ** m) / d
            used = 1
        else:
            u = np.ascontiguousarray(prev.copy())
            used = sweep(np.ascontiguousarray(rhs), d, a, m, h, u, tol, max_sweeps)
            if used < 0:
                raise SweepError(f"no convergence within {max_sweeps} sweeps at step {j}")
        states[j] = u
        sweeps[j] = used
        inc[j - 1] = (u - prev).ravel()
    return SpaceTimeSolution(problem, tgrid, states, sweeps)
