"""Zero set of ``f`` and the stationary solution of ``a |Dv|^m = f``."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from frachj.hj.torus import EikonalProblem, TorusGrid


def aubry_set(f: np.ndarray, tol: float) -> np.ndarray:
    """Boolean mask of ``f <= min f + tol``."""
    f = np.asarray(f, dtype=np.float64)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return f <= f.min() + tol


@dataclass(frozen=True, eq=False)
class ErgodicSolution:
    """``c`` is for the shifted problem and therefore 0; ``v`` equals ``min g`` on ``Z``."""

    c: float
    v: np.ndarray
    Z: np.ndarray


def _neighbours(grid: TorusGrid):
    """Offsets and lengths of the stencil edges (8 neighbours in 2D)."""
    h = grid.h
    if grid.dim == 1:
        return [((-1,), h), ((1,), h)]
    out = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                out.append(((di, dj), h * math.hypot(di, dj)))
    return out


def solve_ergodic(problem: EikonalProblem, tol: float | None = None,
                  method: str = "godunov") -> ErgodicSolution:
    """Distance to the zero set of ``f`` in the metric ``rho = (f/a)^(1/m)``.

    ``method="godunov"`` solves ``|Dv| = rho`` off the zero set with the same
    upwind discretisation the time stepper uses, so the evolution converges
    to it exactly. ``method="dijkstra"`` is the graph shortest path with edge
    cost ``length * (rho_i + rho_j) / 2`` (8 neighbours in 2D), ties broken
    by the lower flat index.
    """
    grid = problem.grid
    if tol is None:
        tol = grid.h ** 2
    Z = aubry_set(problem.f, tol)
    rho_grid = (problem.f / problem.a) ** (1.0 / problem.m)
    if method == "godunov":
        v = _stationary_sweeps(grid, rho_grid, Z, 1e-14, 10000)
        return ErgodicSolution(0.0, v.reshape(grid.shape) + float(problem.g.min()), Z)
    if method != "dijkstra":
        raise ValueError(f"method must be 'godunov' or 'dijkstra', got {method!r}")
    rho = rho_grid.ravel()
    n, shape = grid.n, grid.shape
    stencil = _neighbours(grid)
    dist = np.full(grid.size, np.inf)
    heap = []
    for idx in np.flatnonzero(Z.ravel()):
        dist[idx] = 0.0
        heap.append((0.0, int(idx)))
    heapq.heapify(heap)
    done = np.zeros(grid.size, dtype=bool)
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        pos = np.unravel_index(u, shape)
        for off, length in stencil:
            nb = tuple((p + o) % n for p, o in zip(pos, off))
            v = int(np.ravel_multi_index(nb, shape))
            if done[v]:
                continue
            cand = du + length * 0.5 * (rho[u] + rho[v])
            if cand < dist[v]:
                dist[v] = cand
                heapq.heappush(heap, (cand, v))
    return ErgodicSolution(0.0, dist.reshape(shape) + float(problem.g.min()), Z)


def _stationary_sweeps(grid: TorusGrid, rho: np.ndarray, Z: np.ndarray,
                       tol: float, max_sweeps: int) -> np.ndarray:
    h = grid.h
    v = np.where(Z, 0.0, np.inf)
    n = grid.n
    if grid.dim == 1:
        vv, r, z = v.tolist(), rho.tolist(), Z.tolist()
        for sweep in range(max_sweeps):
            change = 0.0
            for i in (range(n) if sweep % 2 == 0 else range(n - 1, -1, -1)):
                if z[i]:
                    continue
                new = min(vv[i - 1], vv[i + 1 - n]) + h * r[i]
                if new < vv[i]:
                    change = max(change, vv[i] - new if vv[i] < np.inf else np.inf)
                    vv[i] = new
            if change <= tol:
                return np.array(vv)
        raise ArithmeticError("stationary sweeps did not converge")
    vv, r, z = v.tolist(), rho.tolist(), Z.tolist()
    asc, desc = range(n), range(n - 1, -1, -1)
    orders = [(asc, asc), (desc, desc), (desc, asc), (asc, desc)]
    for sweep in range(max_sweeps):
        change = 0.0
        ri, rj = orders[sweep % 4]
        for i in ri:
            row_m, row_p, row = vv[i - 1], vv[i + 1 - n], vv[i]
            for j in rj:
                if z[i][j]:
                    continue
                a = min(row_m[j], row_p[j])
                b = min(row[j - 1], row[j + 1 - n])
                hr = h * r[i][j]
                if abs(a - b) >= hr:
                    new = min(a, b) + hr
                else:
                    new = 0.5 * (a + b + math.sqrt(2.0 * hr * hr - (a - b) ** 2))
                if new < row[j]:
                    change = max(change, row[j] - new if row[j] < np.inf else np.inf)
                    row[j] = new
        if change <= tol:
            return np.array(vv)
    raise ArithmeticError("stationary sweeps did not converge")
