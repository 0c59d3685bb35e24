"""Discrete Caputo operators on a time grid.

The Caputo derivative of order ``alpha`` in (0, 1) is

.. math::

    \\partial_t^\\alpha \\phi(t) = \\frac{1}{\\Gamma(1-\\alpha)}
        \\int_0^t \\frac{\\phi'(s)}{(t-s)^\\alpha} \\, ds,

discretised here with the L1 scheme (piecewise-linear interpolant of
``phi``, exact integration of the kernel on each cell). The Marchaud form
with constant extension to negative times is also available, split into a
far and a near part around ``t - delta``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np

from frachj import kernels


class GridMismatchError(ValueError):
    """Raised when a path and a set of weights live on different grids."""


@dataclass(frozen=True)
class FractionalOrder:
    """Order of a Caputo derivative, strictly inside (0, 1)."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or not math.isfinite(a):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


OrderLike = Union[FractionalOrder, float]


def as_order(alpha: OrderLike) -> FractionalOrder:
    if isinstance(alpha, FractionalOrder):
        return alpha
    return FractionalOrder(alpha)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time nodes ``0 = t_0 < ... < t_M``.

    Use :meth:`uniform`, :meth:`graded` or :meth:`from_nodes` rather than the
    raw constructor.
    """

    nodes: np.ndarray
    kind: str = "custom"
    gamma: float = 1.0

    def __post_init__(self) -> None:
        t = np.ascontiguousarray(self.nodes, dtype=np.float64)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a time grid needs at least two nodes")
        if t[0] != 0.0:
            raise ValueError("a time grid must start at t_0 = 0")
        if not np.all(np.diff(t) > 0.0) or not np.all(np.isfinite(t)):
            raise ValueError("time nodes must be finite and strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)

    @classmethod
    def uniform(cls, T: float, M: int) -> "TimeGrid":
        if M < 1:
            raise ValueError("M must be >= 1")
        if not T > 0:
            raise ValueError("horizon T must be positive")
        nodes = np.arange(M + 1, dtype=np.float64) * (T / M)
        nodes[-1] = T
        return cls(nodes, "uniform", 1.0)

    @classmethod
    def graded(cls, T: float, M: int, gamma: float | None = None,
               alpha: OrderLike | None = None) -> "TimeGrid":
        """Nodes ``T (j/M)**gamma``; ``gamma`` defaults to ``(2-alpha)/alpha``."""
        if M < 1:
            raise ValueError("M must be >= 1")
        if not T > 0:
            raise ValueError("horizon T must be positive")
        if gamma is None:
            if alpha is None:
                raise ValueError("graded grid needs gamma or alpha")
            a = as_order(alpha).alpha
            gamma = (2.0 - a) / a
        if gamma < 1.0:
            raise ValueError(f"grading exponent must be >= 1, got {gamma}")
        nodes = T * (np.arange(M + 1, dtype=np.float64) / M) ** gamma
        return cls(nodes, "graded", float(gamma))

    @classmethod
    def from_nodes(cls, nodes) -> "TimeGrid":
        return cls(np.asarray(nodes, dtype=np.float64), "custom", 1.0)

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return self.nodes.size

    def same_as(self, other: "TimeGrid") -> bool:
        return self is other or (
            self.nodes.shape == other.nodes.shape
            and bool(np.array_equal(self.nodes, other.nodes))
        )

    def locate(self, t: float) -> int:
        """Index of the cell ``[t_i, t_{i+1}]`` containing ``t``."""
        if t < 0.0 or t > self.T:
            raise ValueError(f"t={t} outside grid [0, {self.T}]")
        i = int(np.searchsorted(self.nodes, t, side="right")) - 1
        return min(i, self.M - 1)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values of a function at the nodes of a :class:`TimeGrid`.

    Between nodes the path is linear; for ``t < 0`` it equals ``values[0]``.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (len(self.grid),):
            raise ValueError(
                f"expected {len(self.grid)} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: TimeGrid,
                      fn: Callable[[np.ndarray], np.ndarray]) -> "SampledPath":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.interp(t, self.grid.nodes, self.values)
        return np.where(t < 0.0, self.values[0], out)

    def __add__(self, other: "SampledPath") -> "SampledPath":
        _check_same(self.grid, other.grid)
        return SampledPath(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> "SampledPath":
        return SampledPath(self.grid, c * self.values)

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        from frachj.io import emit_csv

        emit_csv({"t": self.grid.nodes, "value": self.values}, path)

    @classmethod
    def from_csv(cls, path) -> "SampledPath":
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["t", "value"]:
            raise ValueError(f"{path}: expected header t,value")
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=np.float64)
        return cls(TimeGrid.from_nodes(data[:, 0]), data[:, 1])


def _check_same(g1: TimeGrid, g2: TimeGrid) -> None:
    if not g1.same_as(g2):
        raise GridMismatchError("paths/weights are defined on different grids")


@dataclass(frozen=True, eq=False)
class CaputoWeights:
    """L1 weights ``w[j, i]`` acting on increments ``phi_{i+1} - phi_i``.

    Rows are produced on demand; for uniform grids all rows are slices of a
    single Toeplitz vector.
    """

    order: FractionalOrder
    grid: TimeGrid
    _rows: dict = field(default_factory=dict, repr=False)

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @cached_property
    def _toeplitz(self) -> np.ndarray | None:
        if self.grid.kind != "uniform":
            return None
        M = self.grid.M
        a = self.alpha
        q = np.arange(M + 1, dtype=np.float64)
        b = np.diff(q ** (1.0 - a))  # b_q = (q+1)^{1-a} - q^{1-a}
        dt = self.grid.T / M
        return b * (dt ** (-a) / math.gamma(2.0 - a))

    def row(self, j: int) -> np.ndarray:
        """Weights ``w[j, 0..j-1]`` for the target node ``t_j``."""
        if not 1 <= j <= self.grid.M:
            raise IndexError(f"row index must be in [1, {self.grid.M}], got {j}")
        b = self._toeplitz
        if b is not None:
            return b[j - 1::-1]
        w = self._rows.get(j)
        if w is None:
            w = kernels.l1_weights_row(self.grid.nodes, j, self.alpha)
            w.setflags(write=False)
            if len(self._rows) < 64:
                self._rows[j] = w
        return w

    def diagonal(self, j: int) -> float:
        """Coefficient of ``phi_j`` in the discrete derivative at ``t_j``."""
        t = self.grid.nodes
        dt = t[j] - t[j - 1]
        return dt ** (-self.alpha) / math.gamma(2.0 - self.alpha)


def caputo_weights(alpha: OrderLike, grid: TimeGrid) -> CaputoWeights:
    """L1 weights of order ``alpha`` on ``grid``."""
    if len(grid) < 2:
        raise ValueError("grid must have at least 2 nodes")
    return CaputoWeights(as_order(alpha), grid)


def caputo_apply(weights: CaputoWeights, path: SampledPath, j: int) -> float:
    """Discrete Caputo derivative of ``path`` at node ``t_j`` (``j >= 1``)."""
    _check_same(weights.grid, path.grid)
    if j == 0:
        raise ValueError("the discrete Caputo derivative is undefined at j = 0")
    w = np.ascontiguousarray(weights.row(j))
    inc = np.diff(path.values[: j + 1])
    return kernels.ordered_dot(w, inc)


def caputo_apply_all(weights: CaputoWeights, path: SampledPath) -> np.ndarray:
    """Discrete Caputo derivative at every node; entry 0 is set to 0."""
    _check_same(weights.grid, path.grid)
    return kernels.l1_apply_all(path.grid.nodes, path.values, weights.alpha)


def marchaud_constant(alpha: OrderLike) -> float:
    a = as_order(alpha).alpha
    return a / math.gamma(1.0 - a)


def marchaud_eval(path: SampledPath, t: float, delta: float,
                  alpha: OrderLike) -> tuple[float, float]:
    """Far and near parts of the Marchaud form at time ``t``.

    Returns ``(far, near)`` where ``far`` integrates
    ``(phi(t) - phi(s)) / (t - s)**(1 + alpha)`` over ``(-inf, t - delta)``
    and ``near`` over ``(t - delta, t)``, both multiplied by
    ``alpha / Gamma(1 - alpha)`` so that ``far + near`` is the Caputo
    derivative. The path is treated as piecewise linear on its grid, which
    makes every cell integral elementary.
    """
    a = as_order(alpha).alpha
    grid = path.grid
    if not 0.0 < t <= grid.T:
        raise ValueError(f"t={t} must lie in (0, {grid.T}]")
    if not 0.0 < delta < t:
        raise ValueError(f"delta={delta} must lie in (0, t={t})")
    nodes, vals = grid.nodes, path.values
    i = int(np.searchsorted(nodes, t, side="left")) - 1
    if delta < nodes[i + 1] - nodes[i]:
        raise ValueError(
            f"delta={delta} is below the grid cell width {nodes[i + 1] - nodes[i]} at t")
    phi_t = float(path(t))
    c = a / math.gamma(1.0 - a)

    # tail over (-inf, 0): phi(s) = phi(0)
    tail = (phi_t - vals[0]) * t ** (-a) / a

    s_split = t - delta
    # breakpoints in [0, t]
    inner = nodes[(nodes > 0.0) & (nodes < t)]
    pts = np.concatenate(([0.0], inner, [t]))
    # insert the split point
    pts = np.unique(np.concatenate((pts, [s_split])))
    far = tail
    near = 0.0
    for s0, s1 in zip(pts[:-1], pts[1:]):
        val = _marchaud_cell(path, t, phi_t, s0, s1, a)
        if s1 <= s_split:
            far += val
        else:
            near += val
    return c * far, c * near


def _marchaud_cell(path: SampledPath, t: float, phi_t: float,
                   s0: float, s1: float, a: float) -> float:
    """Integral of (phi(t) - phi(s)) / (t - s)^{1+a} over [s0, s1], phi linear."""
    p0, p1 = float(path(s0)), float(path(s1))
    slope = (p1 - p0) / (s1 - s0)
    # phi(t) - phi(s) = (phi(t) - p1) + slope * (s1 - s), with r = t - s
    r0, r1 = t - s0, t - s1
    c0 = phi_t - p1 - slope * (t - s1)  # phi(t) - phi(s) = c0 + slope * r
    if r1 == 0.0:
        # last cell: phi(t) = p1 so c0 = 0 and the integrand is slope * r^{-a}
        return slope * r0 ** (1.0 - a) / (1.0 - a)
    i_const = (r1 ** (-a) - r0 ** (-a)) / a
    i_lin = (r0 ** (1.0 - a) - r1 ** (1.0 - a)) / (1.0 - a)
    return c0 * i_const + slope * i_lin


def power_rule_constant(alpha: OrderLike, beta: float) -> float:
    """``Gamma(beta + 1) / Gamma(beta - alpha + 1)``."""
    a = as_order(alpha).alpha
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return math.exp(math.lgamma(beta + 1.0) - math.lgamma(beta - a + 1.0))


def fractional_integral(f: SampledPath, t: float, alpha: OrderLike) -> float:
    """``int_0^t f(z) (t - z)**(alpha - 1) dz`` with no ``1/Gamma(alpha)`` factor.

    ``f`` is treated as piecewise linear on its grid; each cell is integrated
    exactly against the kernel.
    """
    a = as_order(alpha).alpha
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t > f.grid.T:
        raise ValueError(f"t={t} beyond grid horizon {f.grid.T}")
    if t == 0.0:
        return 0.0
    nodes = f.grid.nodes
    k = int(np.searchsorted(nodes, t, side="left"))
    if k < nodes.size and nodes[k] == t:
        z = nodes[: k + 1]
        fz = f.values[: k + 1]
    else:
        z = np.append(nodes[:k], t)
        fz = np.append(f.values[:k], f(t))
    return kernels.abel_at_end(z, fz, a)


def fractional_integral_all(f: SampledPath, alpha: OrderLike) -> np.ndarray:
    """:func:`fractional_integral` evaluated at every node of ``f.grid``."""
    a = as_order(alpha).alpha
    return kernels.abel_all(f.grid.nodes, f.values, a)
