"""Periodic grids, a small catalog of data functions, and the eikonal problem."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from frachj.core import FractionalOrder, OrderLike, as_order


@dataclass(frozen=True)
class TorusGrid:
    """``n`` points per axis on the unit torus, ``x_j = j h``, ``h = 1/n``."""

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8:
            raise ValueError(f"need n >= 8 points per axis, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    def axes(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape :attr:`shape`, one per axis."""
        x = self.axes()
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def point(self, index: int) -> np.ndarray:
        """Coordinates of the flat grid index ``index``."""
        idx = np.unravel_index(index, self.shape)
        return np.array([i * self.h for i in idx])

    def index_of(self, x) -> int:
        """Flat index of the grid point nearest to ``x`` (taken modulo 1)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if x.size != self.dim:
            raise ValueError(f"point must have {self.dim} coordinates")
        idx = np.round(np.mod(x, 1.0) * self.n).astype(int) % self.n
        return int(np.ravel_multi_index(tuple(idx), self.shape))


def periodic_distance(grid: TorusGrid, x0) -> np.ndarray:
    """Euclidean distance on the torus from every grid point to ``x0``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    sq = np.zeros(grid.shape)
    for c, p in zip(grid.coords(), x0):
        d = np.abs(np.mod(c - p + 0.5, 1.0) - 0.5)
        sq = sq + d * d
    return np.sqrt(sq)


def _segment_distances(grid: TorusGrid, p0, p1) -> np.ndarray:
    """Distance to every periodic image of the segment, stacked on axis 0."""
    p0 = np.atleast_1d(np.asarray(p0, dtype=np.float64))
    p1 = np.atleast_1d(np.asarray(p1, dtype=np.float64))
    X = np.stack(grid.coords(), axis=-1)
    seg = p1 - p0
    L2 = float(seg @ seg)
    out = []
    for shift in itertools.product((-2, -1, 0, 1), repeat=grid.dim):
        q0 = p0 + np.array(shift, dtype=np.float64)
        rel = X - q0
        if L2 > 0.0:
            s = np.clip((rel @ seg) / L2, 0.0, 1.0)
            diff = rel - s[..., None] * seg
        else:
            diff = rel
        out.append(np.sqrt(np.sum(diff * diff, axis=-1)))
    return np.stack(out)


def segment_distance(grid: TorusGrid, p0, p1) -> np.ndarray:
    """Periodic distance ``d_[p0, p1](x)`` to the straight segment from p0 to p1."""
    return _segment_distances(grid, p0, p1).min(axis=0)


def segment_ridge(grid: TorusGrid, p0, p1, width: float | None = None) -> np.ndarray:
    """Grid points within ``width`` (default h) of the non-smooth set of the distance."""
    width = grid.h if width is None else width
    d = np.sort(_segment_distances(grid, p0, p1), axis=0)
    # two periodic images equidistant: the distance has a ridge there
    return (d[1] - d[0]) < 2.0 * width


def discrete_lipschitz(grid: TorusGrid, g: np.ndarray) -> float:
    """Upper bound on the slope of the piecewise-linear interpolant of ``g``."""
    slopes = []
    for ax in range(grid.dim):
        slopes.append(np.max(np.abs(np.roll(g, -1, axis=ax) - g)) / grid.h)
    return float(math.sqrt(sum(s * s for s in slopes)))


# -- catalog -----------------------------------------------------------------

CATALOG_HELP = {
    "const:c": "constant c",
    "sin2": "sum over axes of sin^2(pi x_i)",
    "plateau:c:w": "max(0, |x - c|_T - w), zero on a ball of radius w around c",
    "tent:c:s": "s |x - c|_T",
    "abs_sin:s": "s * sum over axes of |sin(pi x_i)|",
}


def catalog(spec: str, grid: TorusGrid) -> np.ndarray:
    """Evaluate a named data function on ``grid``.

    Accepted names are listed in :data:`CATALOG_HELP`; centres are given per
    axis as a single number (same for every axis).
    """
    name, *args = str(spec).strip().split(":")
    try:
        vals = [float(v) for v in args]
    except ValueError:
        raise ValueError(f"bad numeric argument in function selector {spec!r}") from None
    coords = grid.coords()
    if name == "const" and len(vals) == 1:
        return np.full(grid.shape, vals[0])
    if name == "sin2" and not vals:
        return sum(np.sin(np.pi * c) ** 2 for c in coords)
    if name == "abs_sin" and len(vals) == 1:
        return vals[0] * sum(np.abs(np.sin(np.pi * c)) for c in coords)
    if name == "plateau" and len(vals) == 2:
        c, w = vals
        return np.maximum(0.0, periodic_distance(grid, [c] * grid.dim) - w)
    if name == "tent" and len(vals) == 2:
        c, s = vals
        return s * periodic_distance(grid, [c] * grid.dim)
    raise ValueError(f"unknown function selector {spec!r}; known: {sorted(CATALOG_HELP)}")


@dataclass(frozen=True, eq=False)
class EikonalProblem:
    """``d^alpha u + a(x) |Du|^m = f(x)``, ``u(., 0) = g`` on the torus.

    ``f`` is shifted at construction so that ``min f = 0``; the shift is kept
    in :attr:`f_shift` and the ergodic constant of the unshifted problem is
    ``c = -f_shift``.
    """

    grid: TorusGrid
    a: np.ndarray
    f: np.ndarray
    g: np.ndarray
    m: float = 1.0
    order: FractionalOrder = field(default_factory=lambda: FractionalOrder(0.5))
    lip_g: float | None = None
    f_shift: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", as_order(self.order))
        shape = self.grid.shape
        arrs = {}
        for name in ("a", "f", "g"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.ndim == 0:
                v = np.full(shape, float(v))
            if v.shape != shape:
                raise ValueError(f"{name} has shape {v.shape}, expected {shape}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite values")
            arrs[name] = np.ascontiguousarray(v)
        if not np.min(arrs["a"]) > 0:
            raise ValueError("a must be bounded below by a positive constant")
        if not self.m >= 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        shift = float(np.min(arrs["f"]))
        f = arrs["f"] - shift
        for name, v in (("a", arrs["a"]), ("f", f), ("g", arrs["g"])):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "f_shift", self.f_shift + shift)
        lip = self.lip_g
        if lip is None:
            lip = discrete_lipschitz(self.grid, self.g)
        elif lip < 0:
            raise ValueError("lip_g must be nonnegative")
        object.__setattr__(self, "lip_g", float(lip))

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @property
    def c(self) -> float:
        """Ergodic constant of the problem as given (before the shift)."""
        return -self.f_shift

    @property
    def a_min(self) -> float:
        return float(np.min(self.a))

    @property
    def a_max(self) -> float:
        return float(np.max(self.a))

    @property
    def f_sup(self) -> float:
        return float(np.max(self.f))

    def with_g(self, g) -> "EikonalProblem":
        return EikonalProblem(self.grid, self.a, self.f, g, self.m, self.order,
                              None, self.f_shift)

    @classmethod
    def from_catalog(cls, dim: int, n: int, alpha: OrderLike, m: float = 1.0,
                     a: str = "const:1", f: str = "sin2", g: str = "const:0",
                     lip_g: float | None = None) -> "EikonalProblem":
        grid = TorusGrid(dim, n)
        return cls(grid, catalog(a, grid), catalog(f, grid), catalog(g, grid),
                   m, as_order(alpha), lip_g)
