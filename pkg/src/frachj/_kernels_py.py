"""NumPy implementations of the history-sum kernels.

Same signatures and numerics as the compiled ``_kernels`` extension; used
when the extension is unavailable or ``FRACHJ_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def set_num_threads(n: int) -> None:
    """No-op; the NumPy path is single threaded."""


def _cell_weights(t_j: float, left: np.ndarray, right: np.ndarray,
                  alpha: float) -> np.ndarray:
    # ((t_j - left)^{1-a} - (t_j - right)^{1-a}) / (Gamma(2-a) * (right - left))
    s0 = t_j - left
    s1 = t_j - right
    h = right - left
    e = h / s0
    with np.errstate(divide="ignore"):
        lr = np.log1p(-e)
    num = s0 ** (1.0 - alpha) * -np.expm1((1.0 - alpha) * lr)
    num = np.where(s1 <= 0.0, s0 ** (1.0 - alpha), num)
    return num / (math.gamma(2.0 - alpha) * h)


def l1_weights_row(nodes: np.ndarray, j: int, alpha: float) -> np.ndarray:
    return _cell_weights(nodes[j], nodes[:j], nodes[1:j + 1], alpha)


def ordered_dot(w: np.ndarray, x: np.ndarray) -> float:
    acc = 0.0
    for wi, xi in zip(w.tolist(), x.tolist()):
        acc += wi * xi
    return acc


def l1_apply_all(nodes: np.ndarray, values: np.ndarray, alpha: float) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=np.float64)
    inc = np.diff(np.asarray(values, dtype=np.float64))
    out = np.zeros(nodes.size)
    for j in range(1, nodes.size):
        out[j] = np.dot(l1_weights_row(nodes, j, alpha), inc[:j])
    return out


def l1_history(nodes: np.ndarray, j: int, alpha: float,
               increments: np.ndarray) -> np.ndarray:
    """``sum_{i < j-1} w[j, i] * increments[i]`` (all but the last cell)."""
    if j < 2:
        return np.zeros(increments.shape[1:])
    w = _cell_weights(nodes[j], nodes[:j - 1], nodes[1:j], alpha)
    flat = increments[:j - 1].reshape(j - 1, -1)
    return (w @ flat).reshape(increments.shape[1:])


def _abel_moments(t: float, left: np.ndarray, right: np.ndarray,
                  alpha: float) -> tuple[np.ndarray, np.ndarray]:
    # weights (P, Q) of f(left), f(right) for int f(z) (t - z)^{a-1} dz
    s0 = t - left
    h = right - left
    e = h / s0
    with np.errstate(divide="ignore"):
        lr = np.log1p(-e)
    last = (t - right) <= 0.0
    a0 = np.where(last, 1.0 / alpha, -np.expm1(alpha * lr) / alpha)
    a1 = np.where(last, 1.0 / (alpha + 1.0), -np.expm1((alpha + 1.0) * lr) / (alpha + 1.0))
    i0 = s0 ** alpha * a0
    q = s0 ** (alpha + 1.0) * (a0 - a1) / h
    return i0 - q, q


def abel_at_end(z: np.ndarray, fz: np.ndarray, alpha: float) -> float:
    z = np.asarray(z, dtype=np.float64)
    fz = np.asarray(fz, dtype=np.float64)
    if z.size < 2:
        return 0.0
    p, q = _abel_moments(z[-1], z[:-1], z[1:], alpha)
    return float(np.dot(p, fz[:-1]) + np.dot(q, fz[1:]))


def abel_all(nodes: np.ndarray, fvals: np.ndarray, alpha: float) -> np.ndarray:
    out = np.zeros(nodes.size)
    for j in range(1, nodes.size):
        out[j] = abel_at_end(nodes[: j + 1], fvals[: j + 1], alpha)
    return out


def _local_1d(r: float, d: float, a: float, m: float, h: float, nmin: float) -> float:
    u = r / d
    if u <= nmin:
        return u
    if m == 1.0:
        return (r + a * nmin / h) / (d + a / h)
    # convex increasing residual: Newton from the right stays above the root
    for _ in range(100):
        p = (u - nmin) / h
        phi = d * u + a * p ** m - r
        dphi = d + a * m * p ** (m - 1.0) / h
        step = phi / dphi
        u_new = u - step
        if u_new <= nmin:
            u_new = 0.5 * (u + nmin)
        if abs(u_new - u) <= 1e-15 * (1.0 + abs(u)):
            return u_new
        u = u_new
    return u


def sweep_1d(rhs: np.ndarray, d: float, a: np.ndarray, m: float, h: float,
             u: np.ndarray, tol: float, max_sweeps: int) -> int:
    """Gauss-Seidel sweeps for ``d u + a ((u - min nbr)^+ / h)^m = rhs``.

    ``u`` is updated in place; returns the number of sweeps used, or -1 if
    ``max_sweeps`` was exhausted.
    """
    n = u.size
    r = rhs.tolist()
    av = a.tolist()
    uu = u.tolist()
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        order = range(n) if sweep % 2 == 1 else range(n - 1, -1, -1)
        for i in order:
            left = uu[i - 1]
            right = uu[i + 1 - n]
            nmin = left if left < right else right
            new = _local_1d(r[i], d, av[i], m, h, nmin)
            diff = abs(new - uu[i])
            if diff > change:
                change = diff
            uu[i] = new
        if change <= tol:
            u[:] = uu
            return sweep
    u[:] = uu
    return -1


def _local_2d(r: float, d: float, a: float, m: float, h: float,
              nx: float, ny: float) -> float:
    u = r / d
    lo = nx if nx < ny else ny
    if u <= lo:
        return u
    for _ in range(200):
        px = (u - nx) / h if u > nx else 0.0
        py = (u - ny) / h if u > ny else 0.0
        g = math.sqrt(px * px + py * py)
        phi = d * u + a * g ** m - r
        if g > 0.0:
            dg = (px + py) / (h * g)
            dphi = d + a * m * g ** (m - 1.0) * dg
        else:
            dphi = d
        u_new = u - phi / dphi
        if u_new <= lo:
            u_new = 0.5 * (u + lo)
        if abs(u_new - u) <= 1e-15 * (1.0 + abs(u)):
            return u_new
        u = u_new
    return u


def sweep_2d(rhs: np.ndarray, d: float, a: np.ndarray, m: float, h: float,
             u: np.ndarray, tol: float, max_sweeps: int) -> int:
    n0, n1 = u.shape
    r = rhs.tolist()
    av = a.tolist()
    uu = u.tolist()
    orders = [
        (range(n0), range(n1)),
        (range(n0 - 1, -1, -1), range(n1 - 1, -1, -1)),
        (range(n0 - 1, -1, -1), range(n1)),
        (range(n0), range(n1 - 1, -1, -1)),
    ]
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        ri, rj = orders[(sweep - 1) % 4]
        for i in ri:
            row_m = uu[i - 1]
            row_p = uu[i + 1 - n0]
            row = uu[i]
            for j in rj:
                a1, a2 = row_m[j], row_p[j]
                nx = a1 if a1 < a2 else a2
                b1, b2 = row[j - 1], row[j + 1 - n1]
                ny = b1 if b1 < b2 else b2
                new = _local_2d(r[i][j], d, av[i][j], m, h, nx, ny)
                diff = abs(new - row[j])
                if diff > change:
                    change = diff
                row[j] = new
        if change <= tol:
            u[:] = uu
            return sweep
    u[:] = uu
    return -1


def holder_max(states: np.ndarray, nodes: np.ndarray, alpha: float) -> float:
    """``max_{p<q, x} |U[q, x] - U[p, x]| / (t_q - t_p)^alpha``."""
    K = states.shape[0]
    flat = states.reshape(K, -1)
    best = 0.0
    for p in range(K - 1):
        diff = np.abs(flat[p + 1:] - flat[p]).max(axis=1)
        ratio = diff / (nodes[p + 1:K] - nodes[p]) ** alpha
        best = max(best, float(ratio.max()))
    return best
