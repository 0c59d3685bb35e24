"""Time the compiled kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R]
"""

import argparse
import timeit

import numpy as np

from frachj import _kernels_py as ref

try:
    from frachj import _kernels as ext
except ImportError:  # extension not built
    ext = None


def cases():
    rng = np.random.default_rng(0)
    nodes = np.ascontiguousarray(np.linspace(0.0, 10.0, 1025) ** 1.5)
    inc = np.ascontiguousarray(rng.standard_normal((1024, 256)))
    vals = np.sin(nodes)
    rhs1 = rng.uniform(0, 1, 256)
    rhs2 = rng.uniform(0, 1, (64, 64))
    states = np.ascontiguousarray(rng.standard_normal((400, 64)))
    return {
        "l1_history (j=1024, 256 points)": lambda k: k.l1_history(nodes, 1024, 0.5, inc),
        "l1_apply_all (M=1024)": lambda k: k.l1_apply_all(nodes, vals, 0.5),
        "abel_all (M=1024)": lambda k: k.abel_all(nodes, vals, 0.5),
        "sweep_1d (n=256)": lambda k: k.sweep_1d(rhs1, 2.0, np.ones(256), 1.0, 1 / 256,
                                                 np.zeros(256), 1e-10, 1000),
        "sweep_2d (64x64)": lambda k: k.sweep_2d(rhs2, 2.0, np.ones((64, 64)), 1.0, 1 / 64,
                                                 np.zeros((64, 64)), 1e-10, 1000),
        "holder_max (400 nodes)": lambda k: k.holder_max(states, nodes[:400], 0.5),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if ext is None:
        print("compiled extension not available; build with pip install -e .")
    print(f"{'kernel':36s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(ref), number=1, repeat=args.repeat)) * 1e3
        if ext is None:
            print(f"{name:36s} {t_py:12.2f} {'-':>12s} {'-':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(ext), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:36s} {t_py:12.2f} {t_cy:12.2f} {t_py / t_cy:8.1f}")


if __name__ == "__main__":
    main()
