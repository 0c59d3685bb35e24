"""Command-line front end.

Every parameter can come from a flat TOML file (``--config``) or from a
flag of the same name; flags win. Exit codes: 0 success, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from frachj import __version__
from frachj.io import emit_csv, emit_summary

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    kind: type
    default: Any
    check: Callable[[Any], bool] | None = None
    requirement: str = ""
    help: str = ""


def _alpha() -> Param:
    return Param("alpha", float, 0.5, lambda v: 0.0 < v < 1.0, "must lie in (0, 1)",
                 "fractional order")


def _pos(name: str, default, kind=float, help="") -> Param:
    return Param(name, kind, default, lambda v: v > 0, "must be positive", help)


def _grading() -> Param:
    return Param("grading", str, "graded", lambda v: v in ("uniform", "graded"),
                 "must be 'uniform' or 'graded'", "time grid family")


PARAMS: dict[str, list[Param]] = {
    "caputo": [
        _alpha(),
        Param("beta", float, 1.0, lambda v: v > 0, "must be positive", "power of t"),
        _pos("T", 1.0, help="horizon"),
        _pos("M", 4096, int, "number of time cells"),
        Param("grading", str, "uniform", lambda v: v in ("uniform", "graded"),
              "must be 'uniform' or 'graded'", "time grid family"),
    ],
    "mlf": [
        _alpha(),
        _pos("t_min", 1.0, help="smallest argument"),
        _pos("t_max", 1e4, help="largest argument"),
        Param("points", int, 50, lambda v: v >= 2, "must be >= 2", "log-spaced samples"),
    ],
    "beta": [
        _alpha(),
        Param("z0", float, 0.0, lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]", "lower limit"),
        Param("z1", float, 0.5, lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]", "upper limit"),
    ],
    "counterexample": [
        _alpha(),
        Param("K_max", int, 40, lambda v: v >= 2, "must be >= 2", "number of oscillation points"),
        Param("n_plateau", int, 64, lambda v: v >= 2, "must be >= 2", "cells per plateau in the trace"),
        Param("allow_extreme", bool, False, None, "", "permit alpha outside [0.2, 0.8]"),
    ],
    "fode": [
        _alpha(),
        _pos("A", 1.0, help="relaxation rate"),
        Param("k", float, 1.0, lambda v: v >= 1, "must be >= 1", "power of the nonlinearity"),
        _pos("T", 50.0, help="horizon"),
        _pos("M", 2048, int, "number of time cells"),
        _grading(),
        _pos("eps", 0.05, help="slack exponent of the upper envelope (k > 1)"),
    ],
    "hj": [
        _alpha(),
        Param("dim", int, 1, lambda v: v in (1, 2), "must be 1 or 2", "space dimension"),
        Param("n", int, 256, lambda v: v >= 8, "must be >= 8", "points per axis"),
        Param("m", float, 1.0, lambda v: v >= 1, "must be >= 1", "power of |p|"),
        Param("a", str, "const:1", None, "", "coefficient selector"),
        Param("f", str, "sin2", None, "", "source selector"),
        Param("g", str, "const:0", None, "", "initial datum selector"),
        _pos("T", 200.0, help="horizon"),
        _pos("M", 4096, int, "number of time cells"),
        _grading(),
        Param("snapshots", list, [], None, "", "times to write (comma list)"),
        Param("method", str, "sweep", lambda v: v in ("sweep", "explicit"),
              "must be 'sweep' or 'explicit'", "step solver"),
        Param("ell_gamma", float, -1.0, None, "", "path length in the zero set (negative: estimate)"),
    ],
    "rate": [
        Param("D", float, 1.0, lambda v: v >= 1.0, "must be >= 1", "box dimension"),
        _alpha(),
        _pos("t", 100.0, help="time"),
    ],
}

SUBCOMMAND_HELP = {
    "caputo": "discrete Caputo derivative of t^beta against the power rule",
    "mlf": "Mittag-Leffler values and their two-sided bounds",
    "beta": "normalised incomplete beta integral",
    "counterexample": "oscillating source with nonnegative fractional derivative",
    "fode": "fractional relaxation equation",
    "hj": "time-fractional eikonal evolution on the torus",
    "rate": "optimised decay exponent for a fractal zero set",
}


# -- config handling ---------------------------------------------------------


def _coerce(p: Param, value: Any) -> Any:
    try:
        if p.kind is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes"):
                return True
            if text in ("0", "false", "no"):
                return False
            raise ValueError
        if p.kind is list:
            if isinstance(value, str):
                return [float(v) for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if p.kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            if isinstance(value, bool):
                raise ValueError
            return int(value)
        if p.kind is float:
            if isinstance(value, bool):
                raise ValueError
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
            return out
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter '{p.name}': cannot read {value!r} as "
                          f"{p.kind.__name__}") from None


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from None
    for key, val in data.items():
        if isinstance(val, dict):
            raise ConfigError(f"config key '{key}': nested tables are not supported")
    return data


def resolve(sub: str, config: dict[str, Any], flags: dict[str, Any]) -> dict[str, Any]:
    """Defaults, then config, then flags; every value validated."""
    params = {p.name: p for p in PARAMS[sub]}
    config = dict(config)
    declared = config.pop("subcommand", sub)
    if declared != sub:
        raise ConfigError(f"parameter 'subcommand': config is for '{declared}', not '{sub}'")
    unknown = sorted(set(config) - set(params))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {sub}: {', '.join(unknown)}")
    out = {}
    for name, p in params.items():
        raw = flags.get(name)
        if raw is None:
            raw = config.get(name, p.default)
        val = _coerce(p, raw)
        if p.check is not None and not p.check(val):
            raise ConfigError(f"parameter '{name}' {p.requirement}, got {val!r}")
        out[name] = val
    return out


def output_paths(out: str | None, sub: str) -> tuple[Path, Path] | None:
    """``(csv, stem)``: a ``.csv`` path is used as is, anything else is a directory."""
    if out is None:
        return None
    p = Path(out)
    if p.suffix.lower() == ".csv":
        p.parent.mkdir(parents=True, exist_ok=True)
        return p, p.with_suffix("")
    p.mkdir(parents=True, exist_ok=True)
    return p / f"{sub}.csv", p / sub


def _sidecar(stem: Path, suffix: str) -> Path:
    return stem.with_name(stem.name + suffix)


def _time_grid(cfg: dict[str, Any], extra=()):
    from frachj.core import TimeGrid

    if cfg["grading"] == "uniform":
        grid = TimeGrid.uniform(cfg["T"], cfg["M"])
    else:
        grid = TimeGrid.graded(cfg["T"], cfg["M"], alpha=cfg["alpha"])
    extra = [t for t in extra if 0.0 < t < cfg["T"]]
    if extra:
        grid = TimeGrid.from_nodes(np.union1d(grid.nodes, extra))
    return grid


# -- subcommands -------------------------------------------------------------


def run_caputo(cfg, paths):
    from frachj.core import (SampledPath, caputo_apply_all, caputo_weights,
                             power_rule_constant)

    a, beta = cfg["alpha"], cfg["beta"]
    grid = _time_grid(cfg)
    t = grid.nodes
    path = SampledPath(grid, t ** beta)
    num = caputo_apply_all(caputo_weights(a, grid), path)
    with np.errstate(divide="ignore"):
        exact = power_rule_constant(a, beta) * t ** (beta - a)
    rel = abs(num[-1] - exact[-1]) / abs(exact[-1])
    summary = {"alpha": a, "beta": beta, "T": cfg["T"], "M": cfg["M"],
               "numeric_at_T": num[-1], "exact_at_T": exact[-1], "relative_error_at_T": rel}
    return {"t": t, "numeric": num, "exact": exact}, summary


def run_mlf(cfg, paths):
    from frachj.fode import ml_bounds, ml_bounds_sharp
    from frachj.special import mittag_leffler_array

    if cfg["t_min"] > cfg["t_max"]:
        raise ConfigError("parameter 't_min' must not exceed 't_max'")
    t = np.logspace(math.log10(cfg["t_min"]), math.log10(cfg["t_max"]), cfg["points"])
    E = mittag_leffler_array(cfg["alpha"], -t)
    lo, hi = ml_bounds(cfg["alpha"], t)
    slo, shi = ml_bounds_sharp(cfg["alpha"], t)
    summary = {"alpha": cfg["alpha"], "points": cfg["points"],
               "lower_violations": int(np.sum(E < lo)),
               "upper_violations": int(np.sum(E > hi)),
               "sharp_violations": int(np.sum(E < slo) + np.sum(E > shi))}
    table = {"t": t, "E": E, "lower": lo, "upper": hi, "lower_sharp": slo, "upper_sharp": shi}
    return table, summary


def run_beta(cfg, paths):
    from frachj.special import inverse_beta_half, reg_incomplete_beta

    if cfg["z0"] > cfg["z1"]:
        raise ConfigError("parameter 'z0' must not exceed 'z1'")
    val = reg_incomplete_beta(cfg["alpha"], cfg["z0"], cfg["z1"])
    b = inverse_beta_half(cfg["alpha"])
    table = {"alpha": [cfg["alpha"]], "z0": [cfg["z0"]], "z1": [cfg["z1"]],
             "value": [val], "b_half": [b]}
    return table, {"alpha": cfg["alpha"], "value": val, "b_half": b}


def run_counterexample(cfg, paths):
    from frachj import counterexample as ce
    from frachj.special import pi_csc

    spec = ce.build_spec(cfg["alpha"], cfg["K_max"])
    N = ce.find_admissible_N(spec, cfg["allow_extreme"])
    lo_t, hi_t = spec.a_k(2 * N + 1), spec.a_k(2 * N + 2)
    gap = ce.oscillation_gap(spec, N)
    cert = ce.gap_certificate(spec)
    f, u = ce.sample_u(spec, hi_t, n_plateau=cfg["n_plateau"])
    bound = pi_csc(spec.order)
    if paths is not None:
        emit_csv({"N": [N], "a_lo": [lo_t], "a_hi": [hi_t], "gap": [gap],
                  "certificate": [cert]}, _sidecar(paths[1], ".markers.csv"))
    summary = {"alpha": spec.alpha, "b_alpha": spec.b_alpha, "eta_alpha": spec.eta_alpha,
               "N": N, "a_lo": lo_t, "a_hi": hi_t, "gap": gap, "certificate": cert,
               "gap_below_certificate": bool(gap <= cert), "max_u": float(u.values.max()),
               "u_bound": bound}
    return {"t": u.grid.nodes, "f": f.values, "u": u.values}, summary


def run_fode(cfg, paths):
    from frachj.fode import (FodeProblem, decay_envelope, exact_k1_path, ml_bounds,
                             solve_fode)

    a, A, k = cfg["alpha"], cfg["A"], cfg["k"]
    grid = _time_grid(cfg)
    sol = solve_fode(FodeProblem(a, A, k), grid)
    t, E = sol.t, sol.E
    summary = {"alpha": a, "A": A, "k": k, "T": cfg["T"], "M": cfg["M"],
               "newton_fallbacks": sol.newton_fallbacks,
               "positive": bool(np.all(E > 0)),
               "nonincreasing": bool(np.all(np.diff(E) <= 0))}
    with np.errstate(divide="ignore"):
        if k == 1.0:
            exact = exact_k1_path(a, A, grid).values
            lo, hi = ml_bounds(a, A * t ** a)
            summary["max_relative_error"] = float(np.max(np.abs(E - exact) / exact))
        else:
            exact = np.full_like(E, np.nan)
            env = decay_envelope(sol, cfg["eps"])
            rate = a / k
            lo = env.C_low * t ** (-rate)
            hi = env.C_high * t ** (-rate + cfg["eps"])
            summary.update({"C_low": env.C_low, "C_high": env.C_high,
                            "t_star": env.t_star, "tail_slope": env.slope})
    return {"t": t, "E_numeric": E, "E_exact": exact, "lower": lo, "upper": hi}, summary


def _default_ell(problem, erg) -> float:
    """Largest distance from a point of ``Z`` to the nearest minimiser of ``g`` in ``Z``."""
    from frachj.hj.torus import periodic_distance

    g = problem.g
    targets = np.flatnonzero(((g <= g.min() + 1e-12) & erg.Z).ravel())
    if targets.size == 0:
        return 0.0
    grid = problem.grid
    best = np.full(grid.shape, np.inf)
    for idx in targets:
        best = np.minimum(best, periodic_distance(grid, grid.point(int(idx))))
    return float(best[erg.Z].max())


def run_hj(cfg, paths):
    from frachj.fode import FodeProblem, solve_fode
    from frachj.hj import audit
    from frachj.hj.ergodic import solve_ergodic
    from frachj.hj.evolve import evolve
    from frachj.hj.torus import EikonalProblem

    problem = EikonalProblem.from_catalog(cfg["dim"], cfg["n"], cfg["alpha"], cfg["m"],
                                          a=cfg["a"], f=cfg["f"], g=cfg["g"])
    snaps = sorted(set(cfg["snapshots"]) | {cfg["T"]})
    if any(not 0.0 < s <= cfg["T"] for s in snaps):
        raise ConfigError("parameter 'snapshots' must lie in (0, T]")
    tgrid = _time_grid(cfg, snaps)
    erg = solve_ergodic(problem)
    sol = evolve(problem, tgrid, method=cfg["method"])
    ell = cfg["ell_gamma"] if cfg["ell_gamma"] >= 0 else _default_ell(problem, erg)
    summary = {"alpha": problem.alpha, "dim": cfg["dim"], "n": cfg["n"], "T": cfg["T"],
               "time_nodes": tgrid.M, "c": problem.c,
               "holder_seminorm": audit.holder_seminorm_time(sol),
               "holder_seminorm_half_horizon": audit.holder_seminorm_time(sol, cfg["T"] / 2)}
    for s in snaps:
        summary[f"gap_at_{s:g}"] = audit.asymptotic_gap(sol, erg, s)
    lower, upper = audit.barrier_margins(sol)
    summary.update({"barrier_constant": audit.barrier_constant(problem),
                    "barrier_lower_margin": lower, "barrier_upper_margin": upper,
                    "ell_gamma": ell})
    if problem.lip_g > 0:
        A = audit.ladder_A(problem, problem.lip_g, ell)
        E = solve_fode(FodeProblem(problem.alpha, A, problem.m), tgrid)
        rep = audit.aubry_decay_check(sol, erg, E, ell)
        summary.update({"aubry_A": A, "aubry_lower_margin": rep.lower_margin,
                        "aubry_upper_margin": rep.upper_margin,
                        "aubry_violations": rep.violations,
                        "aubry_assumption_ok": rep.assumption_ok})

    def table(u):
        if problem.grid.dim == 1:
            return {"x": problem.grid.axes(), "u": u}
        X, Y = problem.grid.coords()
        return {"x": X.ravel(), "y": Y.ravel(), "u": u.ravel()}

    if paths is not None:
        for s in snaps:
            if s != cfg["T"]:
                emit_csv(table(sol.at(s)), _sidecar(paths[1], f"_t{s:g}.csv"))
    return table(sol.at(cfg["T"])), summary


def run_rate(cfg, paths):
    from frachj.hj.audit import eikonal_rate

    r = eikonal_rate(cfg["D"], cfg["alpha"], cfg["t"])
    row = {"D": cfg["D"], "alpha": cfg["alpha"], "t": cfg["t"], "eps_opt": r.eps_opt,
           "bound": r.bound, "exponent": r.exponent,
           "measured_exponent": r.measured_exponent}
    summary = dict(row, decaying=r.decaying)
    return {k: [v] for k, v in row.items()}, summary


RUNNERS = {
    "caputo": run_caputo, "mlf": run_mlf, "beta": run_beta,
    "counterexample": run_counterexample, "fode": run_fode, "hj": run_hj,
    "rate": run_rate,
}


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frachj", description="Caputo-type fractional calculus and fractional "
        "Hamilton-Jacobi numerics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, params in PARAMS.items():
        sp = subs.add_parser(name, help=SUBCOMMAND_HELP[name], description=SUBCOMMAND_HELP[name])
        sp.add_argument("--config", help="flat TOML file with parameters")
        sp.add_argument("--out", help="CSV path, or directory for <subcommand>.csv")
        sp.add_argument("--seed", type=int, default=None, help="reserved; no effect")
        for p in params:
            sp.add_argument(f"--{p.name}", dest=p.name, default=None, metavar=p.kind.__name__.upper(),
                            help=f"{p.help} (default: {p.default})")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = args.subcommand
    flags = {p.name: getattr(args, p.name) for p in PARAMS[sub]}
    try:
        config = load_config(args.config) if args.config else {}
        cfg = resolve(sub, config, flags)
        paths = output_paths(args.out, sub)
        table, summary = RUNNERS[sub](cfg, paths)
    except ValueError as exc:
        print(f"frachj {sub}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"frachj {sub}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if paths is not None:
        emit_csv(table, paths[0])
        emit_summary(summary, _sidecar(paths[1], ".summary.txt"))
    for key, val in summary.items():
        print(f"{key} = {val}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
