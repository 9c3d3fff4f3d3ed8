"""Batch driver: validated run configs, single runs, convergence studies,
CSV tables and plot-ready snapshot files.

A config is one JSON document; ``alpha``, ``N`` and ``K`` may be scalars or
lists, and a convergence study runs their full grid.  Output files use a
fixed 17-significant-digit float format so identical configs reproduce
identical bytes (the wall-time column is the one measurement that varies
between runs).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from jsonschema import Draft202012Validator

from .meshbasis import eval_field
from .models import SemiDiscreteProblem, build_problem, make_example
from .ddg_spatial import FluxParams
from .timestep import RunControl, integrate

_NUMBER_OR_LIST = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
    ]
}
_INT_OR_LIST = {
    "oneOf": [
        {"type": "integer", "minimum": 1},
        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["problem", "alpha", "N", "K"],
    "properties": {
        "problem": {"type": "string"},
        "alpha": _NUMBER_OR_LIST,
        "N": _INT_OR_LIST,
        "K": _INT_OR_LIST,
        "T": {"type": "number", "exclusiveMinimum": 0},
        "cfl_c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "dt_override": {"type": "number", "exclusiveMinimum": 0},
        "beta0": {"type": "number", "minimum": 0},
        "beta1": {"type": "number"},
        "varpi1": {"type": "number"},
        "cross_coupling": {"type": "number"},
        "snapshot_times": {"type": "array", "items": {"type": "number"}},
        "points_per_cell": {"type": "integer", "minimum": 1, "maximum": 64},
        "seed": {"type": "integer", "minimum": 0},
        "label": {"type": "string"},
    },
}

KNOWN_PROBLEMS = ("ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "ex7", "ex8",
                  "nls_soliton", "nls_two_soliton", "coupled_strong", "manakov")


class ConfigError(ValueError):
    """Raised for schema violations and unknown problem names."""


@dataclass
class RunConfig:
    """Validated run configuration with study grids."""

    problem: str
    alphas: list
    N_list: list
    K_list: list
    T: Optional[float] = None
    cfl_c: Optional[float] = None
    dt_override: Optional[float] = None
    flux: Optional[FluxParams] = None
    varpi1: Optional[float] = None
    cross_coupling: Optional[float] = None
    snapshot_times: tuple = ()
    points_per_cell: int = 8
    seed: int = 0
    label: str = ""


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    errors = sorted(Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw),
                    key=lambda e: e.path)
    if errors:
        msgs = "; ".join(e.message for e in errors)
        raise ConfigError(f"config schema violation: {msgs}")
    if raw["problem"] not in KNOWN_PROBLEMS:
        raise ConfigError(f"unknown problem {raw['problem']!r}; "
                          f"known: {', '.join(KNOWN_PROBLEMS)}")
    flux = None
    if "beta0" in raw or "beta1" in raw:
        if "beta0" not in raw:
            raise ConfigError("beta1 given without beta0")
        flux = FluxParams(raw["beta0"], raw.get("beta1", 0.0))
    return RunConfig(
        problem=raw["problem"],
        alphas=_as_list(raw["alpha"]),
        N_list=_as_list(raw["N"]),
        K_list=_as_list(raw["K"]),
        T=raw.get("T"),
        cfl_c=raw.get("cfl_c"),
        dt_override=raw.get("dt_override"),
        flux=flux,
        varpi1=raw.get("varpi1"),
        cross_coupling=raw.get("cross_coupling"),
        snapshot_times=tuple(raw.get("snapshot_times", ())),
        points_per_cell=raw.get("points_per_cell", 8),
        seed=raw.get("seed", 0),
        label=raw.get("label", ""),
    )


@dataclass
class ConvergenceRow:
    alpha: float
    N: int
    K: int
    dt: float
    l2_error: float
    order: Optional[float]
    wall_time_ms: int


def compute_order(errors, h_values) -> list:
    """order_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i); first entry is None."""
    errors = list(errors)
    h_values = list(h_values)
    if len(errors) != len(h_values):
        raise ValueError("errors and mesh sizes must pair up")
    if any(e <= 0 for e in errors):
        raise ValueError("orders need positive errors")
    orders = [None]
    for i in range(1, len(errors)):
        orders.append(math.log(errors[i - 1] / errors[i])
                      / math.log(h_values[i - 1] / h_values[i]))
    return orders


def _fmt(x) -> str:
    return "" if x is None else format(x, ".17g")


def write_rows_csv(path: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write("alpha,N,K,dt,l2_error,order,wall_time_ms\n")
        for r in rows:
            fh.write(f"{_fmt(r.alpha)},{r.N},{r.K},{_fmt(r.dt)},"
                     f"{_fmt(r.l2_error)},{_fmt(r.order)},{r.wall_time_ms}\n")


def _problem_for(cfg: RunConfig, alpha: float, N: int, K: int):
    kwargs = {}
    if cfg.varpi1 is not None:
        kwargs["varpi1"] = cfg.varpi1
    if cfg.cross_coupling is not None:
        kwargs["cross_coupling"] = cfg.cross_coupling
    spec = make_example(cfg.problem, alpha, K, N, flux=cfg.flux, T=cfg.T,
                        cfl_c=cfg.cfl_c, **kwargs)
    return spec


def simulate(cfg: RunConfig, alpha: float, N: int, K: int,
             cache_dir: Optional[str] = None):
    """One simulation; returns (problem, final state, diagnostics dict)."""
    spec = _problem_for(cfg, alpha, N, K)
    problem = build_problem(spec, cache_dir=cache_dir)
    control = RunControl(t0=0.0, T=spec.T, cfl_c=spec.cfl_c,
                         dt_override=cfg.dt_override,
                         snapshot_times=cfg.snapshot_times)
    history = []

    def observer(t, state):
        history.append((t, problem.l2_norms_squared(state, t)))

    t0 = time.perf_counter()
    state, snaps, dt, n_steps = integrate(
        problem.rhs, problem.initial_state(), control,
        problem.mesh.dx_min, alpha, observer=observer,
        dt_cap=problem.stable_dt_cap(),
    )
    wall_ms = int(round(1000.0 * (time.perf_counter() - t0)))

    stride = max(1, len(history) // 400)
    thinned = history[::stride]
    if thinned[-1][0] != history[-1][0]:
        thinned.append(history[-1])
    diagnostics = {
        "problem": cfg.problem, "alpha": alpha, "N": N, "K": K,
        "T": spec.T, "dt": dt, "n_steps": n_steps,
        "wall_time_ms": wall_ms,
        "l2_norm_history": [[t, [math.sqrt(max(s, 0.0)) for s in sq]]
                            for t, sq in thinned],
    }
    if spec.exact is not None:
        diagnostics["l2_errors"] = problem.field_errors(state, spec.T)
    return problem, state, snaps, diagnostics


def snapshot_grid(problem: SemiDiscreteProblem, points_per_cell: int) -> np.ndarray:
    """Per-cell sample points (left edge inclusive) plus the right endpoint."""
    mesh = problem.mesh
    offs = np.arange(points_per_cell) / points_per_cell
    xs = (mesh.boundaries[:-1, None] + mesh.dx * offs[None, :]).ravel()
    return np.append(xs, mesh.b)


def write_snapshot(path: str, problem: SemiDiscreteProblem, flat: np.ndarray,
                   t: float, points_per_cell: int = 8) -> list:
    """Plot-ready text columns; complex fields write (x, re, im) triples.

    Returns the list of files written (one per physical field).
    """
    xs = snapshot_grid(problem, points_per_cell)
    ncomp = problem.spec.n_components
    full = problem.full_fields(flat.reshape(ncomp, problem.n), t)
    stack = problem.wrap(full.ravel())
    cols = [eval_field(c, xs) for c in stack.components]
    written = []
    if ncomp == 1:
        data = np.column_stack([xs, cols[0]])
        np.savetxt(path, data, fmt="%.17g")
        written.append(path)
    elif ncomp == 2:
        np.savetxt(path, np.column_stack([xs, cols[0], cols[1]]), fmt="%.17g")
        written.append(path)
    else:
        base, ext = os.path.splitext(path)
        for i, tag in enumerate(("u1", "u2")):
            fp = f"{base}_{tag}{ext}"
            np.savetxt(fp, np.column_stack([xs, cols[2 * i], cols[2 * i + 1]]),
                       fmt="%.17g")
            written.append(fp)
    return written


def run_single(cfg: RunConfig, out_dir: str, cache_dir: Optional[str] = None) -> list:
    """Execute the config's (alpha, N, K) grid as plain runs with snapshots."""
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for alpha in cfg.alphas:
        for N in cfg.N_list:
            for K in cfg.K_list:
                problem, state, snaps, diag = simulate(cfg, alpha, N, K, cache_dir)
                tag = f"{cfg.problem}_a{alpha:g}_N{N}_K{K}"
                case_dir = os.path.join(out_dir, tag)
                os.makedirs(case_dir, exist_ok=True)
                files = write_snapshot(
                    os.path.join(case_dir, f"snapshot_t{diag['T']:.6f}.txt"),
                    problem, state, diag["T"], cfg.points_per_cell)
                for t_snap, s in sorted(snaps.items()):
                    files += write_snapshot(
                        os.path.join(case_dir, f"snapshot_t{t_snap:.6f}.txt"),
                        problem, s, t_snap, cfg.points_per_cell)
                with open(os.path.join(case_dir, "diagnostics.json"), "w") as fh:
                    json.dump(diag, fh, indent=1, sort_keys=True)
                diag["files"] = files
                results.append(diag)
    return results


def run_convergence(cfg: RunConfig, out_dir: str, threads: int = 1,
                    cache_dir: Optional[str] = None) -> dict:
    """Run the (alpha, N, K) grid and emit per-field convergence CSV tables."""
    os.makedirs(out_dir, exist_ok=True)
    grid = [(alpha, N, K) for alpha in cfg.alphas for N in cfg.N_list
            for K in cfg.K_list]

    def job(cell):
        alpha, N, K = cell
        problem, state, _snaps, diag = simulate(cfg, alpha, N, K, cache_dir)
        if "l2_errors" not in diag:
            raise ConfigError(
                f"problem {cfg.problem!r} has no exact solution; "
                "convergence studies need one")
        return diag

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            diags = list(pool.map(job, grid))
    else:
        diags = [job(cell) for cell in grid]

    n_fields = len(diags[0]["l2_errors"])
    tables = {}
    for f in range(n_fields):
        rows = []
        for alpha in cfg.alphas:
            for N in cfg.N_list:
                cells = [d for d in diags
                         if d["alpha"] == alpha and d["N"] == N]
                errs = [d["l2_errors"][f] for d in cells]
                hs = [1.0 / d["K"] for d in cells]
                orders = compute_order(errs, hs)
                for d, e, o in zip(cells, errs, orders):
                    rows.append(ConvergenceRow(
                        alpha=alpha, N=N, K=d["K"], dt=d["dt"], l2_error=e,
                        order=o, wall_time_ms=d["wall_time_ms"]))
        suffix = "" if n_fields == 1 else f"_u{f + 1}"
        path = os.path.join(out_dir, f"convergence{suffix}.csv")
        write_rows_csv(path, rows)
        tables[suffix or "u"] = rows
    return tables
