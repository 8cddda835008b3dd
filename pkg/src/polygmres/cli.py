"""Configuration-driven experiment runner.

Assembles a matrix, right-hand side, and preconditioner stack from flags
or a JSON config file, runs the solver, and writes a machine-readable
per-iteration history plus a summary record.  Output is data, not plots;
convergence figures can be drawn from the history files with any tool.

Exit codes: 0 converged, 2 not converged, 1 error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import rng
from .counters import CostCounters
from .errors import ConfigError, MatrixFormatError, ParameterError
from .gmres import (
    GmresConfig,
    IluPreconditionedOperator,
    MatrixOperator,
    cost_report,
    solve,
)
from .ilu import ilu0_factor
from .polyprec import auto_degree, build_poly, random_seed_vector
from .sparse import (
    bidiag1,
    bidiag2,
    gen_convdiff2d,
    gen_laplacian2d,
    gen_laplacian_rhs,
    read_matrix_market,
)

GENERATORS = ("laplacian2d", "bidiag1", "bidiag2", "convdiff2d")
RHS_MODES = ("file", "axrandom", "random", "generator")
# v0 draws come from a stream offset from the rhs stream so the two are
# independent for any seed
V0_SEED_OFFSET = 1


@dataclass
class ExperimentConfig:
    matrix_file: str | None = None
    generator: str | None = None
    grid_n: int = 201
    epsilon: float = 0.005
    rhs_mode: str = "axrandom"
    rhs_file: str | None = None
    seed: int = 0
    degree: int | None = None
    degree_auto: bool = False
    degree_cap: int = 20
    seed_mode: str = "random"
    ilu: bool = False
    restart_m: int = 50
    tol: float = 1e-8
    max_iters: int = 200000
    output: str = "experiment"
    fmt: str = "csv"


_FIELD_NAMES = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _build_parser():
    p = argparse.ArgumentParser(
        prog="polygmres",
        description="Run one polynomial-preconditioned GMRES experiment.",
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--matrix-file", dest="matrix_file", help="Matrix Market file")
    p.add_argument(
        "--generator", choices=GENERATORS, help="built-in test matrix generator"
    )
    p.add_argument("--grid-n", dest="grid_n", type=int, help="generator grid size")
    p.add_argument(
        "--epsilon", type=float, help="diffusion coefficient for convdiff2d"
    )
    p.add_argument(
        "--rhs", dest="rhs_mode", choices=RHS_MODES,
        help="right-hand side source (default axrandom: b = A x with random x)",
    )
    p.add_argument("--rhs-file", dest="rhs_file", help="whitespace-separated values")
    p.add_argument("--seed", type=int, help="64-bit RNG seed (default 0)")
    p.add_argument(
        "--degree",
        help="polynomial degree: an integer, or 'auto' for automatic selection; "
        "omit for unpreconditioned GMRES",
    )
    p.add_argument(
        "--degree-cap", dest="degree_cap", type=int,
        help="largest degree tried by --degree auto (default 20)",
    )
    p.add_argument(
        "--v0", dest="seed_mode", choices=("random", "rhs"),
        help="polynomial seed vector source (default random)",
    )
    p.add_argument("--ilu", action="store_true", help="left ILU(0) preconditioning")
    p.add_argument("-m", "--restart", dest="restart_m", type=int, help="restart length")
    p.add_argument("--tol", type=float, help="relative residual tolerance")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="inner iteration cap")
    p.add_argument("-o", "--output", help="output base path (default 'experiment')")
    p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), help="history format")
    return p


def parse_config(argv) -> ExperimentConfig:
    """Resolve flags plus an optional config file into an
    :class:`ExperimentConfig`.  Flags override file values; unknown file
    keys are rejected."""
    ns = vars(_build_parser().parse_args(argv))
    data: dict = {}
    config_path = ns.pop("config", None)
    if config_path is not None:
        try:
            with open(config_path) as fh:
                file_data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(file_data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_data) - _FIELD_NAMES
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update(file_data)
    data.update(ns)

    degree = data.pop("degree", None)
    degree_auto = bool(data.pop("degree_auto", False))
    if isinstance(degree, str):
        if degree.lower() == "auto":
            degree, degree_auto = None, True
        else:
            try:
                degree = int(degree)
            except ValueError:
                raise ConfigError(f"--degree must be an integer or 'auto', got {degree!r}")

    try:
        cfg = ExperimentConfig(degree=degree, degree_auto=degree_auto, **data)
    except TypeError as exc:
        raise ConfigError(str(exc))
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if (cfg.matrix_file is None) == (cfg.generator is None):
        raise ConfigError("exactly one of --matrix-file and --generator is required")
    if cfg.generator is not None and cfg.generator not in GENERATORS:
        raise ConfigError(f"unknown generator {cfg.generator!r}")
    if cfg.rhs_mode not in RHS_MODES:
        raise ConfigError(f"unknown rhs mode {cfg.rhs_mode!r}")
    if cfg.rhs_mode == "file" and cfg.rhs_file is None:
        raise ConfigError("--rhs file requires --rhs-file")
    if cfg.rhs_mode == "generator" and cfg.generator not in ("laplacian2d", "convdiff2d"):
        raise ConfigError("rhs mode 'generator' needs laplacian2d or convdiff2d")
    if not (0.0 < cfg.tol < 1.0):
        raise ConfigError("tol must lie in (0, 1)")
    if cfg.restart_m < 1:
        raise ConfigError("restart length must be at least 1")
    if cfg.max_iters < 1:
        raise ConfigError("max-iters must be at least 1")
    if cfg.degree is not None and cfg.degree < 0:
        raise ConfigError("degree must be non-negative")
    if cfg.degree_cap < 1:
        raise ConfigError("degree-cap must be at least 1")
    if cfg.seed_mode not in ("random", "rhs"):
        raise ConfigError(f"unknown v0 mode {cfg.seed_mode!r}")
    if cfg.fmt not in ("csv", "jsonl"):
        raise ConfigError(f"unknown output format {cfg.fmt!r}")


def _assemble_problem(cfg: ExperimentConfig):
    gen_rhs = None
    if cfg.matrix_file is not None:
        matrix = read_matrix_market(cfg.matrix_file)
    elif cfg.generator == "laplacian2d":
        matrix = gen_laplacian2d(cfg.grid_n)
        gen_rhs = gen_laplacian_rhs(cfg.grid_n)
    elif cfg.generator == "bidiag1":
        matrix = bidiag1()
    elif cfg.generator == "bidiag2":
        matrix = bidiag2()
    else:
        matrix, gen_rhs = gen_convdiff2d(cfg.grid_n, cfg.epsilon)

    if matrix.nrows != matrix.ncols:
        raise ConfigError("experiment matrix must be square")
    n = matrix.nrows
    if cfg.rhs_mode == "file":
        b = np.loadtxt(cfg.rhs_file, dtype=np.float64).reshape(-1)
        if b.shape != (n,):
            raise ConfigError(f"rhs file holds {b.size} values, expected {n}")
    elif cfg.rhs_mode == "axrandom":
        from .sparse import spmv

        b = spmv(matrix, rng.uniform(cfg.seed, n))
    elif cfg.rhs_mode == "random":
        b = rng.uniform(cfg.seed, n)
    else:
        if gen_rhs is None:
            raise ConfigError(f"generator {cfg.generator!r} supplies no rhs")
        b = gen_rhs
    return matrix, b


def _write_history(result, path, fmt):
    with open(path, "w", newline="\n") as fh:
        if fmt == "csv":
            fh.write("iter,relres,spmvs,dots,scalar_dots\n")
            for it, relres, spmvs, dots, sdots in result.history:
                fh.write(f"{it},{relres!r},{spmvs},{dots},{sdots}\n")
        else:
            for it, relres, spmvs, dots, sdots in result.history:
                fh.write(
                    json.dumps(
                        {
                            "iter": it,
                            "relres": relres,
                            "spmvs": spmvs,
                            "dots": dots,
                            "scalar_dots": sdots,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def run_experiment(cfg: ExperimentConfig) -> int:
    """Build the operator stack (ILU wrap, then polynomial on the wrapped
    operator), solve, and write history plus summary files.

    Returns the process exit code: 0 converged, 2 not converged.
    """
    matrix, b = _assemble_problem(cfg)
    n = matrix.nrows

    counters = CostCounters()
    if cfg.ilu:
        factors = ilu0_factor(matrix)
        op = IluPreconditionedOperator(matrix, factors, counters)
        b_eff = op.precondition(b)
    else:
        op = MatrixOperator(matrix, counters)
        b_eff = b

    poly = None
    if cfg.degree is not None or cfg.degree_auto:
        if cfg.seed_mode == "rhs":
            v0, mode = b_eff, "rhs"
        else:
            v0 = random_seed_vector(n, cfg.seed + V0_SEED_OFFSET)
            mode = f"random(seed={cfg.seed + V0_SEED_OFFSET})"
        if cfg.degree_auto:
            poly = auto_degree(op, v0, cfg.degree_cap, counters, seed_mode=mode)
        else:
            poly = build_poly(op, v0, cfg.degree, counters, seed_mode=mode)

    result = solve(
        op,
        b_eff,
        right_prec=poly,
        config=GmresConfig(cfg.restart_m, cfg.tol, cfg.max_iters, True),
    )

    deg = poly.degree if poly is not None else 0
    history_path = f"{cfg.output}.history.{'csv' if cfg.fmt == 'csv' else 'jsonl'}"
    _write_history(result, history_path, cfg.fmt)
    summary = {
        "config": dataclasses.asdict(cfg),
        "converged": result.converged,
        "iterations": result.iterations,
        "cycles": result.cycles,
        "final_relres": result.final_relres,
        "history_residual_kind": "implicit",
        "preconditioned_system": cfg.ilu,
        "degree": poly.degree if poly is not None else None,
        "coefficients": [float(c) for c in poly.y] if poly is not None else None,
        "seed_norm": poly.seed_norm if poly is not None else None,
        "v0_mode": poly.seed_mode if poly is not None else None,
        "counters": counters.as_dict(),
        "cost_report": cost_report(counters, deg, cfg.restart_m),
    }
    with open(f"{cfg.output}.summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0 if result.converged else 2


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv if argv is not None else sys.argv[1:])
        return run_experiment(cfg)
    except (ConfigError, MatrixFormatError, ParameterError, OSError) as exc:
        print(f"polygmres: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
