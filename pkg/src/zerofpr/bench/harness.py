"""Experiment orchestration: one row per (seed, solver) and one trace CSV per run."""

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import afbs_solve, fbs_solve, ifbs_solve
from ..directions import make_engine
from ..solver import SolverConfig, zerofpr_solve
from .generators import GENERATORS

logger = logging.getLogger(__name__)

RESULT_HEADER = ("experiment", "solver", "seed", "iters", "matvecs", "prox_evals",
                 "final_res", "final_obj", "wall_ms", "status")

DEFAULT_TOL = {"sparse_approx": 1e-6, "dict_learning": 1e-4, "mat_decomp": 1e-4}

SOLVERS = ("fbs", "ifbs", "afbs", "zerofpr-null", "zerofpr-broyden", "zerofpr-bfgs",
           "zerofpr-sbfgs", "zerofpr-lbfgs")


def run_solver(name, problem, x0, cfg):
    """Dispatch a solver by name; returns ``(x, trace)``."""
    if name == "fbs":
        return fbs_solve(problem, x0, cfg)
    if name == "ifbs":
        return ifbs_solve(problem, x0, cfg)
    if name == "afbs":
        return afbs_solve(problem, x0, cfg)
    if name.startswith("zerofpr-"):
        return zerofpr_solve(problem, x0, cfg, make_engine(name[len("zerofpr-"):]))
    raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")


@dataclass
class ExperimentSpec:
    """Everything needed to regenerate and rerun one experiment.

    ``tol`` defaults per kind: 1e-6 for sparse approximation, 1e-4 otherwise.
    Size fields a generator does not use are ignored; ``None`` keeps the
    generator's default.
    """

    kind: str
    seeds: tuple = (0,)
    solvers: tuple = ("fbs", "zerofpr-lbfgs")
    n: int = None
    m: int = None
    k: int = None
    r: int = None
    N: int = None
    T: float = None
    lam: float = None
    tol: float = None
    max_iters: int = 10_000
    repetitions: int = 1

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {sorted(GENERATORS)}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}; choose from {', '.join(SOLVERS)}")
        if self.tol is None:
            self.tol = DEFAULT_TOL[self.kind]
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        self.seeds = tuple(int(s) for s in self.seeds)
        self.solvers = tuple(self.solvers)

    @property
    def experiment_id(self):
        parts = [self.kind]
        for key in ("n", "m", "k", "r", "N", "T", "lam"):
            v = getattr(self, key)
            if v is not None:
                parts.append(f"{key}={v:g}")
        return "_".join(parts)

    def generate(self, seed):
        kwargs = {"seed": seed}
        names = {"sparse_approx": ("n", "lam"), "dict_learning": ("n", "m", "k", "N", "T"),
                 "mat_decomp": ("m", "n", "r", "lam")}[self.kind]
        for key in names:
            v = getattr(self, key)
            if v is not None:
                kwargs[key] = v
        return GENERATORS[self.kind](**kwargs)


@dataclass
class ResultRow:
    experiment: str
    solver: str
    seed: int
    iters: int
    matvecs: int
    prox_evals: int
    final_res: float
    final_obj: float
    wall_ms: float
    status: str
    smooth_evals: int = 0
    trace: object = field(default=None, repr=False)

    def as_csv_fields(self):
        return [self.experiment, self.solver, self.seed, self.iters, self.matvecs, self.prox_evals,
                repr(float(self.final_res)), repr(float(self.final_obj)), f"{self.wall_ms:.3f}", self.status]


def run_cell(spec, seed, solver, generated=None):
    """Run one (seed, solver) pair on a fresh copy of the problem.

    Failures are caught and reported in ``status`` as ``error: <message>``.
    """
    gen = spec.generate(seed) if generated is None else generated
    problem = gen.problem.fresh()
    cfg = SolverConfig(tol=spec.tol, max_iters=spec.max_iters, adaptive_gamma=gen.adaptive, seed=seed)
    best_ms = math.inf
    x = trace = None
    try:
        for _ in range(spec.repetitions):
            problem = gen.problem.fresh()
            t0 = time.perf_counter()
            x, trace = run_solver(solver, problem, gen.x0, cfg)
            best_ms = min(best_ms, 1e3 * (time.perf_counter() - t0))
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        logger.warning("%s/%s seed %d failed: %s", spec.experiment_id, solver, seed, exc)
        return ResultRow(spec.experiment_id, solver, seed, 0, 0, 0, math.nan, math.nan, 0.0,
                         f"error: {exc}".replace(",", ";"))
    counts = problem.counts()
    # objective evaluation is not charged to the run
    obj = gen.problem.fresh().objective(x)
    last = trace.final
    return ResultRow(spec.experiment_id, solver, seed, trace.iterations, last.matvecs, last.prox_evals,
                     last.res_norm, obj, best_ms, trace.status, counts.smooth, trace)


def run_experiment(spec, out_dir=None, threads=1):
    """Run every (seed, solver) cell of ``spec``.

    Rows come back ordered by seed, then by solver order in the spec, whatever
    the thread count. With ``out_dir`` set, ``results.csv`` and one trace CSV
    per run (``trace_<solver>_seed<seed>.csv``) are written there.
    """
    cells = [(seed, solver) for seed in spec.seeds for solver in spec.solvers]
    generated = {}

    def work(cell):
        seed, solver = cell
        if seed not in generated:
            generated[seed] = spec.generate(seed)
        return run_cell(spec, seed, solver, generated[seed])

    if threads > 1:
        # generate up front so worker threads only read shared problems
        for seed in spec.seeds:
            generated[seed] = spec.generate(seed)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(c) for c in cells]

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
            write_results(rows, fh)
        for row in rows:
            if row.trace is not None:
                row.trace.write_csv(os.path.join(out_dir, f"trace_{row.solver}_seed{row.seed}.csv"))
    return rows


def write_results(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for row in rows:
        w.writerow(row.as_csv_fields())


def results_csv(rows):
    buf = io.StringIO()
    write_results(rows, buf)
    return buf.getvalue()


def median_by_solver(rows, column="matvecs", converged_only=False):
    """Median of ``column`` per solver name."""
    out = {}
    for solver in dict.fromkeys(r.solver for r in rows):
        vals = [getattr(r, column) for r in rows
                if r.solver == solver and (not converged_only or r.status == "converged")]
        out[solver] = float(np.median(vals)) if vals else math.nan
    return out
