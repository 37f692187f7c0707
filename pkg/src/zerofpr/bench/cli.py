"""Command-line interface: ``zerofpr bench | solve | diagnose``.

Every ``bench`` flag can also come from a plain-text ``key=value`` file given
with ``--config``; flags on the command line take precedence.
"""

import argparse
import logging
import math
import sys

import numpy as np

from ..diagnostics import second_order_report
from ..problem import Problem, compose_least_squares, zero_oracle
from ..prox import l0_entry, l1_entry, l_half_entry
from ..solver import SolverConfig
from .generators import GENERATORS
from .harness import RESULT_HEADER, SOLVERS, ExperimentSpec, median_by_solver, run_experiment, run_solver

REGULARIZERS = {"zero": None, "l1": l1_entry, "l_half": l_half_entry, "l0": l0_entry}


def read_config(path):
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _int_list(text):
    text = str(text)
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(s) for s in text.split(",") if s.strip()]


def _str_list(text):
    return [s.strip() for s in str(text).split(",") if s.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="zerofpr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a benchmark experiment")
    b.add_argument("kind", nargs="?", choices=sorted(GENERATORS))
    b.add_argument("--config", help="key=value file mirroring these flags")
    b.add_argument("--n", type=int)
    b.add_argument("--m", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--r", type=int)
    b.add_argument("--N", type=int, help="nonzeros per code column (dict_learning)")
    b.add_argument("--T", type=float, help="code magnitude bound (dict_learning)")
    b.add_argument("--lambda", dest="lam", type=float)
    b.add_argument("--seeds", type=_int_list, help="comma list or lo:hi range (default 0)")
    b.add_argument("--solvers", type=_str_list, help=f"comma list from {', '.join(SOLVERS)}")
    b.add_argument("--tol", type=float)
    b.add_argument("--max-iters", dest="max_iters", type=int)
    b.add_argument("--repetitions", type=int)
    b.add_argument("--out", help="directory for results.csv and trace files")
    b.add_argument("--threads", type=int)

    s = sub.add_parser("solve", help="solve a problem stored in a file")
    s.add_argument("--problem", required=True, help=".npz with A, b (and lambda, reg) or key=value file")
    s.add_argument("--solver", default="zerofpr-lbfgs", choices=SOLVERS)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iters", dest="max_iters", type=int, default=10_000)
    s.add_argument("--out", help="write the solution vector here (.npy)")
    s.add_argument("--trace", help="write the per-iteration trace CSV here")

    d = sub.add_parser("diagnose", help="second-order report at a point")
    d.add_argument("--problem", required=True)
    d.add_argument("--point", required=True, help=".npy vector or whitespace-separated text")
    d.add_argument("--gamma", type=float, help="defaults to 0.95 / L")
    return parser


BENCH_TYPES = {
    "kind": str, "n": int, "m": int, "k": int, "r": int, "N": int, "T": float, "lam": float,
    "lambda": float, "seeds": _int_list, "solvers": _str_list, "tol": float, "max_iters": int,
    "repetitions": int, "out": str, "threads": int,
}


def bench_settings(args):
    """Merge the config file (if any) with command-line flags; flags win."""
    settings = {}
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in BENCH_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            settings["lam" if key == "lambda" else key] = BENCH_TYPES[key](value)
    for key in ("kind", "n", "m", "k", "r", "N", "T", "lam", "seeds", "solvers", "tol", "max_iters",
                "repetitions", "out", "threads"):
        v = getattr(args, key)
        if v is not None:
            settings[key] = v
    if "kind" not in settings:
        raise ValueError("experiment kind missing (positional argument or kind= in the config)")
    return settings


def cmd_bench(args, out=None):
    out = sys.stdout if out is None else out
    settings = bench_settings(args)
    threads = settings.pop("threads", 1)
    out_dir = settings.pop("out", None)
    spec = ExperimentSpec(**settings)
    rows = run_experiment(spec, out_dir=out_dir, threads=threads)
    out.write(",".join(RESULT_HEADER) + "\n")
    for row in rows:
        out.write(",".join(str(v) for v in row.as_csv_fields()) + "\n")
    med = median_by_solver(rows)
    out.write("# median matvecs: " + ", ".join(f"{k}={v:g}" for k, v in med.items()) + "\n")
    return 0 if all(r.status in ("converged", "max_iters") for r in rows) else 1


def load_problem(path):
    """Least-squares plus regularizer from ``.npz`` (arrays ``A``, ``b``) or a key=value file.

    Optional entries: ``lambda`` (default 0.1) and ``reg`` in
    ``zero, l1, l_half, l0`` (default ``l1``). A key=value file may instead
    name a generator (``kind=``, plus its size keys and ``seed``).
    """
    if path.endswith(".npz"):
        with np.load(path, allow_pickle=False) as data:
            A = np.asarray(data["A"], dtype=float)
            b = np.asarray(data["b"], dtype=float)
            lam = float(data["lambda"]) if "lambda" in data else 0.1
            reg = str(data["reg"]) if "reg" in data else "l1"
        return _least_squares_problem(A, b, lam, reg), None
    cfg = read_config(path)
    if "kind" not in cfg:
        raise ValueError(f"{path}: key=value problem files need kind=")
    kind = cfg.pop("kind")
    if kind not in GENERATORS:
        raise ValueError(f"unknown problem kind {kind!r}")
    kwargs = {}
    for key, value in cfg.items():
        key = "lam" if key == "lambda" else key
        kwargs[key] = float(value) if key in ("lam", "T") else int(value)
    gen = GENERATORS[kind](**kwargs)
    return gen.problem, gen


def _least_squares_problem(A, b, lam, reg):
    if reg not in REGULARIZERS:
        raise ValueError(f"unknown regularizer {reg!r}; choose from {sorted(REGULARIZERS)}")
    g = zero_oracle() if reg == "zero" else REGULARIZERS[reg](lam).oracle
    return Problem(compose_least_squares(A, b), g, lipschitz_estimate=float(np.linalg.norm(A, 2) ** 2))


def cmd_solve(args, out=None):
    out = sys.stdout if out is None else out
    problem, gen = load_problem(args.problem)
    x0 = gen.x0 if gen is not None else np.zeros(problem.dimension)
    adaptive = gen.adaptive if gen is not None else False
    cfg = SolverConfig(tol=args.tol, max_iters=args.max_iters, adaptive_gamma=adaptive)
    x, trace = run_solver(args.solver, problem, x0, cfg)
    last = trace.final
    out.write(f"solver={args.solver} status={trace.status} iters={trace.iterations} "
              f"matvecs={last.matvecs} prox_evals={last.prox_evals} final_res={last.res_norm:.6e} "
              f"final_obj={problem.objective(x):.12g}\n")
    if args.out:
        np.save(args.out, x)
    if args.trace:
        trace.write_csv(args.trace)
    return 0 if trace.status == "converged" else 1


def cmd_diagnose(args, out=None):
    out = sys.stdout if out is None else out
    problem, _ = load_problem(args.problem)
    if args.point.endswith(".npy"):
        x = np.load(args.point)
    else:
        x = np.loadtxt(args.point, ndmin=1)
    L = problem.lipschitz_estimate
    if args.gamma is None and L is None:
        raise ValueError("--gamma is required when the problem has no Lipschitz constant")
    gamma = args.gamma if args.gamma is not None else 0.95 / L
    rep = second_order_report(problem, x, gamma)
    out.write(f"gamma={gamma:.6g}\n")
    out.write(f"single_valued={rep.single_valued} probe_ratio={rep.probe_ratio:.3g}\n")
    out.write(f"symmetry_defect={rep.symmetry_defect:.3e}\n")
    out.write(f"min_eigenvalue={rep.min_eigenvalue:.6e}\n")
    out.write(f"positive_definite={rep.positive_definite}\n")
    return 0 if rep.positive_definite and math.isfinite(rep.symmetry_defect) else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    commands = {"bench": cmd_bench, "solve": cmd_solve, "diagnose": cmd_diagnose}
    try:
        return commands[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        parser.exit(2, f"zerofpr: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
