"""ZeroFPR: forward-backward iterations globalized by a nonmonotone linesearch on the FBE.

Each iteration performs a forward-backward step ``x -> x_bar``, a second one at
``x_bar`` to get the residual ``r_bar`` the direction is built from, and a
backtracking search along ``x_bar + tau d`` on the envelope value. The trial
step accepted by the search is reused as the next iteration's first step.
"""

import csv
import logging
import math
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .directions import LBFGS, symmetrized_bfgs_residual
from .fbe import GammaFailure, GammaManager, check_quadratic_bound, estimate_initial_L, gamma_backtrack, prox_grad_step

logger = logging.getLogger(__name__)

TRACE_HEADER = ("k", "res_norm", "fbe", "phibar", "tau", "backtracks", "gamma", "smooth_evals", "prox_evals")


@dataclass
class SolverConfig:
    """Parameters shared by ZeroFPR and the baseline solvers.

    ``gamma`` fixes the step size; otherwise it is ``gamma_fraction / L`` with
    ``L`` taken from ``L``, the problem, or (forcing ``adaptive_gamma``) a
    directional estimate at ``x0``. ``sigma`` is ``sigma_fraction`` of its
    admissible upper bound ``gamma (1 - gamma L) / 2``.
    """

    gamma: float = None
    L: float = None
    beta: float = 0.5
    p_min: float = 0.1
    eta: float = 0.85
    sigma_fraction: float = 0.5
    gamma_fraction: float = 0.95
    alpha: float = 0.5
    max_gamma_adjustments: int = 60
    tol: float = 1e-6
    relative_tol: bool = False
    max_iters: int = 10_000
    max_linesearch: int = 40
    adaptive_gamma: bool = False
    fallback_to_fb: bool = True
    store_vectors: bool = False
    store_iterates: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("beta", "p_min", "alpha", "gamma_fraction", "sigma_fraction"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0 or (name == "p_min" and v == 1.0)):
                raise ValueError(f"{name}={v} must lie in (0, 1)")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta={self.eta} must lie in [0, 1)")


@dataclass
class NonmonotoneState:
    """Merit average ``phibar`` with the Zhang-Hager accumulator ``Q``."""

    phibar: float
    Q: float = 1.0
    p: float = 1.0


def update_nonmonotone(state, phi_new, p_min, eta):
    """``p = max(p_min, 1/(eta Q + 1))``, ``phibar <- (1-p) phibar + p phi_new``, ``Q <- eta Q + 1``."""
    p = max(p_min, 1.0 / (eta * state.Q + 1.0))
    phibar = (1.0 - p) * state.phibar + p * phi_new
    # a convex combination is never below its smaller argument; keep it so under rounding
    if phi_new <= state.phibar:
        phibar = min(max(phibar, phi_new), state.phibar)
    return NonmonotoneState(phibar, eta * state.Q + 1.0, p)


@dataclass
class IterRecord:
    k: int
    res_norm: float
    fbe: float
    phibar: float
    gamma: float
    sigma: float
    L: float
    smooth_evals: int
    prox_evals: int
    matvecs: int
    elapsed: float
    tau: float = math.nan
    backtracks: int = 0
    p: float = math.nan
    phi_xbar: float = math.nan
    fbe_xbar: float = math.nan
    fbe_next: float = math.nan
    gamma_changed: bool = False


@dataclass
class RunTrace:
    """Per-iteration records of one solver run plus its terminal state.

    ``x`` is the returned solution (the last forward-backward point
    ``x_bar``); ``x_last`` the last iterate ``x^k``.
    """

    solver: str
    records: list = field(default_factory=list)
    status: str = "running"
    x: np.ndarray = None
    x_last: np.ndarray = None
    message: str = ""
    p_min: float = 1.0
    rbars: list = field(default_factory=list)
    directions: list = field(default_factory=list)
    iterates: list = field(default_factory=list)
    xbars: list = field(default_factory=list)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def res_norms(self):
        return self.column("res_norm")

    @property
    def iterations(self):
        return max(len(self.records) - 1, 0)

    @property
    def final(self):
        return self.records[-1]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            for r in self.records:
                w.writerow(
                    [r.k, _fmt(r.res_norm), _fmt(r.fbe), _fmt(r.phibar), _fmt(r.tau), r.backtracks,
                     _fmt(r.gamma), r.smooth_evals, r.prox_evals]
                )

    def record_fields(self):
        return [f.name for f in fields(IterRecord)]


def _fmt(v):
    return repr(float(v))


# ----------------------------------------------------------------- helpers shared with baselines


def init_gamma(p, x0, cfg):
    """Build the step-size manager; returns ``(manager, adaptive)``."""
    gamma_g = p.nonsmooth.gamma_g
    if cfg.gamma is not None:
        L = cfg.L if cfg.L is not None else p.lipschitz_estimate
        mgr = GammaManager.from_gamma(
            cfg.gamma, L, cfg.sigma_fraction, cfg.gamma_fraction, cfg.alpha, cfg.max_gamma_adjustments
        )
        if cfg.gamma >= gamma_g:
            raise ValueError(f"gamma={cfg.gamma} must be below gamma_g={gamma_g}")
        return mgr, cfg.adaptive_gamma
    adaptive = cfg.adaptive_gamma
    L = cfg.L if cfg.L is not None else p.lipschitz_estimate
    if L is None:
        L = estimate_initial_L(p, x0, np.random.default_rng(cfg.seed))
        adaptive = True
    mgr = GammaManager.from_lipschitz(
        L, gamma_g, cfg.gamma_fraction, cfg.sigma_fraction, cfg.alpha, cfg.max_gamma_adjustments
    )
    return mgr, adaptive


class Recorder:
    """Creates :class:`IterRecord` objects with counters relative to the run start."""

    def __init__(self, p, trace):
        self.p = p
        self.trace = trace
        self.base = p.counts()
        self.t0 = time.perf_counter()

    def new(self, k, res_norm, fbe, phibar, mgr, gamma_changed=False):
        c = self.p.counts() - self.base
        rec = IterRecord(
            k, res_norm, fbe, phibar, mgr.gamma, mgr.sigma, mgr.L, c.smooth, c.prox, c.matvecs,
            time.perf_counter() - self.t0, gamma_changed=gamma_changed,
        )
        self.trace.records.append(rec)
        return rec


def stop_tolerance(x0, cfg):
    if cfg.relative_tol:
        return cfg.tol * (1.0 + float(np.linalg.norm(x0)))
    return cfg.tol


# ----------------------------------------------------------------- ZeroFPR


def _safe_step(p, x, gamma):
    try:
        return prox_grad_step(p, x, gamma)
    except FloatingPointError:
        return None


def zerofpr_solve(p, x0, cfg=None, engine=None):
    """Minimize ``f + g`` with ZeroFPR.

    Parameters
    ----------
    p : Problem
    x0 : array_like
        Starting point.
    cfg : SolverConfig, optional
    engine : direction engine, optional
        Defaults to L-BFGS with memory 10. ``NullDirection`` recovers
        forward-backward splitting.

    Returns
    -------
    x : ndarray
        The last forward-backward point ``x_bar``.
    trace : RunTrace
    """
    cfg = SolverConfig() if cfg is None else cfg
    engine = LBFGS() if engine is None else engine
    engine.reset()
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")

    trace = RunTrace(f"zerofpr-{engine.name}", p_min=cfg.p_min)
    rec = Recorder(p, trace)
    mgr, adaptive = init_gamma(p, x0, cfg)
    tol = stop_tolerance(x0, cfg)

    step = prox_grad_step(p, x0, mgr.gamma)
    nm = NonmonotoneState(step.fbe)
    bar = None
    checked_bar = None
    pending = None
    gamma_changed = False

    for k in range(cfg.max_iters + 1):
        rn = step.res_norm
        # stopping test, then the Lipschitz check; the check's f(x_bar) comes from the r_bar step
        while rn > tol:
            if checked_bar is not None:
                # computed and checked during the previous linesearch
                bar, checked_bar = checked_bar, None
                break
            bar = prox_grad_step(p, step.x_bar, mgr.gamma)
            if not adaptive or check_quadratic_bound(step, p, mgr.L, f_bar=bar.f_x):
                break
            try:
                gamma_backtrack(mgr)
            except GammaFailure as exc:
                trace.status, trace.message = "gamma_failure", str(exc)
                break
            engine.reset()
            pending = None
            gamma_changed = True
            step = prox_grad_step(p, step.x, mgr.gamma)
            nm = NonmonotoneState(step.fbe)
            rn = step.res_norm
        if trace.status == "gamma_failure":
            rec.new(k, rn, step.fbe, nm.phibar, mgr, gamma_changed)
            break

        r = rec.new(k, rn, step.fbe, nm.phibar, mgr, gamma_changed)
        gamma_changed = False
        if cfg.store_iterates:
            trace.iterates.append(step.x.copy())
            trace.xbars.append(step.x_bar.copy())
        if rn <= tol:
            trace.status = "converged"
            break
        if k == cfg.max_iters:
            trace.status = "max_iters"
            break

        r.phi_xbar = bar.f_x + step.g_xbar
        r.fbe_xbar = bar.fbe
        if engine.symmetrized:
            v_main = step.r + bar.grad_f_x - step.grad_f_x
            v_bar = symmetrized_bfgs_residual(bar, p)
        else:
            v_main = step.r
            v_bar = bar.r
        if pending is not None:
            s, v_prev = pending
            engine.push(s, v_main - v_prev)
        d = engine.apply(v_bar)

        threshold = nm.phibar - mgr.sigma * rn * rn
        trial, tau, bt = None, 1.0, 0
        if not np.any(d):
            trial = bar
        else:
            for _ in range(cfg.max_linesearch):
                cand = _safe_step(p, step.x_bar + tau * d, mgr.gamma)
                if cand is not None and cand.finite and cand.fbe <= threshold:
                    if not adaptive:
                        trial = cand
                        break
                    # the envelope only bounds phi where the quadratic bound holds
                    cbar = _safe_step(p, cand.x_bar, mgr.gamma)
                    if cbar is not None and check_quadratic_bound(cand, p, mgr.L, f_bar=cbar.f_x):
                        trial, checked_bar = cand, cbar
                        break
                tau *= cfg.beta
                bt += 1
            if trial is None:
                if not cfg.fallback_to_fb:
                    trace.status = "linesearch_failure"
                    trace.message = f"no stepsize accepted after {cfg.max_linesearch} trials"
                    break
                # tau = 0 gives x_bar itself, admissible by the envelope's sufficient decrease
                trial, tau = bar, 0.0
        if cfg.store_vectors:
            trace.rbars.append(bar.r.copy())
            trace.directions.append(d.copy())

        r.tau, r.backtracks, r.fbe_next = tau, bt, trial.fbe
        pending = (trial.x - step.x_bar, v_bar)
        nm = update_nonmonotone(nm, trial.fbe, cfg.p_min, cfg.eta)
        r.p = nm.p
        step = trial

    trace.x = step.x_bar.copy()
    trace.x_last = step.x.copy()
    if trace.status == "running":
        trace.status = "max_iters"
    logger.debug("%s finished: %s after %d iterations", trace.solver, trace.status, trace.iterations)
    return trace.x, trace
