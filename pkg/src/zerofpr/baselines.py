"""Baseline splitting methods: FBS, inertial FBS and a monitored accelerated FBS.

All three share :class:`~zerofpr.solver.SolverConfig` and produce a
:class:`~zerofpr.solver.RunTrace` with the same columns as ZeroFPR, so the
benchmark can compare oracle counts directly.
"""

import math

import numpy as np

from .fbe import GammaFailure, check_quadratic_bound, gamma_backtrack, prox_grad_step
from .solver import Recorder, RunTrace, SolverConfig, init_gamma, stop_tolerance


def fbs_solve(p, x0, cfg=None):
    """Forward-backward splitting ``x+ = T_gamma(x)``.

    One forward-backward step per iteration. With ``adaptive_gamma`` the
    Lipschitz check reuses ``f(x+)`` from the next step, so it is free unless it
    fails.
    """
    cfg = SolverConfig() if cfg is None else cfg
    x0 = np.asarray(x0, dtype=float)
    trace = RunTrace("fbs", p_min=1.0)
    rec = Recorder(p, trace)
    mgr, adaptive = init_gamma(p, x0, cfg)
    tol = stop_tolerance(x0, cfg)
    step = prox_grad_step(p, x0, mgr.gamma)
    nxt = None
    gamma_changed = False

    for k in range(cfg.max_iters + 1):
        rn = step.res_norm
        while rn > tol:
            nxt = prox_grad_step(p, step.x_bar, mgr.gamma)
            if not adaptive or check_quadratic_bound(step, p, mgr.L, f_bar=nxt.f_x):
                break
            try:
                gamma_backtrack(mgr)
            except GammaFailure as exc:
                trace.status, trace.message = "gamma_failure", str(exc)
                break
            gamma_changed = True
            step = prox_grad_step(p, step.x, mgr.gamma)
            rn = step.res_norm
        r = rec.new(k, rn, step.fbe, step.fbe, mgr, gamma_changed)
        gamma_changed = False
        if cfg.store_iterates:
            trace.iterates.append(step.x.copy())
            trace.xbars.append(step.x_bar.copy())
        if trace.status == "gamma_failure":
            break
        if rn <= tol:
            trace.status = "converged"
            break
        if k == cfg.max_iters:
            trace.status = "max_iters"
            break
        r.tau, r.p = 1.0, 1.0
        r.phi_xbar = nxt.f_x + step.g_xbar
        r.fbe_xbar = r.fbe_next = nxt.fbe
        step = nxt

    trace.x = step.x_bar.copy()
    trace.x_last = step.x.copy()
    return trace.x, trace


def ifbs_solve(p, x0, cfg=None, inertia=0.2):
    """Inertial FBS: ``x+ = T_gamma(x + inertia (x - x_prev))``.

    Needs a known Lipschitz constant; the stopping test uses the residual at
    the extrapolated point.
    """
    cfg = SolverConfig() if cfg is None else cfg
    x0 = np.asarray(x0, dtype=float)
    mgr, adaptive = init_gamma(p, x0, cfg)
    if adaptive:
        raise ValueError("inertial FBS has no step-size rule for an unknown Lipschitz constant")
    trace = RunTrace("ifbs", p_min=1.0)
    rec = Recorder(p, trace)
    tol = stop_tolerance(x0, cfg)
    x_prev = x = x0
    for k in range(cfg.max_iters + 1):
        y = x + inertia * (x - x_prev) if inertia else x
        step = prox_grad_step(p, y, mgr.gamma)
        rn = step.res_norm
        r = rec.new(k, rn, step.fbe, step.fbe, mgr)
        if cfg.store_iterates:
            trace.iterates.append(x.copy())
            trace.xbars.append(step.x_bar.copy())
        if rn <= tol:
            trace.status = "converged"
            break
        if k == cfg.max_iters:
            trace.status = "max_iters"
            break
        r.tau = 1.0
        x_prev, x = x, step.x_bar
    trace.x = step.x_bar.copy()
    trace.x_last = x.copy()
    return trace.x, trace


def afbs_solve(p, x0, cfg=None, delta=None):
    """Monitored nonmonotone accelerated FBS.

    Extrapolates with the FISTA momentum from both the last monitored iterate
    and the last FB point. The FB point ``z`` of the extrapolated point is
    accepted when ``phi(z) <= c - delta ||z - y||^2`` against the Zhang-Hager
    average ``c`` of objective values; otherwise an FB step from the monitored
    iterate is also computed and the better of the two is kept.

    ``delta`` defaults to ``sigma / gamma^2`` so the test reads
    ``phi(z) <= c - sigma ||R_gamma(y)||^2``. The stopping test uses the
    residual at the extrapolated point.
    """
    cfg = SolverConfig() if cfg is None else cfg
    x0 = np.asarray(x0, dtype=float)
    trace = RunTrace("afbs", p_min=1.0)
    rec = Recorder(p, trace)
    mgr, adaptive = init_gamma(p, x0, cfg)
    tol = stop_tolerance(x0, cfg)
    eta = cfg.eta

    def restart(x):
        c = p.objective(x)
        return x.copy(), x.copy(), x.copy(), 0.0, 1.0, c, 1.0

    x_prev, x, z, t_prev, t, c, q = restart(x0)
    if not math.isfinite(c):
        # start outside dom g: seed the monitor with the first FB point instead
        s0 = prox_grad_step(p, x0, mgr.gamma)
        x_prev, x, z, t_prev, t, c, q = restart(s0.x_bar)
    gamma_changed = False
    step = None
    k = 0
    while True:
        y = x + (t_prev / t) * (z - x) + ((t_prev - 1.0) / t) * (x - x_prev)
        step = prox_grad_step(p, y, mgr.gamma)
        rn = step.res_norm
        phi_z = None
        if rn > tol:
            phi_z = p.smooth.value(step.x_bar) + step.g_xbar
            if adaptive and not check_quadratic_bound(step, p, mgr.L, f_bar=phi_z - step.g_xbar):
                try:
                    gamma_backtrack(mgr)
                except GammaFailure as exc:
                    trace.status, trace.message = "gamma_failure", str(exc)
                    rec.new(k, rn, step.fbe, c, mgr, True)
                    break
                gamma_changed = True
                x_prev, x, z, t_prev, t, c, q = restart(x)
                continue
        r = rec.new(k, rn, step.fbe, c, mgr, gamma_changed)
        gamma_changed = False
        if cfg.store_iterates:
            trace.iterates.append(y.copy())
            trace.xbars.append(step.x_bar.copy())
        if rn <= tol:
            trace.status = "converged"
            break
        if k == cfg.max_iters:
            trace.status = "max_iters"
            break
        z_new = step.x_bar
        dz = z_new - y
        dlt = mgr.sigma / mgr.gamma**2 if delta is None else delta
        if phi_z <= c - dlt * float(dz @ dz):
            x_new, phi_new, r.tau = z_new, phi_z, 1.0
        else:
            sx = prox_grad_step(p, x, mgr.gamma)
            v = sx.x_bar
            phi_v = p.smooth.value(v) + sx.g_xbar
            if phi_z <= phi_v:
                x_new, phi_new, r.tau = z_new, phi_z, 1.0
            else:
                x_new, phi_new, r.tau = v, phi_v, 0.0
        t_new = (math.sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0
        q_new = eta * q + 1.0
        c = (eta * q * c + phi_new) / q_new
        x_prev, x, z, t_prev, t, q = x, x_new, z_new, t, t_new, q_new
        k += 1

    trace.x = step.x_bar.copy()
    trace.x_last = step.x.copy()
    return trace.x, trace
